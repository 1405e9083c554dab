//! Seeded random quantum objects: Haar-ish unitaries, random Hermitian
//! matrices, states and POVMs. Used for seesaw restarts and property tests.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::ComplexMatrix;

fn gaussian_c(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Ginibre matrix with iid standard complex Gaussian entries.
pub fn random_ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_c(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    random_ginibre(rng, dim, dim).hermitize()
}

/// Haar-distributed unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = random_ginibre(rng, dim, dim);
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| (0..dim).map(|i| g[(i, j)]).collect())
        .collect();
    for j in 0..dim {
        for k in 0..j {
            let proj: Complex64 = (0..dim).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..dim {
                let v = cols[k][i];
                cols[j][i] -= proj * v;
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..dim {
            cols[j][i] /= norm;
        }
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Haar-random unit column vector.
pub fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let v = random_ginibre(rng, dim, 1);
    let n = v.vec_norm();
    v.scale_re(1.0 / n)
}

/// Random full-rank density matrix (normalized Wishart).
pub fn random_density(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = random_ginibre(rng, dim, dim);
    let w = g.matmul(&g.dagger());
    let t = w.trace().re;
    w.scale_re(1.0 / t).hermitize()
}

/// Random binary projective POVM (P, 1-P) from a Haar unitary.
pub fn random_binary_povm(rng: &mut impl Rng, dim: usize, rank: usize) -> (ComplexMatrix, ComplexMatrix) {
    let u = random_unitary(rng, dim);
    let mut p = ComplexMatrix::zeros(dim, dim);
    for k in 0..rank.min(dim) {
        let col = ComplexMatrix::from_fn(dim, 1, |i, _| u[(i, k)]);
        p = p.add(&ComplexMatrix::outer(&col, &col));
    }
    let q = ComplexMatrix::identity(dim).sub(&p);
    (p.hermitize(), q.hermitize())
}

/// Haar-random channel with the given environment dimension, as Kraus
/// operators (Stinespring isometry from a Haar unitary's first columns).
pub fn random_channel(
    rng: &mut impl Rng,
    d_in: usize,
    d_out: usize,
    d_env: usize,
) -> Vec<ComplexMatrix> {
    let u = random_unitary(rng, d_out * d_env);
    (0..d_env)
        .map(|e| ComplexMatrix::from_fn(d_out, d_in, |s, j| u[(s * d_env + e, j)]))
        .collect()
}
