//! Quantum objects on top of the linear-algebra kernel: density matrices,
//! POVMs, channels in dual Kraus/Choi form, and Helstrom discrimination.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, SubsystemShape};

/// PSD slack on the minimum eigenvalue.
pub const TOL_PSD: f64 = 1e-9;
/// Trace / normalization slack.
pub const TOL_TRACE: f64 = 1e-9;
/// Choi eigenvalues below this are treated as zero during Kraus extraction.
pub const RANK_TOL: f64 = 1e-8;

/// Density matrix with an explicit tensor-factor layout.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    shape: SubsystemShape,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix, shape: SubsystemShape) -> Result<Self> {
        if !mat.is_square() || mat.rows() != shape.total() {
            return Err(Error::Dimension(format!(
                "density matrix {}x{} vs shape product {}",
                mat.rows(),
                mat.cols(),
                shape.total()
            )));
        }
        if !mat.is_hermitian(crate::linalg::TOL_HERM) {
            return Err(Error::NotHermitian { residual: mat.hermiticity_residual(), tol: crate::linalg::TOL_HERM });
        }
        let mat = mat.hermitize();
        let min = mat.min_eig()?;
        if min < -TOL_PSD {
            return Err(Error::Contract(format!("density matrix not PSD: min eigenvalue {min:.3e}")));
        }
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > TOL_TRACE {
            return Err(Error::Contract(format!("density matrix trace {tr} != 1")));
        }
        Ok(Self { mat, shape })
    }

    pub fn from_pure(ket: &ComplexMatrix, shape: SubsystemShape) -> Result<Self> {
        let norm = ket.vec_norm();
        if (norm - 1.0).abs() > TOL_TRACE {
            return Err(Error::Contract(format!("state vector norm {norm} != 1")));
        }
        Self::new(ComplexMatrix::outer(ket, ket), shape)
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<ComplexMatrix> {
        self.mat.partial_trace(&self.shape, keep)
    }
}

/// Positive operator-valued measure.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
    shape: SubsystemShape,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>, shape: SubsystemShape) -> Result<Self> {
        let d = shape.total();
        let mut sum = ComplexMatrix::zeros(d, d);
        for e in &elements {
            if !e.is_square() || e.rows() != d {
                return Err(Error::Dimension("POVM element dimension mismatch".into()));
            }
            if e.hermitize().min_eig()? < -TOL_PSD {
                return Err(Error::Contract("POVM element not PSD".into()));
            }
            sum = sum.add(e);
        }
        if sum.sub(&ComplexMatrix::identity(d)).max_abs() > 1e-8 {
            return Err(Error::Contract("POVM elements do not sum to identity".into()));
        }
        Ok(Self { elements: elements.into_iter().map(|e| e.hermitize()).collect(), shape })
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }
}

/// Ground-state overlap constraint: <g| rho |g> >= 1 - omega.
#[derive(Debug, Clone)]
pub struct EnergyConstraint {
    ground: ComplexMatrix,
    omega: f64,
}

impl EnergyConstraint {
    pub fn new(ground: ComplexMatrix, omega: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&omega) {
            return Err(Error::Domain(format!("omega {omega} outside [0, 1/2)")));
        }
        let norm = ground.vec_norm();
        if (norm - 1.0).abs() > TOL_TRACE {
            return Err(Error::Contract(format!("ground state norm {norm} != 1")));
        }
        Ok(Self { ground, omega })
    }

    /// |0> ground state in dimension d.
    pub fn ground_zero(d: usize, omega: f64) -> Result<Self> {
        Self::new(ComplexMatrix::basis_ket(d, 0), omega)
    }

    pub fn ground(&self) -> &ComplexMatrix {
        &self.ground
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.ground, &self.ground)
    }
}

/// CPTP map stored dually as a Kraus list and a cached normalized Choi matrix
/// J = (Lambda (x) 1)(|phi+><phi+|).
#[derive(Debug, Clone)]
pub struct Channel {
    kraus: Vec<ComplexMatrix>,
    choi: ComplexMatrix,
    d_in: usize,
    d_out: usize,
}

impl Channel {
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::Domain("empty Kraus list".into()))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if kraus.iter().any(|k| k.rows() != d_out || k.cols() != d_in) {
            return Err(Error::Dimension("inconsistent Kraus shapes".into()));
        }
        let mut tp = ComplexMatrix::zeros(d_in, d_in);
        for k in &kraus {
            tp = tp.add(&k.dagger().matmul(k));
        }
        if tp.sub(&ComplexMatrix::identity(d_in)).max_abs() > TOL_TRACE {
            return Err(Error::Contract(format!(
                "not trace preserving: ||sum K'K - 1|| = {:.3e}",
                tp.sub(&ComplexMatrix::identity(d_in)).max_abs()
            )));
        }
        let choi = choi_from_kraus(&kraus);
        Ok(Self { kraus, choi, d_in, d_out })
    }

    /// Reconstructs Kraus operators from a normalized Choi matrix.
    pub fn from_choi(choi: ComplexMatrix, d_in: usize, d_out: usize) -> Result<Self> {
        let kraus = kraus_from_choi(&choi, d_in, d_out)?;
        Self::from_kraus(kraus)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(vec![ComplexMatrix::identity(d)]).unwrap()
    }

    /// Unitary conjugation channel.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let d = u.rows();
        if u.dagger().matmul(&u).sub(&ComplexMatrix::identity(d)).max_abs() > 1e-9 {
            return Err(Error::Contract("matrix is not unitary".into()));
        }
        Self::from_kraus(vec![u])
    }

    /// Completely depolarizing channel onto the maximally mixed state.
    pub fn depolarizing(d: usize) -> Self {
        let mut kraus = Vec::with_capacity(d * d);
        let s = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            for j in 0..d {
                let mut k = ComplexMatrix::zeros(d, d);
                k[(i, j)] = Complex64::new(s, 0.0);
                kraus.push(k);
            }
        }
        Self::from_kraus(kraus).unwrap()
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Applies the map to a raw matrix of dimension d_in.
    pub fn apply_mat(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out = out.add(&k.matmul(m).matmul(&k.dagger()));
        }
        out
    }

    /// Adjoint map (Heisenberg picture).
    pub fn apply_adjoint_mat(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            out = out.add(&k.dagger().matmul(m).matmul(k));
        }
        out
    }

    /// Applies the channel to one tensor factor of a density matrix.
    pub fn apply(&self, rho: &DensityMatrix, acting_on: usize) -> Result<DensityMatrix> {
        let dims = rho.shape().dims();
        if acting_on >= dims.len() {
            return Err(Error::Dimension("acting_on out of range".into()));
        }
        if dims[acting_on] != self.d_in {
            return Err(Error::Dimension(format!(
                "channel d_in {} vs subsystem dim {}",
                self.d_in, dims[acting_on]
            )));
        }
        let before: usize = dims[..acting_on].iter().product();
        let after: usize = dims[acting_on + 1..].iter().product();
        let mut out = ComplexMatrix::zeros(before * self.d_out * after, before * self.d_out * after);
        for k in &self.kraus {
            let full = ComplexMatrix::identity(before).tensor(k).tensor(&ComplexMatrix::identity(after));
            out = out.add(&full.matmul(rho.mat()).matmul(&full.dagger()));
        }
        let mut new_dims = dims.to_vec();
        new_dims[acting_on] = self.d_out;
        DensityMatrix::new(out.hermitize(), SubsystemShape::new(new_dims)?)
    }
}

/// Normalized Choi matrix of a Kraus list: (Lambda (x) 1)(|phi+><phi+|),
/// output factor slow.
pub fn choi_from_kraus(kraus: &[ComplexMatrix]) -> ComplexMatrix {
    let d_in = kraus[0].cols();
    let d_out = kraus[0].rows();
    let mut j = ComplexMatrix::zeros(d_out * d_in, d_out * d_in);
    for k in kraus {
        // (K (x) 1)|phi+> has component (a, b) = K[a,b]/sqrt(d_in)
        let v = ComplexMatrix::from_fn(d_out * d_in, 1, |i, _| {
            k[(i / d_in, i % d_in)] / (d_in as f64).sqrt()
        });
        j = j.add(&ComplexMatrix::outer(&v, &v));
    }
    j.hermitize()
}

/// Inverse of [`choi_from_kraus`]: spectral decomposition of the Choi matrix,
/// one Kraus operator per eigenvalue above [`RANK_TOL`].
pub fn kraus_from_choi(choi: &ComplexMatrix, d_in: usize, d_out: usize) -> Result<Vec<ComplexMatrix>> {
    if choi.rows() != d_in * d_out {
        return Err(Error::Dimension("Choi dimension mismatch".into()));
    }
    let min = choi.min_eig()?;
    if min < -1e-7 {
        return Err(Error::Contract(format!("Choi not PSD: min eigenvalue {min:.3e}")));
    }
    let tp = choi
        .partial_trace(&SubsystemShape::new(vec![d_out, d_in])?, &[1])?
        .sub(&ComplexMatrix::identity(d_in).scale_re(1.0 / d_in as f64));
    if tp.max_abs() > 1e-7 {
        return Err(Error::Contract(format!("Choi not TP: residual {:.3e}", tp.max_abs())));
    }
    let (evals, evecs) = choi.eig_hermitian()?;
    let mut kraus = Vec::new();
    for (idx, &l) in evals.iter().enumerate() {
        if l <= RANK_TOL {
            continue;
        }
        let s = (l * d_in as f64).sqrt();
        kraus.push(ComplexMatrix::from_fn(d_out, d_in, |a, b| {
            evecs[(a * d_in + b, idx)] * s
        }));
    }
    if kraus.is_empty() {
        return Err(Error::Contract("Choi has no eigenvalue above rank_tol".into()));
    }
    Ok(kraus)
}

/// Rank-1 projector onto the d-dimensional maximally entangled state.
pub fn maximally_entangled(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::Domain("maximally_entangled needs d >= 2".into()));
    }
    let mut ket = ComplexMatrix::zeros(d * d, 1);
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        ket[(i * d + i, 0)] = amp;
    }
    DensityMatrix::from_pure(&ket, SubsystemShape::new(vec![d, d])?)
}

/// Optimal binary discrimination of rho0 vs rho1.
///
/// Returns trace_norm(rho0 - rho1) together with the sign-projector POVM that
/// attains it; zero eigenvalues of the difference are assigned to the plus
/// projector.
pub fn helstrom(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<(f64, Povm)> {
    if rho0.shape() != rho1.shape() {
        return Err(Error::Dimension("helstrom: shape mismatch".into()));
    }
    let diff = rho0.mat().sub(rho1.mat()).hermitize();
    let (p_plus, value) = sign_projector(&diff)?;
    let p_minus = ComplexMatrix::identity(diff.rows()).sub(&p_plus);
    Ok((value, Povm::new(vec![p_plus, p_minus], rho0.shape().clone())?))
}

/// Projector onto the nonnegative eigenspace of a Hermitian matrix, plus the
/// trace norm. Ties at zero go to the plus side.
pub fn sign_projector(h: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    let (evals, evecs) = h.eig_hermitian()?;
    let n = h.rows();
    let mut p = ComplexMatrix::zeros(n, n);
    let mut value = 0.0;
    for (idx, &l) in evals.iter().enumerate() {
        value += l.abs();
        if l >= 0.0 {
            let col = ComplexMatrix::from_fn(n, 1, |i, _| evecs[(i, idx)]);
            p = p.add(&ComplexMatrix::outer(&col, &col));
        }
    }
    Ok((p.hermitize(), value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_density, random_ginibre, random_unit_vector, random_unitary};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qubit_shape() -> SubsystemShape {
        SubsystemShape::new(vec![2]).unwrap()
    }

    #[test]
    fn maximally_entangled_entries_and_marginals() {
        let phi = maximally_entangled(2).unwrap();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert_abs_diff_eq!(phi.mat()[(i, j)].re, 0.5, epsilon = 1e-14);
        }
        for keep in [0usize, 1] {
            let m = phi.partial_trace(&[keep]).unwrap();
            assert!(m.sub(&ComplexMatrix::identity(2).scale_re(0.5)).max_abs() < 1e-14);
        }
        assert!(maximally_entangled(1).is_err());
    }

    #[test]
    fn identity_channel_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = DensityMatrix::new(random_density(&mut rng, 2), qubit_shape()).unwrap();
        let out = Channel::identity(2).apply(&rho, 0).unwrap();
        assert!(out.mat().sub(rho.mat()).max_abs() < 1e-12);
    }

    #[test]
    fn depolarizing_channel_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let shape = SubsystemShape::new(vec![2, 3]).unwrap();
        let rho = DensityMatrix::new(random_density(&mut rng, 6), shape).unwrap();
        let out = Channel::depolarizing(2).apply(&rho, 0).unwrap();
        let expect = ComplexMatrix::identity(2)
            .scale_re(0.5)
            .tensor(&rho.partial_trace(&[1]).unwrap());
        assert!(out.mat().sub(&expect).max_abs() < 1e-10);
    }

    #[test]
    fn choi_identity_and_round_trip() {
        let id = Channel::identity(2);
        let phi = maximally_entangled(2).unwrap();
        assert!(id.choi().sub(phi.mat()).max_abs() < 1e-12);
        let kraus = kraus_from_choi(id.choi(), 2, 2).unwrap();
        assert_eq!(kraus.len(), 1);
        let k = &kraus[0];
        // proportional to identity with unit |scale|
        assert!(k[(0, 1)].norm() < 1e-9 && k[(1, 0)].norm() < 1e-9);
        assert_abs_diff_eq!(k[(0, 0)].norm(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn random_channel_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            // random 2-Kraus channel from a Stinespring isometry
            let g = random_ginibre(&mut rng, 4, 2);
            // orthonormalize columns -> isometry
            let mut v: Vec<Vec<num_complex::Complex64>> =
                (0..2).map(|j| (0..4).map(|i| g[(i, j)]).collect()).collect();
            for j in 0..2 {
                for k in 0..j {
                    let proj: num_complex::Complex64 =
                        (0..4).map(|i| v[k][i].conj() * v[j][i]).sum();
                    for i in 0..4 {
                        let t = v[k][i];
                        v[j][i] -= proj * t;
                    }
                }
                let n: f64 = v[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                for i in 0..4 {
                    v[j][i] /= n;
                }
            }
            let k0 = ComplexMatrix::from_fn(2, 2, |a, b| v[b][a]);
            let k1 = ComplexMatrix::from_fn(2, 2, |a, b| v[b][2 + a]);
            let ch = Channel::from_kraus(vec![k0, k1]).unwrap();
            let rt = Channel::from_choi(ch.choi().clone(), 2, 2).unwrap();
            assert!(rt.choi().sub(ch.choi()).max_abs() < 1e-9);
            // both representations act identically
            let rho = random_density(&mut rng, 2);
            assert!(ch.apply_mat(&rho).sub(&rt.apply_mat(&rho)).max_abs() < 1e-9);
        }
    }

    #[test]
    fn kraus_from_choi_rejects_bad_input() {
        let not_tp = ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0, 0.0]);
        assert!(kraus_from_choi(&not_tp, 2, 2).is_err());
        let mut not_psd = ComplexMatrix::from_real_diag(&[0.5, 0.5, 0.25, -0.25]);
        not_psd[(0, 0)] = num_complex::Complex64::new(0.5, 0.0);
        assert!(kraus_from_choi(&not_psd, 2, 2).is_err());
    }

    #[test]
    fn helstrom_equal_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rho = DensityMatrix::new(random_density(&mut rng, 2), qubit_shape()).unwrap();
        let (v, _) = helstrom(&rho, &rho).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);

        let p0 = DensityMatrix::from_pure(&ComplexMatrix::basis_ket(2, 0), qubit_shape()).unwrap();
        let p1 = DensityMatrix::from_pure(&ComplexMatrix::basis_ket(2, 1), qubit_shape()).unwrap();
        let (v, povm) = helstrom(&p0, &p1).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
        // measurement attains the value
        let attained = povm.elements()[0].sub(&povm.elements()[1]).inner_re(&p0.mat().sub(p1.mat()));
        assert_abs_diff_eq!(attained, v, epsilon = 1e-10);
    }

    #[test]
    fn helstrom_symmetry_and_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let a = DensityMatrix::new(random_density(&mut rng, 4), SubsystemShape::new(vec![4]).unwrap()).unwrap();
            let b = DensityMatrix::new(random_density(&mut rng, 4), SubsystemShape::new(vec![4]).unwrap()).unwrap();
            let (vab, _) = helstrom(&a, &b).unwrap();
            let (vba, _) = helstrom(&b, &a).unwrap();
            assert_abs_diff_eq!(vab, vba, epsilon = 1e-10);
            let u = random_unitary(&mut rng, 4);
            let au = DensityMatrix::new(u.matmul(a.mat()).matmul(&u.dagger()).hermitize(), a.shape().clone()).unwrap();
            let bu = DensityMatrix::new(u.matmul(b.mat()).matmul(&u.dagger()).hermitize(), b.shape().clone()).unwrap();
            let (vu, _) = helstrom(&au, &bu).unwrap();
            assert_abs_diff_eq!(vab, vu, epsilon = 1e-10);
        }
    }

    // Lemma-style sampling bound: states connected by a local unitary with
    // common ground-state overlap p obey |<psi1|psi2>| >= 2p - 1.
    #[test]
    fn overlap_lemma_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let mut checked = 0usize;
        while checked < 1000 {
            let dims = [(2usize, 2usize), (2, 3), (2, 4)][checked % 3];
            let (ds, dm) = dims;
            let psi1 = random_unit_vector(&mut rng, ds * dm);
            let u = random_unitary(&mut rng, ds);
            let psi2 = u.tensor(&ComplexMatrix::identity(dm)).matmul(&psi1);
            let g = random_unit_vector(&mut rng, ds);
            let proj = ComplexMatrix::outer(&g, &g).tensor(&ComplexMatrix::identity(dm));
            let p1 = psi1.dagger().matmul(&proj).matmul(&psi1)[(0, 0)].re;
            let p2 = psi2.dagger().matmul(&proj).matmul(&psi2)[(0, 0)].re;
            let p = p1.min(p2);
            let overlap = psi1.dagger().matmul(&psi2)[(0, 0)].norm();
            assert!(
                overlap >= 2.0 * p - 1.0 - 1e-9,
                "overlap {overlap} < 2p-1 = {}",
                2.0 * p - 1.0
            );
            checked += 1;
        }
    }
}
