//! Dense complex linear algebra kernel.
//!
//! Everything downstream (states, channels, SDP coefficient matrices) is a
//! [`ComplexMatrix`]. Dimensions stay tiny (at most a few tens), so all
//! routines are dense and allocation-happy by design.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative Frobenius tolerance for Hermiticity checks.
pub const TOL_HERM: f64 = 1e-9;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Ordered tensor-factor layout of a square matrix.
///
/// Factor 0 is the slowest index, matching the Kronecker convention of
/// [`ComplexMatrix::tensor`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Domain("subsystem dims must be positive".into()));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from nested rows of (re, im) pairs; handy in tests.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|v| v.len()).unwrap_or(0);
        if rows.iter().any(|v| v.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) }
        })
    }

    /// Column vector |i> in dimension d.
    pub fn basis_ket(d: usize, i: usize) -> Self {
        let mut m = Self::zeros(d, 1);
        m[(i, 0)] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn from_vec_col(v: Vec<Complex64>) -> Self {
        let rows = v.len();
        Self { rows, cols: 1, data: v }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul: inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace: non-square");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Re Tr[A B]; the usual real inner-product pairing for Hermitian A, B.
    pub fn inner_re(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.cols, other.rows), "inner: shape mismatch");
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] * other[(j, i)]).re;
            }
        }
        acc
    }

    /// Outer product a b†, for column vectors.
    pub fn outer(a: &Self, b: &Self) -> Self {
        assert_eq!(a.cols, 1);
        assert_eq!(b.cols, 1);
        Self::from_fn(a.rows, b.rows, |i, j| a[(i, 0)] * b[(j, 0)].conj())
    }

    pub fn vec_norm(&self) -> f64 {
        assert_eq!(self.cols, 1);
        self.frobenius_norm()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square());
        self.sub(&self.dagger()).frobenius_norm() / 2.0
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let norm = self.frobenius_norm().max(1.0);
        self.hermiticity_residual() <= tol * norm
    }

    fn check_hermitian(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Dimension(format!("{}x{} matrix is not square", self.rows, self.cols)));
        }
        let norm = self.frobenius_norm().max(1.0);
        let residual = self.hermiticity_residual();
        if residual > TOL_HERM * norm {
            return Err(Error::NotHermitian { residual, tol: TOL_HERM * norm });
        }
        Ok(())
    }

    /// Hermitian part (A + A†)/2; used to scrub solver noise.
    pub fn hermitize(&self) -> Self {
        self.add(&self.dagger()).scale_re(0.5)
    }

    /// Kronecker product, first factor slow.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self[(i1, j1)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out[(i1 * other.rows + i2, j1 * other.cols + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    /// Trace over the factors of `shape` not listed in `keep`.
    ///
    /// `keep` is a set of factor indices; the output carries the kept factors
    /// in their original order.
    pub fn partial_trace(&self, shape: &SubsystemShape, keep: &[usize]) -> Result<Self> {
        if !self.is_square() || self.rows != shape.total() {
            return Err(Error::Dimension(format!(
                "partial_trace: matrix {}x{} does not match shape product {}",
                self.rows,
                self.cols,
                shape.total()
            )));
        }
        let n = shape.len();
        if keep.iter().any(|&k| k >= n) {
            return Err(Error::Dimension("partial_trace: keep index out of range".into()));
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let traced: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();
        let dims = shape.dims();
        let kept_dim: usize = kept.iter().map(|&i| dims[i]).product();
        let traced_dim: usize = traced.iter().map(|&i| dims[i]).product();

        // strides of each factor in the full index
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let expand = |multi: usize, factors: &[usize]| -> usize {
            let mut rem = multi;
            let mut idx = 0;
            for &f in factors.iter().rev() {
                let d = dims[f];
                idx += (rem % d) * strides[f];
                rem /= d;
            }
            idx
        };

        let mut out = Self::zeros(kept_dim, kept_dim);
        for a in 0..kept_dim {
            let ia = expand(a, &kept);
            for b in 0..kept_dim {
                let ib = expand(b, &kept);
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..traced_dim {
                    let it = expand(t, &traced);
                    acc += self[(ia + it, ib + it)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(out)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
    ///
    /// Returns eigenvalues sorted descending (stable tie-break on the original
    /// diagonal position) and the matching unitary of column eigenvectors.
    pub fn eig_hermitian(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        self.check_hermitian()?;
        let n = self.rows;
        let mut a = self.hermitize();
        let mut v = Self::identity(n);
        let scale = a.frobenius_norm().max(1e-300);

        for _sweep in 0..120 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let mag = apq.norm();
                    if mag <= 1e-18 * scale {
                        continue;
                    }
                    let phase = apq / mag;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let theta = 0.5 * (2.0 * mag).atan2(app - aqq);
                    let (s, c) = theta.sin_cos();
                    // G restricted to (p,q): [[c, -s*phase],[s*phase.conj(), c]]
                    let gpp = Complex64::new(c, 0.0);
                    let gpq = -phase * s;
                    let gqp = phase.conj() * s;
                    let gqq = Complex64::new(c, 0.0);
                    // A <- G† A G
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * gpp + akq * gqp;
                        a[(k, q)] = akp * gpq + akq * gqq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                    }
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * gpp + vkq * gqp;
                        v[(k, q)] = vkp * gpq + vkq * gqq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let evals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| evals[j].partial_cmp(&evals[i]).unwrap().then(i.cmp(&j)));
        let sorted: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
        let vecs = Self::from_fn(n, n, |i, j| v[(i, order[j])]);
        Ok((sorted, vecs))
    }

    /// Sum of absolute eigenvalues; defined here for Hermitian input only.
    pub fn trace_norm(&self) -> Result<f64> {
        let (evals, _) = self.eig_hermitian()?;
        Ok(evals.iter().map(|l| l.abs()).sum())
    }

    /// Minimum eigenvalue of a Hermitian matrix.
    pub fn min_eig(&self) -> Result<f64> {
        let (evals, _) = self.eig_hermitian()?;
        Ok(*evals.last().unwrap())
    }

    /// Real symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix.
    ///
    /// PSD iff the input is PSD; every eigenvalue appears twice.
    pub fn real_embedding(&self) -> Result<ComplexMatrix> {
        self.check_hermitian()?;
        let n = self.rows;
        Ok(Self::from_fn(2 * n, 2 * n, |i, j| {
            let (bi, ii) = (i / n, i % n);
            let (bj, jj) = (j / n, j % n);
            let z = self[(ii, jj)];
            let val = match (bi, bj) {
                (0, 0) | (1, 1) => z.re,
                (0, 1) => -z.im,
                (1, 0) => z.im,
                _ => unreachable!(),
            };
            Complex64::new(val, 0.0)
        }))
    }

    /// Real symmetric embedding blocks as plain f64 without the Hermiticity
    /// gate; used by the SDP lowering where inputs are exact by construction.
    pub fn real_embedding_raw(&self) -> Vec<f64> {
        let n = self.rows;
        let mut out = vec![0.0; 4 * n * n];
        for i in 0..2 * n {
            for j in 0..2 * n {
                let z = self[(i % n, j % n)];
                out[i * 2 * n + j] = match (i / n, j / n) {
                    (0, 0) | (1, 1) => z.re,
                    (0, 1) => -z.im,
                    _ => z.im,
                };
            }
        }
        out
    }

    /// Solves self * x = rhs for a small square system by Gaussian elimination
    /// with partial pivoting. Used to invert the Schmidt operator A_w.
    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !self.is_square() || self.rows != rhs.rows {
            return Err(Error::Dimension("solve: shape mismatch".into()));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let (piv, mag) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            if mag < 1e-14 * self.frobenius_norm().max(1.0) {
                return Err(Error::Singular(format!("pivot {mag:.3e} in column {col}")));
            }
            if piv != col {
                for j in 0..n {
                    let tmp = a[(col, j)];
                    a[(col, j)] = a[(piv, j)];
                    a[(piv, j)] = tmp;
                }
                for j in 0..m {
                    let tmp = b[(col, j)];
                    b[(col, j)] = b[(piv, j)];
                    b[(piv, j)] = tmp;
                }
            }
            let d = a[(col, col)];
            for r in (col + 1)..n {
                let f = a[(r, col)] / d;
                if f.norm_sqr() == 0.0 {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)];
                    a[(r, j)] -= f * v;
                }
                for j in 0..m {
                    let v = b[(col, j)];
                    b[(r, j)] -= f * v;
                }
            }
        }
        let mut x = ComplexMatrix::zeros(n, m);
        for col in 0..m {
            for r in (0..n).rev() {
                let mut acc = b[(r, col)];
                for j in (r + 1)..n {
                    acc -= a[(r, j)] * x[(j, col)];
                }
                x[(r, col)] = acc / a[(r, r)];
            }
        }
        Ok(x)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Basis of the real vector space of d x d Hermitian matrices: the d
/// diagonal units, then (E_jk + E_kj) and i(E_jk - E_kj) per off-diagonal
/// pair. Pairing a matrix equality against every element makes it a set of
/// scalar constraints.
pub fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(j, j)] = Complex64::new(1.0, 0.0);
        out.push(m);
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut re = ComplexMatrix::zeros(d, d);
            re[(j, k)] = Complex64::new(1.0, 0.0);
            re[(k, j)] = Complex64::new(1.0, 0.0);
            out.push(re);
            let mut im = ComplexMatrix::zeros(d, d);
            im[(j, k)] = Complex64::new(0.0, 1.0);
            im[(k, j)] = Complex64::new(0.0, -1.0);
            out.push(im);
        }
    }
    out
}

/// Standard Pauli matrices, used throughout the tests.
pub mod pauli {
    use super::ComplexMatrix;
    use num_complex::Complex64;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| {
            if i != j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        })
    }

    pub fn y() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(0.0, -1.0);
        m[(1, 0)] = Complex64::new(0.0, 1.0);
        m
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[1.0, -1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_hermitian, random_unitary};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tensor_identity_and_diag() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.tensor(&i2), ComplexMatrix::identity(4));
        let a = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        let b = ComplexMatrix::from_real_diag(&[3.0, 4.0]);
        assert_eq!(a.tensor(&b), ComplexMatrix::from_real_diag(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn tensor_block_convention() {
        // |0><0| (x) sigma_x puts sigma_x in the top-left block
        let p0 = ComplexMatrix::outer(&ComplexMatrix::basis_ket(2, 0), &ComplexMatrix::basis_ket(2, 0));
        let t = p0.tensor(&pauli::x());
        assert_eq!(t[(0, 1)], c(1.0, 0.0));
        assert_eq!(t[(1, 0)], c(1.0, 0.0));
        assert_eq!(t[(2, 3)], c(0.0, 0.0));
    }

    #[test]
    fn tensor_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 3);
        let cm = random_hermitian(&mut rng, 2);
        let lhs = a.tensor(&b).tensor(&cm);
        let rhs = a.tensor(&b.tensor(&cm));
        assert!(lhs.sub(&rhs).max_abs() == 0.0 || lhs.sub(&rhs).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_hermitian(&mut rng, 2);
        let sigma = random_hermitian(&mut rng, 3);
        let shape = SubsystemShape::new(vec![2, 3]).unwrap();
        let pt = rho.tensor(&sigma).partial_trace(&shape, &[0]).unwrap();
        let expect = rho.scale(sigma.trace());
        assert!(pt.sub(&expect).max_abs() < 1e-12);
    }

    #[test]
    fn partial_trace_maximally_entangled_marginal() {
        let mut phi = ComplexMatrix::zeros(4, 1);
        phi[(0, 0)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        phi[(3, 0)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = ComplexMatrix::outer(&phi, &phi);
        let shape = SubsystemShape::new(vec![2, 2]).unwrap();
        let marg = rho.partial_trace(&shape, &[1]).unwrap();
        assert!(marg.sub(&ComplexMatrix::identity(2).scale_re(0.5)).max_abs() < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dims in [vec![2, 2], vec![2, 3], vec![4, 2, 2]] {
            let shape = SubsystemShape::new(dims).unwrap();
            let m = random_hermitian(&mut rng, shape.total());
            for keep in [vec![0], vec![1], vec![0, 1]] {
                let pt = m.partial_trace(&shape, &keep).unwrap();
                assert_abs_diff_eq!(pt.trace().re, m.trace().re, epsilon = 1e-12);
                assert_abs_diff_eq!(pt.trace().im, m.trace().im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_shape_mismatch() {
        let m = ComplexMatrix::identity(3);
        let shape = SubsystemShape::new(vec![2, 2]).unwrap();
        assert!(m.partial_trace(&shape, &[0]).is_err());
    }

    #[test]
    fn eig_identity_and_pauli_z() {
        let (l, _) = ComplexMatrix::identity(2).eig_hermitian().unwrap();
        assert_eq!(l, vec![1.0, 1.0]);
        let (l, v) = pauli::z().eig_hermitian().unwrap();
        assert_abs_diff_eq!(l[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l[1], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v[(0, 0)].norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v[(1, 1)].norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 3, 5, 8, 16] {
            let m = random_hermitian(&mut rng, dim);
            let (l, v) = m.eig_hermitian().unwrap();
            let recon = v
                .matmul(&ComplexMatrix::from_real_diag(&l))
                .matmul(&v.dagger());
            assert!(recon.sub(&m).frobenius_norm() <= 1e-10 * m.frobenius_norm().max(1.0));
            // unitarity of V
            let vv = v.dagger().matmul(&v);
            assert!(vv.sub(&ComplexMatrix::identity(dim)).max_abs() < 1e-10);
            // descending order
            for w in l.windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(m.eig_hermitian(), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn trace_norm_basics() {
        assert_abs_diff_eq!(pauli::z().trace_norm().unwrap(), 2.0, epsilon = 1e-12);
        let rho = ComplexMatrix::from_real_diag(&[0.25, 0.75]);
        assert_abs_diff_eq!(rho.trace_norm().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_norm_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in [2, 4] {
            let m = random_hermitian(&mut rng, dim);
            let u = random_unitary(&mut rng, dim);
            let rotated = u.matmul(&m).matmul(&u.dagger()).hermitize();
            assert_abs_diff_eq!(
                m.trace_norm().unwrap(),
                rotated.trace_norm().unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn real_embedding_identity_and_pauli_y() {
        let e = ComplexMatrix::identity(2).real_embedding().unwrap();
        assert!(e.sub(&ComplexMatrix::identity(4)).max_abs() < 1e-15);
        let ey = pauli::y().real_embedding().unwrap();
        let (l, _) = ey.eig_hermitian().unwrap();
        assert_abs_diff_eq!(l[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[2], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[3], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn real_embedding_doubles_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let h = random_hermitian(&mut rng, 3);
            let (lh, _) = h.eig_hermitian().unwrap();
            let (le, _) = h.real_embedding().unwrap().eig_hermitian().unwrap();
            for (i, l) in lh.iter().enumerate() {
                assert_abs_diff_eq!(le[2 * i], *l, epsilon = 1e-10);
                assert_abs_diff_eq!(le[2 * i + 1], *l, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn psd_iff_embedding_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let h = random_hermitian(&mut rng, 3);
            let psd = h.min_eig().unwrap() >= 0.0;
            let epsd = h.real_embedding().unwrap().min_eig().unwrap() >= -1e-12;
            assert_eq!(psd, epsd || h.min_eig().unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn solve_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = random_unitary(&mut rng, 3);
        let x = random_hermitian(&mut rng, 3);
        let b = a.matmul(&x);
        let got = a.solve(&b).unwrap();
        assert!(got.sub(&x).max_abs() < 1e-12);
    }
}
