//! Channel-discrimination norms and entanglement-advantage ratios: the
//! diamond-norm SDP, an energy-constrained diamond lower bound from a fixed
//! entangled probe, a moment-relaxation (Lasserre) upper bound on the
//! energy-constrained induced trace norm, and the advantage-ratio bounds
//! combining them.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::analytic::FamilyPoint;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_basis, ComplexMatrix, SubsystemShape};
use crate::quantum::{Channel, EnergyConstraint};
use crate::sdp::{
    ConicProblem, SdpProblem, SdpStatus, Sense, SolverSettings, VarKind,
};
use crate::seesaw::{induced_trace_norm_lower, SeesawSettings};

/// Reference value (1/2 + 1/sqrt(2)): the universal cap on the entanglement
/// advantage when discriminating a sufficiently-far channel from the identity.
pub const PADV_CAP: f64 = 0.5 + std::f64::consts::FRAC_1_SQRT_2;

fn solver_settings() -> SolverSettings {
    SolverSettings::default()
}

// ---------------------------------------------------------------------------
// Diamond norm SDP.
// ---------------------------------------------------------------------------

/// Diamond norm of a Hermitian-preserving, trace-annihilating map (typically
/// a difference of channels) given its normalized Choi matrix on a
/// `d`-dimensional system:
/// maximize Tr[Y X] over -d(1 x sigma) <= Y <= d(1 x sigma) with sigma a state.
pub fn diamond_norm(delta_choi: &ComplexMatrix, d: usize) -> Result<f64> {
    let dd = d * d;
    if delta_choi.rows() != dd || delta_choi.cols() != dd {
        return Err(Error::Dimension(format!(
            "Choi matrix must be {dd} x {dd} for a dimension-{d} channel"
        )));
    }
    if delta_choi.sub(&delta_choi.dagger()).max_abs() > 1e-9 {
        return Err(Error::Domain("Choi matrix must be Hermitian".into()));
    }
    let mut p = SdpProblem::new(Sense::Maximize);
    let y = p.add_var("y", dd, VarKind::HermitianFree);
    let sig = p.add_var("sigma", d, VarKind::HermitianPsd);
    // PSD slacks encoding the operator interval -d(1 x sigma) <= Y <= d(1 x sigma)
    let up = p.add_var("slack_up", dd, VarKind::HermitianPsd);
    let lo = p.add_var("slack_lo", dd, VarKind::HermitianPsd);
    p.add_obj_term(y, delta_choi.clone())?;
    p.add_eq(vec![(sig, ComplexMatrix::identity(d))], 1.0)?;
    let shape = SubsystemShape::new(vec![d, d])?;
    for h in hermitian_basis(dd) {
        // Tr[h (1 x sigma)] = Tr[(Tr_out h) sigma]; the output factor is slow
        let pt = h.partial_trace(&shape, &[1])?;
        p.add_eq(
            vec![(up, h.clone()), (y, h.clone()), (sig, pt.scale_re(-(d as f64)))],
            0.0,
        )?;
        p.add_eq(
            vec![(lo, h.clone()), (y, h.scale_re(-1.0)), (sig, pt.scale_re(-(d as f64)))],
            0.0,
        )?;
    }
    let sol = p.solve(&solver_settings())?;
    match sol.status {
        SdpStatus::Optimal => Ok(sol.value.max(0.0)),
        other => Err(Error::Solver(format!("diamond norm SDP ended with status {other:?}"))),
    }
}

/// Diamond norm of (identity - channel) for a square channel.
pub fn diamond_norm_vs_identity(ch: &Channel) -> Result<f64> {
    if ch.d_in() != ch.d_out() {
        return Err(Error::Dimension("channel must be square to compare with identity".into()));
    }
    let d = ch.d_in();
    let delta = ch.choi().sub(&Channel::identity(d).choi());
    diamond_norm(&delta, d)
}

/// Lower bound on the energy-constrained diamond norm of (family channel -
/// identity): the trace distance of the family's fixed entangled probe before
/// and after the channel. Both endpoints satisfy the energy bound by
/// construction, so no optimization over probes is performed.
pub fn diamond_norm_ec_lower(fp: &FamilyPoint) -> Result<f64> {
    fp.psi0().mat().sub(fp.rho1().mat()).trace_norm()
}

// ---------------------------------------------------------------------------
// Real polynomials in the seven qubit parameters.
// ---------------------------------------------------------------------------

/// Number of real parameters: (rho00, rho01R, rho01I, M00, M11, M01R, M01I).
pub const N_VARS: usize = 7;

type Mono = [u8; N_VARS];

/// Sparse real polynomial in the seven parameters, keyed by exponent vector.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<Mono, f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::default();
        p.add_term([0; N_VARS], c);
        p
    }

    pub fn var(i: usize) -> Self {
        assert!(i < N_VARS);
        let mut mono = [0u8; N_VARS];
        mono[i] = 1;
        let mut p = Self::default();
        p.add_term(mono, 1.0);
        p
    }

    fn add_term(&mut self, mono: Mono, c: f64) {
        let v = self.terms.entry(mono).or_insert(0.0);
        *v += c;
        if v.abs() < 1e-15 {
            self.terms.remove(&mono);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::default();
        for (m, c) in &self.terms {
            out.add_term(*m, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = *ma;
                for i in 0..N_VARS {
                    m[i] += mb[i];
                }
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&e| e as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64; N_VARS]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                c * m
                    .iter()
                    .zip(x.iter())
                    .map(|(&e, &v)| v.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

/// Complex polynomial with real and imaginary parts.
#[derive(Debug, Clone, Default)]
struct CPoly {
    re: Poly,
    im: Poly,
}

impl CPoly {
    fn from_poly(re: Poly) -> Self {
        Self { re, im: Poly::zero() }
    }

    fn add(&self, other: &Self) -> Self {
        Self { re: self.re.add(&other.re), im: self.im.add(&other.im) }
    }

    fn mul(&self, other: &Self) -> Self {
        Self {
            re: self.re.mul(&other.re).sub(&self.im.mul(&other.im)),
            im: self.re.mul(&other.im).add(&self.im.mul(&other.re)),
        }
    }

    fn scale_c(&self, c: Complex64) -> Self {
        Self {
            re: self.re.scale(c.re).sub(&self.im.scale(c.im)),
            im: self.re.scale(c.im).add(&self.im.scale(c.re)),
        }
    }
}

/// Symbolic entries of the probe state: rho = [[rho00, rho01], [rho01*, 1-rho00]].
fn rho_entries() -> [[CPoly; 2]; 2] {
    let r00 = CPoly::from_poly(Poly::var(0));
    let r01 = CPoly { re: Poly::var(1), im: Poly::var(2) };
    let r10 = CPoly { re: Poly::var(1), im: Poly::var(2).scale(-1.0) };
    let r11 = CPoly::from_poly(Poly::constant(1.0).sub(&Poly::var(0)));
    [[r00, r01], [r10, r11]]
}

/// Symbolic entries of the Hermitian observable M.
fn m_entries() -> [[CPoly; 2]; 2] {
    let m00 = CPoly::from_poly(Poly::var(3));
    let m01 = CPoly { re: Poly::var(5), im: Poly::var(6) };
    let m10 = CPoly { re: Poly::var(5), im: Poly::var(6).scale(-1.0) };
    let m11 = CPoly::from_poly(Poly::var(4));
    [[m00, m01], [m10, m11]]
}

/// Entries of Lambda(rho) as complex polynomials, from the Kraus operators.
fn channel_image(kraus: &[ComplexMatrix], rho: &[[CPoly; 2]; 2]) -> [[CPoly; 2]; 2] {
    let mut out: [[CPoly; 2]; 2] = Default::default();
    for a in 0..2 {
        for b in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut c = Complex64::new(0.0, 0.0);
                    for e in kraus {
                        c += e[(a, j)] * e[(b, k)].conj();
                    }
                    out[a][b] = out[a][b].add(&rho[j][k].scale_c(c));
                }
            }
        }
    }
    out
}

/// Polynomial optimization problem over the seven parameters: maximize the
/// objective subject to every listed polynomial being nonnegative.
#[derive(Debug, Clone)]
pub struct PolyConstraintSystem {
    pub objective: Poly,
    pub inequalities: Vec<Poly>,
}

/// Bilinear objective Tr[M (Lambda(rho) - rho)] with semialgebraic feasibility:
/// rho a qubit state with ground overlap >= 1 - omega (optionally also on the
/// channel output), and ||M||_inf <= 1.
pub fn itn_constraint_system(
    ch: &Channel,
    ec: &EnergyConstraint,
    output_constraint: bool,
) -> Result<PolyConstraintSystem> {
    if ch.d_in() != 2 || ch.d_out() != 2 {
        return Err(Error::Dimension("polynomial relaxation supports qubit channels only".into()));
    }
    let ground = ComplexMatrix::basis_ket(2, 0);
    if ec.ground().sub(&ground).max_abs() > 1e-12 {
        return Err(Error::Domain("polynomial relaxation requires ground state |0>".into()));
    }
    let omega = ec.omega();
    let rho = rho_entries();
    let m = m_entries();
    let lam = channel_image(ch.kraus(), &rho);

    // Tr[M (Lambda(rho) - rho)], real by construction
    let mut objective = Poly::zero();
    for i in 0..2 {
        for j in 0..2 {
            let x_ji = lam[j][i].add(&rho[j][i].scale_c(Complex64::new(-1.0, 0.0)));
            objective = objective.add(&m[i][j].mul(&x_ji).re);
        }
    }

    let one = Poly::constant(1.0);
    let mut inequalities = vec![
        // rho PSD with unit trace
        Poly::var(0),
        one.sub(&Poly::var(0)),
        Poly::var(0)
            .mul(&one.sub(&Poly::var(0)))
            .sub(&Poly::var(1).mul(&Poly::var(1)))
            .sub(&Poly::var(2).mul(&Poly::var(2))),
        // -1 <= M <= 1
        one.sub(&Poly::var(3)),
        one.add(&Poly::var(3)),
        one.sub(&Poly::var(4)),
        one.add(&Poly::var(4)),
    ];
    let m_off = Poly::var(5).mul(&Poly::var(5)).add(&Poly::var(6).mul(&Poly::var(6)));
    inequalities.push(one.sub(&Poly::var(3)).mul(&one.sub(&Poly::var(4))).sub(&m_off));
    inequalities.push(one.add(&Poly::var(3)).mul(&one.add(&Poly::var(4))).sub(&m_off));
    // input energy bound
    inequalities.push(Poly::var(0).sub(&Poly::constant(1.0 - omega)));
    if output_constraint {
        // <0|Lambda(rho)|0> >= 1 - omega, linear in the state parameters
        inequalities.push(lam[0][0].re.sub(&Poly::constant(1.0 - omega)));
    }
    Ok(PolyConstraintSystem { objective, inequalities })
}

// ---------------------------------------------------------------------------
// Moment relaxation.
// ---------------------------------------------------------------------------

fn monomials_up_to(degree: usize) -> Vec<Mono> {
    let mut out = Vec::new();
    let mut cur = [0u8; N_VARS];
    fn rec(out: &mut Vec<Mono>, cur: &mut Mono, var: usize, left: usize) {
        if var == N_VARS {
            out.push(*cur);
            return;
        }
        for e in 0..=left {
            cur[var] = e as u8;
            rec(out, cur, var + 1, left - e);
        }
        cur[var] = 0;
    }
    rec(&mut out, &mut cur, 0, degree);
    out.sort_by_key(|m| (m.iter().map(|&e| e as usize).sum::<usize>(), *m));
    out
}

fn mono_add(a: &Mono, b: &Mono) -> Mono {
    let mut out = *a;
    for i in 0..N_VARS {
        out[i] += b[i];
    }
    out
}

/// Level-`order` moment relaxation of the maximization in a
/// [`PolyConstraintSystem`]: moment matrix over monomials of degree <= order,
/// one localizing matrix per inequality, y_0 = 1.
pub struct MomentRelaxation {
    index: BTreeMap<Mono, usize>,
    conic: ConicProblem,
    pub order: usize,
    pub moment_dim: usize,
    pub y_count: usize,
}

impl MomentRelaxation {
    pub fn build(system: &PolyConstraintSystem, order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::Domain("relaxation order must be >= 1".into()));
        }
        if system.objective.degree() > 2 * order {
            return Err(Error::Domain("objective degree exceeds the relaxation order".into()));
        }
        for g in &system.inequalities {
            if g.degree() > 2 * order {
                return Err(Error::Domain(
                    "constraint degree exceeds the relaxation order".into(),
                ));
            }
        }
        let all = monomials_up_to(2 * order);
        let index: BTreeMap<Mono, usize> =
            all.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let n = all.len();
        let mut conic = ConicProblem::new(n);

        // maximize f == minimize -f over the moment cone
        for (m, c) in &system.objective.terms {
            conic.q[index[m]] -= c;
        }
        conic.push_zero(vec![(index[&[0; N_VARS]], 1.0)], 1.0);

        let sqrt2 = std::f64::consts::SQRT_2;
        let basis = monomials_up_to(order);
        let dim = basis.len();
        let mut rows = Vec::with_capacity(dim * (dim + 1) / 2);
        for c in 0..dim {
            for r in 0..=c {
                let scale = if r == c { 1.0 } else { sqrt2 };
                let m = mono_add(&basis[r], &basis[c]);
                rows.push((vec![(index[&m], -scale)], 0.0));
            }
        }
        conic.push_psd(dim, rows);

        for g in &system.inequalities {
            let loc_basis = monomials_up_to(order - g.degree().div_ceil(2));
            let loc_dim = loc_basis.len();
            let mut rows = Vec::with_capacity(loc_dim * (loc_dim + 1) / 2);
            for c in 0..loc_dim {
                for r in 0..=c {
                    let scale = if r == c { 1.0 } else { sqrt2 };
                    let base = mono_add(&loc_basis[r], &loc_basis[c]);
                    let mut coeffs: BTreeMap<usize, f64> = BTreeMap::new();
                    for (gm, gc) in &g.terms {
                        *coeffs.entry(index[&mono_add(&base, gm)]).or_insert(0.0) -=
                            scale * gc;
                    }
                    rows.push((coeffs.into_iter().collect(), 0.0));
                }
            }
            conic.push_psd(loc_dim, rows);
        }

        Ok(Self { index, conic, order, moment_dim: dim, y_count: n })
    }

    /// Certified upper bound on the maximum of the system's objective.
    pub fn solve(&self, settings: &SolverSettings) -> Result<f64> {
        let sol = self.conic.solve(settings)?;
        match sol.status {
            SdpStatus::Optimal => Ok(-sol.value),
            other => Err(Error::Solver(format!(
                "moment relaxation ended with status {other:?}"
            ))),
        }
    }

    /// Check that the moment vector of a concrete feasible point satisfies all
    /// PSD blocks of this relaxation (up to `tol`); used as a cross-audit.
    pub fn point_is_feasible(&self, x: &[f64; N_VARS], tol: f64) -> Result<bool> {
        let mut y = vec![0.0; self.y_count];
        for (m, &i) in &self.index {
            y[i] = m
                .iter()
                .zip(x.iter())
                .map(|(&e, &v)| v.powi(e as i32))
                .product::<f64>();
        }
        for (dim, entries) in self.psd_blocks(&y) {
            let m = ComplexMatrix::from_fn(dim, dim, |r, c| {
                Complex64::new(entries[r * dim + c], 0.0)
            });
            if m.min_eig()? < -tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn psd_blocks(&self, y: &[f64]) -> Vec<(usize, Vec<f64>)> {
        // re-evaluate the pushed PSD rows at the moment vector y
        let mut out = Vec::new();
        let rows = self.conic.psd_rows();
        let mut cursor = 0;
        for dim in self.conic.psd_dims() {
            let mut mat = vec![0.0; dim * dim];
            for c in 0..dim {
                for r in 0..=c {
                    let (coeffs, rhs) = &rows[cursor];
                    cursor += 1;
                    let scale = if r == c { 1.0 } else { std::f64::consts::SQRT_2 };
                    let mut s = *rhs;
                    for &(i, v) in coeffs {
                        s -= v * y[i];
                    }
                    let val = s / scale;
                    mat[r * dim + c] = val;
                    mat[c * dim + r] = val;
                }
            }
            out.push((dim, mat));
        }
        out
    }
}

/// Certified upper bound on the energy-constrained induced trace norm of
/// (channel - identity) for a qubit channel, via the level-`order` moment
/// relaxation of the seven-parameter polynomial program.
pub fn lasserre_itn_upper(
    ch: &Channel,
    ec: &EnergyConstraint,
    order: usize,
    output_constraint: bool,
) -> Result<f64> {
    if !(2..=3).contains(&order) {
        return Err(Error::Domain(format!("relaxation order {order} outside {{2, 3}}")));
    }
    let mut system = itn_constraint_system(ch, ec, output_constraint)?;
    // Strengthen the relaxation with pairwise products of the constraints so
    // that the lowest usable order is already tight in practice.
    let base = system.inequalities.clone();
    for (i, g) in base.iter().enumerate() {
        for h in &base[i..] {
            let prod = g.mul(h);
            if prod.degree() <= 2 * order {
                system.inequalities.push(prod);
            }
        }
    }
    let relax = MomentRelaxation::build(&system, order)?;
    let mut settings = solver_settings();
    settings.max_iter = 500;
    relax.solve(&settings)
}

// ---------------------------------------------------------------------------
// Advantage ratios.
// ---------------------------------------------------------------------------

/// Upper bound on the unconstrained entanglement advantage for discriminating
/// the family channel from the identity: exact diamond norm over a seesaw
/// lower bound on the induced trace norm.
pub fn padv_upper(fp: &FamilyPoint, settings: &SeesawSettings) -> Result<f64> {
    let ch = crate::analytic::channel_from_family(fp)?;
    let dia = diamond_norm_vs_identity(&ch)?;
    let itn = induced_trace_norm_lower(&ch, None, settings)?.value;
    Ok((1.0 + 0.5 * dia) / (1.0 + 0.5 * itn))
}

/// Lower bound on the energy-constrained entanglement advantage: fixed-probe
/// diamond lower bound over the moment-relaxation upper bound on the induced
/// trace norm.
pub fn padv_ec_lower(fp: &FamilyPoint, order: usize) -> Result<f64> {
    let ch = crate::analytic::channel_from_family(fp)?;
    let ec = EnergyConstraint::ground_zero(2, fp.omega())?;
    let dia = diamond_norm_ec_lower(fp)?;
    let itn = lasserre_itn_upper(&ch, &ec, order, true)?;
    Ok((1.0 + 0.5 * dia) / (1.0 + 0.5 * itn))
}

/// One point of the advantage curves at a given energy bound: the family
/// parameter `p` is chosen to maximize the energy-constrained lower bound,
/// and both ratios are reported at that maximizer.
#[derive(Debug, Clone, Copy)]
pub struct PadvPoint {
    pub omega: f64,
    pub p: f64,
    pub upper: f64,
    pub ec_lower: f64,
}

/// Smallest family parameter probed when optimizing the advantage ratio; at
/// p = 0 exactly the channel reconstruction becomes numerically singular.
const PADV_P_MIN: f64 = 1e-3;

/// Evaluate the advantage bounds at energy bound `omega`, selecting the family
/// parameter by golden-section maximization of the energy-constrained ratio.
pub fn padv_point(omega: f64, order: usize, settings: &SeesawSettings) -> Result<PadvPoint> {
    let ratio_at = |p: f64| -> Result<f64> {
        let fp = crate::analytic::make_family_point(omega, p)?;
        padv_ec_lower(&fp, order)
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (PADV_P_MIN, 0.5);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = ratio_at(c)?;
    let mut fd = ratio_at(d)?;
    for _ in 0..10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = ratio_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = ratio_at(d)?;
        }
    }
    // the ratio keeps increasing toward small p; make sure the edge is probed
    let fe = ratio_at(PADV_P_MIN)?;
    let (p, ec_lower) = [(c, fc), (d, fd), (PADV_P_MIN, fe)]
        .into_iter()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    let fp = crate::analytic::make_family_point(omega, p)?;
    let upper = padv_upper(&fp, settings)?;
    Ok(PadvPoint { omega, p, upper, ec_lower })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::sampling::random_channel;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn phase_unitary(theta: f64) -> Channel {
        let u = ComplexMatrix::from_fn(2, 2, |i, j| {
            if i != j {
                Complex64::new(0.0, 0.0)
            } else if i == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, theta)
            }
        });
        Channel::unitary(u).unwrap()
    }

    #[test]
    fn diamond_zero_for_equal_channels() {
        let ch = Channel::depolarizing(2);
        let delta = ch.choi().sub(&ch.choi());
        assert!(diamond_norm(&delta, 2).unwrap() < 1e-8);
    }

    #[test]
    fn diamond_matches_unitary_oracle() {
        use std::f64::consts::PI;
        for &theta in &[PI / 6.0, PI / 3.0, PI / 2.0, PI] {
            let value = diamond_norm_vs_identity(&phase_unitary(theta)).unwrap();
            // brute-force oracle over pure probe states with ancilla is the
            // closed form 2 sin(theta/2) for a phase rotation
            assert_abs_diff_eq!(value, 2.0 * (theta / 2.0).sin(), epsilon = 1e-5);
        }
    }

    #[test]
    fn diamond_dominates_fixed_probe_bound() {
        let omega = 0.3;
        let (_, p_star) = analytic::icorr_family(omega).unwrap();
        let fp = analytic::make_family_point(omega, p_star).unwrap();
        let ch = analytic::channel_from_family(&fp).unwrap();
        let dia = diamond_norm_vs_identity(&ch).unwrap();
        let probe = diamond_norm_ec_lower(&fp).unwrap();
        assert!(dia >= probe - 1e-6, "{dia} < {probe}");
    }

    #[test]
    fn ec_lower_equals_family_trace_distance() {
        let omega = 0.25;
        let (value, p_star) = analytic::icorr_family(omega).unwrap();
        let fp = analytic::make_family_point(omega, p_star).unwrap();
        assert_abs_diff_eq!(diamond_norm_ec_lower(&fp).unwrap(), value, epsilon = 1e-12);
    }

    #[test]
    fn lasserre_identity_channel_is_zero() {
        let ch = Channel::identity(2);
        let ec = EnergyConstraint::ground_zero(2, 0.3).unwrap();
        let value = lasserre_itn_upper(&ch, &ec, 2, true).unwrap();
        assert!(value.abs() < 1e-7, "value {value}");
    }

    #[test]
    fn lasserre_sandwiches_seesaw_lower_bound() {
        let omega = 0.3;
        let (_, p_star) = analytic::icorr_family(omega).unwrap();
        let fp = analytic::make_family_point(omega, p_star).unwrap();
        let ch = analytic::channel_from_family(&fp).unwrap();
        let ec = EnergyConstraint::ground_zero(2, omega).unwrap();
        let settings = SeesawSettings {
            restarts: 4,
            ..SeesawSettings::default()
        };
        let lower = induced_trace_norm_lower(&ch, Some(&ec), &settings).unwrap().value;
        let upper = lasserre_itn_upper(&ch, &ec, 2, true).unwrap();
        assert!(upper >= lower - 1e-6, "upper {upper} < lower {lower}");
        let free = diamond_norm_vs_identity(&ch).unwrap();
        assert!(upper <= free + 1e-6, "constrained {upper} > unconstrained {free}");
    }

    #[test]
    #[ignore = "order-3 relaxation takes tens of minutes; run explicitly"]
    fn lasserre_monotone_in_order() {
        let omega = 0.3;
        let (_, p_star) = analytic::icorr_family(omega).unwrap();
        let fp = analytic::make_family_point(omega, p_star).unwrap();
        let ch = analytic::channel_from_family(&fp).unwrap();
        let ec = EnergyConstraint::ground_zero(2, omega).unwrap();
        let d2 = lasserre_itn_upper(&ch, &ec, 2, true).unwrap();
        let d3 = lasserre_itn_upper(&ch, &ec, 3, true).unwrap();
        assert!(d3 <= d2 + 1e-7, "order 3 {d3} > order 2 {d2}");
    }

    #[test]
    fn moment_vector_of_feasible_point_passes_psd_blocks() {
        let omega = 0.3;
        let (_, p_star) = analytic::icorr_family(omega).unwrap();
        let fp = analytic::make_family_point(omega, p_star).unwrap();
        let ch = analytic::channel_from_family(&fp).unwrap();
        let ec = EnergyConstraint::ground_zero(2, omega).unwrap();
        let system = itn_constraint_system(&ch, &ec, true).unwrap();
        let relax = MomentRelaxation::build(&system, 2).unwrap();
        // a concrete feasible point: ground-heavy state, sigma_z observable
        let x = [1.0 - omega, 0.1, 0.0, 1.0, -1.0, 0.0, 0.0];
        for g in &system.inequalities {
            assert!(g.eval(&x) >= -1e-12);
        }
        assert!(relax.point_is_feasible(&x, 1e-7).unwrap());
        assert!(relax.solve(&solver_settings()).unwrap() >= system.objective.eval(&x) - 1e-7);
    }

    #[test]
    fn sqrt2_cap_on_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let settings = SeesawSettings {
            restarts: 4,
            ..SeesawSettings::default()
        };
        let mut audited = 0;
        while audited < 10 {
            let ch = Channel::from_kraus(random_channel(&mut rng, 2, 2, 2)).unwrap();
            let itn = induced_trace_norm_lower(&ch, None, &settings).unwrap().value;
            if itn < 1.0 {
                continue;
            }
            let dia = diamond_norm_vs_identity(&ch).unwrap();
            assert!(
                dia / itn <= std::f64::consts::SQRT_2 + 1e-3,
                "ratio {} for itn {itn}",
                dia / itn
            );
            audited += 1;
        }
    }

    #[test]
    fn padv_crossover_at_high_omega() {
        let settings = SeesawSettings {
            restarts: 4,
            ..SeesawSettings::default()
        };
        let point = padv_point(0.45, 2, &settings).unwrap();
        assert!(point.ec_lower > PADV_CAP, "{} <= {PADV_CAP}", point.ec_lower);
        assert!(point.ec_lower > point.upper, "{} <= {}", point.ec_lower, point.upper);
        assert!(point.upper <= PADV_CAP + 1e-6);
    }
}
