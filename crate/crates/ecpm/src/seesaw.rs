//! Alternating-SDP (seesaw) optimizers: entangled witness maximization,
//! adversarial guessing-probability lower bounds, deterministic-input E_1
//! minimization, and induced-trace-norm lower bounds.
//!
//! Every optimizer alternates between blocks of variables, each block update
//! being either a small SDP or a closed form, and merges independently seeded
//! restarts by best value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_basis, ComplexMatrix, SubsystemShape};
use crate::quantum::{
    choi_from_kraus, helstrom, sign_projector, Channel, DensityMatrix, EnergyConstraint,
};
use crate::sampling::{random_binary_povm, random_channel, random_unit_vector};
#[cfg(test)]
use crate::sampling::random_density;
use crate::sdp::{SdpProblem, SdpStatus, Sense, SolverSettings, VarKind};

/// Slack used for the near-deterministic p(0|0) constraint.
pub const EPS_DET: f64 = 1e-6;
const TRACE_SLACK: f64 = 1e-8;
const AUDIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SeesawSettings {
    pub max_rounds: usize,
    pub obj_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Factor dimensions [d_S, d_M].
    pub dims: SubsystemShape,
}

impl Default for SeesawSettings {
    fn default() -> Self {
        Self {
            max_rounds: 200,
            obj_tol: 1e-9,
            restarts: 20,
            seed: 0,
            dims: SubsystemShape::new(vec![2, 2]).expect("static shape"),
        }
    }
}

impl SeesawSettings {
    fn validate(&self) -> Result<()> {
        if self.max_rounds < 1 || self.restarts < 1 || !(self.obj_tol > 0.0) {
            return Err(Error::Contract(
                "seesaw settings need max_rounds >= 1, restarts >= 1, obj_tol > 0".into(),
            ));
        }
        Ok(())
    }

    fn sm_dims(&self) -> Result<(usize, usize)> {
        let d = self.dims.dims();
        if d.len() != 2 || d[0] < 2 || d[1] < 2 {
            return Err(Error::Dimension(format!(
                "seesaw dims must be [d_S, d_M] with both >= 2, got {d:?}"
            )));
        }
        Ok((d[0], d[1]))
    }
}

/// Final matrices of the best restart.
#[derive(Debug, Clone)]
pub struct Strategy {
    pub states: Vec<ComplexMatrix>,
    pub povm: Vec<ComplexMatrix>,
    pub chois: Vec<ComplexMatrix>,
    pub observables: Vec<ComplexMatrix>,
    pub ground: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub value: f64,
    pub strategy: Strategy,
    pub trace: Vec<f64>,
    pub restart_values: Vec<f64>,
}

fn solver_settings() -> SolverSettings {
    SolverSettings::default()
}

fn ground_proj(d_s: usize, d_m: usize) -> ComplexMatrix {
    let g = ComplexMatrix::basis_ket(d_s, 0);
    ComplexMatrix::outer(&g, &g).tensor(&ComplexMatrix::identity(d_m))
}

/// Spectrally clip a near-density solver output into an exact DensityMatrix.
fn clean_state(m: &ComplexMatrix, shape: &SubsystemShape) -> Result<DensityMatrix> {
    let h = m.hermitize();
    let (evals, evecs) = h.eig_hermitian()?;
    let n = h.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut tr = 0.0;
    for (idx, &l) in evals.iter().enumerate() {
        if l > 0.0 {
            let col = ComplexMatrix::from_fn(n, 1, |i, _| evecs[(i, idx)]);
            out = out.add(&ComplexMatrix::outer(&col, &col).scale_re(l));
            tr += l;
        }
    }
    if tr <= 0.0 {
        return Err(Error::Contract("solver returned a zero state".into()));
    }
    DensityMatrix::new(out.scale_re(1.0 / tr).hermitize(), shape.clone())
}

/// Clip a near-effect solver output into [0, 1] spectrally.
fn clean_effect(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let h = m.hermitize();
    let (evals, evecs) = h.eig_hermitian()?;
    let n = h.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (idx, &l) in evals.iter().enumerate() {
        let lc = l.clamp(0.0, 1.0);
        if lc > 0.0 {
            let col = ComplexMatrix::from_fn(n, 1, |i, _| evecs[(i, idx)]);
            out = out.add(&ComplexMatrix::outer(&col, &col).scale_re(lc));
        }
    }
    Ok(out.hermitize())
}

fn extract(
    assignments: &std::collections::HashMap<String, ComplexMatrix>,
    name: &str,
) -> Result<ComplexMatrix> {
    assignments
        .get(name)
        .cloned()
        .ok_or_else(|| Error::Solver(format!("missing block variable {name}")))
}

fn solve_block(prob: &SdpProblem, block: &str) -> Result<crate::sdp::SdpSolution> {
    let sol = prob.solve(&solver_settings())?;
    match sol.status {
        SdpStatus::Optimal => Ok(sol),
        SdpStatus::Infeasible => Err(Error::Infeasible(format!("{block} block infeasible"))),
        s => Err(Error::Solver(format!("{block} block ended with status {s:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Choi-matrix plumbing shared by the channel-valued blocks.
// ---------------------------------------------------------------------------

/// Apply a channel given by its normalized Choi matrix.
pub fn apply_choi(j: &ComplexMatrix, d_in: usize, d_out: usize, rho: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(d_out, d_out, |a, b| {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for jj in 0..d_in {
            for k in 0..d_in {
                acc += rho[(jj, k)] * j[(a * d_in + jj, b * d_in + k)];
            }
        }
        acc * d_in as f64
    })
}

/// Apply (channel tensor identity on a d_m memory factor) to sigma, with the
/// channel given by its normalized Choi matrix.
pub fn apply_choi_mem(
    j: &ComplexMatrix,
    d_in: usize,
    d_out: usize,
    d_m: usize,
    sigma: &ComplexMatrix,
) -> ComplexMatrix {
    let dd = d_out * d_m;
    ComplexMatrix::from_fn(dd, dd, |row, col| {
        let (a, m) = (row / d_m, row % d_m);
        let (b, n) = (col / d_m, col % d_m);
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for jj in 0..d_in {
            for k in 0..d_in {
                acc += sigma[(jj * d_m + m, k * d_m + n)] * j[(a * d_in + jj, b * d_in + k)];
            }
        }
        acc * d_in as f64
    })
}

/// Coefficient C with Tr[W (channel tensor 1)(sigma)] = Tr[C J], treating the
/// Choi matrix J as the variable.
pub fn choi_coefficient(
    w: &ComplexMatrix,
    sigma: &ComplexMatrix,
    d_in: usize,
    d_out: usize,
    d_m: usize,
) -> ComplexMatrix {
    let dj = d_in * d_out;
    ComplexMatrix::from_fn(dj, dj, |row, col| {
        // row indexes (b, k), col indexes (a, j) so that Tr[C J] sums
        // C[(b k), (a j)] J[(a j), (b k)]
        let (b, k) = (row / d_in, row % d_in);
        let (a, jj) = (col / d_in, col % d_in);
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for m in 0..d_m {
            for n in 0..d_m {
                acc += sigma[(jj * d_m + m, k * d_m + n)] * w[(b * d_m + n, a * d_m + m)];
            }
        }
        acc * d_in as f64
    })
    .hermitize()
}

/// Pull an SM observable back through (channel tensor 1): returns G with
/// Tr[W (channel tensor 1)(sigma)] = Tr[G sigma], treating sigma as variable.
pub fn choi_adjoint_mem(
    j: &ComplexMatrix,
    d_in: usize,
    d_out: usize,
    d_m: usize,
    w: &ComplexMatrix,
) -> ComplexMatrix {
    let dd = d_in * d_m;
    ComplexMatrix::from_fn(dd, dd, |row, col| {
        // row indexes (k, n), col indexes (j, m)
        let (k, n) = (row / d_m, row % d_m);
        let (jj, m) = (col / d_m, col % d_m);
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for a in 0..d_out {
            for b in 0..d_out {
                acc += j[(a * d_in + jj, b * d_in + k)] * w[(b * d_m + n, a * d_m + m)];
            }
        }
        acc * d_in as f64
    })
    .hermitize()
}

/// Trace-preservation functionals for a normalized Choi variable:
/// Tr[(1_out tensor h) J] = Tr[h]/d_in for a Hermitian basis {h} of the
/// input space.
fn choi_tp_rows(d_in: usize, d_out: usize) -> Vec<(ComplexMatrix, f64)> {
    hermitian_basis(d_in)
        .into_iter()
        .map(|h| {
            let rhs = h.trace().re / d_in as f64;
            (ComplexMatrix::identity(d_out).tensor(&h), rhs)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Restart harness.
// ---------------------------------------------------------------------------

/// Per-round objective trace of one seesaw run. Tiny regressions of the
/// objective (within solver accuracy) are clamped to the best value seen so
/// far, keeping the recorded trace monotone; larger regressions indicate a
/// modeling bug and are rejected.
struct TraceTracker {
    minimize: bool,
    drift_tol: f64,
    patience: usize,
    best: Option<f64>,
    trace: Vec<f64>,
}

const DRIFT_TOL: f64 = 1e-4;

impl TraceTracker {
    fn new(minimize: bool) -> Self {
        Self { minimize, drift_tol: DRIFT_TOL, patience: 1, best: None, trace: Vec::new() }
    }

    /// For alternations whose blocks do not all optimize the same objective:
    /// intermediate regressions are expected, so they are never an error, and
    /// convergence requires `patience` rounds without improvement.
    fn tolerant(minimize: bool, patience: usize) -> Self {
        Self { minimize, drift_tol: f64::INFINITY, patience, best: None, trace: Vec::new() }
    }

    /// Returns true when `value` improves on the best value seen so far, in
    /// which case the caller should snapshot its current iterate.
    fn record(&mut self, value: f64) -> Result<bool> {
        let improved = match self.best {
            None => true,
            Some(b) => {
                if self.minimize { value < b } else { value > b }
            }
        };
        if improved {
            self.best = Some(value);
            self.trace.push(value);
        } else {
            let b = self.best.expect("best set after first record");
            let drift = if self.minimize { value - b } else { b - value };
            if drift > self.drift_tol {
                return Err(Error::Contract(format!(
                    "seesaw objective regressed: {b} -> {value}"
                )));
            }
            self.trace.push(b);
        }
        Ok(improved)
    }

    fn done(&self, obj_tol: f64, max_rounds: usize) -> bool {
        if self.trace.len() >= max_rounds {
            return true;
        }
        let n = self.trace.len();
        n > self.patience && (self.trace[n - 1] - self.trace[n - 1 - self.patience]).abs() < obj_tol
    }

    fn into_trace(self) -> Vec<f64> {
        self.trace
    }
}

fn run_restarts<F>(settings: &SeesawSettings, minimize: bool, run: F) -> Result<SeesawResult>
where
    F: Fn(usize, u64) -> Result<(Strategy, Vec<f64>)> + Sync,
{
    settings.validate()?;
    let outcomes: Vec<Result<(Strategy, Vec<f64>)>> = (0..settings.restarts)
        .into_par_iter()
        .map(|r| run(r, settings.seed.wrapping_add(r as u64)))
        .collect();

    let mut best: Option<(f64, Strategy, Vec<f64>)> = None;
    let mut restart_values = Vec::with_capacity(outcomes.len());
    let mut first_err: Option<Error> = None;
    for outcome in outcomes {
        match outcome {
            Ok((strategy, trace)) => {
                let value = *trace.last().ok_or_else(|| {
                    Error::Contract("seesaw restart produced an empty trace".into())
                })?;
                for w in trace.windows(2) {
                    let drift = if minimize { w[1] - w[0] } else { w[0] - w[1] };
                    if drift > TRACE_SLACK {
                        return Err(Error::Contract(format!(
                            "non-monotone seesaw trace: {} -> {}",
                            w[0], w[1]
                        )));
                    }
                }
                restart_values.push(value);
                let better = match &best {
                    None => true,
                    Some((bv, _, _)) => {
                        if minimize { value < *bv } else { value > *bv }
                    }
                };
                if better {
                    best = Some((value, strategy, trace));
                }
            }
            Err(e) => {
                if std::env::var_os("ECPM_DEBUG").is_some() {
                    eprintln!("seesaw restart {} failed: {e}", restart_values.len());
                }
                restart_values.push(f64::NAN);
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    match best {
        Some((value, strategy, trace)) => {
            Ok(SeesawResult { value, strategy, trace, restart_values })
        }
        None => Err(first_err.unwrap_or_else(|| Error::Solver("no restart succeeded".into()))),
    }
}

// ---------------------------------------------------------------------------
// Witness maximization.
// ---------------------------------------------------------------------------

fn check_omega(omega: f64) -> Result<()> {
    if !(0.0..0.5).contains(&omega) {
        return Err(Error::Domain(format!("omega {omega} outside [0, 1/2)")));
    }
    Ok(())
}

/// Embed a (2,2)-shaped operator into the top-left (d_s, d_m) block.
fn embed_sm(m: &ComplexMatrix, d_s: usize, d_m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d_s * d_m, d_s * d_m, |row, col| {
        let (s, mm) = (row / d_m, row % d_m);
        let (t, nn) = (col / d_m, col % d_m);
        if s < 2 && t < 2 && mm < 2 && nn < 2 {
            m[(s * 2 + mm, t * 2 + nn)]
        } else {
            num_complex::Complex64::new(0.0, 0.0)
        }
    })
}

/// State block shared by maximize_icorr and minimize_E1_deterministic.
/// `deterministic` adds the near-deterministic p(0|0) constraint; the
/// objective is +w on rho0 / -w on rho1 (maximize) or w on rho1 only
/// (minimize E_1).
struct StateBlock<'a> {
    omega: f64,
    d_s: usize,
    d_m: usize,
    povm: &'a [ComplexMatrix],
    deterministic: bool,
}

impl StateBlock<'_> {
    fn solve(&self) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let d = self.d_s * self.d_m;
        let w = self.povm[0].sub(&self.povm[1]);
        let sense = if self.deterministic { Sense::Minimize } else { Sense::Maximize };
        let mut p = SdpProblem::new(sense);
        let r0 = p.add_var("rho0", d, VarKind::HermitianPsd);
        let r1 = p.add_var("rho1", d, VarKind::HermitianPsd);
        if self.deterministic {
            p.add_obj_term(r1, w.clone())?;
            p.add_ge(vec![(r0, self.povm[0].clone())], 1.0 - EPS_DET)?;
        } else {
            p.add_obj_term(r0, w.clone())?;
            p.add_obj_term(r1, w.scale_re(-1.0))?;
        }
        let id = ComplexMatrix::identity(d);
        p.add_eq(vec![(r0, id.clone())], 1.0)?;
        p.add_eq(vec![(r1, id)], 1.0)?;
        let g = ground_proj(self.d_s, self.d_m);
        p.add_ge(vec![(r0, g.clone())], 1.0 - self.omega)?;
        p.add_ge(vec![(r1, g)], 1.0 - self.omega)?;
        let id_s = ComplexMatrix::identity(self.d_s);
        for h in hermitian_basis(self.d_m) {
            let coeff = id_s.tensor(&h);
            p.add_eq(vec![(r0, coeff.clone()), (r1, coeff.scale_re(-1.0))], 0.0)?;
        }
        let sol = solve_block(&p, "state")?;
        Ok((extract(&sol.assignments, "rho0")?, extract(&sol.assignments, "rho1")?))
    }
}

fn audit_two_state_strategy(
    strategy: &Strategy,
    omega: f64,
    shape: &SubsystemShape,
    deterministic: bool,
) -> Result<()> {
    let d = shape.total();
    let d_m = shape.dims()[1];
    let g = ground_proj(shape.dims()[0], d_m);
    for s in &strategy.states {
        if s.sub(&s.dagger()).max_abs() > AUDIT_TOL
            || s.min_eig()? < -AUDIT_TOL
            || (s.trace().re - 1.0).abs() > AUDIT_TOL
        {
            return Err(Error::Contract("audit: state invalid".into()));
        }
        if g.inner_re(s) < 1.0 - omega - AUDIT_TOL {
            return Err(Error::Contract("audit: energy constraint violated".into()));
        }
    }
    let m0 = DensityMatrix::new(strategy.states[0].clone(), shape.clone())?.partial_trace(&[1])?;
    let m1 = DensityMatrix::new(strategy.states[1].clone(), shape.clone())?.partial_trace(&[1])?;
    if m0.sub(&m1).max_abs() > AUDIT_TOL {
        return Err(Error::Contract("audit: marginal mismatch".into()));
    }
    let sum = strategy.povm[0].add(&strategy.povm[1]);
    if sum.sub(&ComplexMatrix::identity(d)).max_abs() > AUDIT_TOL
        || strategy.povm[0].min_eig()? < -AUDIT_TOL
        || strategy.povm[1].min_eig()? < -AUDIT_TOL
    {
        return Err(Error::Contract("audit: POVM invalid".into()));
    }
    if deterministic && strategy.povm[0].inner_re(&strategy.states[0]) < 1.0 - EPS_DET - AUDIT_TOL {
        return Err(Error::Contract("audit: determinism constraint violated".into()));
    }
    Ok(())
}

/// Lower-bound the maximal witness value over entangled strategies at the
/// given energy bound by alternating between the state pair (SDP) and the
/// binary measurement (closed-form optimal discrimination).
pub fn maximize_icorr(omega: f64, settings: &SeesawSettings) -> Result<SeesawResult> {
    check_omega(omega)?;
    let (d_s, d_m) = settings.sm_dims()?;
    let shape = SubsystemShape::new(vec![d_s, d_m])?;
    let d = d_s * d_m;

    // known-good basin: the analytic family's optimal measurement
    let injected: Option<Vec<ComplexMatrix>> = if omega > 0.0 {
        let (_, p_star) = analytic::icorr_family(omega.min(0.5))?;
        let fp = analytic::make_family_point(omega.min(0.5), p_star)?;
        let psi = embed_sm(fp.psi0().mat(), d_s, d_m);
        let rho = embed_sm(fp.rho1().mat(), d_s, d_m);
        let (p_plus, _) = sign_projector(&psi.sub(&rho))?;
        Some(vec![p_plus.clone(), ComplexMatrix::identity(d).sub(&p_plus)])
    } else {
        None
    };

    run_restarts(settings, false, |r, seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut povm: Vec<ComplexMatrix> = match (&injected, r) {
            (Some(p), 0) => p.clone(),
            _ => {
                let rank = rng.gen_range(1..d);
                let (p0, p1) = random_binary_povm(&mut rng, d, rank);
                vec![p0, p1]
            }
        };
        let mut tracker = TraceTracker::new(false);
        let mut best: Option<(DensityMatrix, DensityMatrix, Vec<ComplexMatrix>)> = None;
        loop {
            let block = StateBlock { omega, d_s, d_m, povm: &povm, deterministic: false };
            let (raw0, raw1) = block.solve()?;
            let rho0 = clean_state(&raw0, &shape)?;
            let rho1 = clean_state(&raw1, &shape)?;
            let (value, new_povm) = helstrom(&rho0, &rho1)?;
            povm = new_povm.elements().to_vec();
            if tracker.record(value)? {
                best = Some((rho0, rho1, povm.clone()));
            }
            if tracker.done(settings.obj_tol, settings.max_rounds) {
                break;
            }
        }
        let (rho0, rho1, povm) = best.expect("at least one recorded round");
        let strategy = Strategy {
            states: vec![rho0.mat().clone(), rho1.mat().clone()],
            povm,
            chois: Vec::new(),
            observables: Vec::new(),
            ground: ComplexMatrix::basis_ket(d_s, 0),
        };
        let trace = tracker.into_trace();
        audit_two_state_strategy(&strategy, omega, &shape, false)?;
        Ok((strategy, trace))
    })
}

/// POVM block of the deterministic-input minimization: minimize E_1 subject
/// to POVM validity and near-determinism on input 0.
fn det_povm_block(rho0: &ComplexMatrix, rho1: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
    let d = rho0.rows();
    let mut p = SdpProblem::new(Sense::Minimize);
    let pi0 = p.add_var("pi0", d, VarKind::HermitianPsd);
    let pi1 = p.add_var("pi1", d, VarKind::HermitianPsd);
    p.add_obj_term(pi0, rho1.clone())?;
    p.add_obj_term(pi1, rho1.scale_re(-1.0))?;
    for h in hermitian_basis(d) {
        let rhs = h.trace().re;
        p.add_eq(vec![(pi0, h.clone()), (pi1, h)], rhs)?;
    }
    p.add_ge(vec![(pi0, rho0.clone())], 1.0 - EPS_DET)?;
    let sol = solve_block(&p, "povm")?;
    let e0 = clean_effect(&extract(&sol.assignments, "pi0")?)?;
    let e1 = ComplexMatrix::identity(d).sub(&e0).hermitize();
    Ok(vec![e0, e1])
}

/// Upper-bound the minimum of E_1 over entangled strategies whose behavior is
/// (near-)deterministic on input 0.
pub fn minimize_e1_deterministic(omega: f64, settings: &SeesawSettings) -> Result<SeesawResult> {
    check_omega(omega)?;
    let (d_s, d_m) = settings.sm_dims()?;
    let shape = SubsystemShape::new(vec![d_s, d_m])?;

    // known-good basin: the closed-form family, with its first preparation
    // pure (so a projective measurement is exactly deterministic on input 0)
    // and the parameter p chosen to minimize the family's second correlator
    let injected: Option<(DensityMatrix, DensityMatrix)> = if omega > 0.0 {
        let mut best = (f64::INFINITY, 0.25);
        for k in 0..=512 {
            let p = 0.5 * k as f64 / 512.0;
            let fp = analytic::make_family_point(omega, p)?;
            let psi = fp.psi0_ket();
            let proj = ComplexMatrix::outer(&psi, &psi);
            let e1 = 2.0 * proj.inner_re(fp.rho1().mat()) - 1.0;
            if e1 < best.0 {
                best = (e1, p);
            }
        }
        let fp = analytic::make_family_point(omega, best.1)?;
        let r0 = clean_state(&embed_sm(fp.psi0().mat(), d_s, d_m), &shape)?;
        let r1 = clean_state(&embed_sm(fp.rho1().mat(), d_s, d_m), &shape)?;
        Some((r0, r1))
    } else {
        None
    };

    run_restarts(settings, true, |r, seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // feasible pure start saturating the energy bound: a full-rank mixed
        // start would force the near-deterministic effect toward the identity
        // and strand the alternation at E_1 close to +1
        let u = random_unit_vector(&mut rng, d_m);
        let w = random_unit_vector(&mut rng, d_m);
        let mut chi = ComplexMatrix::zeros(d_s * d_m, 1);
        for m in 0..d_m {
            chi[(m, 0)] = u[(m, 0)] * (1.0 - omega).sqrt();
            chi[(d_m + m, 0)] = w[(m, 0)] * omega.sqrt();
        }
        let base = ComplexMatrix::outer(&chi, &chi);
        let (mut rho0, mut rho1) = match (&injected, r) {
            (Some((r0, r1)), 0) => (r0.clone(), r1.clone()),
            _ => {
                let base = clean_state(&base, &shape)?;
                (base.clone(), base)
            }
        };
        let mut tracker = TraceTracker::new(true);
        let mut best: Option<(DensityMatrix, DensityMatrix, Vec<ComplexMatrix>)> = None;
        loop {
            let povm = det_povm_block(rho0.mat(), rho1.mat())?;
            let block = StateBlock { omega, d_s, d_m, povm: &povm, deterministic: true };
            let (raw0, raw1) = block.solve()?;
            rho0 = clean_state(&raw0, &shape)?;
            rho1 = clean_state(&raw1, &shape)?;
            let w = povm[0].sub(&povm[1]);
            let value = w.inner_re(rho1.mat());
            if tracker.record(value)? {
                best = Some((rho0.clone(), rho1.clone(), povm));
            }
            if tracker.done(settings.obj_tol, settings.max_rounds) {
                break;
            }
        }
        let (rho0, rho1, povm) = best.expect("at least one recorded round");
        let strategy = Strategy {
            states: vec![rho0.mat().clone(), rho1.mat().clone()],
            povm,
            chois: Vec::new(),
            observables: Vec::new(),
            ground: ComplexMatrix::basis_ket(d_s, 0),
        };
        let trace = tracker.into_trace();
        audit_two_state_strategy(&strategy, omega, &shape, true)?;
        Ok((strategy, trace))
    })
}

// ---------------------------------------------------------------------------
// Guessing probability.
// ---------------------------------------------------------------------------

/// Convert a two-state strategy with (approximately) common memory marginal
/// into a shared state sigma on P tensor M plus channels J_x mapping P to S
/// with (channel_x tensor 1)(sigma) = rho_x. The shared state is the
/// canonical purification of the common marginal; each channel is factored
/// through the purification's coefficient operator, pseudo-inverted on its
/// support and completed to trace preservation with ground-reset Kraus terms.
fn state_channel_seed(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
    d_s: usize,
    d_m: usize,
) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let tau = rho0
        .partial_trace(&[1])?
        .add(&rho1.partial_trace(&[1])?)
        .scale_re(0.5)
        .hermitize();
    let (tvals, tvecs) = tau.eig_hermitian()?;
    let d_p = d_m;
    // sigma = sum_p sqrt(tau_p) |p>_P |v_p>_M
    let mut sigma_ket = ComplexMatrix::zeros(d_p * d_m, 1);
    for p in 0..d_p {
        let l = tvals[p].max(0.0);
        for m in 0..d_m {
            sigma_ket[(p * d_m + m, 0)] = tvecs[(m, p)] * l.sqrt();
        }
    }
    let nrm = sigma_ket.vec_norm();
    sigma_ket = sigma_ket.scale_re(1.0 / nrm);
    let sigma = ComplexMatrix::outer(&sigma_ket, &sigma_ket);
    // pseudo-inverse of the coefficient operator A = sqrt(d_m) C_sigma
    let scale = (d_m as f64).sqrt();
    let mut a_pinv = ComplexMatrix::zeros(d_m, d_p);
    for p in 0..d_p {
        let l = tvals[p].max(0.0);
        if l.sqrt() > 1e-9 {
            for m in 0..d_m {
                a_pinv[(m, p)] += tvecs[(m, p)].conj() / (scale * l.sqrt());
            }
        }
    }
    let mut chois = Vec::new();
    for rho in [rho0, rho1] {
        let (evals, evecs) = rho.mat().eig_hermitian()?;
        let mut kraus = Vec::new();
        for (idx, &l) in evals.iter().enumerate() {
            if l <= 1e-10 {
                continue;
            }
            let t = ComplexMatrix::from_fn(d_s, d_m, |s, m| {
                evecs[(s * d_m + m, idx)] * (d_m as f64).sqrt()
            });
            kraus.push(t.matmul(&a_pinv).scale_re(l.sqrt()));
        }
        // complete to trace preservation by resetting the defect to ground
        let mut defect = ComplexMatrix::identity(d_p);
        for k in &kraus {
            defect = defect.sub(&k.dagger().matmul(k));
        }
        let (dvals, dvecs) = defect.hermitize().eig_hermitian()?;
        for (idx, &mu) in dvals.iter().enumerate() {
            if mu > 1e-12 {
                let u = ComplexMatrix::from_fn(d_p, 1, |i, _| dvecs[(i, idx)]);
                let k = ComplexMatrix::basis_ket(d_s, 0).matmul(&u.dagger()).scale_re(mu.sqrt());
                kraus.push(k);
            }
        }
        chois.push(choi_from_kraus(&kraus));
    }
    let j1 = chois.pop().expect("two chois");
    let j0 = chois.pop().expect("two chois");
    Ok((sigma, j0, j1))
}

struct GuessContext {
    omega: f64,
    i_exp: f64,
    xstar: usize,
    d_p: usize,
    d_s: usize,
    d_m: usize,
}

impl GuessContext {
    fn sigma_block(
        &self,
        j: &[ComplexMatrix; 2],
        povm: &[ComplexMatrix],
    ) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let d = self.d_p * self.d_m;
        let mut p = SdpProblem::new(Sense::Maximize);
        let s0 = p.add_var("s0", d, VarKind::HermitianPsd);
        let s1 = p.add_var("s1", d, VarKind::HermitianPsd);
        let g = ground_proj(self.d_s, self.d_m);
        for b in 0..2 {
            let coeff =
                choi_adjoint_mem(&j[self.xstar], self.d_p, self.d_s, self.d_m, &povm[b]);
            p.add_obj_term(if b == 0 { s0 } else { s1 }, coeff)?;
        }
        let id = ComplexMatrix::identity(d);
        p.add_eq(vec![(s0, id.clone()), (s1, id)], 1.0)?;
        for jx in j.iter() {
            let coeff = choi_adjoint_mem(jx, self.d_p, self.d_s, self.d_m, &g);
            p.add_ge(vec![(s0, coeff.clone()), (s1, coeff)], 1.0 - self.omega)?;
        }
        let w = povm[0].sub(&povm[1]);
        let wit = choi_adjoint_mem(&j[0], self.d_p, self.d_s, self.d_m, &w)
            .sub(&choi_adjoint_mem(&j[1], self.d_p, self.d_s, self.d_m, &w));
        p.add_ge(vec![(s0, wit.clone()), (s1, wit)], self.i_exp)?;
        let sol = solve_block(&p, "sigma")?;
        Ok((extract(&sol.assignments, "s0")?, extract(&sol.assignments, "s1")?))
    }

    fn choi_block(
        &self,
        x: usize,
        j_other: &ComplexMatrix,
        sigma: &[ComplexMatrix; 2],
        povm: &[ComplexMatrix],
    ) -> Result<ComplexMatrix> {
        let sbar = sigma[0].add(&sigma[1]);
        let w = povm[0].sub(&povm[1]);
        let mut p = SdpProblem::new(Sense::Maximize);
        let jv = p.add_var("j", self.d_p * self.d_s, VarKind::HermitianPsd);
        // witness contribution of this channel (sign depends on x), with the
        // other channel's contribution a constant
        let sign = if x == 0 { 1.0 } else { -1.0 };
        let cw = choi_coefficient(&w, &sbar, self.d_p, self.d_s, self.d_m).scale_re(sign);
        let other_term = -sign
            * w.inner_re(&apply_choi_mem(j_other, self.d_p, self.d_s, self.d_m, &sbar));
        if x == self.xstar {
            for b in 0..2 {
                p.add_obj_term(
                    jv,
                    choi_coefficient(&povm[b], &sigma[b], self.d_p, self.d_s, self.d_m),
                )?;
            }
        } else {
            // off-input block: widen the witness margin instead
            p.add_obj_term(jv, cw.clone())?;
        }
        for (coeff, rhs) in choi_tp_rows(self.d_p, self.d_s) {
            p.add_eq(vec![(jv, coeff)], rhs)?;
        }
        let g = ground_proj(self.d_s, self.d_m);
        let ce = choi_coefficient(&g, &sbar, self.d_p, self.d_s, self.d_m);
        p.add_ge(vec![(jv, ce)], 1.0 - self.omega)?;
        p.add_ge(vec![(jv, cw)], self.i_exp - other_term)?;
        let sol = solve_block(&p, "choi")?;
        Ok(extract(&sol.assignments, "j")?.hermitize())
    }

    fn povm_block(
        &self,
        j: &[ComplexMatrix; 2],
        sigma: &[ComplexMatrix; 2],
    ) -> Result<(Vec<ComplexMatrix>, f64)> {
        let d = self.d_s * self.d_m;
        let sbar = sigma[0].add(&sigma[1]);
        let rbar0 = apply_choi_mem(&j[0], self.d_p, self.d_s, self.d_m, &sbar);
        let rbar1 = apply_choi_mem(&j[1], self.d_p, self.d_s, self.d_m, &sbar);
        let diff = rbar0.sub(&rbar1);
        let mut p = SdpProblem::new(Sense::Maximize);
        let pi0 = p.add_var("pi0", d, VarKind::HermitianPsd);
        let pi1 = p.add_var("pi1", d, VarKind::HermitianPsd);
        for (b, var) in [(0, pi0), (1, pi1)] {
            let r = apply_choi_mem(&j[self.xstar], self.d_p, self.d_s, self.d_m, &sigma[b]);
            p.add_obj_term(var, r.hermitize())?;
        }
        for h in hermitian_basis(d) {
            let rhs = h.trace().re;
            p.add_eq(vec![(pi0, h.clone()), (pi1, h)], rhs)?;
        }
        p.add_ge(
            vec![(pi0, diff.hermitize()), (pi1, diff.hermitize().scale_re(-1.0))],
            self.i_exp,
        )?;
        let sol = solve_block(&p, "povm")?;
        let e0 = clean_effect(&extract(&sol.assignments, "pi0")?)?;
        let e1 = ComplexMatrix::identity(d).sub(&e0).hermitize();
        Ok((vec![e0, e1], sol.value))
    }

    fn objective(&self, j: &[ComplexMatrix; 2], sigma: &[ComplexMatrix; 2], povm: &[ComplexMatrix]) -> f64 {
        (0..2)
            .map(|b| {
                povm[b].inner_re(&apply_choi_mem(
                    &j[self.xstar],
                    self.d_p,
                    self.d_s,
                    self.d_m,
                    &sigma[b],
                ))
            })
            .sum()
    }

    fn audit(&self, strategy: &Strategy, value: f64) -> Result<()> {
        let sbar = strategy.states[0].add(&strategy.states[1]);
        for s in &strategy.states {
            if s.min_eig()? < -AUDIT_TOL {
                return Err(Error::Contract("audit: ensemble state not PSD".into()));
            }
        }
        if (sbar.trace().re - 1.0).abs() > AUDIT_TOL {
            return Err(Error::Contract("audit: ensemble trace != 1".into()));
        }
        let g = ground_proj(self.d_s, self.d_m);
        let id_in = ComplexMatrix::identity(self.d_p).scale_re(1.0 / self.d_p as f64);
        for jx in &strategy.chois {
            if jx.min_eig()? < -AUDIT_TOL {
                return Err(Error::Contract("audit: Choi not PSD".into()));
            }
            let shape = SubsystemShape::new(vec![self.d_s, self.d_p])?;
            let tr_out = jx.partial_trace(&shape, &[1])?;
            if tr_out.sub(&id_in).max_abs() > AUDIT_TOL {
                return Err(Error::Contract("audit: Choi not trace preserving".into()));
            }
            if g.inner_re(&apply_choi_mem(jx, self.d_p, self.d_s, self.d_m, &sbar))
                < 1.0 - self.omega - AUDIT_TOL
            {
                return Err(Error::Contract("audit: energy constraint violated".into()));
            }
        }
        let w = strategy.povm[0].sub(&strategy.povm[1]);
        let wit: f64 = (0..2)
            .map(|x| {
                let sign = if x == 0 { 1.0 } else { -1.0 };
                sign * w
                    .inner_re(&apply_choi_mem(&strategy.chois[x], self.d_p, self.d_s, self.d_m, &sbar))
            })
            .sum();
        if wit < self.i_exp - AUDIT_TOL {
            return Err(Error::Contract("audit: witness constraint violated".into()));
        }
        let d = self.d_s * self.d_m;
        if strategy.povm[0].add(&strategy.povm[1]).sub(&ComplexMatrix::identity(d)).max_abs()
            > AUDIT_TOL
            || strategy.povm[0].min_eig()? < -AUDIT_TOL
        {
            return Err(Error::Contract("audit: POVM invalid".into()));
        }
        let j = [strategy.chois[0].clone(), strategy.chois[1].clone()];
        let sig = [strategy.states[0].clone(), strategy.states[1].clone()];
        if (self.objective(&j, &sig, &strategy.povm) - value).abs() > AUDIT_TOL {
            return Err(Error::Contract("audit: reported value mismatch".into()));
        }
        Ok(())
    }
}

/// Feasible-attack lower bound on the adversarial guessing probability at a
/// given witness value i_exp, alternating over the ensemble states, the two
/// channels' Choi matrices, and the honest measurement.
pub fn guessing_probability_lower(
    omega: f64,
    i_exp: f64,
    xstar: u8,
    settings: &SeesawSettings,
) -> Result<SeesawResult> {
    check_omega(omega)?;
    if !(0.0..=2.0).contains(&i_exp) {
        return Err(Error::Domain(format!("i_exp {i_exp} outside [0, 2]")));
    }
    let (d_s, d_m) = settings.sm_dims()?;
    let ctx = GuessContext { omega, i_exp, xstar: xstar as usize, d_p: d_m, d_s, d_m };
    let shape = SubsystemShape::new(vec![d_s, d_m])?;

    // deterministic-outcome seed: near-deterministic strategy on x*, mapped
    // through state-channel duality; plus a witness-maximizing seed
    let seed_settings = SeesawSettings {
        restarts: settings.restarts.min(6),
        ..settings.clone()
    };
    let mut seeds: Vec<([ComplexMatrix; 2], Vec<ComplexMatrix>)> = Vec::new();
    if omega > 0.0 {
        if let Ok(det) = minimize_e1_deterministic(omega, &seed_settings) {
            let (mut st0, mut st1) = (det.strategy.states[0].clone(), det.strategy.states[1].clone());
            let mut povm = det.strategy.povm.clone();
            if xstar == 1 {
                // deterministic on input 1 instead: swap inputs, flip outcomes
                std::mem::swap(&mut st0, &mut st1);
                povm.swap(0, 1);
            }
            let r0 = DensityMatrix::new(st0, shape.clone())?;
            let r1 = DensityMatrix::new(st1, shape.clone())?;
            if let Ok((_, j0, j1)) = state_channel_seed(&r0, &r1, d_s, d_m) {
                seeds.push(([j0, j1], povm));
            }
        }
        if let Ok(ic) = maximize_icorr(omega, &seed_settings) {
            let r0 = DensityMatrix::new(ic.strategy.states[0].clone(), shape.clone())?;
            let r1 = DensityMatrix::new(ic.strategy.states[1].clone(), shape.clone())?;
            if let Ok((_, j0, j1)) = state_channel_seed(&r0, &r1, d_s, d_m) {
                seeds.push(([j0, j1], ic.strategy.povm.clone()));
            }
        }
    }

    let mut res = run_restarts(settings, false, |r, seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut j, mut povm) = if r < seeds.len() {
            seeds[r].clone()
        } else {
            let mk = |rng: &mut ChaCha8Rng| {
                choi_from_kraus(&random_channel(rng, ctx.d_p, ctx.d_s, 2))
            };
            let j0 = mk(&mut rng);
            let j1 = mk(&mut rng);
            let rank = rng.gen_range(1..(d_s * d_m));
            let (p0, p1) = random_binary_povm(&mut rng, d_s * d_m, rank);
            ([j0, j1], vec![p0, p1])
        };
        let mut tracker = TraceTracker::tolerant(false, 10);
        let mut best: Option<([ComplexMatrix; 2], [ComplexMatrix; 2], Vec<ComplexMatrix>)> = None;
        loop {
            // feasibility can erode to the boundary of the witness constraint
            // as the blocks trade margin for objective; once a round has been
            // recorded, a failing block ends the run at the best iterate
            // instead of discarding the restart
            let round = (|| -> Result<(Strategy, f64)> {
                let (s0, s1) = ctx.sigma_block(&j, &povm)?;
                let sigma = [s0.hermitize(), s1.hermitize()];
                let mut jn = j.clone();
                for x in [ctx.xstar, 1 - ctx.xstar] {
                    let other = jn[1 - x].clone();
                    jn[x] = ctx.choi_block(x, &other, &sigma, &povm)?;
                }
                let (new_povm, _) = ctx.povm_block(&jn, &sigma)?;
                let value = ctx.objective(&jn, &sigma, &new_povm);
                let strategy = Strategy {
                    states: sigma.to_vec(),
                    povm: new_povm,
                    chois: jn.to_vec(),
                    observables: Vec::new(),
                    ground: ComplexMatrix::basis_ket(d_s, 0),
                };
                Ok((strategy, value))
            })();
            match round {
                Ok((strategy, value)) => {
                    j = [strategy.chois[0].clone(), strategy.chois[1].clone()];
                    povm = strategy.povm.clone();
                    if tracker.record(value)? {
                        best = Some((
                            [strategy.states[0].clone(), strategy.states[1].clone()],
                            j.clone(),
                            povm.clone(),
                        ));
                    }
                    if tracker.done(settings.obj_tol, settings.max_rounds) {
                        break;
                    }
                }
                Err(e) => {
                    if best.is_none() {
                        return Err(e);
                    }
                    break;
                }
            }
        }
        let (sigma, j, povm) = best.expect("at least one recorded round");
        let strategy = Strategy {
            states: sigma.to_vec(),
            povm,
            chois: j.to_vec(),
            observables: Vec::new(),
            ground: ComplexMatrix::basis_ket(d_s, 0),
        };
        let trace = tracker.into_trace();
        let value = *trace.last().expect("nonempty trace");
        ctx.audit(&strategy, value)?;
        Ok((strategy, trace))
    })?;
    // the objective is a probability; shave off solver-level overshoot
    res.value = res.value.min(1.0);
    for v in res.trace.iter_mut().chain(res.restart_values.iter_mut()) {
        *v = v.min(1.0);
    }
    Ok(res)
}

// ---------------------------------------------------------------------------
// Induced trace norm.
// ---------------------------------------------------------------------------

/// Lower-bound the (optionally energy-constrained) induced trace norm of
/// (channel - identity) by alternating between the input state and the
/// discrimination observable.
pub fn induced_trace_norm_lower(
    ch: &Channel,
    ec: Option<&EnergyConstraint>,
    settings: &SeesawSettings,
) -> Result<SeesawResult> {
    if ch.d_in() != ch.d_out() {
        return Err(Error::Dimension("induced trace norm needs d_in == d_out".into()));
    }
    let d = ch.d_in();
    let shape = SubsystemShape::new(vec![d])?;

    run_restarts(settings, false, |_r, seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank = rng.gen_range(1..d.max(2));
        let (p0, p1) = random_binary_povm(&mut rng, d, rank);
        let mut m = p0.sub(&p1);
        let mut tracker = TraceTracker::new(false);
        let mut best: Option<(ComplexMatrix, ComplexMatrix)> = None;
        loop {
            let h = ch.apply_adjoint_mat(&m).sub(&m).hermitize();
            let rho = match ec {
                None => {
                    let (evals, evecs) = h.eig_hermitian()?;
                    let mut top = 0;
                    for (i, &l) in evals.iter().enumerate() {
                        if l > evals[top] {
                            top = i;
                        }
                    }
                    let col = ComplexMatrix::from_fn(d, 1, |i, _| evecs[(i, top)]);
                    ComplexMatrix::outer(&col, &col)
                }
                Some(c) => {
                    let gk = c.ground();
                    let gp = ComplexMatrix::outer(gk, gk);
                    let mut p = SdpProblem::new(Sense::Maximize);
                    let rv = p.add_var("rho", d, VarKind::HermitianPsd);
                    p.add_obj_term(rv, h.clone())?;
                    p.add_eq(vec![(rv, ComplexMatrix::identity(d))], 1.0)?;
                    p.add_ge(vec![(rv, gp.clone())], 1.0 - c.omega())?;
                    p.add_ge(vec![(rv, ch.apply_adjoint_mat(&gp))], 1.0 - c.omega())?;
                    let sol = solve_block(&p, "state")?;
                    clean_state(&extract(&sol.assignments, "rho")?, &shape)?.mat().clone()
                }
            };
            let diff = ch.apply_mat(&rho).sub(&rho).hermitize();
            let (p_plus, value) = sign_projector(&diff)?;
            m = p_plus.scale_re(2.0).sub(&ComplexMatrix::identity(d));
            if tracker.record(value)? {
                best = Some((rho, m.clone()));
            }
            if tracker.done(settings.obj_tol, settings.max_rounds) {
                break;
            }
        }
        let (rho, m) = best.expect("at least one recorded round");
        let trace = tracker.into_trace();
        // re-audit
        let rho_dm = clean_state(&rho, &shape)?;
        if let Some(c) = ec {
            let gp = ComplexMatrix::outer(c.ground(), c.ground());
            if gp.inner_re(rho_dm.mat()) < 1.0 - c.omega() - AUDIT_TOL
                || gp.inner_re(&ch.apply_mat(rho_dm.mat())) < 1.0 - c.omega() - AUDIT_TOL
            {
                return Err(Error::Contract("audit: energy constraint violated".into()));
            }
        }
        let recomputed = ch.apply_mat(rho_dm.mat()).sub(rho_dm.mat()).trace_norm()?;
        let value = *trace.last().expect("nonempty trace");
        if (recomputed - value).abs() > AUDIT_TOL {
            return Err(Error::Contract("audit: reported value mismatch".into()));
        }
        let strategy = Strategy {
            states: vec![rho_dm.mat().clone()],
            povm: Vec::new(),
            chois: Vec::new(),
            observables: vec![m],
            ground: ec.map_or_else(|| ComplexMatrix::basis_ket(d, 0), |c| c.ground().clone()),
        };
        Ok((strategy, trace))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::kraus_from_choi;
    use crate::sampling::random_hermitian;
    use crate::scenario::classical_bound;
    use approx::assert_abs_diff_eq;

    fn quick(restarts: usize, seed: u64, dims: Vec<usize>) -> SeesawSettings {
        SeesawSettings {
            restarts,
            max_rounds: 80,
            obj_tol: 1e-9,
            seed,
            dims: SubsystemShape::new(dims).unwrap(),
        }
    }

    #[test]
    fn choi_helpers_agree_with_kraus() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let (d_in, d_out, d_m) = (2, 2, 3);
        let kraus = random_channel(&mut rng, d_in, d_out, 3);
        let j = choi_from_kraus(&kraus);
        let sigma = random_density(&mut rng, d_in * d_m);
        let w = random_hermitian(&mut rng, d_out * d_m);
        // direct application via Kraus on the left factor
        let mut direct = ComplexMatrix::zeros(d_out * d_m, d_out * d_m);
        let id_m = ComplexMatrix::identity(d_m);
        for k in &kraus {
            let kk = k.tensor(&id_m);
            direct = direct.add(&kk.matmul(&sigma).matmul(&kk.dagger()));
        }
        let via_choi = apply_choi_mem(&j, d_in, d_out, d_m, &sigma);
        assert!(direct.sub(&via_choi).max_abs() < 1e-12);
        let lhs = w.inner_re(&direct);
        let c = choi_coefficient(&w, &sigma, d_in, d_out, d_m);
        assert_abs_diff_eq!(lhs, c.inner_re(&j), epsilon = 1e-12);
        let g = choi_adjoint_mem(&j, d_in, d_out, d_m, &w);
        assert_abs_diff_eq!(lhs, g.inner_re(&sigma), epsilon = 1e-12);
        // memoryless special case
        let rho = random_density(&mut rng, d_in);
        let mut direct1 = ComplexMatrix::zeros(d_out, d_out);
        for k in &kraus {
            direct1 = direct1.add(&k.matmul(&rho).matmul(&k.dagger()));
        }
        assert!(direct1.sub(&apply_choi(&j, d_in, d_out, &rho)).max_abs() < 1e-12);
        // round trip through kraus_from_choi
        let kraus2 = kraus_from_choi(&j, d_in, d_out).unwrap();
        assert!(choi_from_kraus(&kraus2).sub(&j).max_abs() < 1e-9);
    }

    #[test]
    fn icorr_zero_energy_budget_collapses() {
        let res = maximize_icorr(0.0, &quick(2, 11, vec![2, 2])).unwrap();
        assert!(res.value.abs() < 1e-6, "value {}", res.value);
    }

    #[test]
    fn icorr_beats_classical_bound_with_injected_family() {
        let omega = 0.25;
        let res = maximize_icorr(omega, &quick(3, 13, vec![2, 2])).unwrap();
        let (family, _) = analytic::icorr_family(omega).unwrap();
        assert!(res.value >= family - 1e-6, "{} < {}", res.value, family);
        assert!(res.value > classical_bound(omega).unwrap());
        // monotone nondecreasing trace
        for w in res.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-8);
        }
    }

    #[test]
    fn icorr_larger_memory_does_not_hurt() {
        let omega = 0.25;
        let small = maximize_icorr(omega, &quick(3, 17, vec![2, 2])).unwrap();
        let large = maximize_icorr(omega, &quick(3, 17, vec![2, 3])).unwrap();
        assert!(large.value >= small.value - 1e-7, "{} < {}", large.value, small.value);
    }

    #[test]
    fn icorr_is_deterministic_across_runs() {
        let a = maximize_icorr(0.2, &quick(3, 23, vec![2, 2])).unwrap();
        let b = maximize_icorr(0.2, &quick(3, 23, vec![2, 2])).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.restart_values, b.restart_values);
        assert!(a.value.to_bits() == b.value.to_bits());
    }

    #[test]
    fn min_e1_zero_budget_forces_determinism() {
        let res = minimize_e1_deterministic(0.0, &quick(2, 29, vec![2, 2])).unwrap();
        assert!(res.value > 1.0 - 1e-4, "value {}", res.value);
    }

    #[test]
    fn min_e1_violates_separable_floor() {
        let res = minimize_e1_deterministic(0.2, &quick(8, 31, vec![2, 2])).unwrap();
        assert!(res.value < crate::scenario::idet_bound(0.2).unwrap(), "value {}", res.value);
        let res = minimize_e1_deterministic(0.45, &quick(8, 31, vec![2, 2])).unwrap();
        assert!(res.value < crate::scenario::idet_bound(0.45).unwrap(), "value {}", res.value);
        for w in res.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-8);
        }
    }

    #[test]
    fn guessing_trivial_witness_gives_certainty() {
        let res = guessing_probability_lower(0.2, 0.0, 0, &quick(3, 37, vec![2, 2])).unwrap();
        assert!(res.value > 1.0 - 1e-6, "value {}", res.value);
    }

    #[test]
    fn guessing_high_omega_reaches_one_at_classical_bound() {
        let omega = 0.35;
        let i_exp = classical_bound(omega).unwrap();
        // a qutrit memory is needed for the guessing probability to saturate
        let res = guessing_probability_lower(omega, i_exp, 0, &quick(4, 41, vec![2, 3])).unwrap();
        assert!(res.value >= 1.0 - 1e-3, "value {}", res.value);
        assert!(res.value <= 1.0, "value {}", res.value);
    }

    #[test]
    fn guessing_small_omega_stays_below_one() {
        let omega = 0.1;
        let i_exp = classical_bound(omega).unwrap();
        let res = guessing_probability_lower(omega, i_exp, 0, &quick(4, 43, vec![2, 2])).unwrap();
        assert!(res.value < 1.0 - 1e-3, "value {}", res.value);
        assert!(res.value >= 0.5);
    }

    #[test]
    fn guessing_monotone_in_witness() {
        let omega = 0.3;
        let max_i = classical_bound(omega).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..5 {
            let i_exp = max_i * k as f64 / 4.0;
            let res = guessing_probability_lower(omega, i_exp, 0, &quick(3, 47, vec![2, 2])).unwrap();
            assert!(res.value <= prev + 1e-6, "{} > {} at i_exp {}", res.value, prev, i_exp);
            prev = res.value;
        }
    }

    #[test]
    fn itn_identity_channel_is_zero() {
        let ch = Channel::identity(2);
        let res = induced_trace_norm_lower(&ch, None, &quick(2, 53, vec![2, 2])).unwrap();
        assert!(res.value.abs() < 1e-9);
    }

    #[test]
    fn itn_matches_unitary_closed_form() {
        for &theta in &[0.5, std::f64::consts::PI] {
            let u = ComplexMatrix::from_fn(2, 2, |i, j| {
                if i != j {
                    num_complex::Complex64::new(0.0, 0.0)
                } else if i == 0 {
                    num_complex::Complex64::new(1.0, 0.0)
                } else {
                    num_complex::Complex64::from_polar(1.0, theta)
                }
            });
            let ch = Channel::unitary(u.clone()).unwrap();
            let res = induced_trace_norm_lower(&ch, None, &quick(3, 59, vec![2, 2])).unwrap();
            // brute-force oracle over pure probe states
            let mut brute = 0.0f64;
            for a in 0..60 {
                let t = std::f64::consts::PI * a as f64 / 59.0;
                let psi = ComplexMatrix::from_vec_col(vec![
                    num_complex::Complex64::new((t / 2.0).cos(), 0.0),
                    num_complex::Complex64::new((t / 2.0).sin(), 0.0),
                ]);
                let rho = ComplexMatrix::outer(&psi, &psi);
                let d = ch.apply_mat(&rho).sub(&rho);
                brute = brute.max(d.trace_norm().unwrap());
            }
            let formula = 2.0 * (theta / 2.0).sin();
            assert_abs_diff_eq!(res.value, formula, epsilon = 1e-6);
            assert!(brute <= formula + 1e-6);
        }
    }

    #[test]
    fn itn_energy_constrained_family_channel() {
        let omega = 0.3;
        let (_, p_star) = analytic::icorr_family(omega).unwrap();
        let fp = analytic::make_family_point(omega, p_star).unwrap();
        let ch = analytic::channel_from_family(&fp).unwrap();
        let ec = EnergyConstraint::ground_zero(2, omega).unwrap();
        let free = induced_trace_norm_lower(&ch, None, &quick(3, 61, vec![2, 2])).unwrap();
        let constrained = induced_trace_norm_lower(&ch, Some(&ec), &quick(3, 61, vec![2, 2])).unwrap();
        assert!(constrained.value <= free.value + 1e-7);
        assert!(constrained.value > 0.0);
    }
}
