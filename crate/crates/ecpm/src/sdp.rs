//! Solver-agnostic semidefinite programming over Hermitian matrix variables.
//!
//! Problems are declared with complex Hermitian variables, linear scalar
//! constraints and a linear objective. Lowering parametrizes each d x d
//! Hermitian variable by its d^2 real degrees of freedom and imposes
//! positivity through the real symmetric embedding [[Re, -Im], [Im, Re]] on a
//! real conic backend. One backend (Clarabel) is provided; `ECPM_SOLVER`
//! selects by name.

use std::collections::HashMap;
use std::fmt::Write as _;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    HermitianPsd,
    HermitianFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Eq,
    Ge,
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarId(usize);

#[derive(Debug, Clone)]
struct VarDecl {
    name: String,
    dim: usize,
    kind: VarKind,
    offset: usize,
}

/// One scalar constraint sum_k Re Tr[C_k X_k] (=, >=, <=) rhs.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    terms: Vec<(VarId, ComplexMatrix)>,
    rhs: f64,
    kind: ConstraintKind,
}

/// Semidefinite program over named Hermitian variables.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    sense: Sense,
    vars: Vec<VarDecl>,
    n_params: usize,
    obj_terms: Vec<(VarId, ComplexMatrix)>,
    obj_const: f64,
    constraints: Vec<LinearConstraint>,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub value: f64,
    pub assignments: HashMap<String, ComplexMatrix>,
    pub solver_gap: f64,
}

#[derive(Debug, Clone)]
pub struct SolverSettings {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { feas_tol: 1e-8, gap_tol: 1e-8, max_iter: 200, verbose: false }
    }
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            vars: Vec::new(),
            n_params: 0,
            obj_terms: Vec::new(),
            obj_const: 0.0,
            constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, dim: usize, kind: VarKind) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(VarDecl { name: name.into(), dim, kind, offset: self.n_params });
        self.n_params += dim * dim;
        id
    }

    fn check_term(&self, var: VarId, c: &ComplexMatrix) -> Result<()> {
        let decl = self
            .vars
            .get(var.0)
            .ok_or_else(|| Error::Contract("undeclared variable referenced".into()))?;
        if c.rows() != decl.dim || c.cols() != decl.dim {
            return Err(Error::Dimension(format!(
                "coefficient {}x{} for variable {} of dim {}",
                c.rows(),
                c.cols(),
                decl.name,
                decl.dim
            )));
        }
        Ok(())
    }

    pub fn add_obj_term(&mut self, var: VarId, c: ComplexMatrix) -> Result<()> {
        self.check_term(var, &c)?;
        self.obj_terms.push((var, c));
        Ok(())
    }

    pub fn add_obj_const(&mut self, c: f64) {
        self.obj_const += c;
    }

    pub fn add_constraint(
        &mut self,
        kind: ConstraintKind,
        terms: Vec<(VarId, ComplexMatrix)>,
        rhs: f64,
    ) -> Result<()> {
        for (v, c) in &terms {
            self.check_term(*v, c)?;
        }
        self.constraints.push(LinearConstraint { terms, rhs, kind });
        Ok(())
    }

    pub fn add_eq(&mut self, terms: Vec<(VarId, ComplexMatrix)>, rhs: f64) -> Result<()> {
        self.add_constraint(ConstraintKind::Eq, terms, rhs)
    }

    pub fn add_ge(&mut self, terms: Vec<(VarId, ComplexMatrix)>, rhs: f64) -> Result<()> {
        self.add_constraint(ConstraintKind::Ge, terms, rhs)
    }

    pub fn add_le(&mut self, terms: Vec<(VarId, ComplexMatrix)>, rhs: f64) -> Result<()> {
        self.add_constraint(ConstraintKind::Le, terms, rhs)
    }

    /// Real linear-functional coefficients of Re Tr[C X] in the parameter
    /// order (diag entries, then re/im of each upper off-diagonal).
    fn functional_coeffs(decl: &VarDecl, c: &ComplexMatrix) -> Vec<(usize, f64)> {
        let d = decl.dim;
        let mut out = Vec::new();
        let mut t = decl.offset;
        for i in 0..d {
            let g = c[(i, i)].re;
            if g != 0.0 {
                out.push((t, g));
            }
            t += 1;
        }
        for i in 0..d {
            for j in (i + 1)..d {
                // X_ij = re + i*im contributes through C_ji and C_ij
                let re_g = c[(i, j)].re + c[(j, i)].re;
                let im_g = c[(i, j)].im - c[(j, i)].im;
                if re_g != 0.0 {
                    out.push((t, re_g));
                }
                if im_g != 0.0 {
                    out.push((t + 1, im_g));
                }
                t += 2;
            }
        }
        out
    }

    /// Hermitian basis element for parameter index `t` (relative to the
    /// variable), matching [`functional_coeffs`].
    fn basis_element(dim: usize, t: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim, dim);
        if t < dim {
            m[(t, t)] = Complex64::new(1.0, 0.0);
            return m;
        }
        let mut k = dim;
        for i in 0..dim {
            for j in (i + 1)..dim {
                if t == k {
                    m[(i, j)] = Complex64::new(1.0, 0.0);
                    m[(j, i)] = Complex64::new(1.0, 0.0);
                    return m;
                }
                if t == k + 1 {
                    m[(i, j)] = Complex64::new(0.0, 1.0);
                    m[(j, i)] = Complex64::new(0.0, -1.0);
                    return m;
                }
                k += 2;
            }
        }
        unreachable!("parameter index out of range")
    }

    fn unpack_var(decl: &VarDecl, x: &[f64]) -> ComplexMatrix {
        let d = decl.dim;
        let mut m = ComplexMatrix::zeros(d, d);
        let mut t = decl.offset;
        for i in 0..d {
            m[(i, i)] = Complex64::new(x[t], 0.0);
            t += 1;
        }
        for i in 0..d {
            for j in (i + 1)..d {
                m[(i, j)] = Complex64::new(x[t], x[t + 1]);
                m[(j, i)] = Complex64::new(x[t], -x[t + 1]);
                t += 2;
            }
        }
        m
    }

    /// Lowers to a real conic problem and solves it.
    pub fn solve(&self, settings: &SolverSettings) -> Result<SdpSolution> {
        let mut conic = ConicProblem::new(self.n_params);

        // objective (conic layer always minimizes)
        let sign = match self.sense {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        };
        for (v, c) in &self.obj_terms {
            for (t, g) in Self::functional_coeffs(&self.vars[v.0], c) {
                conic.q[t] += sign * g;
            }
        }

        // scalar constraints: zero cone then nonnegative cone
        for lc in self.constraints.iter().filter(|c| c.kind == ConstraintKind::Eq) {
            conic.push_zero(self.lower_row(lc), lc.rhs);
        }
        for lc in self.constraints.iter().filter(|c| c.kind != ConstraintKind::Eq) {
            let row = self.lower_row(lc);
            match lc.kind {
                // a.x >= rhs  ->  s = a.x - rhs >= 0
                ConstraintKind::Ge => conic.push_nonneg(negate(row), -lc.rhs),
                ConstraintKind::Le => conic.push_nonneg(row, lc.rhs),
                ConstraintKind::Eq => unreachable!(),
            }
        }

        // PSD cones: embed(X) >= 0 per PSD variable
        for decl in self.vars.iter().filter(|v| v.kind == VarKind::HermitianPsd) {
            let d = decl.dim;
            let embeds: Vec<Vec<f64>> = (0..d * d)
                .map(|t| Self::basis_element(d, t).real_embedding_raw())
                .collect();
            let n2 = 2 * d;
            let mut rows = Vec::new();
            for c in 0..n2 {
                for r in 0..=c {
                    let scale = if r == c { 1.0 } else { std::f64::consts::SQRT_2 };
                    let mut coeffs = Vec::new();
                    for (t, e) in embeds.iter().enumerate() {
                        let v = e[r * n2 + c];
                        if v != 0.0 {
                            coeffs.push((decl.offset + t, -scale * v));
                        }
                    }
                    rows.push((coeffs, 0.0));
                }
            }
            conic.push_psd(n2, rows);
        }

        let sol = conic.solve(settings)?;
        let value = match self.sense {
            Sense::Maximize => -sol.value + self.obj_const,
            Sense::Minimize => sol.value + self.obj_const,
        };
        let mut assignments = HashMap::new();
        if matches!(sol.status, SdpStatus::Optimal | SdpStatus::NumericalTrouble) {
            for decl in &self.vars {
                assignments.insert(decl.name.clone(), Self::unpack_var(decl, &sol.x));
            }
        }
        Ok(SdpSolution { status: sol.status, value, assignments, solver_gap: sol.gap })
    }

    fn lower_row(&self, lc: &LinearConstraint) -> Vec<(usize, f64)> {
        let mut acc: HashMap<usize, f64> = HashMap::new();
        for (v, c) in &lc.terms {
            for (t, g) in Self::functional_coeffs(&self.vars[v.0], c) {
                *acc.entry(t).or_insert(0.0) += g;
            }
        }
        let mut row: Vec<(usize, f64)> = acc.into_iter().filter(|&(_, g)| g != 0.0).collect();
        row.sort_by_key(|&(t, _)| t);
        row
    }

    /// Human-readable dump, one constraint per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let sense = match self.sense {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        };
        let _ = writeln!(s, "{sense}  sum_k Tr[C_k X_k] + {}", self.obj_const);
        for decl in &self.vars {
            let kind = match decl.kind {
                VarKind::HermitianPsd => "hermitian_psd",
                VarKind::HermitianFree => "hermitian_free",
            };
            let _ = writeln!(s, "var {} dim {} {}", decl.name, decl.dim, kind);
        }
        for (v, c) in &self.obj_terms {
            let _ = writeln!(s, "obj_term {} {}", self.vars[v.0].name, fmt_mat(c));
        }
        for lc in &self.constraints {
            let op = match lc.kind {
                ConstraintKind::Eq => "==",
                ConstraintKind::Ge => ">=",
                ConstraintKind::Le => "<=",
            };
            let terms: Vec<String> = lc
                .terms
                .iter()
                .map(|(v, c)| format!("Tr[{} . {}]", fmt_mat(c), self.vars[v.0].name))
                .collect();
            let _ = writeln!(s, "{} {} {}", terms.join(" + "), op, lc.rhs);
        }
        s
    }
}

fn fmt_mat(c: &ComplexMatrix) -> String {
    let mut parts = Vec::new();
    for i in 0..c.rows() {
        for j in 0..c.cols() {
            let z = c[(i, j)];
            if z.norm() > 0.0 {
                parts.push(format!("({i},{j})={:.6}{:+.6}i", z.re, z.im));
            }
        }
    }
    format!("[{}]", parts.join(" "))
}

fn negate(row: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    row.into_iter().map(|(t, g)| (t, -g)).collect()
}

// ---------------------------------------------------------------------------
// real conic layer
// ---------------------------------------------------------------------------

enum ConeSpec {
    PsdTriangle(usize),
}

static DUMP_DIR: std::sync::Mutex<Option<std::path::PathBuf>> = std::sync::Mutex::new(None);
static DUMP_COUNTER: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);

/// Route every subsequently solved conic problem to a plain-text dump file in
/// `dir` (numbered in solve order); `None` turns dumping off again.
pub fn set_dump_dir(dir: Option<std::path::PathBuf>) {
    *DUMP_DIR.lock().unwrap() = dir;
}

fn dump_dir() -> Option<std::path::PathBuf> {
    DUMP_DIR.lock().unwrap().clone()
}

/// Real conic program: min q.x  s.t.  A x + s = b, s in K.
/// Rows are stored as sparse (col, coeff) lists in cone order.
pub struct ConicProblem {
    n: usize,
    pub q: Vec<f64>,
    rows: Vec<(Vec<(usize, f64)>, f64)>,
    cones: Vec<ConeSpec>,
    n_zero: usize,
    n_nonneg: usize,
}

pub struct ConicSolution {
    pub status: SdpStatus,
    pub x: Vec<f64>,
    pub value: f64,
    pub gap: f64,
}

impl ConicProblem {
    pub fn new(n: usize) -> Self {
        Self { n, q: vec![0.0; n], rows: Vec::new(), cones: Vec::new(), n_zero: 0, n_nonneg: 0 }
    }

    /// a.x = rhs (rows must be pushed before any nonneg / PSD rows).
    pub fn push_zero(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        assert!(self.n_nonneg == 0 && self.cones.is_empty(), "zero rows must come first");
        self.rows.push((coeffs, rhs));
        self.n_zero += 1;
    }

    /// s = rhs - a.x >= 0 (pushed after zero rows, before PSD blocks).
    pub fn push_nonneg(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        assert!(self.cones.is_empty(), "nonneg rows must precede PSD blocks");
        self.rows.push((coeffs, rhs));
        self.n_nonneg += 1;
    }

    /// PSD triangle block of a `dim` x `dim` symmetric matrix; rows are svec
    /// entries in Clarabel's column-major upper-triangle order.
    pub fn push_psd(&mut self, dim: usize, rows: Vec<(Vec<(usize, f64)>, f64)>) {
        assert_eq!(rows.len(), dim * (dim + 1) / 2);
        self.rows.extend(rows);
        self.cones.push(ConeSpec::PsdTriangle(dim));
    }

    /// Rows belonging to PSD blocks, in push order.
    pub fn psd_rows(&self) -> &[(Vec<(usize, f64)>, f64)] {
        &self.rows[self.n_zero + self.n_nonneg..]
    }

    /// Dimensions of the pushed PSD blocks, in order.
    pub fn psd_dims(&self) -> impl Iterator<Item = usize> + '_ {
        self.cones.iter().map(|ConeSpec::PsdTriangle(d)| *d)
    }

    pub fn solve(&self, settings: &SolverSettings) -> Result<ConicSolution> {
        if let Some(dir) = dump_dir() {
            self.dump_to(&dir)?;
        }
        let backend = std::env::var("ECPM_SOLVER").unwrap_or_else(|_| "clarabel".into());
        match backend.as_str() {
            "clarabel" => {
                let sol = self.solve_clarabel(settings)?;
                if sol.status != SdpStatus::NumericalTrouble {
                    return Ok(sol);
                }
                // Problems whose feasible set has an empty interior (e.g. an
                // energy constraint saturated at a rank-deficient state) can
                // stall the interior-point iteration just short of the target
                // tolerances.  Retry once with relaxed tolerances and accept
                // the result if the solver then converges cleanly.
                let relaxed = SolverSettings {
                    feas_tol: settings.feas_tol.max(1e-6),
                    gap_tol: settings.gap_tol.max(1e-6),
                    ..settings.clone()
                };
                let retry = self.solve_clarabel(&relaxed)?;
                if retry.status == SdpStatus::Optimal { Ok(retry) } else { Ok(sol) }
            }
            other => Err(Error::Solver(format!("unknown solver backend '{other}'"))),
        }
    }

    fn dump_to(&self, dir: &std::path::Path) -> Result<()> {
        use std::fmt::Write as _;
        let id = DUMP_COUNTER.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        let mut s = String::new();
        let _ = writeln!(s, "min q.x  s.t.  A x + s = b, s in K");
        let _ = writeln!(s, "n = {}  zero = {}  nonneg = {}", self.n, self.n_zero, self.n_nonneg);
        let psd: Vec<usize> = self.psd_dims().collect();
        let _ = writeln!(s, "psd blocks = {psd:?}");
        let _ = writeln!(s, "q = {:?}", self.q);
        for (coeffs, rhs) in &self.rows {
            let _ = writeln!(s, "row {coeffs:?} rhs {rhs}");
        }
        let path = dir.join(format!("sdp_{id:05}.txt"));
        std::fs::write(&path, s)
            .map_err(|e| Error::Solver(format!("sdp dump to {}: {e}", path.display())))
    }

    fn solve_clarabel(&self, settings: &SolverSettings) -> Result<ConicSolution> {
        let m = self.rows.len();
        // triplets -> CSC
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        let mut b = vec![0.0; m];
        for (r, (coeffs, rhs)) in self.rows.iter().enumerate() {
            b[r] = *rhs;
            for &(c, v) in coeffs {
                cols[c].push((r, v));
            }
        }
        let mut colptr = Vec::with_capacity(self.n + 1);
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        colptr.push(0);
        for col in &mut cols {
            col.sort_by_key(|&(r, _)| r);
            for &(r, v) in col.iter() {
                rowval.push(r);
                nzval.push(v);
            }
            colptr.push(rowval.len());
        }
        let a = CscMatrix::new(m, self.n, colptr, rowval, nzval);
        let p = CscMatrix::zeros((self.n, self.n));

        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        if self.n_zero > 0 {
            cones.push(SupportedConeT::ZeroConeT(self.n_zero));
        }
        if self.n_nonneg > 0 {
            cones.push(SupportedConeT::NonnegativeConeT(self.n_nonneg));
        }
        for c in &self.cones {
            let ConeSpec::PsdTriangle(d) = c;
            cones.push(SupportedConeT::PSDTriangleConeT(*d));
        }

        let clarabel_settings = DefaultSettingsBuilder::default()
            .verbose(settings.verbose)
            .max_iter(settings.max_iter)
            .tol_feas(settings.feas_tol)
            .tol_gap_abs(settings.gap_tol)
            .tol_gap_rel(settings.gap_tol)
            .build()
            .map_err(|e| Error::Solver(format!("settings: {e:?}")))?;

        let mut solver = DefaultSolver::new(&p, &self.q, &a, &b, &cones, clarabel_settings)
            .map_err(|e| Error::Solver(format!("setup: {e:?}")))?;
        // the solver can panic on pathological iterates (e.g. eigensolver
        // failures deep in the cone code); treat that as a solver error
        // instead of tearing down the process
        std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| solver.solve()))
            .map_err(|_| Error::Solver("solver panicked".into()))?;

        let status = match solver.solution.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => SdpStatus::Optimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                SdpStatus::Infeasible
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                SdpStatus::Unbounded
            }
            _ => SdpStatus::NumericalTrouble,
        };
        Ok(ConicSolution {
            status,
            x: solver.solution.x.clone(),
            value: solver.solution.obj_val,
            gap: (solver.solution.obj_val - solver.solution.obj_val_dual).abs(),
        })
    }
}
