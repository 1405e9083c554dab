//! Python bindings for the energy-constrained prepare-and-measure toolkit.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ecpm::linalg::SubsystemShape;
use ecpm::quantum::EnergyConstraint;
use ecpm::seesaw::SeesawSettings;

fn err(e: ecpm::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn settings(dims: Vec<usize>, restarts: usize, seed: u64) -> PyResult<SeesawSettings> {
    Ok(SeesawSettings {
        restarts,
        seed,
        dims: SubsystemShape::new(dims).map_err(err)?,
        ..SeesawSettings::default()
    })
}

/// Separable correlation bound 4 sqrt(omega (1 - omega)).
#[pyfunction]
fn classical_bound(omega: f64) -> PyResult<f64> {
    ecpm::scenario::classical_bound(omega).map_err(err)
}

/// Deterministic-region floor 2 (1 - 2 omega)^2 - 1.
#[pyfunction]
fn idet_bound(omega: f64) -> PyResult<f64> {
    ecpm::scenario::idet_bound(omega).map_err(err)
}

/// Best correlation witness of the closed-form state family: (value, p_star).
#[pyfunction]
fn icorr_family(omega: f64) -> PyResult<(f64, f64)> {
    ecpm::analytic::icorr_family(omega).map_err(err)
}

/// Family parameters (a, b, q) at a given (omega, p).
#[pyfunction]
fn family_parameters(omega: f64, p: f64) -> PyResult<(f64, f64, f64)> {
    Ok(ecpm::analytic::make_family_point(omega, p).map_err(err)?.abq())
}

/// Seesaw maximization of the correlation witness over entangled strategies.
#[pyfunction]
#[pyo3(signature = (omega, dims=vec![2, 2], restarts=8, seed=0))]
fn maximize_icorr(omega: f64, dims: Vec<usize>, restarts: usize, seed: u64) -> PyResult<f64> {
    let s = settings(dims, restarts, seed)?;
    Ok(ecpm::seesaw::maximize_icorr(omega, &s).map_err(err)?.value)
}

/// Seesaw minimization of E_1 over strategies deterministic on input 0.
#[pyfunction]
#[pyo3(signature = (omega, restarts=8, seed=0))]
fn minimize_e1_deterministic(omega: f64, restarts: usize, seed: u64) -> PyResult<f64> {
    let s = settings(vec![2, 2], restarts, seed)?;
    Ok(ecpm::seesaw::minimize_e1_deterministic(omega, &s).map_err(err)?.value)
}

/// Adversarial guessing-probability lower bound at witness value iexp.
#[pyfunction]
#[pyo3(signature = (omega, iexp, xstar=0, dims=vec![2, 3], restarts=8, seed=0))]
fn guessing_probability_lower(
    omega: f64,
    iexp: f64,
    xstar: u8,
    dims: Vec<usize>,
    restarts: usize,
    seed: u64,
) -> PyResult<f64> {
    let s = settings(dims, restarts, seed)?;
    Ok(ecpm::seesaw::guessing_probability_lower(omega, iexp, xstar, &s).map_err(err)?.value)
}

/// Diamond norm of (family channel - identity) at the icorr-optimal p.
#[pyfunction]
fn diamond_norm_family(omega: f64) -> PyResult<f64> {
    let (_, p_star) = ecpm::analytic::icorr_family(omega).map_err(err)?;
    let fp = ecpm::analytic::make_family_point(omega, p_star).map_err(err)?;
    let ch = ecpm::analytic::channel_from_family(&fp).map_err(err)?;
    ecpm::discrimination::diamond_norm_vs_identity(&ch).map_err(err)
}

/// Moment-relaxation upper bound on the energy-constrained induced trace norm
/// of (family channel - identity).
#[pyfunction]
#[pyo3(signature = (omega, p, order=2))]
fn lasserre_itn_upper_family(omega: f64, p: f64, order: usize) -> PyResult<f64> {
    let fp = ecpm::analytic::make_family_point(omega, p).map_err(err)?;
    let ch = ecpm::analytic::channel_from_family(&fp).map_err(err)?;
    let ec = EnergyConstraint::ground_zero(2, omega).map_err(err)?;
    ecpm::discrimination::lasserre_itn_upper(&ch, &ec, order, true).map_err(err)
}

/// Advantage bounds at one energy bound: dict with p, upper, ec_lower, cap.
#[pyfunction]
#[pyo3(signature = (omega, order=2, restarts=8, seed=0))]
fn padv_point(omega: f64, order: usize, restarts: usize, seed: u64) -> PyResult<PyObject> {
    let s = settings(vec![2, 2], restarts, seed)?;
    let pt = ecpm::discrimination::padv_point(omega, order, &s).map_err(err)?;
    Python::with_gil(|py| {
        let d = pyo3::types::PyDict::new(py);
        d.set_item("omega", pt.omega)?;
        d.set_item("p", pt.p)?;
        d.set_item("upper", pt.upper)?;
        d.set_item("ec_lower", pt.ec_lower)?;
        d.set_item("cap", ecpm::discrimination::PADV_CAP)?;
        Ok(d.into())
    })
}

#[pymodule]
fn ecpm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(classical_bound, m)?)?;
    m.add_function(wrap_pyfunction!(idet_bound, m)?)?;
    m.add_function(wrap_pyfunction!(icorr_family, m)?)?;
    m.add_function(wrap_pyfunction!(family_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_icorr, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_e1_deterministic, m)?)?;
    m.add_function(wrap_pyfunction!(guessing_probability_lower, m)?)?;
    m.add_function(wrap_pyfunction!(diamond_norm_family, m)?)?;
    m.add_function(wrap_pyfunction!(lasserre_itn_upper_family, m)?)?;
    m.add_function(wrap_pyfunction!(padv_point, m)?)?;
    m.add("PADV_CAP", ecpm::discrimination::PADV_CAP)?;
    Ok(())
}
