//! Python bindings: protocol parameters, analytic and oracle states,
//! measures, mismatch averaging, sweeps and herald diagnostics.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hybridswap::measures::{self, MeasureSet};
use hybridswap::mismatch::{average_over_mismatch, MismatchSpec};
use hybridswap::protocol::{self, HeraldParams, ProtocolParams};
use hybridswap::sweep::{run_sweep, SweepSpec};
use hybridswap::{Complex, DensityMatrix};

fn to_py_err(e: hybridswap::Error) -> PyErr {
    match e {
        hybridswap::Error::OracleMismatch { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

type Matrix = Vec<Vec<Complex>>;

fn to_rows(rho: &DensityMatrix) -> Matrix {
    (0..rho.dim())
        .map(|i| (0..rho.dim()).map(|j| rho.entry(i, j)).collect())
        .collect()
}

fn from_rows(rows: Matrix) -> PyResult<DensityMatrix> {
    let dim = rows.len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(PyValueError::new_err("density matrix must be square"));
    }
    let flat: Vec<Complex> = rows.into_iter().flatten().collect();
    DensityMatrix::from_rows(dim, &flat).map_err(to_py_err)
}

fn measures_dict<'py>(py: Python<'py>, m: &MeasureSet) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("negativity", m.negativity)?;
    d.set_item("fidelity", m.fidelity)?;
    d.set_item("linear_entropy", m.linear_entropy)?;
    d.set_item("success_prob", m.success_prob)?;
    Ok(d)
}

/// Protocol knobs: amplitude, channel transmission, mismatch and homodyne setting.
#[pyclass(name = "Params", from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: ProtocolParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (alpha, transmission = 1.0, delta = 0.0, x = 0.0, theta = std::f64::consts::FRAC_PI_2, phase_corrected = true, swap_channels = false))]
    fn new(
        alpha: f64,
        transmission: f64,
        delta: f64,
        x: f64,
        theta: f64,
        phase_corrected: bool,
        swap_channels: bool,
    ) -> PyResult<Self> {
        let mut inner = ProtocolParams::new(alpha, transmission, delta).with_outcome(x);
        inner.theta = theta;
        inner.phase_corrected = phase_corrected;
        inner.swap_channels = swap_channels;
        inner.validate().map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn transmission(&self) -> f64 {
        self.inner.transmission
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn x(&self) -> f64 {
        self.inner.x
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn phase_corrected(&self) -> bool {
        self.inner.phase_corrected
    }

    /// `(T_B, T_D)` actually applied to the two channels.
    fn channels(&self) -> (f64, f64) {
        self.inner.channels()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "Params(alpha={}, transmission={}, delta={}, x={}, theta={}, phase_corrected={})",
            p.alpha,
            p.transmission,
            p.delta,
            p.x,
            p.theta,
            if p.phase_corrected { "True" } else { "False" }
        )
    }
}

/// Closed-form `ρ_AC` as a 4×4 nested list in the basis 00, 01, 10, 11.
#[pyfunction]
fn density(params: PyParams) -> PyResult<Matrix> {
    Ok(to_rows(
        &protocol::protocol_density(&params.inner).map_err(to_py_err)?,
    ))
}

/// `ρ_AC` rebuilt by the truncated Fock-space circuit simulation.
#[pyfunction]
fn oracle_density(params: PyParams) -> PyResult<Matrix> {
    Ok(to_rows(
        &protocol::oracle_density(&params.inner).map_err(to_py_err)?,
    ))
}

/// Mismatch-averaged state; returns `(rho, captured_weight, success_prob)`.
#[pyfunction]
#[pyo3(signature = (params, width, quad_points = 64, oracle = false))]
fn averaged_density(
    params: PyParams,
    width: f64,
    quad_points: usize,
    oracle: bool,
) -> PyResult<(Matrix, f64, f64)> {
    let spec = MismatchSpec::new(width).with_quad_points(quad_points);
    let avg = if oracle {
        average_over_mismatch(&params.inner, &spec, protocol::oracle_density)
    } else {
        average_over_mismatch(&params.inner, &spec, protocol::protocol_density)
    }
    .map_err(to_py_err)?;
    Ok((to_rows(&avg.density), avg.captured_weight, avg.success_prob))
}

#[pyfunction]
fn success_probability(params: PyParams) -> PyResult<f64> {
    protocol::success_probability(&params.inner).map_err(to_py_err)
}

/// All figures of merit at one point, averaged over a mismatch of width `width`.
#[pyfunction]
#[pyo3(signature = (params, width = 0.0))]
fn evaluate<'py>(py: Python<'py>, params: PyParams, width: f64) -> PyResult<Bound<'py, PyDict>> {
    let avg = average_over_mismatch(
        &params.inner,
        &MismatchSpec::new(width),
        protocol::protocol_density,
    )
    .map_err(to_py_err)?;
    let m = MeasureSet::of(&avg.density, avg.success_prob).map_err(to_py_err)?;
    measures_dict(py, &m)
}

#[pyfunction]
fn negativity(rho: Matrix) -> PyResult<f64> {
    measures::negativity(&from_rows(rho)?).map_err(to_py_err)
}

/// Fidelity with `|Φ+⟩ = (|00⟩ + |11⟩)/√2`.
#[pyfunction]
fn fidelity(rho: Matrix) -> PyResult<f64> {
    measures::fidelity(&from_rows(rho)?, &measures::phi_plus()).map_err(to_py_err)
}

#[pyfunction]
fn linear_entropy(rho: Matrix) -> PyResult<f64> {
    Ok(measures::linear_entropy(&from_rows(rho)?))
}

#[pyfunction]
fn trace_distance(a: Matrix, b: Matrix) -> PyResult<f64> {
    from_rows(a)?
        .trace_distance(&from_rows(b)?)
        .map_err(to_py_err)
}

/// Grid sweep; returns one dict per point in `α`-major order.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (alpha_start, alpha_stop, alpha_step, transmissions, widths = vec![0.0], fixed_delta = None, oracle_check = false))]
fn sweep<'py>(
    py: Python<'py>,
    alpha_start: f64,
    alpha_stop: f64,
    alpha_step: f64,
    transmissions: Vec<f64>,
    widths: Vec<f64>,
    fixed_delta: Option<f64>,
    oracle_check: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let spec = SweepSpec {
        alpha_start,
        alpha_stop,
        alpha_step,
        transmissions,
        widths,
        fixed_delta,
        oracle_check,
        ..SweepSpec::default()
    };
    let records = py.detach(|| run_sweep(&spec)).map_err(to_py_err)?;
    records
        .iter()
        .map(|r| {
            let d = measures_dict(py, &r.measures())?;
            d.set_item("alpha", r.alpha)?;
            d.set_item("T", r.transmission)?;
            d.set_item("Delta", r.delta)?;
            Ok(d)
        })
        .collect()
}

/// Heralded preparation: probability, qubit populations and target overlap.
#[pyfunction]
#[pyo3(signature = (p_c, eta, alpha, outcome = 1, beta = None))]
fn herald<'py>(
    py: Python<'py>,
    p_c: f64,
    eta: f64,
    alpha: f64,
    outcome: usize,
    beta: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let h = HeraldParams {
        p_c,
        eta,
        alpha,
        herald_outcome: outcome,
    };
    let out = protocol::herald_hybrid_state(&h).map_err(to_py_err)?;
    let rho_a = out.state.partial_trace(&[1]).map_err(to_py_err)?;
    let overlap =
        protocol::herald_target_overlap(&out, beta.unwrap_or(alpha)).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("probability", out.probability)?;
    d.set_item("population_g", rho_a.entry(0, 0).re)?;
    d.set_item("population_w", rho_a.entry(1, 1).re)?;
    d.set_item("target_overlap", overlap)?;
    Ok(d)
}

/// Runs the self-checks; returns `(name, passed, detail)` tuples.
#[pyfunction]
fn verify(py: Python<'_>) -> Vec<(String, bool, String)> {
    py.detach(hybridswap::verify::run_checks)
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed, c.detail))
        .collect()
}

#[pymodule]
fn pyhybridswap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_density, m)?)?;
    m.add_function(wrap_pyfunction!(averaged_density, m)?)?;
    m.add_function(wrap_pyfunction!(success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(negativity, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(linear_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(herald, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("CSV_HEADER", hybridswap::sweep::CSV_HEADER)?;
    Ok(())
}
