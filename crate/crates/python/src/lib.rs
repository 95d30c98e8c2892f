//! Python bindings: parameters, states, steady-state search, dynamics, sweeps
//! and the command-line runner.

use bistab_core::dynamics::{self, ControlPath, HysteresisOptions, IntegratorOptions, Sampling, SettleOptions};
use bistab_core::observables::{purity_proxy, transmittance_approx, transmittance_exact};
use bistab_core::sweep::{self, AngleConvention};
use bistab_core::{model, steady_state, BistabError};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: BistabError) -> PyErr {
    match e {
        BistabError::InvalidParams(_) | BistabError::Config { .. } | BistabError::ZeroDrive(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn mode_of(mode: u8) -> PyResult<model::Mode> {
    match mode {
        1 => Ok(model::Mode::One),
        2 => Ok(model::Mode::Two),
        _ => Err(PyValueError::new_err(format!("mode must be 1 or 2, got {mode}"))),
    }
}

fn convention_of(name: &str) -> PyResult<AngleConvention> {
    AngleConvention::parse(name)
        .ok_or_else(|| PyValueError::new_err(format!("convention must be from-vertical or from-axis-1, got {name}")))
}

/// Model parameters in units of the atomic linewidth.
#[pyclass(name = "SystemParams", module = "bistab")]
#[derive(Clone)]
pub struct PySystemParams {
    inner: model::SystemParams,
}

#[pymethods]
impl PySystemParams {
    /// Baseline model: κ = 1.32, Γ = 1, g = 0.1, Δ_A = −12, Δ_C = 0.
    #[new]
    #[pyo3(signature = (atom_number = 5000.0, eta1 = 0.0, eta2 = 0.0))]
    fn new(atom_number: f64, eta1: f64, eta2: f64) -> Self {
        PySystemParams { inner: model::SystemParams::baseline(atom_number, eta1, eta2) }
    }

    /// Copy with one or more fields replaced, e.g. `p.replace(kappa1=2.0)`.
    #[pyo3(signature = (**kwargs))]
    fn replace(&self, kwargs: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let mut p = self.inner;
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                let v: f64 = v.extract()?;
                let slot = match key.as_str() {
                    "gamma1" => &mut p.gamma1,
                    "gamma2" => &mut p.gamma2,
                    "cross_decay1" => &mut p.cross_decay1,
                    "cross_decay2" => &mut p.cross_decay2,
                    "kappa1" => &mut p.kappa1,
                    "kappa2" => &mut p.kappa2,
                    "g_single" => &mut p.g_single,
                    "atom_number" => &mut p.atom_number,
                    "delta_a1" => &mut p.delta_a1,
                    "delta_a2" => &mut p.delta_a2,
                    "delta_c1" => &mut p.delta_c1,
                    "delta_c2" => &mut p.delta_c2,
                    "eta1" => &mut p.eta1,
                    "eta2" => &mut p.eta2,
                    _ => return Err(PyValueError::new_err(format!("unknown parameter {key}"))),
                };
                *slot = v;
            }
        }
        Ok(PySystemParams { inner: p })
    }

    #[getter]
    fn atom_number(&self) -> f64 {
        self.inner.atom_number
    }
    #[getter]
    fn eta1(&self) -> f64 {
        self.inner.eta1
    }
    #[getter]
    fn eta2(&self) -> f64 {
        self.inner.eta2
    }
    #[getter]
    fn kappa1(&self) -> f64 {
        self.inner.kappa1
    }
    #[getter]
    fn kappa2(&self) -> f64 {
        self.inner.kappa2
    }
    #[getter]
    fn g_single(&self) -> f64 {
        self.inner.g_single
    }
    #[getter]
    fn delta_a1(&self) -> f64 {
        self.inner.delta_a1
    }
    #[getter]
    fn delta_a2(&self) -> f64 {
        self.inner.delta_a2
    }
    #[getter]
    fn cross_decay1(&self) -> f64 {
        self.inner.cross_decay1
    }
    #[getter]
    fn cross_decay2(&self) -> f64 {
        self.inner.cross_decay2
    }

    /// Collective coupling `g_single·√N`.
    fn coupling(&self) -> f64 {
        self.inner.coupling()
    }

    fn cooperativity(&self, mode: u8) -> PyResult<f64> {
        Ok(model::cooperativity(&self.inner, mode_of(mode)?))
    }

    /// List of violated constraints; empty when valid.
    fn validate(&self) -> Vec<String> {
        model::validate(&self.inner).violations
    }

    fn swapped(&self) -> Self {
        PySystemParams { inner: self.inner.swapped() }
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Mean-field state: complex fields and polarizations, four populations.
#[pyclass(name = "MeanFieldState", module = "bistab")]
#[derive(Clone)]
pub struct PyState {
    inner: model::MeanFieldState,
}

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (alpha1 = Complex64::new(0.0, 0.0), alpha2 = Complex64::new(0.0, 0.0), m1 = Complex64::new(0.0, 0.0), m2 = Complex64::new(0.0, 0.0), ne1 = 0.0, ng1 = 1.0, ne2 = 0.0, ng2 = 0.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(alpha1: Complex64, alpha2: Complex64, m1: Complex64, m2: Complex64, ne1: f64, ng1: f64, ne2: f64, ng2: f64) -> Self {
        PyState { inner: model::MeanFieldState { alpha1, alpha2, m1, m2, ne1, ng1, ne2, ng2 } }
    }

    #[getter]
    fn alpha1(&self) -> Complex64 {
        self.inner.alpha1
    }
    #[getter]
    fn alpha2(&self) -> Complex64 {
        self.inner.alpha2
    }
    #[getter]
    fn m1(&self) -> Complex64 {
        self.inner.m1
    }
    #[getter]
    fn m2(&self) -> Complex64 {
        self.inner.m2
    }
    #[getter]
    fn ne1(&self) -> f64 {
        self.inner.ne1
    }
    #[getter]
    fn ng1(&self) -> f64 {
        self.inner.ng1
    }
    #[getter]
    fn ne2(&self) -> f64 {
        self.inner.ne2
    }
    #[getter]
    fn ng2(&self) -> f64 {
        self.inner.ng2
    }

    fn population_sum(&self) -> f64 {
        self.inner.population_sum()
    }

    /// Max-norm distance to another state.
    fn distance(&self, other: &PyState) -> f64 {
        self.inner.distance(&other.inner)
    }

    /// Time derivative of this state under `params`.
    fn rhs(&self, params: &PySystemParams) -> Self {
        PyState { inner: model::rhs(&self.inner, &params.inner) }
    }

    /// The 12 real components in fixed order.
    fn to_list(&self) -> Vec<f64> {
        self.inner.to_real().iter().copied().collect()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// A refined, classified fixed point.
#[pyclass(name = "SteadyState", module = "bistab")]
#[derive(Clone)]
pub struct PySteadyState {
    inner: steady_state::SteadyState,
}

#[pymethods]
impl PySteadyState {
    #[getter]
    fn state(&self) -> PyState {
        PyState { inner: self.inner.state }
    }
    #[getter]
    fn stable(&self) -> bool {
        self.inner.stable
    }
    #[getter]
    fn marginal(&self) -> bool {
        self.inner.marginal
    }
    #[getter]
    fn residual_norm(&self) -> f64 {
        self.inner.residual_norm
    }
    #[getter]
    fn spectrum_max_real(&self) -> f64 {
        self.inner.spectrum_max_real
    }
    #[getter]
    fn x1(&self) -> f64 {
        self.inner.x1
    }
    #[getter]
    fn x2(&self) -> f64 {
        self.inner.x2
    }

    /// `κ²|α|²/η²` for mode 1 or 2.
    fn transmittance(&self, params: &PySystemParams, mode: u8) -> PyResult<f64> {
        transmittance_exact(&self.inner, &params.inner, mode_of(mode)?).map_err(to_py)
    }

    /// Large-detuning estimate `1/(1 + C²x²)` at this state's inversion.
    fn transmittance_approx(&self, params: &PySystemParams, mode: u8) -> PyResult<f64> {
        let mode = mode_of(mode)?;
        let x = self.inner.state.inversion(mode);
        Ok(transmittance_approx(x, &params.inner, mode))
    }

    fn purity_proxy(&self) -> f64 {
        purity_proxy(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "SteadyState(x1={}, x2={}, stable={}, residual={:e})",
            self.inner.x1, self.inner.x2, self.inner.stable, self.inner.residual_norm
        )
    }
}

/// Every physical fixed point, sorted by inversion of transition 1.
#[pyfunction]
fn find_all_roots(params: &PySystemParams) -> PyResult<Vec<PySteadyState>> {
    let set = steady_state::find_all_roots(&params.inner).map_err(to_py)?;
    Ok(set.solutions.into_iter().map(|inner| PySteadyState { inner }).collect())
}

/// Coefficients of the degree-7 polynomial in the inversion of transition 1,
/// constant term first.
#[pyfunction]
fn polynomial_in_x1(params: &PySystemParams) -> PyResult<Vec<f64>> {
    steady_state::polynomial_in_x1(&params.inner).map_err(to_py)
}

/// All-ground state on transition 1 or 2.
#[pyfunction]
fn ground_state(mode: u8) -> PyResult<PyState> {
    Ok(PyState { inner: model::MeanFieldState::ground(mode_of(mode)?) })
}

/// Random physical state drawn with a fixed seed.
#[pyfunction]
fn random_state(params: &PySystemParams, seed: u64) -> PyState {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    PyState { inner: steady_state::random_physical_state(&params.inner, &mut rng) }
}

/// Integrates to `t_end`, sampling at `times` (default: every accepted step).
#[pyfunction]
#[pyo3(signature = (state0, params, t_end, times = None, rel_tol = 1e-10, abs_tol = 1e-10))]
fn integrate(
    py: Python<'_>,
    state0: &PyState,
    params: &PySystemParams,
    t_end: f64,
    times: Option<Vec<f64>>,
    rel_tol: f64,
    abs_tol: f64,
) -> PyResult<(Vec<f64>, Vec<PyState>)> {
    let opts = IntegratorOptions::with_tolerances(rel_tol, abs_tol);
    let sampling = times.map_or(Sampling::Steps, Sampling::At);
    let (s0, p) = (state0.inner, params.inner);
    let traj = py.allow_threads(|| dynamics::integrate(&s0, &p, t_end, &opts, &sampling)).map_err(to_py)?;
    Ok((traj.times, traj.states.into_iter().map(|inner| PyState { inner }).collect()))
}

/// Follows the flow to rest; `None` when `t_max` is reached first.
#[pyfunction]
#[pyo3(signature = (state0, params, eps = 1e-9, t_max = 1e5))]
fn settle(py: Python<'_>, state0: &PyState, params: &PySystemParams, eps: f64, t_max: f64) -> PyResult<Option<PySteadyState>> {
    let opts = SettleOptions { eps, t_max, ..SettleOptions::default() };
    let (s0, p) = (state0.inner, params.inner);
    let out = py.allow_threads(|| dynamics::settle(&s0, &p, &opts)).map_err(to_py)?;
    Ok(out.steady().map(|s| PySteadyState { inner: *s }))
}

/// Arc cut at fixed radius: one dict per fixed point with keys
/// `phi, eta1, eta2, branch_id, stable, T1, T2, x1, x2, purity`.
#[pyfunction]
#[pyo3(signature = (params, radius, n_phi = 361, convention = "from-vertical"))]
fn arc_sweep(
    py: Python<'_>,
    params: &PySystemParams,
    radius: f64,
    n_phi: usize,
    convention: &str,
) -> PyResult<Vec<PyObject>> {
    let conv = convention_of(convention)?;
    let p = params.inner;
    let arc = py.allow_threads(|| sweep::arc_sweep(&p, radius, n_phi, conv)).map_err(to_py)?;
    arc.rows()
        .into_iter()
        .map(|r| {
            let d = pyo3::types::PyDict::new_bound(py);
            let pk = p.with_drives(r.eta1, r.eta2);
            d.set_item("phi", r.phi)?;
            d.set_item("eta1", r.eta1)?;
            d.set_item("eta2", r.eta2)?;
            d.set_item("branch_id", r.branch_id)?;
            d.set_item("stable", r.steady.stable)?;
            d.set_item("T1", transmittance_exact(&r.steady, &pk, model::Mode::One).ok())?;
            d.set_item("T2", transmittance_exact(&r.steady, &pk, model::Mode::Two).ok())?;
            d.set_item("x1", r.steady.x1)?;
            d.set_item("x2", r.steady.x2)?;
            d.set_item("purity", purity_proxy(&r.steady))?;
            Ok(d.into_any().unbind())
        })
        .collect()
}

/// Phase diagram: `(eta1_axis, eta2_axis, total_counts, stable_counts)` with
/// counts indexed `[i1][i2]`; `None` at the undriven origin or failed nodes.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn phase_diagram(
    py: Python<'_>,
    params: &PySystemParams,
    eta1_max: f64,
    eta2_max: f64,
    resolution: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<Option<usize>>>, Vec<Vec<Option<usize>>>)> {
    let p = params.inner;
    let pd = py
        .allow_threads(|| sweep::phase_diagram_grid(&p, eta1_max, eta2_max, resolution))
        .map_err(to_py)?;
    Ok((pd.eta1_axis.clone(), pd.eta2_axis.clone(), pd.total_counts(), pd.counts()))
}

/// Quasi-static round trip φ: 0 → π/2 → 0. Returns
/// `(phi, leg, T1, converged)` per step.
#[pyfunction]
#[pyo3(signature = (params, radius, n_steps = 90, convention = "from-vertical"))]
fn hysteresis(
    py: Python<'_>,
    params: &PySystemParams,
    radius: f64,
    n_steps: usize,
    convention: &str,
) -> PyResult<Vec<(f64, usize, Option<f64>, bool)>> {
    let path = ControlPath::arc_round_trip(radius, n_steps, convention_of(convention)?);
    let p = params.inner;
    let records = py
        .allow_threads(|| dynamics::hysteresis_sweep(&p, &path, &HysteresisOptions::default()))
        .map_err(to_py)?;
    Ok(records
        .iter()
        .map(|r| (r.point.control, r.point.leg, r.observables.t1, r.converged))
        .collect())
}

/// Runs the command-line tool with `args` (without the program name) and
/// returns its exit code.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> i32 {
    let argv: Vec<String> = std::iter::once("bistab".to_string()).chain(args).collect();
    py.allow_threads(|| bistab_core::cli_io::main_entry(argv))
}

#[pymodule]
fn bistab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PySteadyState>()?;
    m.add_function(wrap_pyfunction!(find_all_roots, m)?)?;
    m.add_function(wrap_pyfunction!(polynomial_in_x1, m)?)?;
    m.add_function(wrap_pyfunction!(ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(random_state, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(settle, m)?)?;
    m.add_function(wrap_pyfunction!(arc_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(phase_diagram, m)?)?;
    m.add_function(wrap_pyfunction!(hysteresis, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
