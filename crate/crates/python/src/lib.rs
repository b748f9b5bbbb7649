//! Python bindings for `dmflow-core`.
//!
//! Specs, diagrams and return maps are Python classes. Reports come back as
//! plain dicts with the same field names as their JSON form on the CLI.

use dmflow_core::{bifurcation, diagram, extended, network, poincare, validation};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: dmflow_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializes through JSON so nested enums keep their tagged form.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Capacities `C0..C3`, merge priority `beta` and route proportion `xi` of
/// a diverge-merge network.
#[pyclass(name = "DmSpec", frozen)]
struct PyDmSpec(network::DmSpec);

#[pymethods]
impl PyDmSpec {
    #[new]
    #[pyo3(signature = (c0, c1, c2, c3, beta, xi, lengths=None))]
    fn new(c0: f64, c1: f64, c2: f64, c3: f64, beta: f64, xi: f64, lengths: Option<[f64; 4]>) -> PyResult<Self> {
        let mut s = network::DmSpec::new(c0, c1, c2, c3, beta, xi).map_err(err)?;
        if let Some(l) = lengths {
            s = s.with_lengths(l).map_err(err)?;
        }
        Ok(Self(s))
    }

    fn with_xi(&self, xi: f64) -> PyResult<Self> {
        self.0.with_xi(xi).map(Self).map_err(err)
    }

    #[getter]
    fn capacities(&self) -> [f64; 4] {
        self.0.capacities()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta
    }

    #[getter]
    fn xi(&self) -> f64 {
        self.0.xi
    }

    #[getter]
    fn lengths(&self) -> [f64; 4] {
        self.0.lengths
    }

    fn __repr__(&self) -> String {
        let s = &self.0;
        format!(
            "DmSpec(c0={}, c1={}, c2={}, c3={}, beta={}, xi={})",
            s.c0, s.c1, s.c2, s.c3, s.beta, s.xi
        )
    }
}

#[pyclass(name = "FundamentalDiagram", frozen)]
struct PyDiagram(diagram::FundamentalDiagram);

#[pymethods]
impl PyDiagram {
    #[staticmethod]
    #[pyo3(signature = (free_flow_speed=1.0, congested_wave_speed=0.5, jam_density=3.0))]
    fn triangular(free_flow_speed: f64, congested_wave_speed: f64, jam_density: f64) -> PyResult<Self> {
        diagram::FundamentalDiagram::triangular(free_flow_speed, congested_wave_speed, jam_density)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (free_flow_speed=1.0, jam_density=4.0))]
    fn greenshields(free_flow_speed: f64, jam_density: f64) -> PyResult<Self> {
        diagram::FundamentalDiagram::greenshields(free_flow_speed, jam_density)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn capacity(&self) -> f64 {
        self.0.capacity()
    }

    #[getter]
    fn critical_density(&self) -> f64 {
        self.0.critical_density()
    }

    #[getter]
    fn jam_density(&self) -> f64 {
        self.0.jam_density()
    }

    fn flow(&self, k: f64) -> PyResult<f64> {
        self.0.flow(k).map_err(err)
    }

    fn demand(&self, k: f64) -> PyResult<f64> {
        self.0.demand(k).map_err(err)
    }

    fn supply(&self, k: f64) -> PyResult<f64> {
        self.0.supply(k).map_err(err)
    }

    /// `(demand, supply)` at density `k`.
    fn state(&self, k: f64) -> PyResult<(f64, f64)> {
        let u = self.0.state(k).map_err(err)?;
        Ok((u.demand, u.supply))
    }

    fn state_to_density(&self, demand: f64, supply: f64) -> PyResult<f64> {
        self.0
            .state_to_density(diagram::TrafficState::new(demand, supply))
            .map_err(err)
    }
}

/// The piecewise-linear return map of the link-1 out-flux.
#[pyclass(name = "ReturnMap", frozen)]
struct PyMap(poincare::PiecewiseMap);

#[pymethods]
impl PyMap {
    fn __call__(&self, v: f64) -> PyResult<f64> {
        poincare::apply(&self.0, v).map_err(err)
    }

    fn iterate(&self, v0: f64, n: usize) -> PyResult<Vec<f64>> {
        poincare::iterate(&self.0, v0, n).map_err(err)
    }

    fn kinks(&self) -> Vec<f64> {
        self.0.kinks()
    }

    #[getter]
    fn clockwise(&self) -> bool {
        self.0.branch == poincare::Branch::Clockwise
    }

    #[getter]
    fn slope(&self) -> f64 {
        self.0.slope
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }
}

#[pyfunction]
fn classify_regime(spec: &PyDmSpec) -> &'static str {
    poincare::classify_regime(&spec.0).label()
}

#[pyfunction]
fn classify_stability<'py>(py: Python<'py>, spec: &PyDmSpec) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &poincare::classify_stability(&spec.0))
}

/// `clockwise` picks the branch explicitly; by default it follows the
/// regime.
#[pyfunction]
#[pyo3(signature = (spec, clockwise=None))]
fn build_map(spec: &PyDmSpec, clockwise: Option<bool>) -> PyResult<PyMap> {
    let m = match clockwise {
        None => poincare::build_map(&spec.0),
        Some(true) => poincare::build_map_branch(&spec.0, poincare::Branch::Clockwise),
        Some(false) => poincare::build_map_branch(&spec.0, poincare::Branch::Counterclockwise),
    };
    m.map(PyMap).map_err(err)
}

#[pyfunction]
fn fixed_point(spec: &PyDmSpec) -> PyResult<f64> {
    poincare::fixed_point(&spec.0).map_err(err)
}

#[pyfunction]
fn period2_points<'py>(py: Python<'py>, spec: &PyDmSpec) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &poincare::period2_points(&spec.0).map_err(err)?)
}

#[pyfunction]
fn xi_grid(xi_min: f64, xi_max: f64, step: f64) -> PyResult<Vec<f64>> {
    bifurcation::xi_grid(xi_min, xi_max, step).map_err(err)
}

#[pyfunction]
fn sweep_xi<'py>(py: Python<'py>, template: &PyDmSpec, grid: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let pts = py.detach(|| bifurcation::sweep_xi(&template.0, &grid)).map_err(err)?;
    to_py(py, &pts)
}

#[pyfunction]
fn stationary_states<'py>(py: Python<'py>, spec: &PyDmSpec) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &network::stationary_states(&spec.0))
}

#[pyfunction]
fn dmn_step(n: usize, xi: f64, state: Vec<f64>) -> PyResult<Vec<f64>> {
    extended::dmn_step(n, xi, &state).map_err(err)
}

#[pyfunction]
fn dmn_orbit(n: usize, xi: f64, state: Vec<f64>, steps: usize) -> PyResult<Vec<Vec<f64>>> {
    extended::dmn_orbit(n, xi, &state, steps).map_err(err)
}

#[pyfunction]
fn dmn_classify<'py>(py: Python<'py>, n: usize, xi: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &extended::dmn_classify(n, xi).map_err(err)?)
}

fn beltway(beta: f64, xi: f64, n: usize) -> PyResult<extended::BeltwaySpec> {
    extended::BeltwaySpec::new(beta, xi, n).map_err(err)
}

#[pyfunction]
fn beltway_factor<'py>(py: Python<'py>, beta: f64, xi: f64, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &extended::beltway_factor(&beltway(beta, xi, n)?).map_err(err)?)
}

#[pyfunction]
fn beltway_classify<'py>(py: Python<'py>, beta: f64, xi: f64, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &extended::beltway_classify(&beltway(beta, xi, n)?))
}

#[pyfunction]
fn beltway_half_life<'py>(py: Python<'py>, beta: f64, xi: f64, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &extended::beltway_half_life(&beltway(beta, xi, n)?).map_err(err)?)
}

#[pyfunction]
fn detect_oscillation<'py>(
    py: Python<'py>,
    series: Vec<f64>,
    dt: f64,
    warmup: f64,
    window: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &validation::detect_oscillation(&series, dt, warmup, window, tol).map_err(err)?)
}

/// Simulates `spec` from an empty network and compares the link flux with
/// the map. `horizon` overrides the default simulated time.
#[pyfunction]
#[pyo3(signature = (spec, horizon=None))]
fn validate_spec<'py>(py: Python<'py>, spec: &PyDmSpec, horizon: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let mut opts = validation::ValidationOptions::default();
    if let Some(h) = horizon {
        opts.sim.horizon = h;
    }
    let r = py.detach(|| validation::validate_spec(&spec.0, &opts)).map_err(err)?;
    to_py(py, &r)
}

#[pymodule]
fn dmflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDmSpec>()?;
    m.add_class::<PyDiagram>()?;
    m.add_class::<PyMap>()?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(classify_stability, m)?)?;
    m.add_function(wrap_pyfunction!(build_map, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(period2_points, m)?)?;
    m.add_function(wrap_pyfunction!(xi_grid, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_xi, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_states, m)?)?;
    m.add_function(wrap_pyfunction!(dmn_step, m)?)?;
    m.add_function(wrap_pyfunction!(dmn_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(dmn_classify, m)?)?;
    m.add_function(wrap_pyfunction!(beltway_factor, m)?)?;
    m.add_function(wrap_pyfunction!(beltway_classify, m)?)?;
    m.add_function(wrap_pyfunction!(beltway_half_life, m)?)?;
    m.add_function(wrap_pyfunction!(detect_oscillation, m)?)?;
    m.add_function(wrap_pyfunction!(validate_spec, m)?)?;
    Ok(())
}
