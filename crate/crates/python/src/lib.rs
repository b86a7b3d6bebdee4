//! Python bindings: `import ehscn`.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use ehscn_core::energy::{self, ColumnSpec};
use ehscn_core::harness::{ExperimentConfig, HarnessError, ScenarioFile, Solver};
use ehscn_core::operation::{self, DEFAULT_TOLERANCE};
use ehscn_core::spatial::{self, LinkPower, RadioConfig};
use ehscn_core::{BatteryState, Capacity, HarvesterModel, ScbsNode, SimResult, SweepParam};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn harness_err(e: HarnessError) -> PyErr {
    if e.exit_code() == 2 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

#[pyclass(name = "EnergyTrace", module = "ehscn", frozen)]
struct PyTrace(energy::EnergyTrace);

#[pymethods]
impl PyTrace {
    /// Load a `timestamp,value` file.
    #[staticmethod]
    #[pyo3(signature = (path, header = false, value_col = 1))]
    fn load(path: PathBuf, header: bool, value_col: usize) -> PyResult<Self> {
        let spec = ColumnSpec { has_header: header, value_col, ..ColumnSpec::default() };
        let file = File::open(&path).map_err(|e| value_err(format!("{}: {e}", path.display())))?;
        let loaded = energy::load_trace(BufReader::new(file), &spec)
            .map_err(|e| value_err(format!("{}: {e}", path.display())))?;
        Ok(Self(loaded.trace))
    }

    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.0.samples().to_vec()
    }

    #[getter]
    fn resolution_s(&self) -> u64 {
        self.0.resolution_s()
    }

    #[getter]
    fn start(&self) -> String {
        self.0.start().format("%Y-%m-%dT%H:%M:%S").to_string()
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn resample(&self, window_s: u64) -> PyResult<Self> {
        energy::resample_average(&self.0, window_s).map(Self).map_err(value_err)
    }

    fn normalize(&self) -> PyResult<Self> {
        energy::normalize_peak(&self.0).map(Self).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Pearson correlation of two aligned traces.
#[pyfunction]
fn complementarity(a: &PyTrace, b: &PyTrace) -> PyResult<f64> {
    energy::complementarity(&a.0, &b.0).map_err(value_err)
}

fn result_dict<'py>(py: Python<'py>, r: &SimResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("p_out", r.p_out)?;
    d.set_item("p_out_ci", r.p_out_ci)?;
    d.set_item("pg_per_scbs_w", r.pg_per_scbs_w)?;
    d.set_item("pg_per_m2_w", r.pg_per_m2_w)?;
    d.set_item("pg_ci", r.pg_ci)?;
    d.set_item("trials", r.trials)?;
    d.set_item("user_slots", r.user_slots)?;
    Ok(d)
}

/// A deployment experiment; accepts the same TOML as `ehscn deploy`.
#[pyclass(name = "Experiment", module = "ehscn")]
struct PyExperiment(ExperimentConfig);

#[pymethods]
impl PyExperiment {
    #[new]
    #[pyo3(signature = (toml = None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        match toml {
            None => Ok(Self(ExperimentConfig::default())),
            Some(t) => ExperimentConfig::from_toml(t).map(Self).map_err(PyValueError::new_err),
        }
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        ExperimentConfig::load(&path).map(Self).map_err(harness_err)
    }

    fn to_toml(&self) -> String {
        self.0.to_toml()
    }

    #[getter]
    fn get_lambda_bs(&self) -> f64 {
        self.0.network.lambda_bs
    }
    #[setter]
    fn set_lambda_bs(&mut self, v: f64) {
        self.0.network.lambda_bs = v;
    }
    #[getter]
    fn get_lambda_u(&self) -> f64 {
        self.0.network.lambda_u
    }
    #[setter]
    fn set_lambda_u(&mut self, v: f64) {
        self.0.network.lambda_u = v;
    }
    #[getter]
    fn get_eta(&self) -> f64 {
        self.0.network.eta
    }
    #[setter]
    fn set_eta(&mut self, v: f64) {
        self.0.network.eta = v;
    }
    #[getter]
    fn get_gamma_th(&self) -> f64 {
        self.0.radio.gamma_th
    }
    #[setter]
    fn set_gamma_th(&mut self, v: f64) {
        self.0.radio.gamma_th = v;
    }
    #[getter]
    fn get_p_eh_w(&self) -> f64 {
        self.0.harvest.p_eh_w
    }
    #[setter]
    fn set_p_eh_w(&mut self, v: f64) {
        self.0.harvest.p_eh_w = v;
    }
    /// Battery capacity in joules; `math.inf` for unbounded.
    #[getter]
    fn get_battery_j(&self) -> f64 {
        self.0.battery.capacity_j.joules()
    }
    #[setter]
    fn set_battery_j(&mut self, v: f64) {
        self.0.battery.capacity_j = Capacity::from_joules(v);
    }
    #[getter]
    fn get_trials(&self) -> usize {
        self.0.trials
    }
    #[setter]
    fn set_trials(&mut self, v: usize) {
        self.0.trials = v;
    }
    #[getter]
    fn get_seed(&self) -> u64 {
        self.0.seed
    }
    #[setter]
    fn set_seed(&mut self, v: u64) {
        self.0.seed = v;
    }
    #[getter]
    fn get_horizon(&self) -> usize {
        self.0.simulation.horizon
    }
    #[setter]
    fn set_horizon(&mut self, v: usize) {
        self.0.simulation.horizon = v;
    }

    fn simulate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let cfg = self.0.to_deployment().map_err(harness_err)?;
        let r = py.detach(|| ehscn_core::simulate(&cfg)).map_err(|e| harness_err(e.into()))?;
        result_dict(py, &r)
    }

    /// One result dict per value, each with a `value` key.
    fn sweep<'py>(&self, py: Python<'py>, param: &str, values: Vec<f64>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let param: SweepParam = param.parse().map_err(PyValueError::new_err)?;
        let cfg = self.0.to_deployment().map_err(harness_err)?;
        let curve = py.detach(|| ehscn_core::sweep(&cfg, param, &values)).map_err(|e| harness_err(e.into()))?;
        curve
            .points
            .iter()
            .map(|p| {
                let d = result_dict(py, &p.result)?;
                d.set_item("value", p.value)?;
                Ok(d)
            })
            .collect()
    }
}

/// A fixed instance for the operation solvers; accepts the same TOML as
/// `ehscn operate`.
#[pyclass(name = "Scenario", module = "ehscn", frozen)]
struct PyScenario(operation::Scenario);

#[pymethods]
impl PyScenario {
    #[new]
    fn new(toml: &str) -> PyResult<Self> {
        let file = ScenarioFile::from_toml(toml).map_err(PyValueError::new_err)?;
        file.to_scenario().map(Self).map_err(harness_err)
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        let file = ScenarioFile::load(&path).map_err(harness_err)?;
        file.to_scenario().map(Self).map_err(harness_err)
    }

    #[getter]
    fn num_scbs(&self) -> usize {
        self.0.num_scbs()
    }

    #[getter]
    fn num_users(&self) -> usize {
        self.0.num_users()
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.0.horizon()
    }

    /// Runs one solver (`bisection`, `distance`, `snr-greedy`, `bf-bound`,
    /// `save`, `greedy`, `oracle`). The schedule is a list of
    /// `(slot, user, scbs, power_watts)` tuples.
    #[pyo3(signature = (solver, tolerance = DEFAULT_TOLERANCE))]
    fn solve<'py>(&self, py: Python<'py>, solver: &str, tolerance: f64) -> PyResult<Bound<'py, PyDict>> {
        let solver: Solver = solver.parse().map_err(PyValueError::new_err)?;
        let r = py.detach(|| ehscn_core::harness::solve(solver, &self.0, tolerance)).map_err(harness_err)?;
        let d = PyDict::new(py);
        d.set_item("solver", r.solver)?;
        match r.objective {
            operation::Objective::MinAvgSnr(v) => d.set_item("min_avg_snr", v)?,
            operation::Objective::GridEnergyJ(v) => d.set_item("grid_energy_J", v)?,
        }
        d.set_item("value", r.objective.value())?;
        d.set_item("grid_slots", r.meta.grid_slots)?;
        d.set_item("critical_slot", r.meta.critical_slot)?;
        d.set_item("fallback", r.meta.fallback)?;
        let rows: Vec<(usize, usize, usize, f64)> = r
            .schedule
            .slots
            .iter()
            .enumerate()
            .flat_map(|(t, row)| row.iter().enumerate().map(move |(k, a)| (t, k, a.scbs, a.power_w)))
            .collect();
        d.set_item("schedule", rows)?;
        Ok(d)
    }

    fn to_toml(&self) -> String {
        ScenarioFile::from_scenario(&self.0).to_toml()
    }
}

/// Transmit power needed to reach `gamma_th` at `distance_m`, or `None` if
/// it exceeds `p_max_w`.
#[pyfunction]
#[pyo3(signature = (distance_m, gamma_th = 10.0, alpha = 4.0, noise_w = 1e-13, d_min_m = 1.0, p_max_w = None))]
fn required_power(
    distance_m: f64,
    gamma_th: f64,
    alpha: f64,
    noise_w: f64,
    d_min_m: f64,
    p_max_w: Option<f64>,
) -> PyResult<Option<f64>> {
    let radio = RadioConfig { gamma_th, alpha, noise_w, d_min_m, p_max_w };
    radio.validate().map_err(value_err)?;
    Ok(match spatial::required_power(distance_m, &radio) {
        LinkPower::Feasible(p) => Some(p),
        LinkPower::Infeasible => None,
    })
}

/// Advances one base station by one slot.
#[pyfunction]
#[pyo3(signature = (demands_w, harvested_j, slot_s = 1.0, battery_j = 0.0, capacity_j = f64::INFINITY, grid = false))]
fn step_slot<'py>(
    py: Python<'py>,
    demands_w: Vec<f64>,
    harvested_j: f64,
    slot_s: f64,
    battery_j: f64,
    capacity_j: f64,
    grid: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let capacity = Capacity::from_joules(capacity_j);
    if !capacity.is_valid() || !(battery_j >= 0.0 && battery_j <= capacity.joules()) {
        return Err(PyValueError::new_err("battery level must lie in [0, capacity]"));
    }
    if !(harvested_j.is_finite() && harvested_j >= 0.0) || demands_w.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(PyValueError::new_err("demands and harvest must be finite and nonnegative"));
    }
    let node = ScbsNode {
        position: spatial::Point::new(0.0, 0.0),
        harvester: HarvesterModel::Constant { rate_w: 0.0 },
        battery: BatteryState { capacity, level_j: battery_j },
        grid_connected: grid,
        circuit_power_w: 0.0,
    };
    let demands: Vec<LinkPower> = demands_w.into_iter().map(LinkPower::Feasible).collect();
    let o = ehscn_core::step_slot(&node, &demands, harvested_j, slot_s);
    let d = PyDict::new(py);
    d.set_item("served", o.served)?;
    d.set_item("unserved", o.unserved)?;
    d.set_item("grid_drawn_j", o.grid_drawn_j)?;
    d.set_item("spent_j", o.spent_j)?;
    d.set_item("overflow_j", o.overflow_j)?;
    d.set_item("battery_j", o.battery.level_j)?;
    d.set_item("served_mask", o.served_mask)?;
    Ok(d)
}

#[pymodule]
fn ehscn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyExperiment>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(complementarity, m)?)?;
    m.add_function(wrap_pyfunction!(required_power, m)?)?;
    m.add_function(wrap_pyfunction!(step_slot, m)?)?;
    Ok(())
}
