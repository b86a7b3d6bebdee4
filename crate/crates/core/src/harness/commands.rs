use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::deployment::{economics, optimal_density, sweep, Capacity, SweepParam, TradeoffCurve};
use crate::energy::{complementarity, load_trace, normalize_peak, resample_average, ColumnSpec, EnergyTrace};
use crate::numfmt::sig12;
use crate::operation::{
    baseline_distance, baseline_snr_greedy, distributed_bf_bound, greedy_transmit, grid_optimality_oracle,
    maxmin_bisection, save_transmit, Objective, Scenario, Schedule, SolveMeta, SolveReport, ORACLE_MAX_HORIZON,
    ORACLE_MAX_SCBS,
};

use super::config::{ExperimentConfig, HarvestKind, Panel};
use super::manifest::{
    sha256_hex, tool_version, CustomSweep, InputFile, Invocation, OutputDigest, RunManifest, MANIFEST_FILE,
};
use super::scenario_file::ScenarioFile;
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Bisection,
    Distance,
    SnrGreedy,
    BfBound,
    Save,
    Greedy,
    Oracle,
}

impl Solver {
    pub const ALL: [Solver; 7] =
        [Self::Bisection, Self::Distance, Self::SnrGreedy, Self::BfBound, Self::Save, Self::Greedy, Self::Oracle];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Bisection => "bisection",
            Self::Distance => "distance",
            Self::SnrGreedy => "snr-greedy",
            Self::BfBound => "bf-bound",
            Self::Save => "save",
            Self::Greedy => "greedy",
            Self::Oracle => "oracle",
        }
    }

    /// The comparison table that applies to a scenario's shape.
    pub fn suite_for(scenario: &Scenario) -> Result<Vec<Solver>, HarnessError> {
        let grids = scenario.grid_indices().len();
        if grids == 0 {
            Ok(vec![Self::Distance, Self::SnrGreedy, Self::Bisection, Self::BfBound])
        } else if grids == 1 && scenario.num_users() == 1 {
            let mut v = vec![Self::Save, Self::Greedy];
            if scenario.horizon() <= ORACLE_MAX_HORIZON && scenario.num_scbs() <= ORACLE_MAX_SCBS {
                v.push(Self::Oracle);
            }
            Ok(v)
        } else {
            Err(HarnessError::Usage(format!(
                "no solver applies to {} users with {} grid-connected SCBSs",
                scenario.num_users(),
                grids
            )))
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.iter().copied().find(|v| v.name() == s).ok_or_else(|| format!("unknown solver {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    pub summary: Vec<String>,
}

struct Output {
    files: Vec<(String, Vec<u8>)>,
    summary: Vec<String>,
    /// A runtime check that failed after all outputs were produced.
    failure: Option<HarnessError>,
}

impl Output {
    fn new() -> Self {
        Self { files: Vec::new(), summary: Vec::new(), failure: None }
    }
}

fn now_utc() -> String {
    DateTime::<Utc>::from(SystemTime::now()).to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Usage(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn profile_invocation(
    paths: &[PathBuf],
    columns: ColumnSpec,
    window_s: Option<u64>,
    normalize: bool,
) -> Result<Invocation, HarnessError> {
    if paths.is_empty() {
        return Err(HarnessError::Usage("at least one trace file is required".into()));
    }
    let traces = paths.iter().map(|p| InputFile::read(p).map(|(f, _)| f)).collect::<Result<_, _>>()?;
    Ok(Invocation::Profile { traces, columns, window_s, normalize })
}

pub fn deploy_invocation(
    config: ExperimentConfig,
    panels: Option<Vec<Panel>>,
    custom: Option<CustomSweep>,
) -> Result<Invocation, HarnessError> {
    let mut inputs = Vec::new();
    if config.harvest.model == HarvestKind::Trace {
        if let Some(p) = &config.harvest.trace {
            inputs.push(InputFile::read(p)?.0);
        }
    }
    let custom =
        custom.or_else(|| config.sweep.param.map(|param| CustomSweep { param, values: config.sweep.values.clone() }));
    let mut panels = panels.unwrap_or_else(|| config.sweep.panels.clone());
    panels.sort();
    panels.dedup();
    Ok(Invocation::Deploy { config, panels, custom, inputs })
}

pub fn operate_invocation(
    scenario: ScenarioFile,
    solvers: Option<Vec<Solver>>,
    tolerance: f64,
) -> Result<Invocation, HarnessError> {
    let solvers = match solvers {
        Some(v) if !v.is_empty() => v,
        _ => Solver::suite_for(&scenario.to_scenario()?)?,
    };
    Ok(Invocation::Operate { scenario, solvers, tolerance })
}

/// Executes an invocation, writes its outputs and a manifest into
/// `opts.out_dir`, and returns the manifest. Outputs are still written
/// when a runtime check fails; the failure is returned afterwards.
pub fn run(invocation: Invocation, opts: &RunOptions) -> Result<Outcome, HarnessError> {
    let started_utc = now_utc();
    let format = opts.format;
    let out = with_threads(opts.threads, || execute(&invocation, format))??;
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| HarnessError::io(&opts.out_dir, e))?;
    let mut outputs = Vec::with_capacity(out.files.len());
    for (name, bytes) in &out.files {
        let path = opts.out_dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
        outputs.push(OutputDigest { file: name.clone(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
    }
    let seed = match &invocation {
        Invocation::Deploy { config, .. } => Some(config.seed),
        _ => None,
    };
    let manifest =
        RunManifest { tool: tool_version(), format, invocation, seed, started_utc, finished_utc: now_utc(), outputs };
    let manifest_path = opts.out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(&manifest_path, text).map_err(|e| HarnessError::io(&manifest_path, e))?;
    if let Some(f) = out.failure {
        return Err(f);
    }
    Ok(Outcome { manifest, manifest_path, summary: out.summary })
}

/// Re-runs a recorded invocation into `out_dir` and checks that every
/// output is byte-identical to the recorded digest.
pub fn replay(manifest_path: &Path, out_dir: &Path, threads: Option<usize>) -> Result<Outcome, HarnessError> {
    let recorded = RunManifest::load(manifest_path)?;
    let inputs: Vec<&InputFile> = match &recorded.invocation {
        Invocation::Profile { traces, .. } => traces.iter().collect(),
        Invocation::Deploy { inputs, .. } => inputs.iter().collect(),
        _ => Vec::new(),
    };
    for input in inputs {
        input.verify()?;
    }
    let opts = RunOptions { out_dir: out_dir.to_path_buf(), format: recorded.format, threads };
    let mut outcome = run(recorded.invocation.clone(), &opts)?;
    for want in &recorded.outputs {
        let got = outcome.manifest.outputs.iter().find(|o| o.file == want.file);
        let actual = got.map_or_else(|| "missing".to_string(), |o| o.sha256.clone());
        if actual != want.sha256 {
            return Err(HarnessError::ReplayMismatch {
                file: want.file.clone(),
                expected: want.sha256.clone(),
                actual,
            });
        }
    }
    outcome.summary.push(format!("replay: {} outputs identical", recorded.outputs.len()));
    Ok(outcome)
}

fn execute(inv: &Invocation, format: Format) -> Result<Output, HarnessError> {
    match inv {
        Invocation::Profile { traces, columns, window_s, normalize } => {
            execute_profile(traces, columns, *window_s, *normalize, format)
        }
        Invocation::Deploy { config, panels, custom, .. } => execute_deploy(config, panels, custom.as_ref(), format),
        Invocation::Operate { scenario, solvers, tolerance } => {
            execute_operate(&scenario.to_scenario()?, solvers, *tolerance)
        }
        Invocation::Oracle { scenario } => execute_oracle(&scenario.to_scenario()?),
    }
}

fn series_name(path: &Path, taken: &[(String, EnergyTrace)]) -> String {
    let stem = path.file_stem().map_or_else(|| "trace".into(), |s| s.to_string_lossy().into_owned());
    if taken.iter().any(|(n, _)| *n == stem) {
        format!("{stem}_{}", taken.len())
    } else {
        stem
    }
}

fn execute_profile(
    traces: &[InputFile],
    columns: &ColumnSpec,
    window_s: Option<u64>,
    normalize: bool,
    format: Format,
) -> Result<Output, HarnessError> {
    let mut out = Output::new();
    let mut series: Vec<(String, EnergyTrace)> = Vec::new();
    let mut paths = Vec::new();
    for input in traces {
        let path = &input.path;
        let wrap = |source| HarnessError::Trace { path: path.clone(), source };
        let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
        let loaded = load_trace(BufReader::new(file), columns).map_err(wrap)?;
        let mut t = loaded.trace;
        if let Some(w) = window_s {
            t = resample_average(&t, w).map_err(wrap)?;
        }
        if normalize {
            t = normalize_peak(&t).map_err(wrap)?;
        }
        let name = series_name(path, &series);
        out.summary.push(format!(
            "{name}: {} samples at {} s ({} clamped, {} interpolated)",
            t.len(),
            t.resolution_s(),
            loaded.clamped,
            loaded.interpolated
        ));
        series.push((name, t));
        paths.push(path.clone());
    }

    let mut pairs = Vec::new();
    for i in 0..series.len() {
        for j in i + 1..series.len() {
            let r = complementarity(&series[i].1, &series[j].1)
                .map_err(|source| HarnessError::Trace { path: paths[j].clone(), source })?;
            out.summary.push(format!("complementarity({}, {}) = {}", series[i].0, series[j].0, sig12(r)));
            pairs.push((series[i].0.clone(), series[j].0.clone(), r));
        }
    }

    match format {
        Format::Csv => {
            let mut csv = String::from("series,timestamp,value\n");
            for (name, t) in &series {
                for (k, v) in t.samples().iter().enumerate() {
                    let ts = t.timestamp(k).format("%Y-%m-%dT%H:%M:%S");
                    writeln!(csv, "{name},{ts},{}", sig12(*v)).unwrap();
                }
            }
            out.files.push(("profile.csv".into(), csv.into_bytes()));
            if !pairs.is_empty() {
                let mut csv = String::from("a,b,correlation\n");
                for (a, b, r) in &pairs {
                    writeln!(csv, "{a},{b},{}", sig12(*r)).unwrap();
                }
                out.files.push(("complementarity.csv".into(), csv.into_bytes()));
            }
        }
        Format::Json => {
            let doc = serde_json::json!({
                "series": series.iter().map(|(n, t)| serde_json::json!({
                    "name": n,
                    "start": t.start().format("%Y-%m-%dT%H:%M:%S").to_string(),
                    "resolution_s": t.resolution_s(),
                    "samples": t.samples(),
                })).collect::<Vec<_>>(),
                "complementarity": pairs.iter().map(|(a, b, r)| serde_json::json!({
                    "a": a, "b": b, "correlation": r,
                })).collect::<Vec<_>>(),
            });
            out.files.push(("profile.json".into(), json_bytes(&doc)));
        }
    }
    Ok(out)
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable");
    v.push(b'\n');
    v
}

fn curve_file(stem: &str, curve: &TradeoffCurve, format: Format) -> (String, Vec<u8>) {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            curve.write_csv(&mut buf).expect("in-memory write");
            (format!("{stem}.csv"), buf)
        }
        Format::Json => (format!("{stem}.json"), json_bytes(curve)),
    }
}

/// First swept value at which the outage has dropped to `target`.
fn crossing(curve: &TradeoffCurve, target: f64) -> Option<f64> {
    curve.points.iter().find(|p| p.result.p_out <= target).map(|p| p.value)
}

fn execute_deploy(
    config: &ExperimentConfig,
    panels: &[Panel],
    custom: Option<&CustomSweep>,
    format: Format,
) -> Result<Output, HarnessError> {
    let mut out = Output::new();
    let base = config.to_deployment()?;
    for panel in panels {
        match panel {
            Panel::A => {
                let mut off_grid = base.clone();
                off_grid.eta = 0.0;
                for (tag, cap) in [("cb0", 0.0), ("cbinf", f64::INFINITY)] {
                    let c = SweepParam::Battery.apply(&off_grid, cap);
                    let curve = sweep(&c, SweepParam::LambdaBs, &config.sweep.lambda_bs)?;
                    let label = if cap.is_finite() { "C_B = 0" } else { "C_B = inf" };
                    out.summary.push(match crossing(&curve, 0.1) {
                        Some(l) => format!("panel a ({label}): p_out <= 0.1 from lambda_bs = {}", sig12(l)),
                        None => format!("panel a ({label}): p_out stays above 0.1 on the grid"),
                    });
                    out.files.push(curve_file(&format!("panel_a_{tag}"), &curve, format));
                }
            }
            Panel::B => {
                let mut on_grid = base.clone();
                on_grid.eta = 1.0;
                let curve = sweep(&on_grid, SweepParam::LambdaBs, &config.sweep.lambda_bs)?;
                let best = optimal_density(&curve, &config.economics)?;
                out.summary.push(format!("panel b: lowest lifetime cost at lambda_bs = {}", sig12(best)));
                let mut csv = String::from("lambda_bs,P_G_per_scbs,cost_per_m2\n");
                for p in &curve.points {
                    let cost = economics(p.value, p.result.pg_per_scbs_w, &config.economics);
                    writeln!(csv, "{},{},{}", sig12(p.value), sig12(p.result.pg_per_scbs_w), sig12(cost)).unwrap();
                }
                out.files.push(curve_file("panel_b", &curve, format));
                out.files.push(("panel_b_cost.csv".into(), csv.into_bytes()));
            }
            Panel::C => {
                let curve = sweep(&base, SweepParam::Eta, &config.sweep.eta)?;
                out.summary.push(format!("panel c: {} eta values", curve.points.len()));
                out.files.push(curve_file("panel_c", &curve, format));
            }
        }
    }
    if let Some(c) = custom {
        let curve = sweep(&base, c.param, &c.values)?;
        out.summary.push(format!("sweep over {}: {} points", c.param.name(), curve.points.len()));
        out.files.push(curve_file(&format!("sweep_{}", c.param.name()), &curve, format));
    }
    if out.files.is_empty() {
        return Err(HarnessError::Usage("nothing to run: no panels and no sweep".into()));
    }
    Ok(out)
}

fn grid_slot_energy(scenario: &Scenario) -> f64 {
    let radio = scenario.radio();
    let m = scenario.grid_indices()[0];
    radio.power_for_snr(radio.gamma_th, scenario.distance(0, m)) * scenario.slot_s()
}

pub fn solve(solver: Solver, scenario: &Scenario, tolerance: f64) -> Result<SolveReport, HarnessError> {
    Ok(match solver {
        Solver::Bisection => maxmin_bisection(scenario, tolerance)?,
        Solver::Distance => baseline_distance(scenario)?,
        Solver::SnrGreedy => baseline_snr_greedy(scenario)?,
        Solver::BfBound => SolveReport {
            solver: "bf-bound",
            objective: Objective::MinAvgSnr(distributed_bf_bound(scenario)?),
            meta: SolveMeta::default(),
            schedule: Schedule::default(),
        },
        Solver::Save => save_transmit(scenario)?,
        Solver::Greedy => greedy_transmit(scenario)?,
        Solver::Oracle => {
            let slots = grid_optimality_oracle(scenario)?;
            SolveReport {
                solver: "oracle",
                objective: Objective::GridEnergyJ(slots as f64 * grid_slot_energy(scenario)),
                meta: SolveMeta { grid_slots: Some(slots), ..Default::default() },
                schedule: Schedule::default(),
            }
        }
    })
}

fn value_of(rows: &[(Solver, SolveReport)], s: Solver) -> Option<f64> {
    rows.iter().find(|(v, _)| *v == s).map(|(_, r)| r.objective.value())
}

/// Dominance and equality checks across the solvers that were run.
fn check_rows(scenario: &Scenario, rows: &[(Solver, SolveReport)]) -> Option<HarnessError> {
    let fail = |m: String| Some(HarnessError::Assertion(m));
    let bis = value_of(rows, Solver::Bisection);
    let ub = value_of(rows, Solver::BfBound);
    for b in [Solver::Distance, Solver::SnrGreedy] {
        if let (Some(v), Some(x)) = (value_of(rows, b), bis) {
            if v > x {
                return fail(format!("{} value {v} exceeds bisection value {x}", b.name()));
            }
        }
        if let (Some(v), Some(u)) = (value_of(rows, b), ub) {
            if v > u {
                return fail(format!("{} value {v} exceeds the upper bound {u}", b.name()));
            }
        }
    }
    if let (Some(x), Some(u)) = (bis, ub) {
        if x > u {
            return fail(format!("bisection value {x} exceeds the upper bound {u}"));
        }
    }
    let save = value_of(rows, Solver::Save);
    let greedy = value_of(rows, Solver::Greedy);
    let unbounded = scenario.scbs().iter().all(|b| b.grid_connected || b.capacity == Capacity::Unbounded);
    if let (Some(s), Some(g), true) = (save, greedy, unbounded) {
        if s != g {
            return fail(format!("save uses {s} J of grid energy but greedy uses {g} J"));
        }
    }
    if let Some(o) = value_of(rows, Solver::Oracle) {
        for (name, v) in [("save", save), ("greedy", greedy)] {
            match v {
                Some(v) if o > v => return fail(format!("oracle minimum {o} J exceeds {name} {v} J")),
                Some(v) if unbounded && o != v => {
                    return fail(format!("{name} uses {v} J but the oracle minimum is {o} J"))
                }
                _ => {}
            }
        }
    }
    None
}

fn comparison_csv(rows: &[(Solver, SolveReport)]) -> Vec<u8> {
    let mut csv = String::from("solver,objective,value,grid_slots,critical_slot\n");
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for (s, r) in rows {
        let objective = match r.objective {
            Objective::MinAvgSnr(_) => "min_avg_snr",
            Objective::GridEnergyJ(_) => "grid_energy_J",
        };
        writeln!(
            csv,
            "{},{objective},{},{},{}",
            s.name(),
            sig12(r.objective.value()),
            opt(r.meta.grid_slots),
            opt(r.meta.critical_slot)
        )
        .unwrap();
    }
    csv.into_bytes()
}

fn execute_operate(scenario: &Scenario, solvers: &[Solver], tolerance: f64) -> Result<Output, HarnessError> {
    let mut out = Output::new();
    let mut rows = Vec::new();
    for &solver in solvers {
        let report = solve(solver, scenario, tolerance)?;
        if !report.schedule.slots.is_empty() {
            report.schedule.validate(scenario)?;
            let mut buf = Vec::new();
            report.schedule.write_csv(&mut buf).expect("in-memory write");
            out.files.push((format!("schedule_{}.csv", solver.name()), buf));
        }
        out.files.push((format!("report_{}.json", solver.name()), json_bytes(&report)));
        out.summary.push(format!("{}: {}", solver.name(), sig12(report.objective.value())));
        rows.push((solver, report));
    }
    if rows.len() > 1 {
        out.files.push(("comparison.csv".into(), comparison_csv(&rows)));
    }
    out.failure = check_rows(scenario, &rows);
    Ok(out)
}

fn execute_oracle(scenario: &Scenario) -> Result<Output, HarnessError> {
    let solvers = [Solver::Oracle, Solver::Save, Solver::Greedy];
    let mut out = Output::new();
    let mut rows = Vec::new();
    for solver in solvers {
        rows.push((solver, solve(solver, scenario, 0.0)?));
    }
    let mut csv = String::from("strategy,grid_slots,grid_energy_J\n");
    for (s, r) in &rows {
        let slots = r.meta.grid_slots.expect("grid strategies count slots");
        writeln!(csv, "{},{slots},{}", s.name(), sig12(r.objective.value())).unwrap();
        out.summary.push(format!("{}: {slots} grid slots", s.name()));
    }
    out.files.push(("oracle.csv".into(), csv.into_bytes()));
    out.failure = check_rows(scenario, &rows);
    Ok(out)
}
