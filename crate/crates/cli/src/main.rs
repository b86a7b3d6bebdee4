use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ehscn_core::energy::ColumnSpec;
use ehscn_core::harness::{
    self, deploy_invocation, operate_invocation, output_dir, profile_invocation, CustomSweep, ExperimentConfig, Format,
    HarnessError, Invocation, Panel, RunOptions, ScenarioFile, Solver,
};
use ehscn_core::operation::DEFAULT_TOLERANCE;
use ehscn_core::SweepParam;

/// Simulate and optimize energy-harvesting small-cell networks.
#[derive(Parser)]
#[command(name = "ehscn", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    /// Print the experiment configuration (defaults, or the resolved
    /// `deploy` config) as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct Common {
    /// Master seed for `deploy`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials per point for `deploy`.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output directory [env: EHSCN_OUT_DIR, default: ./out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
    /// Worker threads for trial-parallel work.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Resample and normalize generation traces and report their correlation.
    Profile {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Averaging window in seconds.
        #[arg(long)]
        window: Option<u64>,
        /// Divide each series by its peak.
        #[arg(long)]
        normalize: bool,
        /// Skip the first record of each file.
        #[arg(long)]
        header: bool,
        #[arg(long, default_value_t = 0)]
        timestamp_col: usize,
        #[arg(long, default_value_t = 1)]
        value_col: usize,
        #[arg(long, default_value_t = ',')]
        delimiter: char,
    },
    /// Run deployment tradeoff sweeps.
    Deploy {
        /// Experiment TOML; defaults are used when omitted.
        config: Option<PathBuf>,
        /// Panels to compute, overriding `[sweep].panels`.
        #[arg(long, value_delimiter = ',')]
        panel: Option<Vec<Panel>>,
        /// Extra sweep, e.g. `p_eh=0.01,0.02,0.04` or `battery=0,inf`.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Run association, power-allocation or grid-power solvers on a scenario.
    Operate {
        scenario: PathBuf,
        #[arg(long)]
        solver: Vec<Solver>,
        /// Run every solver that fits the scenario and check dominance.
        #[arg(long, conflicts_with = "solver")]
        all: bool,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Exhaustive grid-slot minimum compared with save and greedy transmission.
    Oracle { scenario: PathBuf },
    /// Re-run a manifest and check the outputs are byte-identical.
    Replay { manifest: PathBuf },
}

fn parse_sweep(spec: &str) -> Result<CustomSweep, HarnessError> {
    let (name, list) = spec
        .split_once('=')
        .ok_or_else(|| HarnessError::Usage(format!("sweep {spec:?} is not of the form param=v1,v2")))?;
    let param: SweepParam = name.trim().parse().map_err(HarnessError::Usage)?;
    let values = list
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| HarnessError::Usage(format!("sweep value {v:?} is not a number"))))
        .collect::<Result<_, _>>()?;
    Ok(CustomSweep { param, values })
}

fn load_config(path: Option<&PathBuf>, common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<Vec<String>, HarnessError> {
    let common = &cli.common;
    let opts = RunOptions { out_dir: output_dir(common.out.clone()), format: common.format, threads: common.threads };
    let Some(command) = cli.command else {
        if cli.print_config {
            return Ok(vec![ExperimentConfig::default().to_toml()]);
        }
        return Err(HarnessError::Usage("no subcommand given; see --help".into()));
    };
    let invocation: Invocation = match command {
        Command::Profile { traces, window, normalize, header, timestamp_col, value_col, delimiter } => {
            let columns = ColumnSpec { timestamp_col, value_col, has_header: header, delimiter };
            profile_invocation(&traces, columns, window, normalize)?
        }
        Command::Deploy { config, panel, sweep } => {
            let cfg = load_config(config.as_ref(), common)?;
            if cli.print_config {
                return Ok(vec![cfg.to_toml()]);
            }
            let custom = sweep.as_deref().map(parse_sweep).transpose()?;
            deploy_invocation(cfg, panel, custom)?
        }
        Command::Operate { scenario, solver, all, tolerance } => {
            let file = ScenarioFile::load(&scenario)?;
            let solvers = if all || solver.is_empty() { None } else { Some(solver) };
            operate_invocation(file, solvers, tolerance)?
        }
        Command::Oracle { scenario } => Invocation::Oracle { scenario: ScenarioFile::load(&scenario)? },
        Command::Replay { manifest } => {
            let outcome = harness::replay(&manifest, &opts.out_dir, common.threads)?;
            return Ok(outcome.summary);
        }
    };
    let outcome = harness::run(invocation, &opts)?;
    let mut lines = outcome.summary;
    lines.push(format!("wrote {} files and {}", outcome.manifest.outputs.len(), outcome.manifest_path.display()));
    Ok(lines)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
