use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use mdpu::harness::{
    emit_config, parse_config, run_experiment, ExperimentConfig, ExperimentKind, Report, SCHEMA_VERSION,
};
use mdpu::sim::{parse_trace_actions, replay_actions, StreamId};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "mdpu", version, about = "Experiments on MDPs with unawareness of actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the replica count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    replicas: Option<u64>,
    /// Write CSV, summary and config echo into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG charts.
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config and its instance, and echo the config with defaults.
    Validate(Common),
    /// Solve the ground MDP of the config's instance.
    Solve(Common),
    /// Classify discovery schedules given as specs or in the config.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Schedule specs, e.g. `constant:0.5` or `harmonic:1`.
        schedules: Vec<String>,
    },
    /// Run the experiment named in the config.
    Run(Common),
    /// Run a parameter sweep.
    Sweep(Common),
    /// Re-execute a recorded trace and compare it byte for byte.
    Replay {
        #[command(flatten)]
        common: Common,
        /// Trace CSV written by `run` (replica 0)
        #[arg(long)]
        trace: PathBuf,
    },
}

enum Failure {
    Config(String),
    Internal(String),
}

fn load(common: &Common) -> Result<ExperimentConfig, Failure> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("missing --config".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text).map_err(|e| Failure::Config(format!("{}:\n{e}", path.display())))?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(r) = common.replicas {
        cfg.replicas = r;
    }
    if common.svg {
        cfg.output.svg = true;
    }
    Ok(cfg)
}

fn write_outputs(report: &Report, cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(), Failure> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from));
    if let Some(dir) = dir {
        let io = |e: std::io::Error| Failure::Internal(format!("{}: {e}", dir.display()));
        report.write_to(&dir).map_err(io)?;
        std::fs::write(dir.join("config.json"), emit_config(cfg)).map_err(io)?;
    }
    Ok(())
}

fn execute(cfg: &ExperimentConfig, common: &Common) -> Result<u8, Failure> {
    let report = run_experiment(cfg).map_err(|e| Failure::Internal(e.to_string()))?;
    print!("{}", report.summary);
    write_outputs(&report, cfg, common.out.as_deref())?;
    Ok(report.status.exit_code() as u8)
}

fn with_kind(mut cfg: ExperimentConfig, kind: ExperimentKind) -> Result<ExperimentConfig, Failure> {
    if cfg.instance.is_none() {
        return Err(Failure::Config(format!("{}: the config has no instance", kind.name())));
    }
    cfg.experiment = kind;
    Ok(cfg)
}

fn replay(common: &Common, trace: &Path) -> Result<u8, Failure> {
    let cfg = load(common)?;
    let u = cfg
        .build_instance()
        .ok_or_else(|| Failure::Config("replay needs a config with an instance".into()))?;
    let recorded = std::fs::read_to_string(trace).map_err(|e| Failure::Config(format!("{}: {e}", trace.display())))?;
    let actions = parse_trace_actions(&recorded).map_err(|e| Failure::Config(format!("{}: {e}", trace.display())))?;
    let start = *u
        .aware_states
        .iter()
        .next()
        .ok_or_else(|| Failure::Config("instance has no aware state".into()))?;
    let stream = StreamId {
        seed: cfg.seed,
        replica: 0,
    };
    let again = match replay_actions(Arc::new(u), start, stream, &actions, cfg.env) {
        Ok(t) => t.to_csv(),
        Err(e) => {
            println!("replay diverged: {e}");
            return Ok(EXIT_FAIL);
        }
    };
    if again == recorded {
        println!("replay matches: {} steps", actions.len());
        return Ok(0);
    }
    let line = again
        .lines()
        .zip(recorded.lines())
        .position(|(a, b)| a != b)
        .map(|i| i + 1)
        .unwrap_or_else(|| again.lines().count().min(recorded.lines().count()) + 1);
    println!("replay differs from the recording at line {line}");
    Ok(EXIT_FAIL)
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Validate(common) => {
            let cfg = load(&common)?;
            println!("{}", emit_config(&cfg));
            if cfg.instance.is_none() {
                return Ok(0);
            }
            let cfg = with_kind(cfg, ExperimentKind::Validate)?;
            execute(&cfg, &common)
        }
        Command::Solve(common) => {
            let cfg = with_kind(load(&common)?, ExperimentKind::Solve)?;
            execute(&cfg, &common)
        }
        Command::Classify { common, schedules } => {
            let text = if common.config.is_some() {
                None
            } else {
                let doc = serde_json::json!({
                    "schema": SCHEMA_VERSION,
                    "experiment": "classify",
                    "seed": common.seed.unwrap_or(0),
                    "schedules": schedules,
                });
                Some(doc.to_string())
            };
            let mut cfg = match text {
                Some(t) => parse_config(&t).map_err(|e| Failure::Config(e.to_string()))?,
                None => load(&common)?,
            };
            if common.config.is_some() && !schedules.is_empty() {
                return Err(Failure::Config(
                    "give schedules either in the config or on the command line".into(),
                ));
            }
            if cfg.schedules.is_empty() {
                cfg.schedules = cfg.schedule.iter().cloned().collect();
            }
            if cfg.schedules.is_empty() {
                return Err(Failure::Config("no schedules to classify".into()));
            }
            cfg.experiment = ExperimentKind::Classify;
            execute(&cfg, &common)
        }
        Command::Run(common) => {
            let cfg = load(&common)?;
            execute(&cfg, &common)
        }
        Command::Sweep(common) => {
            let cfg = load(&common)?;
            if cfg.experiment != ExperimentKind::Sweep {
                return Err(Failure::Config(format!(
                    "sweep needs \"experiment\": \"sweep\", the config has {:?}",
                    cfg.experiment.name()
                )));
            }
            execute(&cfg, &common)
        }
        Command::Replay { common, trace } => replay(&common, &trace),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
