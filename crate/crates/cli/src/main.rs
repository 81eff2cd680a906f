use std::path::PathBuf;
use std::process::ExitCode;

use canonmap::maps::DEFAULT_POSITIVITY_SAMPLES;
use canonmap_cli::commands;
use canonmap_cli::config::{ScenarioConfig, ScenarioName};
use canonmap_cli::sweep::Sweep;
use canonmap_cli::CliError;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "canonmap", version, about = "Open quantum system dynamics through dynamical and canonical maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trajectory as CSV.
    Run {
        /// Scenario JSON file.
        #[arg(long)]
        config: PathBuf,
        /// Trajectory CSV path; overrides "out" in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        t0: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        t1: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Sweep one parameter: T=..., N=..., gamma=... or bloch=x:y:z,...
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Report properties, spectrum and pseudo-inverse of a map JSON file.
    AnalyzeMap {
        map: PathBuf,
        #[arg(long, default_value_t = DEFAULT_POSITIVITY_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report on the canonical map between two times.
    Canonical {
        /// Scenario JSON; the qubit exchange model when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        t0: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long, allow_negative_numbers = true)]
        t2: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Run { config, out, t0, t1, dt, sweep } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            cfg.out = out.or(cfg.out);
            cfg.t0 = t0.or(cfg.t0);
            cfg.t1 = t1.or(cfg.t1);
            cfg.dt = dt.or(cfg.dt);
            let sweep = sweep.map(|s| s.parse::<Sweep>()).transpose()?;
            commands::run(&cfg, sweep.as_ref())
        }
        Command::AnalyzeMap { map, samples, seed, out } => {
            commands::analyze_map(&map, samples, seed, out.as_deref())
        }
        Command::Canonical { config, t0, t1, t2, seed, out } => {
            let mut cfg = match config {
                Some(path) => ScenarioConfig::load(&path)?,
                None => ScenarioConfig::named(ScenarioName::SwapQubit),
            };
            cfg.t0 = t0.or(cfg.t0);
            if !matches!(cfg.scenario, ScenarioName::SwapQubit | ScenarioName::Custom) {
                return Err(CliError::Config(format!(
                    "canonical maps need closed dynamics (swap-qubit or custom), got {}",
                    cfg.scenario.as_str()
                )));
            }
            let td = cfg.total_dynamics()?;
            commands::canonical(&td, t1, t2, seed, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
