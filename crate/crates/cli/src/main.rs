//! `slosh`: compute sloshing modes, evolve and observe modal data, and
//! synthesize boundary controls and injection schedules.

mod commands;
mod config;
mod data;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slosh_core::SloshError;

use config::{EndCondition, Horizon, RunConfig, Symmetry};
use output::Sink;

#[derive(Parser)]
#[command(name = "slosh", version, about = "Sloshing modes and exact boundary control")]
struct Cli {
    /// JSON run configuration; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Run library loops on a pool of this many threads (sequential otherwise).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run the slow quadrature and ODE cross-checks and add their residuals to the reports.
    #[arg(long, global = true)]
    check_oracle: bool,
    /// half-disk, cheb-fixture, flat or custom:<csv path>.
    #[arg(long, global = true)]
    container: Option<String>,
    #[arg(long, global = true, value_enum)]
    end_condition: Option<EndCondition>,
    #[arg(long, global = true, value_enum)]
    symmetry: Option<Symmetry>,
    #[arg(long, global = true)]
    n_modes: Option<usize>,
    /// Control or observation horizon, or `auto`.
    #[arg(long, global = true)]
    horizon: Option<Horizon>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use the Chebyshev basis without the mass constraint.
    #[arg(long, global = true)]
    fixture: bool,
    #[arg(long, global = true)]
    basis_count: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue table (`modes.csv`) and full mode set (`modes.json`).
    Modes {
        /// Also solve with twice the basis size and report the drift.
        #[arg(long)]
        double: bool,
    },
    /// Trajectory `t,E,mass,c_1..` of modal data, optionally under a control.
    Evolve {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Comma-separated output times.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["t_end", "samples"])]
        times: Option<Vec<f64>>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// `control.json` written by the control command.
        #[arg(long)]
        forcing: Option<PathBuf>,
    },
    /// Observed energy over the horizon against the initial norm.
    Observe {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Control driving the data to rest, its injection realization and a report.
    Control {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Injection rates realizing the control.
    Inject {
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

fn fail(e: &SloshError) -> ExitCode {
    let body = serde_json::json!({ "code": e.code(), "message": e.to_string() });
    eprintln!("{body}");
    match e {
        SloshError::Input(_) | SloshError::Json(_) | SloshError::Csv(_) | SloshError::Domain { .. } => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, SloshError> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &cli.output {
        c.output_dir = v.clone();
    }
    if let Some(v) = &cli.container {
        c.container = v.clone();
    }
    if let Some(v) = cli.end_condition {
        c.end_condition = v;
    }
    if let Some(v) = cli.symmetry {
        c.symmetry = v;
    }
    if let Some(v) = cli.n_modes {
        c.n_modes = v;
    }
    if let Some(v) = cli.horizon {
        c.horizon = v;
    }
    if let Some(v) = cli.seed {
        c.seed = v;
    }
    if cli.fixture {
        c.fixture = true;
    }
    if let Some(v) = cli.basis_count {
        c.basis_count = Some(v);
    }
    c.validate()?;
    Ok(c)
}

fn configure_threads(threads: Option<usize>) -> Result<(), SloshError> {
    match threads {
        Some(0) => Err(SloshError::Input("--threads must be at least 1".into())),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| SloshError::Input(format!("cannot start thread pool: {e}")))?;
            slosh_core::par::set_parallel(true);
            Ok(())
        }
        _ => {
            slosh_core::par::set_parallel(false);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), SloshError> {
    configure_threads(cli.threads)?;
    let config = resolve_config(&cli)?;
    let sink = Sink::new(&config.output_dir, config.hash())?;
    let ctx = commands::Context { config, sink, check_oracle: cli.check_oracle };
    match &cli.command {
        Command::Modes { double } => commands::modes(&ctx, *double),
        Command::Evolve { data, times, t_end, samples, forcing } => {
            let times = commands::Times { explicit: times.clone(), t_end: *t_end, samples: *samples };
            commands::evolve(&ctx, data.as_deref(), &times, forcing.as_deref())
        }
        Command::Observe { data } => commands::observe(&ctx, data.as_deref()),
        Command::Control { data } => commands::control(&ctx, data.as_deref(), false),
        Command::Inject { data } => commands::control(&ctx, data.as_deref(), true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "code": "usage", "message": e.to_string() }));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
