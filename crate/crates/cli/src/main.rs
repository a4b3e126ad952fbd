//! `euler1d`: run, certify, trace and sweep Lagrangian Euler scenarios.
//!
//! Exit status: 0 on success, 1 on a fault or invalid input, 2 when a
//! certificate check fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::Status;

#[derive(Parser)]
#[command(
    name = "euler1d",
    version,
    about = "Lagrangian 1D Euler solver with invariant-domain and density-floor certificates"
)]
struct Cli {
    /// Worker threads for sweeps and paired runs; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Set a config value by dotted key, e.g. `scenario.gas.gamma=5/3`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate, certify and write the full report.
    Run(Common),
    /// Integrate and write the certificate and series only.
    Certify(Common),
    /// Compare gradients with the Riccati ODEs along characteristics.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Also run at half resolution and require the discrepancy to shrink.
        #[arg(long)]
        convergence: bool,
    },
    /// Repeat `run` over a list of values for one config key.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted config key to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated values; `a/b` is read as a quotient.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EULER1D_LOG", "warn")).init();
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::Fault.code());
        }
    };
    let status = pool.install(|| match cli.command {
        Command::Run(c) => commands::run(&c.config, c.out, &c.overrides, true),
        Command::Certify(c) => commands::run(&c.config, c.out, &c.overrides, false),
        Command::Oracle {
            common: c,
            convergence,
        } => commands::oracle(&c.config, c.out, &c.overrides, convergence),
        Command::Sweep {
            common: c,
            param,
            values,
        } => commands::sweep(&c.config, c.out, &c.overrides, &param, &values),
    });
    let status = status.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        Status::Fault
    });
    ExitCode::from(status.code())
}
