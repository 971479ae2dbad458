//! `cvqnd`: command-line driver for the beam-splitter QND simulator. Arrays
//! go to CSV, summaries to JSON.
//!
//! Exit codes: 0 success, 1 threshold or numerical failure, 2 configuration
//! or input error. `CVQND_THREADS` caps the worker pool.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use commands::CliError;
use config::RunConfig;

#[derive(Parser)]
#[command(version, about = "Beam-splitter QND measurement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write the outcome distribution P(x_m) (run)
    #[arg(long, global = true)]
    distribution: bool,

    /// Also write Wigner functions of the input and output states (run)
    #[arg(long, global = true)]
    wigner: bool,

    /// Grid points, keeping the configured or default bounds
    #[arg(long, global = true)]
    n_points: Option<usize>,

    /// Transmission amplitude; for verify, replaces the q list
    #[arg(long, global = true, allow_hyphen_values = true)]
    q: Option<f64>,

    /// Homodyne outcome; for verify, replaces the x_m list
    #[arg(long, global = true, allow_hyphen_values = true)]
    xm: Option<f64>,

    /// Ensemble seed
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Operator-identity residuals over the verification matrix
    Verify,
    /// One conditioned protocol run
    Run,
    /// Trajectory ensemble (n_trajectories = 0 for exact quadrature)
    Ensemble,
    /// Timings
    Bench,
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.distribution |= cli.distribution;
    cfg.wigner |= cli.wigner;
    if let Some(n) = cli.n_points {
        let default = match cli.command {
            Command::Run => commands::default_run_grid(),
            _ => commands::default_wide_grid(),
        };
        let mut g = cfg.grid_or(default);
        g.n_points = n;
        cfg.grid = Some(g);
    }
    if let Some(q) = cli.q {
        cfg.q = q;
        cfg.verify.q_values = vec![q];
    }
    if let Some(x) = cli.xm {
        cfg.x_m = x;
        cfg.verify.x_m_values = vec![x];
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("CVQND_THREADS") else {
        return Ok(());
    };
    let n: usize = value.trim().parse().with_context(|| format!("CVQND_THREADS={value:?} is not a count"))?;
    if n == 0 {
        return Err(anyhow!("CVQND_THREADS must be positive"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().map_err(CliError::Config).and_then(|()| {
        let cfg = load_config(&cli).map_err(CliError::Config)?;
        match cli.command {
            Command::Verify => commands::verify(&cfg),
            Command::Run => commands::run(&cfg),
            Command::Ensemble => commands::ensemble(&cfg),
            Command::Bench => commands::bench(&cfg),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cvqnd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
