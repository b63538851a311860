//! Command-line front end for the `rim-core` library.

pub mod commands;
pub mod config;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{Ctx, Failure, Outcome};
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "rim", version, about = "Random inertial manifolds by Lyapunov-Perron iteration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `noise.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (overrides `threads` in the config).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Gap condition for every n.
    GapScan,
    /// Sample the manifold graph over the chart grid.
    BuildManifold,
    /// Run the configured defect checks.
    Verify,
    /// Shadowing points and decay curves.
    Track,
    /// Manifold periodicity in the initial time.
    Periodicity,
    /// Pullback cloud and containment in the manifold.
    Attractor,
    /// All of the above into one directory.
    Report,
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config: a config file is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.noise.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    cfg.validate()?;
    let threads = cfg.threads.unwrap_or(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let ctx = Ctx::new(cfg, &cli.out);
    pool.install(|| match cli.command {
        Command::GapScan => commands::gap_scan_cmd(&ctx),
        Command::BuildManifold => commands::build_manifold_cmd(&ctx),
        Command::Verify => commands::verify_cmd(&ctx),
        Command::Track => commands::track_cmd(&ctx),
        Command::Periodicity => commands::periodicity_cmd(&ctx),
        Command::Attractor => commands::attractor_cmd(&ctx),
        Command::Report => commands::report_cmd(&ctx),
    })
}

/// Runs a parsed command line and returns the process exit code:
/// 0 pass, 1 verification failure, 2 config error, 3 certificate failure.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(o) => {
            println!("{}", o.summary);
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            if o.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
