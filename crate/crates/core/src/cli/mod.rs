//! Batch driver: configuration, mode-table cache, snapshot files and subcommands.

pub mod commands;
pub mod config;
pub mod modetable;
pub mod snapshot;

use crate::error::Error;
use clap::{Parser, Subcommand};
use commands::Context;
use config::RunConfig;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const CACHE_ENV: &str = "KERR_SCATTER_CACHE";

const COLUMNS_HELP: &str = "\
Output files (geometric units, M = 1 recommended):
  eig.csv               omega, n, lambda (separation constant)
  scatter.csv           omega, n, re/im alpha, re/im beta, t11, t12, t22,
                        flux_residual = |alpha|^2 - |beta|^2 + omega/Omega,
                        superradiant (1 if omega*Omega < 0), wronskian_drift
  evolve_t*.ksnp        binary snapshots (magic KSNP, little endian)
  evolve_energy.csv     t, energy, relative_drift
  synth_t*.ksnp         synthesized snapshots on the time-domain grid
  synth_modes.csv       n, spectral_energy
  energy.csv            t, R, exterior_energy, total_energy, min_density,
                        min_density_r, min_density_costheta
  energy_summary.json   sup of the exterior energy, growth factor, alert flag
  compare.json          relative L2 difference of evolve vs synth
  superradiance.json    per-L records: L, total_energy, exterior_energy,
                        flux_ratio, tail_energy, superradiant, ...
  *.csv next to snapshots (evolve.csv = true): u, costheta, re_phi, im_phi,
                        re_psi2, im_psi2

Exit codes: 0 ok, 1 numerical failure, 2 configuration error.";

#[derive(Debug, Parser)]
#[command(name = "kerr-scatter", version, about = "Scalar-wave mode decomposition on the Kerr exterior", after_help = COLUMNS_HELP)]
pub struct Cli {
    /// run configuration (TOML; `section.key = value` lines or sections)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// output directory
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// mode-table cache directory (overridden by KERR_SCATTER_CACHE)
    #[arg(long, global = true, value_name = "DIR")]
    pub cache: Option<PathBuf>,
    /// worker threads
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// single worker thread
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// seed for randomized checks
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// separation constants lambda_n(omega) -> eig.csv
    Eig,
    /// transmission coefficients and t-matrix -> scatter.csv
    Scatter,
    /// time-domain evolution of the configured data -> evolve_t*.ksnp
    Evolve,
    /// spectral synthesis of the configured data -> synth_t*.ksnp
    Synth,
    /// energy reports of snapshot files -> energy.csv
    Energy {
        /// snapshot files; default: every {prefix}_t*.ksnp in the output directory
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "synth")]
        prefix: String,
    },
    /// relative L2 difference between evolve and synth at compare.t
    Compare,
    /// wave-packet scattering experiment -> superradiance.json
    Superradiance,
    /// invariant suite with one PASS/FAIL line per check
    Validate,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let threads = if cli.deterministic { Some(1) } else { cli.threads };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    let config = match &cli.config {
        Some(p) => RunConfig::load(p),
        None => Err(Error::Config("--config PATH is required".into())),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let cache = std::env::var_os(CACHE_ENV).map(PathBuf::from).or(cli.cache);
    let ctx = Context { config, out: cli.out, cache, seed: cli.seed };
    let ok = |r: crate::Result<String>| r.map(|s| (s, true));
    let result = match &cli.command {
        Command::Eig => ok(commands::cmd_eig(&ctx).map(|_| "wrote eig.csv\n".to_string())),
        Command::Scatter => ok(commands::cmd_scatter(&ctx).map(|_| "wrote scatter.csv\n".to_string())),
        Command::Evolve => ok(commands::cmd_evolve(&ctx)),
        Command::Synth => ok(commands::cmd_synth(&ctx)),
        Command::Energy { inputs, prefix } => ok(commands::cmd_energy(&ctx, inputs, prefix)),
        Command::Compare => ok(commands::cmd_compare(&ctx)),
        Command::Superradiance => ok(commands::cmd_superradiance(&ctx)),
        Command::Validate => commands::cmd_validate(&ctx).map(|checks| {
            let failed = checks.iter().filter(|c| !c.pass).count();
            let mut out: String = checks.iter().map(|c| c.line() + "\n").collect();
            out.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
            (out, failed == 0)
        }),
    };
    match result {
        Ok((s, pass)) => {
            print!("{s}");
            if pass {
                EXIT_OK
            } else {
                EXIT_NUMERICAL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
