//! `esn-lab`: configuration-driven experiments on echo-state networks —
//! section portraits, memory profiles, conditional Lyapunov spectra,
//! consistency profiles, and generic parameter sweeps.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error, 3 partial sweep
//! failure.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use esn_lab::config::{self, Overrides, Recipe, UsageError};
use esn_lab::recipes;

#[derive(Parser, Debug)]
#[command(name = "esn-lab", version, about = "Echo-state network consistency experiments")]
struct Cli {
    /// JSON experiment config; fields override recipe defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 = auto (overrides config).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Spectral-radius grid, comma separated (overrides config).
    #[arg(long, global = true, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    /// Noise-mix grid, comma separated (overrides config).
    #[arg(long, global = true, value_delimiter = ',')]
    noise: Option<Vec<f64>>,
    /// Regularization grid, comma separated (overrides config).
    #[arg(long, global = true, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Realization count (overrides config).
    #[arg(long, global = true)]
    realizations: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Input-output section portraits at consistent and inconsistent radii.
    Sections,
    /// Memory profiles, capacity-versus-radius summary, matched-noise comparison.
    Memory,
    /// Conditional Lyapunov spectra with consistency and Kaplan-Yorke columns.
    Lyapunov,
    /// PC response profiles, test-system geometry, consistency profile.
    Profile,
    /// Generic (rho x noise x lambda x realization) sweep of named metrics.
    Sweep,
    /// Draw one network realization and write its JSON document.
    GenerateNet {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0.025)]
        wiring_p: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        bias: f64,
        #[arg(long, default_value_t = 1)]
        input_dim: usize,
        #[arg(long, default_value_t = 42)]
        net_seed: u64,
        #[arg(long)]
        out_file: PathBuf,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Command::GenerateNet { n, wiring_p, rho, bias, input_dim, net_seed, out_file } =
        &cli.command
    {
        let spec = esn_core::reservoir::NetworkSpec {
            size: *n,
            wiring_p: *wiring_p,
            spectral_radius: *rho,
            input_dim: *input_dim,
            bias: *bias,
            seed: *net_seed,
        };
        spec.validate().map_err(|e| UsageError(e.to_string()))?;
        recipes::netgen::run_recipe(&spec, out_file)?;
        return Ok(ExitCode::SUCCESS);
    }

    let recipe = match cli.command {
        Command::Sections => Recipe::Sections,
        Command::Memory => Recipe::Memory,
        Command::Lyapunov => Recipe::Lyapunov,
        Command::Profile => Recipe::Profile,
        Command::Sweep => Recipe::Sweep,
        Command::GenerateNet { .. } => unreachable!(),
    };
    let mut cfg = config::load_config(recipe, cli.config.as_deref())?;
    config::apply_overrides(
        &mut cfg,
        &Overrides {
            seed: cli.seed,
            out: cli.out,
            threads: cli.threads,
            rho: cli.rho,
            noise: cli.noise,
            lambda: cli.lambda,
            realizations: cli.realizations,
        },
    );
    cfg.validate()?;
    if cfg.threads > 0 {
        // Ignore the error when a pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }

    match recipe {
        Recipe::Sections => recipes::sections::run_recipe(&cfg)?,
        Recipe::Memory => recipes::memory::run_recipe(&cfg)?,
        Recipe::Lyapunov => recipes::lyapunov::run_recipe(&cfg)?,
        Recipe::Profile => recipes::profile::run_recipe(&cfg)?,
        Recipe::Sweep => {
            let outcome = recipes::sweep::run_recipe(&cfg)?;
            if outcome.failed > 0 {
                eprintln!(
                    "sweep finished with {} failed of {} cells",
                    outcome.failed,
                    outcome.failed + outcome.completed
                );
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            if err.is::<UsageError>() {
                eprintln!("usage error: {err}");
                ExitCode::from(1)
            } else {
                eprintln!("error: {err:#}");
                ExitCode::from(2)
            }
        }
    }
}
