use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gaussweyl::harness::{self, BmConfig, Outcome, SuiteConfig, EXIT_USAGE};
use gaussweyl::spectral::SymmetricOperator;
use gaussweyl::{Error, Result};

/// Dyadic Gaussian random-walk certificates and eigenvalue perturbation checks.
#[derive(Debug, Parser)]
#[command(name = "gaussweyl", version)]
struct Cli {
    /// Seed for every random stream; overrides "seed" in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// JSON configuration for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for the CSV table and JSON summary; defaults to the
    /// config's "output_path", then the current directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Refinement-deviation frequencies against the tail certificate, per level.
    BmConverge,
    /// Every comparison inequality on randomly generated operator pairs.
    PerturbSuite,
    /// Signed spectrum of one operator with the oracle comparison.
    Spectrum {
        /// Operator file (JSON {dim, entries} or CSV rows).
        operator: PathBuf,
    },
    /// Weyl-type checks for A = A1 + A2 at indices p, q.
    WeylCheck {
        a1: PathBuf,
        a2: PathBuf,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        q: usize,
    },
    /// Inclusion and Hausdorff checks for the spectra of A1 + A2 and A1.
    Hausdorff { a1: PathBuf, a2: PathBuf },
}

fn run(cli: Cli) -> Result<Outcome> {
    let out = harness::resolve_out(cli.out.as_deref(), None);
    match cli.command {
        Command::BmConverge => {
            let path = cli
                .config
                .ok_or_else(|| Error::Config("bm-converge needs --config".into()))?;
            let cfg: BmConfig = harness::read_config(&path)?;
            let seed = harness::resolve_seed(cli.seed, cfg.seed)?;
            let out = harness::resolve_out(cli.out.as_deref(), cfg.output_path.as_deref());
            harness::run_brownian_experiment(&cfg, seed, &out)
        }
        Command::PerturbSuite => {
            let cfg: SuiteConfig = match &cli.config {
                Some(path) => harness::read_config(path)?,
                None => SuiteConfig::default(),
            };
            let seed = harness::resolve_seed(cli.seed, cfg.seed)?;
            let out = harness::resolve_out(cli.out.as_deref(), cfg.output_path.as_deref());
            harness::run_perturbation_suite(&cfg, seed, &out)
        }
        Command::Spectrum { operator } => harness::run_spectrum(&SymmetricOperator::load(&operator)?, &out),
        Command::WeylCheck { a1, a2, p, q } => harness::run_weyl_check(
            SymmetricOperator::load(&a1)?,
            SymmetricOperator::load(&a2)?,
            p,
            q,
            &out,
        ),
        Command::Hausdorff { a1, a2 } => {
            harness::run_hausdorff(SymmetricOperator::load(&a1)?, SymmetricOperator::load(&a2)?, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
