mod commands;
mod config;
mod svg;

use clap::{Args, Parser, Subcommand};
use commands::{Family, ProfileSelector, SignArg};
use config::{Config, NonlinearityName};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "bifurcata", version, about = "Bifurcation diagrams for a Neumann problem with point interaction")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Overrides for the configuration file; accepted before or after the command.
#[derive(Args)]
struct Common {
    /// TOML configuration with [problem], [grids], [tolerances] and [output]
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    nonlinearity: Option<NonlinearityName>,
    /// interaction strength, > 0
    #[arg(long, global = true, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    kmax: Option<usize>,
    #[arg(long, global = true)]
    lambda_max: Option<f64>,
    /// output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// resolution of the command's main grid: branch samples for diagram and
    /// branch, spectrum intervals for morse, nodes per side for profile
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// also write JSON
    #[arg(long, global = true)]
    json: bool,
    /// also write SVG
    #[arg(long, global = true)]
    svg: bool,
    /// Morse indices along the diagram branches
    #[arg(long, global = true)]
    morse: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Full diagram: trivial, primary and secondary branches
    Diagram,
    /// One branch
    Branch {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "odd")]
        family: Family,
        #[arg(long, value_enum, default_value = "plus")]
        sign: SignArg,
    },
    /// Secondary bifurcation points on the odd branches
    Bifpoints {
        #[arg(long)]
        k: Option<usize>,
    },
    /// Spectra and Morse indices at selected points
    Morse {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "odd")]
        family: Family,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        beta: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
    },
    /// A solution profile on both half-intervals
    Profile {
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        beta1: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        beta2: Option<f64>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
    },
    /// Structural conditions, sampled invariants and the acceptance criteria
    Verify {
        /// only the checks on the configured problem
        #[arg(long)]
        skip_acceptance: bool,
    },
    /// Quick end-to-end check on the default problem
    Selftest,
}

fn load_config(c: &Common) -> anyhow::Result<Config> {
    let mut cfg = match &c.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(n) = c.nonlinearity {
        cfg.problem.nonlinearity = n;
    }
    if let Some(a) = c.a {
        cfg.problem.a = a;
    }
    if let Some(k) = c.kmax {
        cfg.problem.k_max = k;
    }
    if let Some(l) = c.lambda_max {
        cfg.problem.lambda_max = l;
    }
    if let Some(out) = &c.out {
        cfg.output.dir = out.clone();
    }
    cfg.output.json |= c.json;
    cfg.output.svg |= c.svg;
    cfg.output.morse |= c.morse;
    cfg.validate()?;
    Ok(cfg)
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("BIFURCATA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("BIFURCATA_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        anyhow::bail!("BIFURCATA_THREADS must be a positive integer, got 0");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

/// Numerical failures carry the library error somewhere in the chain;
/// everything else is a usage or configuration problem.
fn failure_code(e: &anyhow::Error) -> u8 {
    if e.chain().any(|c| c.downcast_ref::<bifurcata::Error>().is_some()) {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match init_threads().and_then(|_| load_config(&cli.common)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let grid = cli.common.grid;

    match cli.command {
        Command::Verify { skip_acceptance } => {
            return match commands::verify(&cfg, skip_acceptance) {
                Ok(r) if r.passed => ExitCode::SUCCESS,
                Ok(_) => ExitCode::from(EXIT_VERIFY_FAILED),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(failure_code(&e))
                }
            };
        }
        Command::Selftest => {
            return if commands::selftest() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY_FAILED)
            };
        }
        _ => {}
    }

    let sc = match cfg.context() {
        Ok(sc) => sc,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = match cli.command {
        Command::Diagram => commands::diagram(&cfg, &sc, grid),
        Command::Branch { k, family, sign } => commands::branch(&cfg, &sc, grid, k, family, sign),
        Command::Bifpoints { k } => commands::bifpoints(&cfg, &sc, k),
        Command::Morse { k, family, beta, lambda } => commands::morse(&cfg, &sc, grid, k, family, &beta, &lambda),
        Command::Profile {
            lambda,
            beta1,
            beta2,
            k,
            family,
            beta,
        } => commands::profile(
            &cfg,
            &sc,
            grid,
            &ProfileSelector {
                lambda,
                beta1,
                beta2,
                k,
                family,
                beta,
            },
        ),
        Command::Verify { .. } | Command::Selftest => unreachable!(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(failure_code(&e))
        }
    }
}
