use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use realrod_cli::config::{Format, MethodName, Overrides, RunConfig};
use realrod_cli::run::{self, Exit, Outcome, RunError, SuppressionGrid};
use realrod_cli::{record, write_table};

#[derive(Parser, Debug)]
#[command(
    name = "realrod",
    version,
    about = "CHSH correlations under smeared position readings"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Run configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo samples per integral.
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[arg(long, global = true, value_enum)]
    method: Option<MethodName>,
    /// Gaussian truncation for quadrature, in standard deviations.
    #[arg(long, global = true)]
    n_sigma: Option<f64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Result file; standard output if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the CHSH combination once.
    Chsh,
    /// Move the rod origin away along the configured distances.
    Sweep,
    /// Rescale both detectors by each configured factor.
    SizeStudy,
    /// Probability of finding each spin in a smeared detector.
    Prob,
    /// Tabulate the two-pair suppression factor.
    Suppression(SuppressionArgs),
    /// Check that a result file was produced from the given config.
    Verify { result: PathBuf },
}

#[derive(Args, Debug)]
struct SuppressionArgs {
    /// Separation within each pair.
    #[arg(long, required_unless_present = "reference")]
    delta: Option<f64>,
    /// Separation between the pairs.
    #[arg(long, required_unless_present = "reference")]
    d: Option<f64>,
    #[arg(long, default_value_t = realrod::PLANCK_LENGTH_SI)]
    planck_length: f64,
    /// Upper end of a log-spaced grid in delta.
    #[arg(long)]
    delta_max: Option<f64>,
    /// Upper end of a log-spaced grid in d.
    #[arg(long)]
    d_max: Option<f64>,
    /// Points per grid axis.
    #[arg(long, default_value_t = 10)]
    points: usize,
    /// Evaluate at nuclear delta (1e-15 m), d = 1e9 m and Planck length 1.616e-35 m.
    #[arg(long, conflicts_with_all = ["delta", "d", "planck_length", "delta_max", "d_max"])]
    reference: bool,
}

fn load(global: &Global) -> Result<RunConfig, RunError> {
    let path = global
        .config
        .as_ref()
        .ok_or_else(|| RunError::Config("--config is required for this command".into()))?;
    let mut cfg = RunConfig::load(path)?;
    cfg.apply(&Overrides {
        seed: global.seed,
        samples: global.samples,
        method: global.method,
        n_sigma: global.n_sigma,
        out: global.out.as_ref().map(|p| p.display().to_string()),
        format: global.format,
    });
    Ok(cfg)
}

fn emit(outcome: &Outcome, format: Format, hash: &str, path: Option<&str>) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Io(e.to_string());
    match path {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(io)?;
            write_table(&outcome.table, format, hash, std::io::BufWriter::new(file)).map_err(io)
        }
        None => write_table(&outcome.table, format, hash, std::io::stdout().lock()).map_err(io),
    }
}

fn execute(cli: &Cli) -> Result<Exit, RunError> {
    let g = &cli.global;
    let (outcome, format, hash, path) = match &cli.command {
        Command::Suppression(a) => {
            let grid = if a.reference {
                SuppressionGrid {
                    delta: 1e-15,
                    d: 1e9,
                    planck_length: 1.616e-35,
                    delta_max: None,
                    d_max: None,
                    points: a.points,
                }
            } else {
                SuppressionGrid {
                    delta: a.delta.unwrap_or_default(),
                    d: a.d.unwrap_or_default(),
                    planck_length: a.planck_length,
                    delta_max: a.delta_max,
                    d_max: a.d_max,
                    points: a.points,
                }
            };
            let outcome = run::suppression(&grid)?;
            if a.reference {
                eprintln!(
                    "note: reference inputs delta = 1e-15 m, d = 1e9 m, planck_length = 1.616e-35 m. \
                     The exponent is of order 1e10, so the factor underflows to 0 and 1 - factor = 1. \
                     An effect of order 1e-6 does not follow from the formula with these inputs; \
                     both the factor and its deviation from 1 are reported."
                );
            }
            let path = g.out.as_ref().map(|p| p.display().to_string());
            (
                outcome,
                g.format.unwrap_or_default(),
                run::suppression_hash(&grid),
                path,
            )
        }
        Command::Verify { result } => {
            let cfg = load(g)?;
            let text = std::fs::read_to_string(result).map_err(|e| RunError::Io(e.to_string()))?;
            record::verify(&text, &cfg.hash()).map_err(RunError::Config)?;
            eprintln!(
                "ok: {} matches config hash {}",
                result.display(),
                cfg.hash()
            );
            return Ok(Exit::Ok);
        }
        cmd => {
            let cfg = load(g)?;
            let engine = cfg.engine();
            let outcome = match cmd {
                Command::Chsh => run::chsh(&cfg, &engine),
                Command::Sweep => run::sweep(&cfg, &engine),
                Command::SizeStudy => run::size_study(&cfg, &engine),
                Command::Prob => run::probability(&cfg, &engine),
                Command::Suppression(_) | Command::Verify { .. } => unreachable!(),
            }?;
            (
                outcome,
                cfg.output.format,
                cfg.hash(),
                cfg.output.path.clone(),
            )
        }
    };
    for w in &outcome.warnings {
        eprintln!("{w}");
    }
    emit(&outcome, format, &hash, path.as_deref())?;
    if outcome.failures.is_empty() {
        Ok(Exit::Ok)
    } else {
        for f in &outcome.failures {
            eprintln!("failed: {f}");
        }
        Ok(Exit::Numerical)
    }
}

#[cfg(feature = "parallel")]
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(RunError::Config("--jobs must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match jobs {
        Some(0) => Err(RunError::Config("--jobs must be at least 1".into())),
        _ => Ok(f()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = with_jobs(cli.global.jobs, || execute(&cli)).and_then(|r| r);
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit()
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code as u8)
}
