use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rgta::analysis::{Constants, SweepAxis};
use rgta::harness::{self, AnalyzeRequest, ExperimentConfig};
use rgta::network::Variant;
use rgta::Error;

#[derive(Parser)]
#[command(name = "rgta", version, about = "Randomized gradient tracking experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Nc,
    P,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the rate matrices over n_c or p and write complexity CSVs.
    Analyze {
        #[arg(long)]
        mu: f64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        beta: Vec<f64>,
        #[arg(long, value_enum)]
        sweep: Axis,
        #[arg(long, default_value_t = (-1f64).exp())]
        eps: f64,
        /// Fixed n_c for a p sweep.
        #[arg(long, default_value_t = 1)]
        nc: u32,
        /// Largest n_c of an n_c sweep.
        #[arg(long, default_value_t = 50)]
        nc_max: u32,
        /// Fixed p for an n_c sweep.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// p values of a p sweep.
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', default_value = "RGTA-1,RGTA-2,RGTA-3")]
        methods: Vec<String>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Simulate every configured cell and seed, writing one trace per run.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run only this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Tune the step size of every configured cell over {2^-t}.
    Tune {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Summarize the traces in a directory: cost of reaching epsilon.
    Aggregate {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Treat eps as an absolute error instead of a fraction of the initial one.
        #[arg(long)]
        absolute: bool,
        /// Output file; defaults to <dir>/summary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn load(config: &Path, seed: Option<u64>, out_dir: Option<PathBuf>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    if let Some(d) = out_dir {
        cfg.out_dir = d;
    }
    Ok(cfg)
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Analyze {
            mu,
            l,
            n,
            beta,
            sweep,
            eps,
            nc,
            nc_max,
            p,
            p_grid,
            methods,
            out_dir,
        } => {
            if beta.is_empty() {
                return usage("--beta needs at least one value");
            }
            if !(mu > 0.0 && mu <= l) || n == 0 {
                return usage("need 0 < mu <= L and n >= 1");
            }
            if !(eps > 0.0 && eps < 1.0) {
                return usage("--eps must lie in (0, 1)");
            }
            let methods = methods
                .iter()
                .map(|m| m.parse::<Variant>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let axis = match sweep {
                Axis::Nc => {
                    if nc_max == 0 {
                        return usage("--nc-max must be positive");
                    }
                    SweepAxis::Nc {
                        p,
                        values: (1..=nc_max).collect(),
                    }
                }
                Axis::P => SweepAxis::P {
                    n_c: nc,
                    values: p_grid.unwrap_or_else(harness::default_p_grid),
                },
            };
            let req = AnalyzeRequest {
                consts: Constants { mu, l, n },
                betas: beta,
                methods,
                axis,
                epsilon: eps,
                out_dir,
            };
            req.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let (_, files) = harness::analyze(&req)?;
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Run { config, seed, out_dir } => {
            let cfg = load(&config, seed, out_dir)?;
            let out = harness::run_experiment(&cfg)?;
            for (cell, alpha) in &out.steps {
                match alpha {
                    Some(a) => println!("{} n_c={} p={} alpha={a:e}", cell.method, cell.n_c, cell.p),
                    None => println!("{} n_c={} p={} infeasible", cell.method, cell.n_c, cell.p),
                }
            }
            println!("wrote {} files to {}", out.files.len(), cfg.out_dir.display());
        }
        Command::Tune { config, seed, out_dir } => {
            let cfg = load(&config, seed, out_dir)?;
            let results = harness::tune_experiment(&cfg)?;
            print!("{}", harness::tuned_csv(&results));
        }
        Command::Aggregate { dir, eps, absolute, out } => {
            if !(eps > 0.0) {
                return usage("--eps must be positive");
            }
            let rows = harness::aggregate_dir(&dir, eps, !absolute)?;
            let text = harness::summary_csv(&rows, eps);
            let out = out.unwrap_or_else(|| dir.join("summary.csv"));
            harness::write_atomic(&out, text.as_bytes())?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
