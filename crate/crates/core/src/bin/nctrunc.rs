use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nctrunc::cli::{self, ExperimentConfig, FunctionSpec, Task, TaskKind, SCHEMA_VERSION};
use nctrunc::ergo::TauSource;
use nctrunc::Result;

/// Spectral truncations of spectral triples.
#[derive(Parser)]
#[command(name = "nctrunc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `circle`, `toeplitz`, `flat_torus:D`, `nc_torus:THETA`,
    /// `almost_commutative:d1,d2,…` or an inline JSON descriptor.
    #[arg(long, default_value = "circle")]
    model: String,
    /// Output directory for CSV and summary.json.
    #[arg(long, default_value = "nctrunc-out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Truncated,
    LogMean,
    Dixmier,
    Heat,
    Weighted,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tau {
    LogMean,
    Truncated,
    Heat,
}

impl From<Tau> for TauSource {
    fn from(t: Tau) -> Self {
        match t {
            Tau::LogMean => TauSource::LogMean,
            Tau::Truncated => TauSource::Truncated,
            Tau::Heat => TauSource::Heat,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Weyl-law fit of the counting function.
    Weyl {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "250,500,1000,2000")]
        lambda_ladder: String,
    },
    /// Estimate the noncommutative integral of an operator.
    Integrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: String,
        #[arg(long, value_enum, default_value = "truncated")]
        estimator: Estimator,
        #[arg(long)]
        lambda_ladder: Option<String>,
        /// Log-mean horizons.
        #[arg(long)]
        horizons: Option<String>,
        /// Heat parameters, decreasing.
        #[arg(long)]
        t_ladder: Option<String>,
        /// Weight exponent for the weighted Dixmier formula.
        #[arg(long, default_value_t = 0.0)]
        s: f64,
    },
    /// Szegő limit for f(x) = x^p.
    Szego {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 2)]
        power: u32,
        #[arg(long, default_value = "50,100,200")]
        lambda_ladder: String,
        #[arg(long, value_enum, default_value = "log-mean")]
        rhs: Tau,
    },
    /// Widom escape ratio Tr(P A (1-P) B P)/Tr(P).
    Widom {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: String,
        /// Second operator; defaults to adj(op).
        #[arg(long)]
        op_b: Option<String>,
        #[arg(long, default_value = "50,100,200")]
        lambda_ladder: String,
    },
    /// Quantum-ergodicity variance ladder.
    Qe {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: String,
        #[arg(long, default_value = "25,50,100")]
        lambda_ladder: String,
        #[arg(long, value_enum, default_value = "log-mean")]
        tau: Tau,
    },
    /// Fröhlich functional Tr(A e^{-t|D|})/Tr(e^{-t|D|}).
    Frohlich {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value = "0.1,0.01,0.001")]
        t_ladder: String,
    },
    /// Time-average ergodicity criterion.
    Timeavg {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        op: String,
        #[arg(long, default_value = "1,10,100")]
        t_ladder: String,
        #[arg(long, default_value_t = 64.0)]
        lambda: f64,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
    },
    /// Run an experiment config.
    Run {
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn usizes(src: &str) -> Result<Vec<usize>> {
    Ok(cli::parse_ladder(src)?.into_iter().map(|x| x as usize).collect())
}

fn opt_ladder(src: &Option<String>) -> Result<Option<Vec<f64>>> {
    src.as_deref().map(cli::parse_ladder).transpose()
}

fn single(common: &Common, id: &str, kind: TaskKind) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: id.to_string(),
        model: cli::parse_model(&common.model)?,
        limits: None,
        estimators: vec![Task {
            id: id.to_string(),
            kind,
            assertion: None,
        }],
        output_dir: common.out.clone(),
        measurable_tol: nctrunc::seq::DEFAULT_MEASURABLE_TOL,
        seed: 0,
    })
}

fn config(cmd: &Command) -> Result<(ExperimentConfig, Option<PathBuf>)> {
    let cfg = match cmd {
        Command::Run { config, out } => return Ok((ExperimentConfig::from_path(config)?, out.clone())),
        Command::Weyl { common, lambda_ladder } => single(
            common,
            "weyl",
            TaskKind::Weyl {
                lambda_ladder: cli::parse_ladder(lambda_ladder)?,
            },
        )?,
        Command::Integrate {
            common,
            op,
            estimator,
            lambda_ladder,
            horizons,
            t_ladder,
            s,
        } => {
            let op = op.clone();
            let horizons = horizons.as_deref().map(usizes).transpose()?;
            let kind = match estimator {
                Estimator::Truncated => TaskKind::TruncatedIntegral {
                    op,
                    lambda_ladder: opt_ladder(lambda_ladder)?,
                },
                Estimator::LogMean => TaskKind::LogMeanDiagonal { op, horizons },
                Estimator::Dixmier => TaskKind::DixmierDiagonal { op, horizons, d: None },
                Estimator::Heat => TaskKind::HeatIntegral {
                    op,
                    t_ladder: opt_ladder(t_ladder)?,
                },
                Estimator::Weighted => TaskKind::WeightedDixmier {
                    op,
                    s: *s,
                    lambda_ladder: opt_ladder(lambda_ladder)?
                        .unwrap_or_else(|| vec![500.0, 1000.0, 2000.0]),
                },
            };
            single(common, "integrate", kind)?
        }
        Command::Szego {
            common,
            op,
            power,
            lambda_ladder,
            rhs,
        } => single(
            common,
            "szego",
            TaskKind::Szego {
                op: op.clone(),
                function: FunctionSpec::Monomial(*power),
                lambda_ladder: cli::parse_ladder(lambda_ladder)?,
                rhs: (*rhs).into(),
            },
        )?,
        Command::Widom {
            common,
            op,
            op_b,
            lambda_ladder,
        } => single(
            common,
            "widom",
            TaskKind::Widom {
                op: op.clone(),
                op_b: op_b.clone().unwrap_or_else(|| format!("adj({op})")),
                lambda_ladder: cli::parse_ladder(lambda_ladder)?,
            },
        )?,
        Command::Qe {
            common,
            op,
            lambda_ladder,
            tau,
        } => single(
            common,
            "qe",
            TaskKind::Qe {
                op: op.clone(),
                lambda_ladder: cli::parse_ladder(lambda_ladder)?,
                tau: (*tau).into(),
            },
        )?,
        Command::Frohlich {
            common,
            op,
            beta,
            t_ladder,
        } => single(
            common,
            "frohlich",
            TaskKind::Frohlich {
                op: op.clone(),
                beta: *beta,
                t_ladder: cli::parse_ladder(t_ladder)?,
            },
        )?,
        Command::Timeavg {
            common,
            op,
            t_ladder,
            lambda,
            horizon,
        } => single(
            common,
            "timeavg",
            TaskKind::TimeAverage {
                op: op.clone(),
                t_ladder: cli::parse_ladder(t_ladder)?,
                lambda: *lambda,
                horizon: *horizon,
            },
        )?,
    };
    Ok((cfg, None))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Cli::parse();
    let outcome = config(&args.command).and_then(|(cfg, out)| cli::run_experiment(&cfg, out.as_deref()));
    match outcome {
        Ok(summary) => {
            if let Ok(s) = serde_json::to_string_pretty(&summary) {
                // A closed pipe is not an error for a report printer.
                let _ = writeln!(std::io::stdout(), "{s}");
            }
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{}", cli::runner::error_record(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
