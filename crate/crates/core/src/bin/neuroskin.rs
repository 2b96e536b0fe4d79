use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use neuroskin::commands::{self, LoadedConfig, TrainingOverrides, WeightSource};
use neuroskin::objective::DesignScaling;
use neuroskin::Error;

#[derive(Parser)]
#[command(name = "neuroskin", version, about = "Train neuron output weights of a finite-element membrane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a known design and write its output as a target series.
    GenTarget {
        #[command(flatten)]
        config: ConfigArg,
        /// Design values (one, or one per design variable), comma separated.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        w: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the output weights to a target series.
    Train {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        target: PathBuf,
        /// Run directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Recompute rmse and mse for every design row of a result file.
    Evaluate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        target: PathBuf,
        /// Result file, rewritten in place.
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Single forward run writing output.out and params.csv.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_delimiter = ',', conflicts_with = "params", allow_negative_numbers = true)]
        w: Option<Vec<f64>>,
        /// Per-element weights in params.csv format.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArg {
    /// JSON config; the shipped 10×20 plate experiment when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scaling {
    Raw,
    Normalized,
}

#[derive(Args)]
struct OverrideArgs {
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum)]
    scaling: Option<Scaling>,
    #[arg(long)]
    maxiter: Option<usize>,
    #[arg(long)]
    maxfun: Option<usize>,
    #[arg(long)]
    factr: Option<f64>,
    #[arg(long)]
    pgtol: Option<f64>,
    /// Keep per-evaluation run directories under <out>/evals.
    #[arg(long)]
    keep_evals: bool,
}

impl OverrideArgs {
    fn into_overrides(self) -> TrainingOverrides {
        TrainingOverrides {
            workers: self.workers,
            fd_delta: self.delta,
            scaling: self.scaling.map(|s| match s {
                Scaling::Raw => DesignScaling::Raw,
                Scaling::Normalized => DesignScaling::Normalized,
            }),
            maxiter: self.maxiter,
            maxfun: self.maxfun,
            factr: self.factr,
            pgtol: self.pgtol,
            keep_evals: self.keep_evals,
        }
    }
}

fn load(arg: &ConfigArg) -> Result<LoadedConfig, Error> {
    LoadedConfig::load_or_builtin(arg.config.as_deref())
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::GenTarget { config, w, out } => {
            let info = commands::gen_target(&load(&config)?, &w, &out)?;
            println!("wrote {} samples to {} (rms {:.6e})", info.n, out.display(), info.rms);
        }
        Command::Train {
            config,
            target,
            out,
            overrides,
        } => {
            let mut loaded = load(&config)?;
            overrides.into_overrides().apply(&mut loaded.config)?;
            let outcome = commands::train(&loaded, &target, &out)?;
            let s = &outcome.summary;
            println!("xopt = [{}]", fmt_vec(&s.xopt));
            println!("fopt = {:.10e}", s.fopt);
            println!("{} after {} iterations, {} evaluations", s.message, s.iterations, s.n_evaluations);
        }
        Command::Evaluate {
            config,
            target,
            results,
            workers,
        } => {
            let mut loaded = load(&config)?;
            if workers.is_some() {
                TrainingOverrides {
                    workers,
                    ..Default::default()
                }
                .apply(&mut loaded.config)?;
            }
            let rows = commands::evaluate(&loaded, &target, &results)?;
            for r in &rows {
                println!(
                    "{:>4}  [{}]  rmse {:.10e}  mse {:.10e}",
                    r.iter,
                    fmt_vec(&r.x),
                    r.rmse.unwrap_or(f64::NAN),
                    r.mse.unwrap_or(f64::NAN)
                );
            }
        }
        Command::Simulate {
            config,
            w,
            params,
            out,
        } => {
            let source = match (w, params) {
                (Some(w), _) => WeightSource::Design(w),
                (None, Some(p)) => WeightSource::ParamsFile(p),
                (None, None) => WeightSource::ConfigDefault,
            };
            let info = commands::simulate(&load(&config)?, &source, &out)?;
            println!("wrote {} samples to {} (rms {:.6e})", info.n, out.display(), info.rms);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
