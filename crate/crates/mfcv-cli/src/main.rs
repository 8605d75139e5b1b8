//! Command-line driver: run experiment suites, evaluate benchmark functions
//! at given points, or validate a configuration.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mfcv::benchmarks::Benchmark;
use mfcv_cli::config::{parse_config, Overrides};
use mfcv_cli::output::{fmt_f64, run_command};

#[derive(Parser)]
#[command(name = "mfcv", version, about = "Multifidelity cross-validation active learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for all random streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Strategy to run (mfcv, hf, sobol); overrides the file's list.
    #[arg(long)]
    strategy: Option<String>,
    /// Benchmark name (multimodal, four_branches, ishigami, hartmann6).
    #[arg(long)]
    benchmark: Option<String>,
    /// Number of acquisition iterations per repetition.
    #[arg(long)]
    iterations: Option<usize>,
    /// Points acquired jointly per iteration.
    #[arg(long)]
    batch: Option<usize>,
    /// Number of repetitions with different seed datasets.
    #[arg(long)]
    reps: Option<usize>,
    /// Output directory for the result bundle.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            benchmark: self.benchmark.clone(),
            strategy: self.strategy.clone(),
            seed: self.seed,
            iterations: self.iterations,
            batch_size: self.batch,
            repetitions: self.reps,
            out: self.out.as_ref().map(|p| p.display().to_string()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment suite and write the result bundle.
    Run(ConfigArgs),
    /// Evaluate a benchmark at one input-fidelity pair.
    Bench {
        /// Benchmark name.
        #[arg(long)]
        benchmark: String,
        /// Comma-separated input coordinates.
        #[arg(long)]
        x: String,
        /// Fidelity in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Optional comma-separated fidelity levels to validate against.
        #[arg(long)]
        levels: Option<String>,
    },
    /// Parse and validate a configuration, printing the resolved form.
    Validate(ConfigArgs),
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("invalid {what} entry '{t}': {e}"))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let resolved = match parse_config(args.config.as_deref(), &args.overrides()) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("configuration error: {e}");
                    return ExitCode::from(2);
                }
            };
            eprintln!(
                "running {} strategy run(s) on {} ({} iterations x {} repetitions) ...",
                resolved.experiments.len(),
                resolved.file.benchmark,
                resolved.file.iterations,
                resolved.file.repetitions
            );
            match run_command(&resolved) {
                Ok((report, bundle)) => {
                    for failure in &report.failures {
                        eprintln!("warning: {failure}");
                    }
                    for run in &report.runs {
                        eprintln!(
                            "  {:>5} rep {}: rmse {:.6} -> {:.6} at cost {:.1} ({} fallbacks)",
                            run.strategy.name(),
                            run.repetition,
                            run.initial_rmse,
                            run.final_rmse(),
                            run.final_cost(),
                            run.fallback_count
                        );
                    }
                    println!("{}", bundle.dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("runtime failure: {e}");
                    ExitCode::from(3)
                }
            }
        }
        Command::Bench {
            benchmark,
            x,
            s,
            levels,
        } => {
            let result = (|| -> Result<f64, String> {
                let mut bench = Benchmark::by_name(&benchmark).map_err(|e| e.to_string())?;
                if let Some(levels) = levels {
                    let levels = parse_list(&levels, "levels")?;
                    bench = bench.discretize_fidelity(levels).map_err(|e| e.to_string())?;
                    if !bench.fidelity_space().contains(s) {
                        return Err(format!("fidelity {s} is not one of the configured levels"));
                    }
                }
                let x = parse_list(&x, "x")?;
                bench.evaluate(&x, s).map_err(|e| e.to_string())
            })();
            match result {
                Ok(v) => {
                    println!("{}", fmt_f64(v));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("configuration error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Validate(args) => match parse_config(args.config.as_deref(), &args.overrides()) {
            Ok(resolved) => {
                print!("{}", resolved.echo_toml());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("configuration error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
