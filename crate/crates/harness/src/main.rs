use clap::{Parser, Subcommand};
use pricenet::nn::read_model;
use pricenet::optim::evaluate;
use pricenet::sampling::{build_dataset_with_stats, read_dataset, write_dataset, ProblemKind};
use pricenet_harness::{
    oracle, parse_records_csv, report, run_experiment, run_suite, ExperimentConfig, ReportFormat,
    Scale, SuiteName, SuiteOptions, VERSION,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pricenet", version, about = "Architecture benchmarks for learned option pricing and implied volatility")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled dataset file.
    Generate {
        /// Problem: bs|heston|iv|tiv
        #[arg(long)]
        problem: ProblemKind,
        /// Number of rows
        #[arg(long)]
        n: usize,
        /// Generation seed
        #[arg(long)]
        seed: u64,
        /// Output file
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one network from a key=value config file.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a saved model on a dataset file.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Run a predefined experiment suite.
    Suite {
        /// Suite: mlp12|highway|dgm|dgm_variants|equal_params
        #[arg(long)]
        name: SuiteName,
        /// Problem: bs|heston|iv|tiv
        #[arg(long)]
        problem: ProblemKind,
        /// Scale: desk|paper
        #[arg(long, default_value = "desk")]
        scale: Scale,
        /// Init/shuffle seeds; more than one reports per-model medians
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seeds: Vec<u64>,
        /// Worker threads, one experiment per worker
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory (default runs/<suite>_<problem>_<scale>)
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Render records as a table or plot data.
    Report {
        /// Records CSV produced by `suite` or `train`
        #[arg(long, name = "in")]
        input: PathBuf,
        /// Format: table|plotdata
        #[arg(long)]
        format: ReportFormat,
        /// Output stem (default: input path without extension)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run validation oracles and print pass/fail.
    Oracle {
        /// Check: bs|heston|iv|grad|params|all
        #[arg(long)]
        check: String,
        /// Monte Carlo paths for the Heston cross-check
        #[arg(long, default_value_t = 1_000_000)]
        mc_paths: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Generate { problem, n, seed, out } => {
            let (grid, stats) = build_dataset_with_stats(problem, n, seed)?;
            write_dataset(&grid, &out)?;
            println!(
                "wrote {} rows of problem `{problem}` (seed {seed}, {} resampled) to {}",
                grid.len(),
                stats.resamples,
                out.display()
            );
        }
        Command::Train { config } => {
            let cfg = ExperimentConfig::read_file(&config)?;
            let (record, history) = run_experiment(&cfg)?;
            println!(
                "{}: {} parameters, {} epochs, final val loss {:.4e}",
                record.model,
                record.parameters,
                history.val_loss.len(),
                history.val_loss.last().unwrap()
            );
            println!(
                "test MSE {:.4e}, training time {:.2} h ({:.1} s)",
                record.test_mse,
                record.hours(),
                record.train_seconds
            );
            if let Some(dir) = &cfg.out_dir {
                println!("artifacts in {}", dir.display());
            }
        }
        Command::Evaluate { model, dataset } => {
            let (spec, params) = read_model(&model)?;
            let grid = read_dataset(&dataset)?;
            let mse = evaluate(&spec, &params, &grid)?;
            println!(
                "{} {}x{} on {} ({} rows): MSE {mse:.6e}",
                spec.kind.display_name(),
                spec.layers,
                spec.nodes,
                dataset.display(),
                grid.len()
            );
        }
        Command::Suite { name, problem, scale, seeds, jobs, out_dir } => {
            let out_dir = out_dir.unwrap_or_else(|| {
                PathBuf::from("runs").join(format!("{}_{problem}_{}", name.id(), scale.id()))
            });
            std::fs::create_dir_all(&out_dir)?;
            let opts = SuiteOptions {
                seeds,
                jobs,
                out_dir: Some(out_dir.clone()),
                ..SuiteOptions::default()
            };
            let records = run_suite(name, problem, scale, &opts)?;
            let stem = out_dir.join("records");
            let written = report(&records, ReportFormat::Table, &stem)?;
            println!("{}", std::fs::read_to_string(&written[0])?);
            for p in &written {
                println!("wrote {}", p.display());
            }
        }
        Command::Report { input, format, out } => {
            let records = parse_records_csv(&input)?;
            let stem = out.unwrap_or_else(|| input.with_extension(""));
            let written = report(&records, format, &stem)?;
            if format == ReportFormat::Table {
                println!("{}", std::fs::read_to_string(&written[0])?);
            }
            for p in &written {
                println!("wrote {}", p.display());
            }
        }
        Command::Oracle { check, mc_paths } => {
            let outcomes = oracle::run_checks(&check, mc_paths)?;
            let mut all_ok = true;
            for outcome in &outcomes {
                println!("check `{}`:", outcome.name);
                for line in &outcome.lines {
                    println!("{line}");
                }
                println!(
                    "check `{}`: {}  (pricenet v{VERSION})",
                    outcome.name,
                    if outcome.passed { "PASS" } else { "FAIL" }
                );
                all_ok &= outcome.passed;
            }
            if !all_ok {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
