use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tsadbench_core::bench::{
    emit_reports, evaluate_scores, load_datasets, load_run_config, parse_results_json, parse_runtime_csv, run,
    BenchError, CriterionSpec,
};
use tsadbench_core::schemas::{plan, Schema};
use tsadbench_core::synth::{generate_dataset, SynthDatasetConfig, SynthError};

const EXIT_CONFIG: u8 = 1;
const EXIT_DATASET: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "tsadbench", version, about = "Univariate time-series anomaly detection benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every detector under every schema and criterion of a config.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Let built-in statistical detectors run under pooled schemas.
        #[arg(long)]
        allow_statistical_pooling: bool,
        /// Latency limit for `k=dataset` criteria: `K` for every dataset or
        /// `NAME=K` for one. Repeatable; wins over config and manifests.
        #[arg(long, value_name = "[NAME=]K")]
        k_delay: Vec<String>,
    },
    /// Recompute metrics from score dumps.
    Eval {
        /// Score directory (`<dataset>/<detector>/<schema>/<curve>.csv`).
        #[arg(short, long)]
        scores: PathBuf,
        /// Dataset root; repeatable.
        #[arg(short, long = "dataset", required = true)]
        datasets: Vec<PathBuf>,
        /// Comma-separated criteria, e.g. `rl,ew:k=3:l=0`.
        #[arg(long, value_delimiter = ',', required = true)]
        criteria: Vec<String>,
        /// Previous results.json whose rows are reused.
        #[arg(long)]
        existing: Option<PathBuf>,
        #[arg(long, value_name = "[NAME=]K")]
        k_delay: Vec<String>,
        /// Output directory; defaults to the parent of the score directory.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset.
    Gen {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print the plan of a dataset under a schema as JSON.
    Split {
        #[arg(short, long)]
        dataset: PathBuf,
        #[arg(long, default_value = "naive")]
        schema: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-emit tables from a results.json (and a sibling runtime.csv if any).
    Report {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        let code = match e {
            SynthError::Dataset(_) => EXIT_DATASET,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn parse_k_overrides(values: &[String], into: &mut BTreeMap<String, usize>) -> Result<(), Failure> {
    for v in values {
        let (name, k) = v.split_once('=').unwrap_or(("*", v.as_str()));
        let k = k
            .parse()
            .map_err(|_| config_error(format!("--k-delay '{v}': expected [NAME=]K with K >= 0")))?;
        if name == "*" {
            // A global override beats every per-dataset setting.
            into.clear();
        }
        into.insert(name.to_string(), k);
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn execute(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Run {
            config,
            out,
            workers,
            allow_statistical_pooling,
            k_delay,
        } => {
            let mut cfg = load_run_config(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            cfg.allow_statistical_pooling |= allow_statistical_pooling;
            parse_k_overrides(&k_delay, &mut cfg.k_delay_overrides)?;
            let out = out
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| config_error("no output directory: pass -o or set output_dir"))?;
            let report = run(&cfg, &out)?;
            let failed = report.failures().count();
            eprintln!(
                "{} metric rows, {} tasks, {} failed, {} excluded curves; reports in {}",
                report.metrics.len(),
                report.tasks.len(),
                failed,
                report.exclusions.len(),
                out.display()
            );
            Ok(if failed > 0 { EXIT_PARTIAL } else { 0 })
        }
        Command::Eval {
            scores,
            datasets,
            criteria,
            existing,
            k_delay,
            out,
        } => {
            let criteria = criteria
                .iter()
                .map(|c| c.parse::<CriterionSpec>())
                .collect::<Result<Vec<_>, _>>()?;
            let mut overrides = BTreeMap::new();
            parse_k_overrides(&k_delay, &mut overrides)?;
            let existing = match existing {
                Some(path) => Some(parse_results_json(&read(&path)?)?),
                None => None,
            };
            let loaded = load_datasets(&datasets)?;
            let report = evaluate_scores(&scores, &loaded, &criteria, &overrides, existing.as_ref())?;
            let out = out.unwrap_or_else(|| scores.parent().map(Path::to_path_buf).unwrap_or_default());
            emit_reports(&report, &out)?;
            eprintln!("{} metric rows; reports in {}", report.metrics.len(), out.display());
            Ok(0)
        }
        Command::Gen { config, out } => {
            let cfg: SynthDatasetConfig =
                serde_json::from_str(&read(&config)?).map_err(|e| config_error(format!("{}: {e}", config.display())))?;
            let dataset = generate_dataset(&cfg, &out)?;
            eprintln!("wrote {} curves to {}", dataset.series.len(), out.display());
            Ok(0)
        }
        Command::Split { dataset, schema, seed } => {
            let schema: Schema = schema.parse().map_err(|e| config_error(format!("{e}")))?;
            let loaded = load_datasets(&[dataset])?;
            let data = &loaded[0];
            let p = plan(&data.dataset.series, schema, seed).map_err(|source| BenchError::Plan {
                dataset: data.name().to_string(),
                source,
            })?;
            println!("{}", p.to_json());
            Ok(0)
        }
        Command::Report { input, out } => {
            let mut report = parse_results_json(&read(&input)?)?;
            let runtime = input.with_file_name("runtime.csv");
            if runtime.is_file() {
                report.runtime = parse_runtime_csv(&read(&runtime)?)?;
            }
            let files = emit_reports(&report, &out)?;
            eprintln!("wrote {} tables to {}", files.tables.len(), out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
