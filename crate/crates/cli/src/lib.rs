//! The `deobbench` command line: single-stage commands plus an end-to-end
//! `pipeline` that writes every intermediate file under one directory.

mod commands;
mod manifest;
mod pipeline;
mod pool;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use deobbench_core::dataset::Condition;
use deobbench_core::transforms::TransformKind;
use thiserror::Error;

pub use manifest::{ModelSpec, Provider, RunManifest, TransformOptions};
pub use pipeline::{run_pipeline, PipelineSummary, STAGE_FILE, SUMS_FILE};
pub use pool::parallel_map;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

impl CliError {
    pub fn stage(stage: &'static str, message: impl ToString) -> CliError {
        CliError::Stage {
            stage,
            message: message.to_string(),
        }
    }

    /// 2 for usage errors, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Stage { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "deobbench", version, about = "Obfuscate, explore, build datasets and score deobfuscations of mini-C programs")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-program stages and concurrent requests.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output location (a directory, or the results file for `infer`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML run manifest supplying defaults for every flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply one obfuscating transformation to a file.
    Obfuscate(ObfuscateArgs),
    /// Explore a program symbolically and write its artifact files.
    Symexec(SymexecArgs),
    /// Build fine-tuning corpora.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Send dataset records to a model and collect its answers.
    Infer(InferArgs),
    /// Score one candidate deobfuscation against its original.
    Evaluate(EvaluateArgs),
    /// Aggregate score files into a CSV and a table.
    Report(ReportArgs),
    /// Run every stage from corpus to report.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct ObfuscateArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub kind: TransformKind,
    /// Reproduce the published listings instead of the exact encodings.
    #[arg(long)]
    pub paper_fidelity: bool,
    /// Output file; standard output when absent.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SymexecArgs {
    pub input: PathBuf,
    /// Entry function; defaults to the last one in the file.
    #[arg(long)]
    pub entry: Option<String>,
    #[arg(long)]
    pub max_paths: Option<usize>,
    #[arg(long)]
    pub max_loop_unroll: Option<usize>,
    /// Inclusive input range, `LO:HI`.
    #[arg(long, value_parser = parse_domain, allow_hyphen_values = true)]
    pub domain: Option<(i32, i32)>,
    /// Declare inputs as unbounded integers in the SMT2 file.
    #[arg(long)]
    pub smt2_int_sort: bool,
    /// Directory for the artifact files (falls back to `--out`).
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    /// Obfuscate, explore and filter a corpus, then write JSONL files to `--out`.
    Build(DatasetBuildArgs),
}

#[derive(Debug, Args)]
pub struct DatasetBuildArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// One condition, or both when absent.
    #[arg(long)]
    pub condition: Option<Condition>,
    /// Token budget per record.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub smt2_int_sort: bool,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Chat-completions base URL.
    #[arg(long, required_unless_present = "stub")]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Answer with the built-in identity stub instead of calling a server.
    #[arg(long, conflicts_with = "endpoint")]
    pub stub: bool,
    /// Records written by `dataset build`.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Environment variable holding the API key.
    #[arg(long)]
    pub api_key_env: Option<String>,
    #[arg(long)]
    pub timeout: Option<u64>,
    #[arg(long)]
    pub max_retries: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub original: PathBuf,
    #[arg(long)]
    pub candidate: PathBuf,
    /// Entry function; defaults to the last one in the original.
    #[arg(long)]
    pub entry: Option<String>,
    /// Compiler command for the syntax check; `{file}` is the candidate path.
    #[arg(long)]
    pub compiler_cmd: Option<String>,
    /// Tag the output as a score record for `report`.
    #[arg(long)]
    pub kind: Option<TransformKind>,
    #[arg(long, requires = "kind")]
    pub model_condition: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Score JSON files or directories searched recursively.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<TransformKind>>,
    #[arg(long, value_delimiter = ',')]
    pub conditions: Option<Vec<Condition>>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub compiler_cmd: Option<String>,
    #[arg(long)]
    pub smt2_int_sort: bool,
    /// Query this chat-completions endpoint instead of the stub.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long, requires = "endpoint")]
    pub model: Option<String>,
}

fn parse_domain(s: &str) -> Result<(i32, i32), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: i32 = lo.trim().parse().map_err(|e| format!("LO: {e}"))?;
    let hi: i32 = hi.trim().parse().map_err(|e| format!("HI: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

impl Cli {
    /// The manifest from `--config` (or defaults) with global flags applied.
    pub fn manifest(&self) -> Result<RunManifest, CliError> {
        let mut m = match &self.config {
            Some(path) => RunManifest::load(path)?,
            None => RunManifest::default(),
        };
        if let Some(seed) = self.seed {
            m.seed = seed;
        }
        if let Some(jobs) = self.jobs {
            m.jobs = jobs;
        }
        if let Some(out) = &self.out {
            m.out = out.clone();
        }
        Ok(m)
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let manifest = cli.manifest()?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Obfuscate(a) => commands::obfuscate(&a, &manifest),
        Command::Symexec(a) => commands::symexec(&a, &manifest, out),
        Command::Dataset(DatasetCommand::Build(a)) => commands::dataset_build(&a, manifest, out),
        Command::Infer(a) => commands::infer(&a, &manifest, out),
        Command::Evaluate(a) => commands::evaluate(&a, &manifest, out),
        Command::Report(a) => commands::report(&a, out),
        Command::Pipeline(a) => {
            let m = commands::pipeline_manifest(&a, manifest)?;
            let summary = run_pipeline(&m)?;
            print!("{}", summary.table);
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_flag() {
        assert_eq!(parse_domain("-1024:1023"), Ok((-1024, 1023)));
        assert!(parse_domain("5:1").is_err());
        assert!(parse_domain("5").is_err());
    }

    #[test]
    fn manifest_round_trips_through_toml() {
        let mut m = RunManifest {
            compiler_cmd: Some("cc -fsyntax-only {file}".to_string()),
            ..RunManifest::default()
        };
        m.model.endpoint = Some("http://localhost:8000/v1".to_string());
        let back: RunManifest = toml::from_str(&m.to_toml()).unwrap();
        assert_eq!(back, m);
        let partial: RunManifest = toml::from_str("seed = 7\n[limits]\nmax_paths = 10\n").unwrap();
        assert_eq!((partial.seed, partial.limits.max_paths, partial.limits.max_loop_unroll), (7, 10, 64));
        assert!(toml::from_str::<RunManifest>("sede = 7\n").is_err());
    }
}
