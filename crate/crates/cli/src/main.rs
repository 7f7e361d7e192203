//! `ncskit`: validate, annotate, score and compare visual-story corpora.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncskit_core::metrics::DEFAULT_EPSILON;
use ncskit_core::report::{self, ConditionFilter, ReportError, RunConfig, DEFAULT_REFERENCE};
use ncskit_core::AnnotationKind;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "ncskit",
    version,
    about = "Narrative coherence scoring for visual stories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check annotation bundles against their stories.
    Validate(Common),
    /// Fill missing annotations with the baseline annotators.
    Annotate(Common),
    /// Score every story (scores.jsonl).
    Score(Common),
    /// Per-system tables with paired t-tests (compare.csv, compare.json, perplexity.csv).
    Compare(Common),
    /// Topic-switch rate per granularity (sweep.csv).
    Sweep(Common),
    /// Relation-label proportions (composition.csv).
    Composition(Common),
}

#[derive(Args)]
struct Common {
    /// Corpus file(s) in JSON-lines interchange format.
    #[arg(long = "input", short, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, short, default_value = ".")]
    out: PathBuf,
    /// Character lexicon for the name-matching baselines.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Comma-separated, strictly descending (default 80,75,...,5).
    #[arg(long, value_delimiter = ',')]
    granularities: Option<Vec<u32>>,
    /// Fail on missing annotations and unknown relation labels.
    #[arg(long)]
    strict: bool,
    /// Comma-separated systems to compare with the reference, in row order.
    #[arg(long, value_delimiter = ',')]
    systems: Option<Vec<String>>,
    /// short, long or both.
    #[arg(long, default_value = "both")]
    condition: ConditionFilter,
    #[arg(long, default_value = DEFAULT_REFERENCE)]
    reference: String,
    /// Put the reference row first instead of last.
    #[arg(long)]
    reference_first: bool,
    /// Leave single-segment stories out of tables and tests.
    #[arg(long)]
    exclude_degenerate: bool,
    /// Annotation kinds the baselines may fill, comma-separated, or "none".
    #[arg(long, value_delimiter = ',')]
    baseline: Option<Vec<String>>,
    /// Worker threads for scoring.
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_kinds(names: &[String]) -> Result<BTreeSet<AnnotationKind>, ReportError> {
    if names.iter().any(|n| n == "none") {
        return Ok(BTreeSet::new());
    }
    names
        .iter()
        .map(|n| {
            AnnotationKind::ALL
                .into_iter()
                .find(|k| k.as_str() == n && *k != AnnotationKind::Perplexity)
                .ok_or_else(|| ReportError::InvalidConfig(format!("unknown baseline kind {n:?}")))
        })
        .collect()
}

impl Common {
    fn into_config(self) -> Result<RunConfig, ReportError> {
        let defaults = RunConfig::default();
        let config = RunConfig {
            inputs: self.input,
            out_dir: self.out,
            lexicon: self.lexicon,
            epsilon: self.epsilon,
            granularities: self.granularities.unwrap_or(defaults.granularities),
            strict: self.strict,
            systems: self.systems,
            condition: self.condition,
            reference: self.reference,
            reference_first: self.reference_first,
            exclude_degenerate: self.exclude_degenerate,
            baseline: match &self.baseline {
                Some(names) => parse_kinds(names)?,
                None => defaults.baseline,
            },
            jobs: self.jobs,
        };
        config.check()?;
        Ok(config)
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        emit(&format!("wrote {}\n", p.display()));
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes") + "\n"
}

fn run(command: Command) -> Result<ExitCode, ReportError> {
    match command {
        Command::Validate(c) => {
            let report = report::cmd_validate(&c.into_config()?)?;
            emit(&pretty(&report));
            return Ok(ExitCode::from(report.exit_code() as u8));
        }
        Command::Annotate(c) => {
            let outcome = report::cmd_annotate(&c.into_config()?)?;
            emit(&pretty(&outcome));
        }
        Command::Score(c) => print_paths(&report::cmd_score(&c.into_config()?)?),
        Command::Compare(c) => emit(&report::cmd_compare(&c.into_config()?)?),
        Command::Sweep(c) => print_paths(&report::cmd_sweep(&c.into_config()?)?),
        Command::Composition(c) => print_paths(&report::cmd_composition(&c.into_config()?)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let error =
                json!({ "error": { "kind": "usage", "message": e.to_string().trim_end() } });
            eprintln!("{error}");
            return ExitCode::from(2);
        }
    };
    if std::env::var_os("NCSKIT_SEED").is_some() {
        eprintln!("warning: NCSKIT_SEED is ignored; all commands are deterministic");
    }
    match run(cli.command) {
        Ok(code) => {
            let _ = std::io::stdout().flush();
            code
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
