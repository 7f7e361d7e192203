//! Command implementations behind the `ncskit` binary.
//!
//! Each `cmd_*` function loads its inputs, runs the pipeline and writes its
//! output files into [`RunConfig::out_dir`]. The in-memory building blocks
//! ([`score_corpus`], [`compare`], [`sweep`], [`composition`]) are public so
//! the same results can be produced without touching the filesystem.

mod compare;
mod csv_out;
mod score;
mod sweep;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::baseline::{self, AnnotateOptions, AnnotateSummary, BaselineError, LexiconError};
use crate::corpus::{
    load_corpus, validate_bundle, write_corpus, AnnotationKind, Corpus, CorpusError,
    PromptCondition, Violation,
};
use crate::metrics::{MetricConfig, MetricError, DEFAULT_EPSILON};
use crate::stats::{StatsError, SystemOrder};

pub use compare::{
    compare, CompareReport, DescriptiveRow, GapRow, GapTable, MetricTable, NamedSummary, ScoreCell,
    TableRow,
};
pub use score::{render_scores, score_corpus, ScoreRecord};
pub use sweep::{composition, sweep, CompositionRow, SweepRow};

/// Default reference system name.
pub const DEFAULT_REFERENCE: &str = "human";

/// Topic granularities 80, 75, ..., 5.
pub fn default_granularities() -> Vec<u32> {
    (1..=16).rev().map(|k| k * 5).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionFilter {
    Short,
    Long,
    Both,
}

impl ConditionFilter {
    pub fn admits(self, c: PromptCondition) -> bool {
        match self {
            ConditionFilter::Short => c == PromptCondition::Short,
            ConditionFilter::Long => c == PromptCondition::Long,
            ConditionFilter::Both => true,
        }
    }
}

impl std::str::FromStr for ConditionFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "short" => Ok(ConditionFilter::Short),
            "long" => Ok(ConditionFilter::Long),
            "both" => Ok(ConditionFilter::Both),
            other => Err(format!(
                "unknown condition {other:?} (expected short, long or both)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub lexicon: Option<PathBuf>,
    pub epsilon: f64,
    /// Strictly descending; used when baseline topics are generated.
    pub granularities: Vec<u32>,
    /// Fail on missing annotations instead of filling them with baselines.
    pub strict: bool,
    /// Systems compared with the reference, in row order. `None` = all.
    pub systems: Option<Vec<String>>,
    pub condition: ConditionFilter,
    pub reference: String,
    pub reference_first: bool,
    /// Drop single-segment stories before aggregation and testing.
    pub exclude_degenerate: bool,
    /// Annotation kinds the baselines may fill in lenient mode.
    pub baseline: BTreeSet<AnnotationKind>,
    /// Worker threads for per-story scoring; `None` = rayon default.
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            out_dir: PathBuf::from("."),
            lexicon: None,
            epsilon: DEFAULT_EPSILON,
            granularities: default_granularities(),
            strict: false,
            systems: None,
            condition: ConditionFilter::Both,
            reference: DEFAULT_REFERENCE.to_string(),
            reference_first: false,
            exclude_degenerate: false,
            baseline: AnnotateOptions::all(Vec::new()).kinds,
            jobs: None,
        }
    }
}

impl RunConfig {
    pub fn check(&self) -> Result<(), ReportError> {
        let bad = |m: String| Err(ReportError::InvalidConfig(m));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.granularities.is_empty() {
            return bad("at least one granularity is required".into());
        }
        if self.granularities.contains(&0) {
            return bad("granularities must be positive".into());
        }
        if self.granularities.windows(2).any(|w| w[0] <= w[1]) {
            return bad("granularities must be strictly descending".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        Ok(())
    }

    pub fn metric_config(&self) -> MetricConfig {
        MetricConfig {
            epsilon: self.epsilon,
            strict: self.strict,
        }
    }

    pub fn system_order(&self) -> SystemOrder {
        if self.reference_first {
            SystemOrder::ReferenceFirst(self.reference.clone())
        } else {
            SystemOrder::ReferenceLast(self.reference.clone())
        }
    }

    /// Row order for the systems present: the explicit `systems` list when
    /// given, name order otherwise; the reference first or last.
    pub fn ordered_systems<'a>(&self, present: impl IntoIterator<Item = &'a str>) -> Vec<String> {
        let present: BTreeSet<&str> = present.into_iter().collect();
        let mut models: Vec<String> = match &self.systems {
            Some(list) => list
                .iter()
                .filter(|s| **s != self.reference)
                .cloned()
                .collect(),
            None => present
                .iter()
                .filter(|s| **s != self.reference)
                .map(|s| s.to_string())
                .collect(),
        };
        if present.contains(self.reference.as_str()) {
            if self.reference_first {
                models.insert(0, self.reference.clone());
            } else {
                models.push(self.reference.clone());
            }
        }
        models
    }

    fn admits_system(&self, system: &str) -> bool {
        system == self.reference
            || self
                .systems
                .as_ref()
                .is_none_or(|l| l.iter().any(|s| s == system))
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("story {story_id:?}: {source}")]
    Metric {
        story_id: String,
        #[source]
        source: MetricError,
    },
    #[error("story {story_id:?} has no annotations (strict mode)")]
    MissingAnnotations { story_id: String },
    #[error("{context}: {source}")]
    Stats {
        context: String,
        #[source]
        source: StatsError,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no stories left after filtering")]
    EmptySelection,
}

impl ReportError {
    pub fn kind(&self) -> &'static str {
        match self {
            ReportError::InvalidConfig(_) => "invalid_config",
            ReportError::Corpus(e) => e.kind(),
            ReportError::Lexicon(_) => "lexicon_error",
            ReportError::Baseline(_) => "baseline_error",
            ReportError::Metric { .. } => "metric_error",
            ReportError::MissingAnnotations { .. } => "missing_annotations",
            ReportError::Stats { .. } => "stats_error",
            ReportError::Io { .. } => "io",
            ReportError::EmptySelection => "empty_selection",
        }
    }

    /// Machine-readable error object.
    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, ReportError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_error(&path))?;
    Ok(path)
}

/// Loads and concatenates every input corpus.
pub fn load_inputs(config: &RunConfig) -> Result<Corpus, ReportError> {
    if config.inputs.is_empty() {
        return Err(ReportError::InvalidConfig("no input files given".into()));
    }
    let mut stories = Vec::new();
    let mut bundles = Vec::new();
    for path in &config.inputs {
        let (s, b) = load_corpus(path)?.into_parts();
        stories.extend(s);
        bundles.extend(b);
    }
    let mut seen = BTreeSet::new();
    for s in &stories {
        if !seen.insert(s.story_id.as_str()) {
            return Err(CorpusError::DuplicateStory {
                line: 0,
                story_id: s.story_id.clone(),
            }
            .into());
        }
    }
    Ok(Corpus::from_parts(stories, bundles)?)
}

fn annotate_in_place(
    corpus: &mut Corpus,
    config: &RunConfig,
) -> Result<AnnotateSummary, ReportError> {
    let lexicon = config
        .lexicon
        .as_ref()
        .map(baseline::load_lexicon)
        .transpose()?;
    let options = AnnotateOptions {
        kinds: config.baseline.clone(),
        granularities: config.granularities.clone(),
    };
    Ok(baseline::annotate_corpus(
        corpus,
        lexicon.as_ref(),
        &options,
    )?)
}

/// Loads the inputs, fills missing annotations in lenient mode (over the
/// whole corpus, so topic clusters do not depend on the filters), then
/// applies the condition and system filters.
pub fn prepare(config: &RunConfig) -> Result<Corpus, ReportError> {
    config.check()?;
    let mut corpus = load_inputs(config)?;
    if !config.strict {
        annotate_in_place(&mut corpus, config)?;
    }
    corpus.entries.retain(|e| {
        config.condition.admits(e.story.prompt_condition) && config.admits_system(&e.story.system)
    });
    if corpus.is_empty() {
        return Err(ReportError::EmptySelection);
    }
    Ok(corpus)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoryViolations {
    pub story_id: String,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub stories: usize,
    pub annotated: usize,
    pub invalid: Vec<StoryViolations>,
    /// Stories without a bundle (an error only in strict mode).
    pub unannotated: Vec<String>,
}

impl ValidationReport {
    pub fn exit_code(&self) -> i32 {
        if self.valid {
            0
        } else {
            1
        }
    }
}

pub fn validate_corpus(corpus: &Corpus, strict: bool) -> ValidationReport {
    let mut invalid = Vec::new();
    let mut unannotated = Vec::new();
    for entry in &corpus.entries {
        match &entry.annotations {
            Some(bundle) => {
                let violations = validate_bundle(&entry.story, bundle);
                if !violations.is_empty() {
                    invalid.push(StoryViolations {
                        story_id: entry.story.story_id.clone(),
                        violations,
                    });
                }
            }
            None => unannotated.push(entry.story.story_id.clone()),
        }
    }
    ValidationReport {
        valid: invalid.is_empty() && !(strict && !unannotated.is_empty()),
        stories: corpus.len(),
        annotated: corpus.len() - unannotated.len(),
        invalid,
        unannotated,
    }
}

pub fn cmd_validate(config: &RunConfig) -> Result<ValidationReport, ReportError> {
    let corpus = load_inputs(config)?;
    Ok(validate_corpus(&corpus, config.strict))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotateOutcome {
    pub output: PathBuf,
    pub summary: AnnotateSummary,
}

/// Fills missing annotations with baselines and writes `annotated.jsonl`.
pub fn cmd_annotate(config: &RunConfig) -> Result<AnnotateOutcome, ReportError> {
    config.check()?;
    let mut corpus = load_inputs(config)?;
    let summary = annotate_in_place(&mut corpus, config)?;
    fs::create_dir_all(&config.out_dir).map_err(io_error(&config.out_dir))?;
    let output = config.out_dir.join("annotated.jsonl");
    write_corpus(&output, &corpus)?;
    Ok(AnnotateOutcome { output, summary })
}

/// Writes `scores.jsonl`.
pub fn cmd_score(config: &RunConfig) -> Result<Vec<PathBuf>, ReportError> {
    let corpus = prepare(config)?;
    let scores = score_corpus(&corpus, config)?;
    Ok(vec![write_output(
        &config.out_dir,
        "scores.jsonl",
        &render_scores(&scores),
    )?])
}

/// Writes `compare.csv`, `compare.json` and `perplexity.csv`; returns the
/// human-readable tables.
pub fn cmd_compare(config: &RunConfig) -> Result<String, ReportError> {
    let corpus = prepare(config)?;
    let scores = score_corpus(&corpus, config)?;
    let report = compare(&corpus, &scores, config)?;
    write_output(&config.out_dir, "compare.json", &report.to_json())?;
    write_output(&config.out_dir, "compare.csv", &report.to_csv())?;
    write_output(&config.out_dir, "perplexity.csv", &report.perplexity_csv())?;
    Ok(report.to_text())
}

const SWEEP_HEADER: &[&str] = &[
    "condition",
    "system",
    "granularity",
    "mean_switch",
    "sd",
    "n",
];
const COMPOSITION_HEADER: &[&str] = &[
    "condition",
    "system",
    "label",
    "proportion",
    "n_stories",
    "baseline",
];

/// Writes `sweep.csv`.
pub fn cmd_sweep(config: &RunConfig) -> Result<Vec<PathBuf>, ReportError> {
    let corpus = prepare(config)?;
    let scores = score_corpus(&corpus, config)?;
    let rows = sweep(&scores, config);
    Ok(vec![write_output(
        &config.out_dir,
        "sweep.csv",
        &csv_out::to_csv_with_header(SWEEP_HEADER, &rows),
    )?])
}

/// Writes `composition.csv`.
pub fn cmd_composition(config: &RunConfig) -> Result<Vec<PathBuf>, ReportError> {
    let corpus = prepare(config)?;
    let rows = composition(&corpus, config)?;
    Ok(vec![write_output(
        &config.out_dir,
        "composition.csv",
        &csv_out::to_csv_with_header(COMPOSITION_HEADER, &rows),
    )?])
}
