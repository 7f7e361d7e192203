use rayon::prelude::*;
use serde::Serialize;

use super::{ReportError, RunConfig};
use crate::corpus::{AnnotationKind, AnnotatorKind, Corpus, CorpusEntry};
use crate::metrics::{score_story, StoryScore};

/// One line of `scores.jsonl`. Read lines back as [`StoryScore`]; the extra
/// `baseline` field is ignored there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRecord {
    #[serde(flatten)]
    pub score: StoryScore,
    /// Annotation kinds that came from a baseline annotator.
    pub baseline: Vec<AnnotationKind>,
}

fn score_entry(entry: &CorpusEntry, config: &RunConfig) -> Result<ScoreRecord, ReportError> {
    let story_id = &entry.story.story_id;
    let bundle = entry
        .annotations
        .as_ref()
        .ok_or_else(|| ReportError::MissingAnnotations {
            story_id: story_id.clone(),
        })?;
    let score = score_story(&entry.story, bundle, &config.metric_config()).map_err(|source| {
        ReportError::Metric {
            story_id: story_id.clone(),
            source,
        }
    })?;
    let baseline = bundle
        .provenance
        .iter()
        .filter(|(_, a)| a.kind == AnnotatorKind::Baseline)
        .map(|(k, _)| *k)
        .collect();
    Ok(ScoreRecord { score, baseline })
}

/// Scores every story, in corpus order. Work is spread over a thread pool;
/// results (and the first error, if any) do not depend on scheduling.
pub fn score_corpus(corpus: &Corpus, config: &RunConfig) -> Result<Vec<ScoreRecord>, ReportError> {
    let run = || -> Vec<Result<ScoreRecord, ReportError>> {
        corpus
            .entries
            .par_iter()
            .map(|e| score_entry(e, config))
            .collect()
    };
    let results = match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ReportError::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    results.into_iter().collect()
}

/// JSON-lines rendering, one record per line.
pub fn render_scores(scores: &[ScoreRecord]) -> String {
    let mut out = String::new();
    for s in scores {
        out.push_str(&serde_json::to_string(s).expect("score records serialize"));
        out.push('\n');
    }
    out
}
