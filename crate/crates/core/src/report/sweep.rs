use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{ReportError, RunConfig, ScoreRecord};
use crate::corpus::{AnnotationKind, AnnotatorKind, Corpus, PromptCondition};
use crate::metrics::relation_composition;
use crate::stats::summarize;

/// Mean topic-switch rate at one granularity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub condition: PromptCondition,
    pub system: String,
    pub granularity: u32,
    pub mean_switch: f64,
    pub sd: f64,
    pub n: usize,
}

const CONDITIONS: [PromptCondition; 2] = [PromptCondition::Short, PromptCondition::Long];

/// Per-granularity topic-switch rates, coarse to fine. Single-segment
/// stories have no switch rate and are left out.
pub fn sweep(scores: &[ScoreRecord], config: &RunConfig) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for condition in CONDITIONS {
        let in_condition: Vec<&ScoreRecord> = scores
            .iter()
            .filter(|s| s.score.prompt_condition == condition && !s.score.metrics.degenerate)
            .collect();
        let systems = config.ordered_systems(in_condition.iter().map(|s| s.score.system.as_str()));
        for system in systems {
            let mut by_g: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
            for s in in_condition.iter().filter(|s| s.score.system == system) {
                for (&g, &v) in &s.score.metrics.topic.per_granularity {
                    by_g.entry(g).or_default().push(v);
                }
            }
            for (g, values) in by_g.iter().rev() {
                let sum = summarize(values).expect("non-empty group");
                rows.push(SweepRow {
                    condition,
                    system: system.clone(),
                    granularity: *g,
                    mean_switch: sum.mean,
                    sd: sum.sd,
                    n: sum.n,
                });
            }
        }
    }
    rows
}

/// Share of one relation label within a system's stories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionRow {
    pub condition: PromptCondition,
    pub system: String,
    pub label: String,
    pub proportion: f64,
    pub n_stories: usize,
    /// Some relations in the group came from the uniform baseline.
    pub baseline: bool,
}

/// Mean within-story relation-label proportions per condition and system.
pub fn composition(
    corpus: &Corpus,
    config: &RunConfig,
) -> Result<Vec<CompositionRow>, ReportError> {
    let mut rows = Vec::new();
    for condition in CONDITIONS {
        let entries: Vec<_> = corpus
            .entries
            .iter()
            .filter(|e| e.story.prompt_condition == condition)
            .collect();
        let systems = config.ordered_systems(entries.iter().map(|e| e.story.system.as_str()));
        for system in systems {
            let mut relations: Vec<&[String]> = Vec::new();
            let mut baseline = false;
            for e in entries.iter().filter(|e| e.story.system == system) {
                let bundle = e.annotations.as_ref();
                match bundle.and_then(|b| b.relations.as_deref()) {
                    Some(r) if !r.is_empty() => relations.push(r),
                    Some(_) => {}
                    None if config.strict => {
                        return Err(ReportError::MissingAnnotations {
                            story_id: e.story.story_id.clone(),
                        })
                    }
                    None => {}
                }
                baseline |= bundle
                    .and_then(|b| b.provenance.get(&AnnotationKind::Relations))
                    .is_some_and(|a| a.kind == AnnotatorKind::Baseline);
            }
            let n_stories = relations.len();
            let shares = relation_composition(relations);
            let labels: BTreeSet<&String> = shares.keys().collect();
            for label in labels {
                rows.push(CompositionRow {
                    condition,
                    system: system.clone(),
                    label: label.clone(),
                    proportion: shares[label],
                    n_stories,
                    baseline,
                });
            }
        }
    }
    Ok(rows)
}
