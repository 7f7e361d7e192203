//! Per-story coherence metrics and the composite narrative coherence score.
//!
//! Every metric produces a raw value and a `tanh`-squashed value; the
//! squashed values of the five metrics, in the order coreference, discourse
//! diversity, topic switch, character persistence, multimodal character
//! grounding, are the NCS components.

mod character;
mod coref;
mod discourse;
mod ncs;
mod topic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    validate_bundle, AnnotationBundle, AnnotationKind, PromptCondition, Story, Violation,
};

pub use character::{
    character_persistence, multimodal_character_grounding, CharacterPersistence, CharacterScore,
    GroundingScore,
};
pub use coref::{coreference_score, CorefScore};
pub use discourse::{discourse_diversity, relation_composition, DiscourseScore, RELATION_LABELS};
pub use ncs::{ncs, NcsResult};
pub use topic::{topic_switch, topic_switch_single, TopicScore};

/// Stabilizing constant added to denominators and to geometric-mean factors.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Number of NCS components.
pub const COMPONENTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub epsilon: f64,
    /// Rejects unknown relation labels and missing grounding scores.
    pub strict: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            epsilon: DEFAULT_EPSILON,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("relation label {label:?} is not in the declared label set")]
    UnknownLabel { label: String },
    #[error("topic switch is undefined for a single-segment story")]
    SingleSegment,
    #[error("no topic granularities given")]
    NoGranularities,
    #[error("granularity {granularity}: expected {expected} labels, found {found}")]
    GranularityLengthMismatch {
        granularity: u32,
        expected: usize,
        found: usize,
    },
    #[error("characters are annotated but the grounding score is missing")]
    GroundingMissing,
    #[error("story {story_id:?} has no {kind} annotation")]
    MissingAnnotation {
        story_id: String,
        kind: AnnotationKind,
    },
    #[error(
        "annotation bundle for {story_id:?} fails validation ({} violations, first: {:?})",
        .violations.len(),
        .violations.first()
    )]
    InvalidBundle {
        story_id: String,
        violations: Vec<Violation>,
    },
}

/// Raw and normalized values of all five metrics for one story.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub coref: CorefScore,
    pub discourse: DiscourseScore,
    pub topic: TopicScore,
    pub character: CharacterScore,
    pub grounding: GroundingScore,
    /// Single-segment story: discourse and topic metrics are recorded as 0.
    pub degenerate: bool,
}

impl MetricVector {
    /// Normalized components in NCS order (R, D, T, ChP, MCG).
    pub fn components(&self) -> [f64; COMPONENTS] {
        [
            self.coref.norm,
            self.discourse.norm,
            self.topic.norm,
            self.character.norm,
            self.grounding.norm,
        ]
    }

    pub fn ncs(&self, epsilon: f64) -> NcsResult {
        ncs(self.components(), epsilon)
    }
}

/// Everything computed for one story.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryScore {
    pub story_id: String,
    pub sequence_id: String,
    pub system: String,
    pub prompt_condition: PromptCondition,
    pub segments: usize,
    pub metrics: MetricVector,
    pub ncs: NcsResult,
}

fn required<'a, T>(
    story: &Story,
    kind: AnnotationKind,
    value: Option<&'a T>,
) -> Result<&'a T, MetricError> {
    value.ok_or_else(|| MetricError::MissingAnnotation {
        story_id: story.story_id.clone(),
        kind,
    })
}

/// Computes all metrics for a story from its annotation bundle.
pub fn score_story(
    story: &Story,
    bundle: &AnnotationBundle,
    config: &MetricConfig,
) -> Result<StoryScore, MetricError> {
    let violations = validate_bundle(story, bundle);
    if !violations.is_empty() {
        return Err(MetricError::InvalidBundle {
            story_id: story.story_id.clone(),
            violations,
        });
    }
    let n = story.segment_count();
    let chains = required(story, AnnotationKind::Coref, bundle.coref_chains.as_ref())?;
    let relations = required(story, AnnotationKind::Relations, bundle.relations.as_ref())?;
    let characters = required(
        story,
        AnnotationKind::Characters,
        bundle.characters.as_ref(),
    )?;
    if bundle.topics.is_empty() {
        return Err(MetricError::MissingAnnotation {
            story_id: story.story_id.clone(),
            kind: AnnotationKind::Topics,
        });
    }

    let metrics = MetricVector {
        coref: coreference_score(chains),
        discourse: discourse_diversity(relations, config.strict)?,
        topic: topic_switch(&bundle.topics, n)?,
        character: character_persistence(characters, n, config.epsilon),
        grounding: multimodal_character_grounding(
            characters,
            bundle.grounding_score,
            config.epsilon,
            config.strict,
        )?,
        degenerate: n < 2,
    };
    let ncs = metrics.ncs(config.epsilon);
    Ok(StoryScore {
        story_id: story.story_id.clone(),
        sequence_id: story.sequence_id.clone(),
        system: story.system.clone(),
        prompt_condition: story.prompt_condition,
        segments: n,
        metrics,
        ncs,
    })
}
