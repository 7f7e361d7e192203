//! Deterministic lexical stand-ins for the neural annotators.
//!
//! Every baseline tags the annotations it produces with an [`Annotator`] of
//! kind [`AnnotatorKind::Baseline`] so downstream reports can tell them apart
//! from ingested neural annotations.

mod lexicon;
mod names;
mod topics;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{AnnotationBundle, AnnotationKind, Annotator, AnnotatorKind, Corpus, Story};

pub use lexicon::{load_lexicon, parse_lexicon, CharacterLexicon, LexiconCharacter, LexiconError};
pub use names::{lexical_grounding, match_characters, name_chains, word_spans};
pub use topics::{lexical_topics, StopWords};

/// Label emitted by [`uniform_relations`].
pub const UNIFORM_RELATION: &str = "conjunction";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("no character lexicon entry for sequence {sequence_id:?}")]
    MissingLexicon { sequence_id: String },
    #[error("topic granularity must be at least 1")]
    InvalidGranularity,
    #[error("no topic granularities given")]
    NoGranularities,
}

/// Provenance record for a baseline annotator.
pub fn baseline_annotator(name: &str) -> Annotator {
    Annotator {
        name: format!("baseline-{name}"),
        version: env!("CARGO_PKG_VERSION").to_string(),
        kind: AnnotatorKind::Baseline,
        manifest_hash: None,
    }
}

/// One relation label per adjacent segment pair, all [`UNIFORM_RELATION`].
pub fn uniform_relations(story: &Story) -> Vec<String> {
    vec![UNIFORM_RELATION.to_string(); story.segment_count().saturating_sub(1)]
}

/// Which annotation kinds the baselines may fill.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotateOptions {
    pub kinds: BTreeSet<AnnotationKind>,
    /// Topic granularities, used when topics are filled.
    pub granularities: Vec<u32>,
}

impl AnnotateOptions {
    pub fn all(granularities: Vec<u32>) -> Self {
        AnnotateOptions {
            kinds: [
                AnnotationKind::Coref,
                AnnotationKind::Relations,
                AnnotationKind::Topics,
                AnnotationKind::Characters,
                AnnotationKind::Grounding,
            ]
            .into(),
            granularities,
        }
    }
}

/// Count of annotations filled per kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AnnotateSummary {
    pub filled: BTreeMap<AnnotationKind, usize>,
}

/// Fills every missing annotation kind enabled in `options`. Existing
/// annotations are left untouched. Topics are clustered over the whole
/// corpus but only written to stories that lack them.
pub fn annotate_corpus(
    corpus: &mut Corpus,
    lexicon: Option<&CharacterLexicon>,
    options: &AnnotateOptions,
) -> Result<AnnotateSummary, BaselineError> {
    let enabled = |k| options.kinds.contains(&k);
    let missing = |k| {
        enabled(k)
            && corpus
                .entries
                .iter()
                .any(|e| e.annotations.as_ref().is_none_or(|b| !b.has(k)))
    };
    let topics = if missing(AnnotationKind::Topics) {
        let stories: Vec<&Story> = corpus.stories().collect();
        Some(lexical_topics(
            &stories,
            &options.granularities,
            &StopWords::default(),
        )?)
    } else {
        None
    };

    let mut summary = AnnotateSummary::default();
    let mut bump = |k| *summary.filled.entry(k).or_insert(0) += 1;
    for (i, entry) in corpus.entries.iter_mut().enumerate() {
        let story = &entry.story;
        let bundle = entry
            .annotations
            .get_or_insert_with(|| AnnotationBundle::empty(story.story_id.clone()));
        let characters_for = || -> Result<&[LexiconCharacter], BaselineError> {
            lexicon
                .and_then(|l| l.get(&story.sequence_id))
                .ok_or_else(|| BaselineError::MissingLexicon {
                    sequence_id: story.sequence_id.clone(),
                })
        };
        let mut tag = |bundle: &mut AnnotationBundle, kind: AnnotationKind, name: &str| {
            bundle.provenance.insert(kind, baseline_annotator(name));
            bump(kind);
        };

        if enabled(AnnotationKind::Relations) && bundle.relations.is_none() {
            bundle.relations = Some(uniform_relations(story));
            tag(bundle, AnnotationKind::Relations, "uniform-relations");
        }
        if let Some(topics) = &topics {
            if bundle.topics.is_empty() {
                bundle.topics = topics[i].clone();
                tag(bundle, AnnotationKind::Topics, "lexical-topics");
            }
        }
        if enabled(AnnotationKind::Characters) && bundle.characters.is_none() {
            bundle.characters = Some(match_characters(story, characters_for()?));
            tag(bundle, AnnotationKind::Characters, "name-match");
        }
        if enabled(AnnotationKind::Coref) && bundle.coref_chains.is_none() {
            bundle.coref_chains = Some(name_chains(story, characters_for()?));
            tag(bundle, AnnotationKind::Coref, "name-chains");
        }
        if enabled(AnnotationKind::Grounding) && bundle.grounding_score.is_none() {
            bundle.grounding_score = Some(lexical_grounding(story, characters_for()?));
            tag(bundle, AnnotationKind::Grounding, "lexical-grounding");
        }
    }
    Ok(summary)
}
