//! Stories, annotation sidecars and the JSON-lines interchange format.

mod io;
mod stats;
pub mod text;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_corpus, parse_corpus, write_corpus, write_corpus_to, CorpusError};
pub use stats::{corpus_stats, story_stats, CorpusStats, EmptyCorpus, StoryStats};
pub use validate::{validate_bundle, Violation};

/// Prompt condition a story was written under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptCondition {
    Short,
    Long,
}

impl PromptCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptCondition::Short => "short",
            PromptCondition::Long => "long",
        }
    }
}

impl fmt::Display for PromptCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PromptCondition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "short" => Ok(PromptCondition::Short),
            "long" => Ok(PromptCondition::Long),
            other => Err(format!("unknown prompt condition {other:?}")),
        }
    }
}

/// The text written for one image of the sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub index: usize,
    pub sentences: Vec<String>,
    pub word_count: usize,
}

impl Segment {
    /// Builds a segment from already-split sentences, computing the word count.
    pub fn new(index: usize, sentences: Vec<String>) -> Self {
        let word_count = sentences.iter().map(|s| text::count_words(s)).sum();
        Segment {
            index,
            sentences,
            word_count,
        }
    }

    /// Canonical segment text; mention byte offsets index into this string.
    pub fn text(&self) -> String {
        self.sentences.join(" ")
    }
}

/// One narrative for one visual sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Story {
    pub story_id: String,
    pub sequence_id: String,
    pub system: String,
    pub prompt_condition: PromptCondition,
    pub segments: Vec<Segment>,
}

/// Identifying fields supplied alongside raw story text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoryMeta {
    pub story_id: String,
    pub sequence_id: String,
    pub system: String,
    pub prompt_condition: PromptCondition,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("story has no non-whitespace content")]
    EmptyStory,
    #[error("segment {index} is blank")]
    EmptySegment { index: usize },
}

/// Parses separator-delimited story text into segments and sentences.
pub fn parse_story(raw_text: &str, meta: StoryMeta) -> Result<Story, ParseError> {
    let collapsed = text::collapse(raw_text);
    if collapsed.is_empty() {
        return Err(ParseError::EmptyStory);
    }
    let mut segments = Vec::new();
    for (index, piece) in text::split_segments(&collapsed).into_iter().enumerate() {
        let segment = Segment::new(index, text::split_sentences(piece));
        if segment.word_count == 0 {
            return Err(ParseError::EmptySegment { index });
        }
        segments.push(segment);
    }
    Ok(Story {
        story_id: meta.story_id,
        sequence_id: meta.sequence_id,
        system: meta.system,
        prompt_condition: meta.prompt_condition,
        segments,
    })
}

impl Story {
    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// Normalized story text with segments joined by the separator.
    pub fn text(&self) -> String {
        self.segments
            .iter()
            .map(Segment::text)
            .collect::<Vec<_>>()
            .join(text::JOINED_SEPARATOR)
    }

    pub fn sentence_count(&self) -> usize {
        self.segments.iter().map(|s| s.sentences.len()).sum()
    }

    pub fn word_count(&self) -> usize {
        self.segments.iter().map(|s| s.word_count).sum()
    }
}

/// A textual mention; offsets are UTF-8 byte offsets into [`Segment::text`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mention {
    pub segment_index: usize,
    pub char_start: usize,
    pub char_end: usize,
    pub surface_text: String,
}

/// A coreference chain: mentions of one entity, in text order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chain(pub Vec<Mention>);

impl Chain {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Where a character is mentioned in text and where it is visible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterAlignment {
    pub name: String,
    pub text_segments: BTreeSet<usize>,
    pub visual_segments: BTreeSet<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationKind {
    Coref,
    Relations,
    Topics,
    Characters,
    Grounding,
    Perplexity,
}

impl AnnotationKind {
    pub const ALL: [AnnotationKind; 6] = [
        AnnotationKind::Coref,
        AnnotationKind::Relations,
        AnnotationKind::Topics,
        AnnotationKind::Characters,
        AnnotationKind::Grounding,
        AnnotationKind::Perplexity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AnnotationKind::Coref => "coref",
            AnnotationKind::Relations => "relations",
            AnnotationKind::Topics => "topics",
            AnnotationKind::Characters => "characters",
            AnnotationKind::Grounding => "grounding",
            AnnotationKind::Perplexity => "perplexity",
        }
    }
}

impl fmt::Display for AnnotationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotatorKind {
    Baseline,
    Neural,
}

/// Provenance record attached to each annotation kind of a bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotator {
    pub name: String,
    pub version: String,
    pub kind: AnnotatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_hash: Option<String>,
}

/// Topic label assigned to one segment at one granularity.
pub type TopicLabel = i64;

/// Per-story annotation sidecar. Absent kinds are `None`, which is distinct
/// from an annotator that ran and found nothing (`Some(vec![])`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationBundle {
    pub story_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coref_chains: Option<Vec<Chain>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<String>>,
    /// Granularity (number of topics) to one label per segment.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub topics: BTreeMap<u32, Vec<TopicLabel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characters: Option<Vec<CharacterAlignment>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grounding_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perplexities: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<AnnotationKind, Annotator>,
}

impl AnnotationBundle {
    pub fn empty(story_id: impl Into<String>) -> Self {
        AnnotationBundle {
            story_id: story_id.into(),
            coref_chains: None,
            relations: None,
            topics: BTreeMap::new(),
            characters: None,
            grounding_score: None,
            perplexities: None,
            provenance: BTreeMap::new(),
        }
    }

    /// Whether the given annotation kind is present.
    pub fn has(&self, kind: AnnotationKind) -> bool {
        match kind {
            AnnotationKind::Coref => self.coref_chains.is_some(),
            AnnotationKind::Relations => self.relations.is_some(),
            AnnotationKind::Topics => !self.topics.is_empty(),
            AnnotationKind::Characters => self.characters.is_some(),
            AnnotationKind::Grounding => self.grounding_score.is_some(),
            AnnotationKind::Perplexity => self.perplexities.is_some(),
        }
    }
}

/// A story together with its (optional) annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub story: Story,
    pub annotations: Option<AnnotationBundle>,
}

/// An ordered collection of stories; order is file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn stories(&self) -> impl Iterator<Item = &Story> {
        self.entries.iter().map(|e| &e.story)
    }

    pub fn bundles(&self) -> impl Iterator<Item = &AnnotationBundle> {
        self.entries.iter().filter_map(|e| e.annotations.as_ref())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Splits into parallel story and bundle lists.
    pub fn into_parts(self) -> (Vec<Story>, Vec<AnnotationBundle>) {
        let mut stories = Vec::with_capacity(self.entries.len());
        let mut bundles = Vec::new();
        for entry in self.entries {
            stories.push(entry.story);
            bundles.extend(entry.annotations);
        }
        (stories, bundles)
    }

    /// Reassembles a corpus from parts, attaching each bundle to the story
    /// with the same id.
    pub fn from_parts(
        stories: Vec<Story>,
        bundles: Vec<AnnotationBundle>,
    ) -> Result<Self, CorpusError> {
        let mut by_id: BTreeMap<String, AnnotationBundle> = BTreeMap::new();
        for bundle in bundles {
            if !stories.iter().any(|s| s.story_id == bundle.story_id) {
                return Err(CorpusError::DanglingAnnotation {
                    line: None,
                    story_id: bundle.story_id,
                });
            }
            let id = bundle.story_id.clone();
            if by_id.insert(id.clone(), bundle).is_some() {
                return Err(CorpusError::DuplicateAnnotation {
                    line: None,
                    story_id: id,
                });
            }
        }
        let entries = stories
            .into_iter()
            .map(|story| {
                let annotations = by_id.remove(&story.story_id);
                CorpusEntry { story, annotations }
            })
            .collect();
        Ok(Corpus { entries })
    }
}
