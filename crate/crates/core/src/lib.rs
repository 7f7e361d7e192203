//! Narrative coherence toolkit for visually grounded stories.
//!
//! The crate is organised bottom-up:
//!
//! * [`corpus`] parses stories, defines the JSON-lines interchange format and
//!   validates annotation sidecars against the stories they describe.
//! * [`metrics`] computes the five per-story coherence metrics (coreference,
//!   discourse diversity, topic switch, character persistence, multimodal
//!   character grounding) and the composite narrative coherence score.
//! * [`stats`] aggregates story scores per system and runs paired t-tests,
//!   prompt-gap comparisons and perplexity summaries.
//! * [`baseline`] provides deterministic lexical annotators so the pipeline
//!   runs without any neural model.
//! * [`report`] wires everything into the commands exposed by the `ncskit`
//!   binary and renders the output files.

#![forbid(unsafe_code)]

pub mod baseline;
pub mod corpus;
pub mod metrics;
pub mod report;
pub mod stats;

pub use corpus::{
    AnnotationBundle, AnnotationKind, Annotator, AnnotatorKind, Chain, CharacterAlignment, Corpus,
    CorpusEntry, Mention, PromptCondition, Segment, Story,
};
pub use metrics::{MetricConfig, MetricVector, NcsResult, StoryScore};
