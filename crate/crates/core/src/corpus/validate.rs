use std::collections::BTreeSet;

use serde::Serialize;

use super::{AnnotationBundle, Story};

/// One broken invariant of an annotation bundle relative to its story.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    StoryIdMismatch {
        story_id: String,
        bundle_story_id: String,
    },
    EmptyChain {
        chain: usize,
    },
    MentionOutOfRange {
        chain: usize,
        mention: usize,
        segment_index: usize,
        segment_count: usize,
    },
    MentionOffsetOutOfRange {
        chain: usize,
        mention: usize,
        char_start: usize,
        char_end: usize,
        text_len: usize,
    },
    MentionNotOnCharBoundary {
        chain: usize,
        mention: usize,
    },
    MentionSurfaceMismatch {
        chain: usize,
        mention: usize,
        expected: String,
        found: String,
    },
    RelationsLengthMismatch {
        expected: usize,
        found: usize,
    },
    EmptyRelationLabel {
        position: usize,
    },
    InvalidGranularity {
        granularity: u32,
    },
    TopicLengthMismatch {
        granularity: u32,
        expected: usize,
        found: usize,
    },
    EmptyCharacterName {
        character: usize,
    },
    DuplicateCharacter {
        name: String,
    },
    CharacterSegmentOutOfRange {
        name: String,
        segment_index: usize,
        visual: bool,
    },
    GroundingOutOfRange {
        value: f64,
    },
    InvalidPerplexity {
        evaluator: String,
        value: f64,
    },
}

/// Checks every typed invariant of `bundle` against `story`. An empty result
/// means the bundle is valid.
pub fn validate_bundle(story: &Story, bundle: &AnnotationBundle) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = story.segment_count();

    if bundle.story_id != story.story_id {
        out.push(Violation::StoryIdMismatch {
            story_id: story.story_id.clone(),
            bundle_story_id: bundle.story_id.clone(),
        });
    }

    if let Some(chains) = &bundle.coref_chains {
        let texts: Vec<String> = story.segments.iter().map(|s| s.text()).collect();
        for (c, chain) in chains.iter().enumerate() {
            if chain.is_empty() {
                out.push(Violation::EmptyChain { chain: c });
            }
            for (m, mention) in chain.0.iter().enumerate() {
                let Some(text) = texts.get(mention.segment_index) else {
                    out.push(Violation::MentionOutOfRange {
                        chain: c,
                        mention: m,
                        segment_index: mention.segment_index,
                        segment_count: n,
                    });
                    continue;
                };
                if mention.char_start >= mention.char_end || mention.char_end > text.len() {
                    out.push(Violation::MentionOffsetOutOfRange {
                        chain: c,
                        mention: m,
                        char_start: mention.char_start,
                        char_end: mention.char_end,
                        text_len: text.len(),
                    });
                    continue;
                }
                match text.get(mention.char_start..mention.char_end) {
                    None => out.push(Violation::MentionNotOnCharBoundary {
                        chain: c,
                        mention: m,
                    }),
                    Some(span) if span != mention.surface_text => {
                        out.push(Violation::MentionSurfaceMismatch {
                            chain: c,
                            mention: m,
                            expected: span.to_string(),
                            found: mention.surface_text.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
        }
    }

    if let Some(relations) = &bundle.relations {
        let expected = n.saturating_sub(1);
        if relations.len() != expected {
            out.push(Violation::RelationsLengthMismatch {
                expected,
                found: relations.len(),
            });
        }
        for (position, label) in relations.iter().enumerate() {
            if label.trim().is_empty() {
                out.push(Violation::EmptyRelationLabel { position });
            }
        }
    }

    for (&granularity, labels) in &bundle.topics {
        if granularity == 0 {
            out.push(Violation::InvalidGranularity { granularity });
        }
        if labels.len() != n {
            out.push(Violation::TopicLengthMismatch {
                granularity,
                expected: n,
                found: labels.len(),
            });
        }
    }

    if let Some(characters) = &bundle.characters {
        let mut seen = BTreeSet::new();
        for (i, character) in characters.iter().enumerate() {
            if character.name.trim().is_empty() {
                out.push(Violation::EmptyCharacterName { character: i });
            } else if !seen.insert(character.name.as_str()) {
                out.push(Violation::DuplicateCharacter {
                    name: character.name.clone(),
                });
            }
            let text = character.text_segments.iter().map(|&s| (s, false));
            let visual = character.visual_segments.iter().map(|&s| (s, true));
            for (segment_index, visual) in text.chain(visual) {
                if segment_index >= n {
                    out.push(Violation::CharacterSegmentOutOfRange {
                        name: character.name.clone(),
                        segment_index,
                        visual,
                    });
                }
            }
        }
    }

    if let Some(value) = bundle.grounding_score {
        if !(0.0..=1.0).contains(&value) {
            out.push(Violation::GroundingOutOfRange { value });
        }
    }

    if let Some(perplexities) = &bundle.perplexities {
        for (evaluator, &value) in perplexities {
            if !(value.is_finite() && value > 0.0) {
                out.push(Violation::InvalidPerplexity {
                    evaluator: evaluator.clone(),
                    value,
                });
            }
        }
    }

    out
}
