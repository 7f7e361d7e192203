//! JSON-lines reading and writing.
//!
//! Each line is `{"story": {...}, "annotations": {...}}`. The `annotations`
//! member is optional, and a line may also carry `annotations` alone, in
//! which case it is attached to the story with the same `story_id` anywhere
//! in the file. Stories may be given either pre-segmented (`segments`) or as
//! raw separator-delimited `text`; they are always written pre-segmented.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::text::{self, SEPARATOR};
use super::{
    parse_story, AnnotationBundle, Corpus, CorpusEntry, PromptCondition, Segment, Story, StoryMeta,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: schema error at `{path}`: {message}")]
    Schema {
        line: usize,
        path: String,
        message: String,
    },
    #[error("annotations for unknown story {story_id:?}{}", fmt_line(.line))]
    DanglingAnnotation {
        line: Option<usize>,
        story_id: String,
    },
    #[error("story {story_id:?} appears twice (line {line})")]
    DuplicateStory { line: usize, story_id: String },
    #[error("story {story_id:?} has more than one annotation bundle{}", fmt_line(.line))]
    DuplicateAnnotation {
        line: Option<usize>,
        story_id: String,
    },
}

fn fmt_line(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!(" (line {l})"),
        None => String::new(),
    }
}

impl CorpusError {
    /// Short machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            CorpusError::Io { .. } => "io",
            CorpusError::Schema { .. } => "schema_error",
            CorpusError::DanglingAnnotation { .. } => "dangling_annotation",
            CorpusError::DuplicateStory { .. } => "duplicate_story",
            CorpusError::DuplicateAnnotation { .. } => "duplicate_annotation",
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LineIn {
    #[serde(default)]
    story: Option<StoryIn>,
    #[serde(default)]
    annotations: Option<AnnotationBundle>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StoryIn {
    story_id: String,
    sequence_id: String,
    system: String,
    prompt_condition: PromptCondition,
    #[serde(default)]
    segments: Option<Vec<Segment>>,
    #[serde(default)]
    text: Option<String>,
}

#[derive(Serialize)]
struct LineOut<'a> {
    story: &'a Story,
    #[serde(skip_serializing_if = "Option::is_none")]
    annotations: Option<&'a AnnotationBundle>,
}

fn schema(line: usize, path: impl Into<String>, message: impl Into<String>) -> CorpusError {
    CorpusError::Schema {
        line,
        path: path.into(),
        message: message.into(),
    }
}

fn check_segments(line: usize, segments: &[Segment]) -> Result<(), CorpusError> {
    if segments.is_empty() {
        return Err(schema(line, "story.segments", "story has no segments"));
    }
    for (pos, seg) in segments.iter().enumerate() {
        let at = |field: &str| format!("story.segments[{pos}].{field}");
        if seg.index != pos {
            return Err(schema(
                line,
                at("index"),
                format!("expected index {pos}, found {}", seg.index),
            ));
        }
        if seg.sentences.is_empty() {
            return Err(schema(line, at("sentences"), "segment has no sentences"));
        }
        for (k, sentence) in seg.sentences.iter().enumerate() {
            let path = format!("story.segments[{pos}].sentences[{k}]");
            if sentence.is_empty() {
                return Err(schema(line, path, "empty sentence"));
            }
            if text::collapse(sentence) != *sentence {
                return Err(schema(line, path, "sentence is not normalized"));
            }
            if sentence.contains(SEPARATOR) {
                return Err(schema(line, path, "sentence contains the separator token"));
            }
        }
        let expected: usize = seg.sentences.iter().map(|s| text::count_words(s)).sum();
        if seg.word_count != expected {
            return Err(schema(
                line,
                at("word_count"),
                format!("expected {expected}, found {}", seg.word_count),
            ));
        }
        if seg.word_count == 0 {
            return Err(schema(line, at("word_count"), "segment has no words"));
        }
    }
    Ok(())
}

fn build_story(line: usize, raw: StoryIn) -> Result<Story, CorpusError> {
    let meta = StoryMeta {
        story_id: raw.story_id,
        sequence_id: raw.sequence_id,
        system: raw.system,
        prompt_condition: raw.prompt_condition,
    };
    match (raw.segments, raw.text) {
        (Some(segments), None) => {
            check_segments(line, &segments)?;
            Ok(Story {
                story_id: meta.story_id,
                sequence_id: meta.sequence_id,
                system: meta.system,
                prompt_condition: meta.prompt_condition,
                segments,
            })
        }
        (None, Some(text)) => {
            parse_story(&text, meta).map_err(|e| schema(line, "story.text", e.to_string()))
        }
        (Some(_), Some(_)) => Err(schema(
            line,
            "story",
            "give either `segments` or `text`, not both",
        )),
        (None, None) => Err(schema(line, "story", "missing `segments` or `text`")),
    }
}

/// Parses JSON-lines corpus text. Line numbers in errors are 1-based; blank
/// lines are skipped.
pub fn parse_corpus(input: &str) -> Result<Corpus, CorpusError> {
    let mut entries: Vec<CorpusEntry> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut sidecars: Vec<(usize, AnnotationBundle)> = Vec::new();

    for (i, raw_line) in input.lines().enumerate() {
        let line = i + 1;
        if raw_line.trim().is_empty() {
            continue;
        }
        let de = &mut serde_json::Deserializer::from_str(raw_line);
        let record: LineIn = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            schema(line, path, e.into_inner().to_string())
        })?;
        match (record.story, record.annotations) {
            (Some(raw), annotations) => {
                let story = build_story(line, raw)?;
                if let Some(bundle) = &annotations {
                    if bundle.story_id != story.story_id {
                        return Err(schema(
                            line,
                            "annotations.story_id",
                            format!(
                                "bundle is for {:?} but the story is {:?}",
                                bundle.story_id, story.story_id
                            ),
                        ));
                    }
                }
                if index
                    .insert(story.story_id.clone(), entries.len())
                    .is_some()
                {
                    return Err(CorpusError::DuplicateStory {
                        line,
                        story_id: story.story_id,
                    });
                }
                entries.push(CorpusEntry { story, annotations });
            }
            (None, Some(bundle)) => sidecars.push((line, bundle)),
            (None, None) => {
                return Err(schema(
                    line,
                    "",
                    "line has neither `story` nor `annotations`",
                ))
            }
        }
    }

    for (line, bundle) in sidecars {
        let Some(&pos) = index.get(&bundle.story_id) else {
            return Err(CorpusError::DanglingAnnotation {
                line: Some(line),
                story_id: bundle.story_id,
            });
        };
        let entry = &mut entries[pos];
        if entry.annotations.is_some() {
            return Err(CorpusError::DuplicateAnnotation {
                line: Some(line),
                story_id: bundle.story_id,
            });
        }
        entry.annotations = Some(bundle);
    }
    Ok(Corpus { entries })
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let input = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus(&input)
}

/// Writes one line per story, with its bundle inline.
pub fn write_corpus_to<W: Write>(mut out: W, corpus: &Corpus) -> io::Result<()> {
    for entry in &corpus.entries {
        let line = LineOut {
            story: &entry.story,
            annotations: entry.annotations.as_ref(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_corpus(path: impl AsRef<Path>, corpus: &Corpus) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    write_corpus_to(io::BufWriter::new(file), corpus).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"story":{"story_id":"a","sequence_id":"q1","system":"human","prompt_condition":"short","text":"Reese waves. [SEP] Matthew nods."}}"#;

    #[test]
    fn raw_text_stories_are_segmented() {
        let corpus = parse_corpus(GOOD).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.entries[0].story.segment_count(), 2);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let input = format!("{GOOD}\n\n{{\"story\": 3}}\n");
        match parse_corpus(&input) {
            Err(CorpusError::Schema { line, path, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(path, "story");
            }
            other => panic!("unexpected {other:?}"),
        }
        let input = format!("{GOOD}\n{{\"story\":{{\"story_id\":\"b\",\"sequence_id\":\"q\",\"system\":\"h\",\"prompt_condition\":\"medium\",\"text\":\"x\"}}}}");
        match parse_corpus(&input) {
            Err(CorpusError::Schema { line, path, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(path, "story.prompt_condition");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_word_count_is_a_schema_error() {
        let input = r#"{"story":{"story_id":"a","sequence_id":"q","system":"h","prompt_condition":"long","segments":[{"index":0,"sentences":["Two words."],"word_count":3}]}}"#;
        match parse_corpus(input) {
            Err(CorpusError::Schema { path, .. }) => {
                assert_eq!(path, "story.segments[0].word_count")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_annotation() {
        let input = format!("{GOOD}\n{{\"annotations\":{{\"story_id\":\"zzz\"}}}}");
        match parse_corpus(&input) {
            Err(CorpusError::DanglingAnnotation { line, story_id }) => {
                assert_eq!(line, Some(2));
                assert_eq!(story_id, "zzz");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sidecar_bundles_attach_and_duplicates_fail() {
        let side = r#"{"annotations":{"story_id":"a","relations":["causal"]}}"#;
        let corpus = parse_corpus(&format!("{GOOD}\n{side}")).unwrap();
        assert_eq!(
            corpus.entries[0].annotations.as_ref().unwrap().relations,
            Some(vec!["causal".to_string()])
        );
        assert!(matches!(
            parse_corpus(&format!("{GOOD}\n{side}\n{side}")),
            Err(CorpusError::DuplicateAnnotation { .. })
        ));
        assert!(matches!(
            parse_corpus(&format!("{GOOD}\n{GOOD}")),
            Err(CorpusError::DuplicateStory { line: 2, .. })
        ));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let input = r#"{"story":{"story_id":"a","sequence_id":"q","system":"h","prompt_condition":"short","text":"Hi.","colour":1}}"#;
        assert!(matches!(
            parse_corpus(input),
            Err(CorpusError::Schema { line: 1, .. })
        ));
    }

    #[test]
    fn granularity_keys_are_strings() {
        let mut corpus = parse_corpus(GOOD).unwrap();
        let mut bundle = AnnotationBundle::empty("a");
        bundle.topics.insert(80, vec![3, 4]);
        corpus.entries[0].annotations = Some(bundle);
        let mut buf = Vec::new();
        write_corpus_to(&mut buf, &corpus).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(r#""topics":{"80":[3,4]}"#), "{text}");
        assert_eq!(parse_corpus(&text).unwrap(), corpus);
    }
}
