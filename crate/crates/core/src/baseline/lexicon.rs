use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconCharacter {
    pub canonical_name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub visual_segments: BTreeSet<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconLine {
    sequence_id: String,
    characters: Vec<LexiconCharacter>,
}

/// Annotated characters of each visual sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CharacterLexicon {
    sequences: BTreeMap<String, Vec<LexiconCharacter>>,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon line {line}: {message}")]
    Invalid { line: usize, message: String },
}

impl CharacterLexicon {
    pub fn get(&self, sequence_id: &str) -> Option<&[LexiconCharacter]> {
        self.sequences.get(sequence_id).map(Vec::as_slice)
    }

    pub fn insert(&mut self, sequence_id: impl Into<String>, characters: Vec<LexiconCharacter>) {
        self.sequences.insert(sequence_id.into(), characters);
    }
}

/// Parses a JSON-lines lexicon: `{"sequence_id": ..., "characters": [...]}`.
pub fn parse_lexicon(input: &str) -> Result<CharacterLexicon, LexiconError> {
    let mut lexicon = CharacterLexicon::default();
    for (i, raw) in input.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let invalid = |message: String| LexiconError::Invalid { line, message };
        let parsed: LexiconLine = serde_json::from_str(raw).map_err(|e| invalid(e.to_string()))?;
        let mut names = BTreeSet::new();
        for c in &parsed.characters {
            if c.canonical_name.trim().is_empty() {
                return Err(invalid("empty canonical name".into()));
            }
            if !names.insert(c.canonical_name.as_str()) {
                return Err(invalid(format!(
                    "duplicate character {:?}",
                    c.canonical_name
                )));
            }
            if c.aliases.iter().any(|a| a.trim().is_empty()) {
                return Err(invalid(format!("empty alias for {:?}", c.canonical_name)));
            }
        }
        if lexicon.sequences.contains_key(&parsed.sequence_id) {
            return Err(invalid(format!(
                "duplicate sequence {:?}",
                parsed.sequence_id
            )));
        }
        lexicon.insert(parsed.sequence_id, parsed.characters);
    }
    Ok(lexicon)
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<CharacterLexicon, LexiconError> {
    let path = path.as_ref();
    let input = fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_lexicon(&input)
}
