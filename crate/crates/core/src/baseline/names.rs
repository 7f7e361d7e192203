//! Surface name matching: character alignment, name chains and the
//! grounding proxy.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use super::lexicon::LexiconCharacter;
use crate::corpus::{Chain, CharacterAlignment, Mention, Story};

fn honorifics() -> &'static BTreeSet<String> {
    static SET: OnceLock<BTreeSet<String>> = OnceLock::new();
    SET.get_or_init(|| {
        include_str!("../../resources/honorifics.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    })
}

/// Byte spans and lowercased forms of the alphanumeric word runs in `text`.
pub fn word_spans(text: &str) -> Vec<(usize, usize, String)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                spans.push((s, i, text[s..i].to_lowercase()));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len(), text[s..].to_lowercase()));
    }
    spans
}

/// Word patterns for a character: canonical name, aliases, and each with a
/// leading honorific removed.
fn patterns(character: &LexiconCharacter) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = Vec::new();
    let names = std::iter::once(&character.canonical_name).chain(&character.aliases);
    for name in names {
        let words: Vec<String> = word_spans(name).into_iter().map(|(_, _, w)| w).collect();
        if words.is_empty() {
            continue;
        }
        if words.len() > 1 && honorifics().contains(&words[0]) {
            let stripped = words[1..].to_vec();
            if !out.contains(&stripped) {
                out.push(stripped);
            }
        }
        if !out.contains(&words) {
            out.push(words);
        }
    }
    out
}

/// Non-overlapping matches of any pattern, leftmost-longest, as byte spans.
fn find_matches(text: &str, patterns: &[Vec<String>]) -> Vec<(usize, usize)> {
    let words = word_spans(text);
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for pattern in patterns {
        let k = pattern.len();
        if k > words.len() {
            continue;
        }
        for i in 0..=words.len() - k {
            if words[i..i + k].iter().zip(pattern).all(|(w, p)| w.2 == *p) {
                candidates.push((i, i + k));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut taken = Vec::new();
    let mut next_free = 0;
    for (first, end) in candidates {
        if first >= next_free {
            taken.push((words[first].0, words[end - 1].1));
            next_free = end;
        }
    }
    taken
}

/// Segments in which each character's name (or an alias) appears as a
/// whole-word, case-insensitive match. Visual segments come from the lexicon.
/// Visual segments past the end of a story (the writer skipped the last
/// images) are dropped.
pub fn match_characters(story: &Story, characters: &[LexiconCharacter]) -> Vec<CharacterAlignment> {
    let texts: Vec<String> = story.segments.iter().map(|s| s.text()).collect();
    let n = texts.len();
    characters
        .iter()
        .map(|c| {
            let pats = patterns(c);
            let text_segments = texts
                .iter()
                .enumerate()
                .filter(|(_, t)| !find_matches(t, &pats).is_empty())
                .map(|(i, _)| i)
                .collect();
            CharacterAlignment {
                name: c.canonical_name.clone(),
                text_segments,
                visual_segments: c.visual_segments.range(..n).copied().collect(),
            }
        })
        .collect()
}

/// One chain per character matched at least twice, built from surface
/// matches in text order.
pub fn name_chains(story: &Story, characters: &[LexiconCharacter]) -> Vec<Chain> {
    let texts: Vec<String> = story.segments.iter().map(|s| s.text()).collect();
    characters
        .iter()
        .filter_map(|c| {
            let pats = patterns(c);
            let mentions: Vec<Mention> = texts
                .iter()
                .enumerate()
                .flat_map(|(segment_index, text)| {
                    find_matches(text, &pats)
                        .into_iter()
                        .map(move |(start, end)| Mention {
                            segment_index,
                            char_start: start,
                            char_end: end,
                            surface_text: text[start..end].to_string(),
                        })
                })
                .collect();
            (mentions.len() >= 2).then_some(Chain(mentions))
        })
        .collect()
}

/// Fraction of segments mentioning at least one lexicon character. A
/// lexical proxy for a visual grounding score; never comparable to one.
pub fn lexical_grounding(story: &Story, characters: &[LexiconCharacter]) -> f64 {
    let pats: Vec<Vec<String>> = characters.iter().flat_map(patterns).collect();
    let grounded = story
        .segments
        .iter()
        .filter(|s| !find_matches(&s.text(), &pats).is_empty())
        .count();
    grounded as f64 / story.segment_count() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_story, PromptCondition, StoryMeta};
    use crate::metrics::coreference_score;
    use proptest::prelude::*;

    fn story(text: &str) -> Story {
        parse_story(
            text,
            StoryMeta {
                story_id: "s".into(),
                sequence_id: "q".into(),
                system: "human".into(),
                prompt_condition: PromptCondition::Short,
            },
        )
        .unwrap()
    }

    fn character(name: &str, aliases: &[&str]) -> LexiconCharacter {
        LexiconCharacter {
            canonical_name: name.into(),
            aliases: aliases.iter().map(|a| a.to_string()).collect(),
            visual_segments: BTreeSet::from([0]),
        }
    }

    fn segments(a: &CharacterAlignment) -> Vec<usize> {
        a.text_segments.iter().copied().collect()
    }

    #[test]
    fn reese_and_matthew() {
        let s = story("Reese raises her hand. [SEP] Matthew watches.");
        let m = match_characters(&s, &[character("Reese", &[]), character("Matthew", &[])]);
        assert_eq!(segments(&m[0]), [0]);
        assert_eq!(segments(&m[1]), [1]);
        assert_eq!(m[0].visual_segments, BTreeSet::from([0]));
    }

    #[test]
    fn absent_name_and_alias() {
        let s = story("A dog. [SEP] A cat. [SEP] Mr. Smith smiles.");
        let m = match_characters(
            &s,
            &[
                character("Reese", &[]),
                character("Matthew", &["Mr. Smith"]),
            ],
        );
        assert!(m[0].text_segments.is_empty());
        assert_eq!(segments(&m[1]), [2]);
    }

    #[test]
    fn whole_words_only_and_honorific_stripping() {
        let s = story("Reeses pieces. [SEP] Smith waves. [SEP] REESE's bag.");
        let m = match_characters(&s, &[character("Reese", &[]), character("Dr. Smith", &[])]);
        assert_eq!(segments(&m[0]), [2]);
        assert_eq!(segments(&m[1]), [1]);
    }

    #[test]
    fn chains_from_repeated_names() {
        let s = story("Reese smiles. [SEP] Then Reese leaves.");
        let chains = name_chains(&s, &[character("Reese", &[])]);
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].len(), 2);
        let m = &chains[0].0[1];
        assert_eq!((m.segment_index, m.char_start, m.char_end), (1, 5, 10));
        assert_eq!(m.surface_text, "Reese");

        let s = story("Reese smiles. [SEP] Matthew leaves.");
        let chains = name_chains(&s, &[character("Reese", &[]), character("Matthew", &[])]);
        assert!(chains.is_empty());
        assert_eq!(coreference_score(&chains).raw, 0.0);
    }

    #[test]
    fn overlapping_alias_matches_count_once() {
        let s = story("Mr. Smith nods. Smith sits. [SEP] Ann waves to Ann.");
        let chars = [character("Mr. Smith", &["Smith"]), character("Ann", &[])];
        let chains = name_chains(&s, &chars);
        assert_eq!(chains.iter().map(Chain::len).collect::<Vec<_>>(), [2, 2]);
        assert_eq!(chains[0].0[0].surface_text, "Mr. Smith");

        let s = story("Reese one. Reese two. [SEP] Reese three. Ann. [SEP] Ann again.");
        let chains = name_chains(&s, &[character("Reese", &[]), character("Ann", &[])]);
        let c = coreference_score(&chains);
        assert_eq!((c.chain_count, c.mean_chain_size), (2, 2.5));
    }

    #[test]
    fn grounding_proxy() {
        let s = story("Reese smiles. [SEP] A cat. [SEP] Matthew. [SEP] Rain.");
        let g = lexical_grounding(&s, &[character("Reese", &[]), character("Matthew", &[])]);
        assert_eq!(g, 0.5);
    }

    proptest! {
        #[test]
        fn punctuation_around_names_is_ignored(
            open in prop::sample::select(vec!["", "\"", "(", "'", "\u{201c}"]),
            close in prop::sample::select(vec!["", ",", "\"", ".", ")", "'s", "!"]),
            upper in any::<bool>(),
        ) {
            let name = if upper { "REESE" } else { "reese" };
            let s = story(&format!("Then {open}{name}{close} left. [SEP] Nobody."));
            let m = match_characters(&s, &[character("Reese", &[])]);
            prop_assert_eq!(segments(&m[0]), vec![0]);
        }
    }
}
