//! Text normalization, segment/sentence splitting and word counting.

use unicode_normalization::UnicodeNormalization;

/// Literal token separating image-level segments.
pub const SEPARATOR: &str = "[SEP]";

/// String placed between segments when a story is rendered back to text.
pub const JOINED_SEPARATOR: &str = " [SEP] ";

const CLOSERS: &[char] = &['"', '\'', '\u{201d}', '\u{2019}', ')', ']', '\u{bb}'];
const TERMINALS: &[char] = &['.', '!', '?', '\u{2026}'];

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "mt", "vs", "etc", "e.g", "i.e", "approx",
    "fig", "gen", "capt", "lt", "sgt", "col", "rev", "hon",
];

/// NFC-normalizes `raw` and collapses every run of whitespace into a single
/// space, trimming both ends.
pub fn collapse(raw: &str) -> String {
    let nfc: String = raw.nfc().collect();
    let mut out = String::with_capacity(nfc.len());
    for word in nfc.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Full normalization: [`collapse`] plus canonical `" [SEP] "` spacing.
pub fn normalize(raw: &str) -> String {
    split_segments(&collapse(raw)).join(JOINED_SEPARATOR)
}

/// Splits collapsed text on [`SEPARATOR`], trimming around each separator.
/// Blank pieces are returned as empty strings so callers can report them.
pub fn split_segments(collapsed: &str) -> Vec<&str> {
    collapsed.split(SEPARATOR).map(str::trim).collect()
}

fn is_abbreviation(word: &str) -> bool {
    let Some(stem) = word.strip_suffix('.') else {
        return false;
    };
    let stem = stem.trim_start_matches(|c: char| !c.is_alphanumeric());
    let lower = stem.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

fn ends_sentence(word: &str) -> bool {
    let core = word.trim_end_matches(CLOSERS);
    match core.chars().last() {
        Some(c) if TERMINALS.contains(&c) => !is_abbreviation(core),
        _ => false,
    }
}

/// Rule-based sentence splitter over a collapsed segment.
///
/// Sentences end at a word whose last non-closing character is terminal
/// punctuation, unless that word is a known abbreviation. Single-letter
/// initials are not special-cased.
/// Joining the result with a single space reproduces the input.
pub fn split_sentences(segment: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    for word in segment.split(' ').filter(|w| !w.is_empty()) {
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(word);
        if ends_sentence(word) {
            sentences.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}

/// Counts word tokens: whitespace-delimited pieces with leading and trailing
/// punctuation stripped. Pieces that are pure punctuation do not count;
/// hyphenated words count once.
pub fn count_words(text: &str) -> usize {
    text.split_whitespace()
        .filter(|tok| !tok.trim_matches(|c: char| !c.is_alphanumeric()).is_empty())
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapse_normalizes_whitespace_and_nfc() {
        assert_eq!(collapse("  a \t b\n\nc  "), "a b c");
        // e + combining acute -> precomposed
        assert_eq!(collapse("caf\u{65}\u{301}"), "caf\u{e9}");
    }

    #[test]
    fn sentence_splitting() {
        assert_eq!(split_sentences("B. C."), vec!["B.", "C."]);
        assert_eq!(
            split_sentences("Mr. Smith waved. \"Hi!\" she said"),
            vec!["Mr. Smith waved.", "\"Hi!\"", "she said"]
        );
        assert_eq!(
            split_sentences("Dr. Who wrote it. Done?!"),
            vec!["Dr. Who wrote it.", "Done?!"]
        );
        assert_eq!(
            split_sentences("Wait... (really.) Yes"),
            vec!["Wait...", "(really.)", "Yes"]
        );
        assert_eq!(split_sentences("no terminal"), vec!["no terminal"]);
    }

    #[test]
    fn word_counting() {
        assert_eq!(count_words("Reese raises her hand."), 4);
        assert_eq!(count_words("a well-known -- fact ..."), 3);
        assert_eq!(count_words("\"Hello,\" (she) said!"), 3);
        assert_eq!(count_words("... !!"), 0);
    }
}
