use serde::Serialize;
use thiserror::Error;

use super::Story;

/// Per-story descriptive counts and ratios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoryStats {
    pub segments: usize,
    pub sentences: usize,
    pub words: usize,
    pub sent_per_seg: f64,
    pub words_per_sent: f64,
    pub words_per_seg: f64,
}

/// Corpus-level descriptive statistics: means over stories of per-story
/// values. `sequences` is the number of stories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub sequences: usize,
    pub seg_per_seq: f64,
    pub sent_per_seg: f64,
    pub sent_per_seq: f64,
    pub words_per_seq: f64,
    pub words_per_sent: f64,
    pub words_per_seg: f64,
}

pub fn story_stats(story: &Story) -> StoryStats {
    let segments = story.segment_count();
    let sentences = story.sentence_count();
    let words = story.word_count();
    let seg_mean = |f: &dyn Fn(&super::Segment) -> f64| {
        story.segments.iter().map(f).sum::<f64>() / segments as f64
    };
    StoryStats {
        segments,
        sentences,
        words,
        sent_per_seg: seg_mean(&|s| s.sentences.len() as f64),
        words_per_sent: words as f64 / sentences as f64,
        words_per_seg: seg_mean(&|s| s.word_count as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("corpus is empty")]
pub struct EmptyCorpus;

pub fn corpus_stats<'a>(
    stories: impl IntoIterator<Item = &'a Story>,
) -> Result<CorpusStats, EmptyCorpus> {
    let per_story: Vec<StoryStats> = stories.into_iter().map(story_stats).collect();
    if per_story.is_empty() {
        return Err(EmptyCorpus);
    }
    let n = per_story.len() as f64;
    let mean = |f: fn(&StoryStats) -> f64| per_story.iter().map(f).sum::<f64>() / n;
    Ok(CorpusStats {
        sequences: per_story.len(),
        seg_per_seq: mean(|s| s.segments as f64),
        sent_per_seg: mean(|s| s.sent_per_seg),
        sent_per_seq: mean(|s| s.sentences as f64),
        words_per_seq: mean(|s| s.words as f64),
        words_per_sent: mean(|s| s.words_per_sent),
        words_per_seg: mean(|s| s.words_per_seg),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_story, PromptCondition, StoryMeta};

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

    fn repeated(segments: usize) -> Story {
        let seg = "One two. Three four five.";
        story(&vec![seg; segments].join(" [SEP] "))
    }

    #[test]
    fn two_story_means() {
        let stories = [repeated(5), repeated(7)];
        let stats = corpus_stats(&stories).unwrap();
        assert_eq!(stats.sequences, 2);
        assert_eq!(stats.seg_per_seq, 6.0);
        assert_eq!(stats.sent_per_seg, 2.0);
        assert_eq!(stats.sent_per_seq, 12.0);
        assert_eq!(stats.words_per_seq, 30.0);
        assert_eq!(stats.words_per_sent, 2.5);
        assert_eq!(stats.words_per_seg, 5.0);
    }

    #[test]
    fn single_story() {
        let s = story("Reese raises her hand.");
        let stats = corpus_stats([&s]).unwrap();
        assert_eq!(stats.seg_per_seq, 1.0);
        assert_eq!(stats.words_per_sent, 4.0);
        let own = story_stats(&s);
        assert_eq!(stats.sent_per_seg, own.sent_per_seg);
        assert_eq!(stats.words_per_seg, own.words_per_seg);
    }

    #[test]
    fn mean_of_ratios_differs_from_ratio_of_means() {
        // 1 sentence of 10 words vs 3 sentences of 1 word each
        let a = story("a b c d e f g h i j.");
        let b = story("a. b. c.");
        let stats = corpus_stats([&a, &b]).unwrap();
        assert_eq!(stats.words_per_sent, 5.5);
        assert_eq!(stats.words_per_seq / stats.sent_per_seq, 6.5 / 2.0);
    }

    #[test]
    fn empty_corpus() {
        assert_eq!(corpus_stats(std::iter::empty()), Err(EmptyCorpus));
    }
}
