use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::corpus::CharacterAlignment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterPersistence {
    pub name: String,
    /// True when the character is mentioned in at least one segment.
    pub matched: bool,
    /// ChC: adjacent pairs mentioning the character in both segments, over N-1.
    pub continuity: f64,
    /// ChS: (last mention - first mention) over N-1.
    pub spread: f64,
    /// ChP = ChC / (ChS + eps).
    pub persistence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterScore {
    pub per_character: Vec<CharacterPersistence>,
    /// Means over matched characters; all 0 when none matched.
    pub continuity: f64,
    pub spread: f64,
    pub raw: f64,
    pub norm: f64,
}

fn persistence_of(c: &CharacterAlignment, n: usize, epsilon: f64) -> CharacterPersistence {
    let segments = &c.text_segments;
    let (continuity, spread) = match (segments.first(), segments.last()) {
        (Some(&first), Some(&last)) if n >= 2 => {
            let pairs = segments
                .iter()
                .filter(|&&s| segments.contains(&(s + 1)))
                .count();
            let gaps = (n - 1) as f64;
            (pairs as f64 / gaps, (last - first) as f64 / gaps)
        }
        _ => (0.0, 0.0),
    };
    CharacterPersistence {
        name: c.name.clone(),
        matched: !segments.is_empty(),
        continuity,
        spread,
        persistence: continuity / (spread + epsilon),
    }
}

/// Character continuity, spread and persistence for one story of `n`
/// segments.
pub fn character_persistence(
    characters: &[CharacterAlignment],
    n: usize,
    epsilon: f64,
) -> CharacterScore {
    let per_character: Vec<CharacterPersistence> = characters
        .iter()
        .map(|c| persistence_of(c, n, epsilon))
        .collect();
    let matched: Vec<&CharacterPersistence> = per_character.iter().filter(|c| c.matched).collect();
    let mean = |f: fn(&CharacterPersistence) -> f64| {
        if matched.is_empty() {
            0.0
        } else {
            matched.iter().map(|c| f(c)).sum::<f64>() / matched.len() as f64
        }
    };
    let continuity = mean(|c| c.continuity);
    let spread = mean(|c| c.spread);
    let raw = mean(|c| c.persistence);
    CharacterScore {
        per_character,
        continuity,
        spread,
        raw,
        norm: raw.tanh(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundingScore {
    /// MCC: mean Jaccard overlap of text and visual segments per character.
    pub mcc: f64,
    /// Story-level visual grounding score, when annotated.
    pub gv: Option<f64>,
    /// MCG = MCC / (GV + eps).
    pub raw: f64,
    pub norm: f64,
}

fn jaccard(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Option<f64> {
    let union = a.union(b).count();
    (union > 0).then(|| a.intersection(b).count() as f64 / union as f64)
}

/// Multimodal character grounding. Characters neither mentioned nor visible
/// carry no evidence and are left out of MCC. Without characters, or without
/// a grounding score in lenient mode, MCG is 0.
pub fn multimodal_character_grounding(
    characters: &[CharacterAlignment],
    gv: Option<f64>,
    epsilon: f64,
    strict: bool,
) -> Result<GroundingScore, MetricError> {
    let overlaps: Vec<f64> = characters
        .iter()
        .filter_map(|c| jaccard(&c.text_segments, &c.visual_segments))
        .collect();
    let mcc = if overlaps.is_empty() {
        0.0
    } else {
        overlaps.iter().sum::<f64>() / overlaps.len() as f64
    };
    let raw = match gv {
        _ if characters.is_empty() => 0.0,
        Some(gv) => mcc / (gv + epsilon),
        None if strict => return Err(MetricError::GroundingMissing),
        None => 0.0,
    };
    Ok(GroundingScore {
        mcc,
        gv,
        raw,
        norm: raw.tanh(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-9;

    fn character(text: &[usize], visual: &[usize]) -> CharacterAlignment {
        CharacterAlignment {
            name: format!("c{text:?}{visual:?}"),
            text_segments: text.iter().copied().collect(),
            visual_segments: visual.iter().copied().collect(),
        }
    }

    #[test]
    fn persistence_hand_case() {
        let s = character_persistence(&[character(&[0, 1, 3], &[])], 5, EPS);
        let c = &s.per_character[0];
        assert_eq!(c.continuity, 0.25);
        assert_eq!(c.spread, 0.75);
        assert!((c.persistence - 1.0 / 3.0).abs() < 1e-8);
        assert_eq!(s.raw, c.persistence);
        assert_eq!(s.norm, s.raw.tanh());
    }

    #[test]
    fn persistence_degenerate_cases() {
        let s = character_persistence(&[character(&[2], &[])], 5, EPS);
        assert_eq!((s.continuity, s.spread, s.raw), (0.0, 0.0, 0.0));

        let s = character_persistence(&[character(&[0, 1, 2, 3], &[])], 4, EPS);
        assert_eq!((s.continuity, s.spread), (1.0, 1.0));
        assert!((s.raw - 1.0 / (1.0 + EPS)).abs() < 1e-15);

        let s = character_persistence(&[], 4, EPS);
        assert_eq!(
            (s.continuity, s.spread, s.raw, s.norm),
            (0.0, 0.0, 0.0, 0.0)
        );

        let s = character_persistence(&[character(&[0], &[0])], 1, EPS);
        assert_eq!(s.raw, 0.0);
    }

    #[test]
    fn unmatched_characters_do_not_dilute_persistence() {
        let s = character_persistence(&[character(&[0, 1], &[]), character(&[], &[1])], 2, EPS);
        assert_eq!(s.per_character.len(), 2);
        assert!(!s.per_character[1].matched);
        assert_eq!(s.continuity, 1.0);
    }

    #[test]
    fn grounding_cases() {
        let g =
            multimodal_character_grounding(&[character(&[0, 1], &[0, 1])], Some(1.0), EPS, true)
                .unwrap();
        assert_eq!(g.mcc, 1.0);
        assert!((g.raw - 1.0).abs() < 1e-8);

        let g =
            multimodal_character_grounding(&[character(&[0], &[1])], Some(0.5), EPS, true).unwrap();
        assert_eq!((g.mcc, g.raw), (0.0, 0.0));

        let g = multimodal_character_grounding(
            &[character(&[0, 1], &[0, 1]), character(&[0, 1], &[1])],
            Some(0.75),
            EPS,
            true,
        )
        .unwrap();
        assert_eq!(g.mcc, 0.75);
        assert!((g.raw - 1.0).abs() < 1e-8);
    }

    #[test]
    fn grounding_missing() {
        let chars = [character(&[0], &[0])];
        assert_eq!(
            multimodal_character_grounding(&chars, None, EPS, true),
            Err(MetricError::GroundingMissing)
        );
        let g = multimodal_character_grounding(&chars, None, EPS, false).unwrap();
        assert_eq!((g.mcc, g.raw), (1.0, 0.0));
        let g = multimodal_character_grounding(&[], None, EPS, true).unwrap();
        assert_eq!(g.raw, 0.0);
    }
}
