use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::MetricError;

/// Declared implicit relation label set.
pub const RELATION_LABELS: &[&str] = &[
    "temporal",
    "causal",
    "conjunction",
    "contrast",
    "concession",
    "expansion",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscourseScore {
    /// U: distinct relation labels.
    pub unique_types: usize,
    /// Total relations (one per adjacent segment pair).
    pub total_relations: usize,
    /// D = U / total, or 0 without relations.
    pub raw: f64,
    pub norm: f64,
}

/// Typological diversity of the relations between adjacent segments. In
/// strict mode a label outside [`RELATION_LABELS`] is an error; otherwise it
/// counts as a type of its own.
pub fn discourse_diversity<S: AsRef<str>>(
    relations: &[S],
    strict: bool,
) -> Result<DiscourseScore, MetricError> {
    if strict {
        if let Some(bad) = relations
            .iter()
            .find(|l| !RELATION_LABELS.contains(&l.as_ref()))
        {
            return Err(MetricError::UnknownLabel {
                label: bad.as_ref().to_string(),
            });
        }
    }
    let total_relations = relations.len();
    let unique_types = relations
        .iter()
        .map(AsRef::as_ref)
        .collect::<BTreeSet<&str>>()
        .len();
    let raw = if total_relations == 0 {
        0.0
    } else {
        unique_types as f64 / total_relations as f64
    };
    Ok(DiscourseScore {
        unique_types,
        total_relations,
        raw,
        norm: raw.tanh(),
    })
}

/// Mean within-story proportion of each relation label. Stories without
/// relations are skipped; returns an empty map when none remain.
pub fn relation_composition<'a, I, S>(stories: I) -> BTreeMap<String, f64>
where
    I: IntoIterator<Item = &'a [S]>,
    S: AsRef<str> + 'a,
{
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    let mut counted = 0usize;
    for relations in stories {
        if relations.is_empty() {
            continue;
        }
        counted += 1;
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for label in relations {
            *counts.entry(label.as_ref()).or_default() += 1;
        }
        let total = relations.len() as f64;
        for (label, count) in counts {
            *sums.entry(label.to_string()).or_default() += count as f64 / total;
        }
    }
    for value in sums.values_mut() {
        *value /= counted as f64;
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counts() {
        let d =
            discourse_diversity(&["temporal", "temporal", "causal", "conjunction"], true).unwrap();
        assert_eq!((d.unique_types, d.total_relations, d.raw), (3, 4, 0.75));
        let d = discourse_diversity(&["causal"; 5], false).unwrap();
        assert_eq!(d.raw, 0.2);
        let d = discourse_diversity::<&str>(&[], true).unwrap();
        assert_eq!((d.raw, d.norm), (0.0, 0.0));
    }

    #[test]
    fn unknown_labels() {
        assert_eq!(
            discourse_diversity(&["causal", "elaboration"], true),
            Err(MetricError::UnknownLabel {
                label: "elaboration".into()
            })
        );
        let d = discourse_diversity(&["causal", "elaboration"], false).unwrap();
        assert_eq!(d.unique_types, 2);
    }

    #[test]
    fn composition() {
        let one: &[&str] = &["causal", "causal", "temporal"];
        let c = relation_composition([one]);
        assert_eq!(c["causal"], 2.0 / 3.0);
        assert_eq!(c["temporal"], 1.0 / 3.0);

        let a: &[&str] = &["causal"];
        let b: &[&str] = &["temporal", "temporal"];
        let empty: &[&str] = &[];
        let c = relation_composition([a, empty, b]);
        assert_eq!(c["causal"], 0.5);
        assert_eq!(c["temporal"], 0.5);
    }
}
