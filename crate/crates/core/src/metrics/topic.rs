use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::corpus::TopicLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicScore {
    /// Switch rate at each topic granularity.
    pub per_granularity: BTreeMap<u32, f64>,
    /// Mean switch rate over granularities.
    pub averaged: f64,
    pub norm: f64,
}

/// Fraction of adjacent segment pairs whose topic label changes.
pub fn topic_switch_single(labels: &[TopicLabel]) -> Result<f64, MetricError> {
    if labels.len() < 2 {
        return Err(MetricError::SingleSegment);
    }
    let changes = labels.windows(2).filter(|w| w[0] != w[1]).count();
    Ok(changes as f64 / (labels.len() - 1) as f64)
}

/// Topic switch averaged over every granularity present. A single-segment
/// story scores 0 at every granularity.
pub fn topic_switch(
    topics: &BTreeMap<u32, Vec<TopicLabel>>,
    segment_count: usize,
) -> Result<TopicScore, MetricError> {
    if topics.is_empty() {
        return Err(MetricError::NoGranularities);
    }
    let mut per_granularity = BTreeMap::new();
    for (&granularity, labels) in topics {
        if labels.len() != segment_count {
            return Err(MetricError::GranularityLengthMismatch {
                granularity,
                expected: segment_count,
                found: labels.len(),
            });
        }
        let rate = match topic_switch_single(labels) {
            Err(MetricError::SingleSegment) => 0.0,
            other => other?,
        };
        per_granularity.insert(granularity, rate);
    }
    let averaged = per_granularity.values().sum::<f64>() / per_granularity.len() as f64;
    Ok(TopicScore {
        per_granularity,
        averaged,
        norm: averaged.tanh(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_granularity_cases() {
        assert_eq!(topic_switch_single(&[1, 1, 2, 2, 3]), Ok(0.5));
        assert_eq!(topic_switch_single(&[7, 7, 7]), Ok(0.0));
        assert_eq!(topic_switch_single(&[1, 2, 1, 2]), Ok(1.0));
        assert_eq!(topic_switch_single(&[4]), Err(MetricError::SingleSegment));
    }

    #[test]
    fn averaging() {
        let topics = BTreeMap::from([(10, vec![1, 1, 2, 2, 3]), (5, vec![1, 1, 1, 1, 2])]);
        let t = topic_switch(&topics, 5).unwrap();
        assert_eq!(t.averaged, 0.375);
        assert_eq!(t.norm, 0.375_f64.tanh());

        let one = BTreeMap::from([(80, vec![1, 2, 2, 2, 2])]);
        assert_eq!(topic_switch(&one, 5).unwrap().averaged, 0.25);
    }

    #[test]
    fn length_mismatch_and_degenerate() {
        let topics = BTreeMap::from([(10, vec![1, 2])]);
        assert_eq!(
            topic_switch(&topics, 3),
            Err(MetricError::GranularityLengthMismatch {
                granularity: 10,
                expected: 3,
                found: 2
            })
        );
        let single = BTreeMap::from([(10, vec![1]), (5, vec![0])]);
        assert_eq!(topic_switch(&single, 1).unwrap().averaged, 0.0);
        assert_eq!(
            topic_switch(&BTreeMap::new(), 3),
            Err(MetricError::NoGranularities)
        );
    }

    proptest! {
        #[test]
        fn coarsening_never_adds_switches(
            labels in prop::collection::vec(0i64..8, 2..12),
            map in prop::collection::vec(0i64..3, 8),
        ) {
            let coarse: Vec<i64> = labels.iter().map(|&l| map[l as usize]).collect();
            prop_assert!(topic_switch_single(&coarse)? <= topic_switch_single(&labels)?);
        }

        #[test]
        fn switch_rate_is_bounded(labels in prop::collection::vec(-1i64..5, 2..20)) {
            let t = topic_switch_single(&labels)?;
            prop_assert!((0.0..=1.0).contains(&t));
        }
    }
}
