use std::collections::BTreeMap;

use serde::Serialize;

use super::describe::{format_mean_sd, mean_sd};
use super::StatsError;

/// One perplexity value for one story under one evaluator model.
#[derive(Debug, Clone, PartialEq)]
pub struct PerplexityRecord {
    pub evaluator: String,
    /// Data condition, e.g. the prompt condition.
    pub column: String,
    pub system: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum PerplexityCell {
    /// Reference-system texts: mean (sd) over stories.
    Human {
        n: usize,
        mean: f64,
        sd: f64,
        display: String,
    },
    /// Model texts: range of per-source means.
    Models {
        min: f64,
        max: f64,
        source_means: BTreeMap<String, f64>,
        display: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerplexityRow {
    pub evaluator: String,
    /// Two cells per column: human then models.
    pub cells: Vec<PerplexityCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerplexityTable {
    pub columns: Vec<String>,
    pub rows: Vec<PerplexityRow>,
}

/// Range cell "3.10–4.30".
pub fn format_range(min: f64, max: f64) -> String {
    format!("{min:.2}\u{2013}{max:.2}")
}

/// Builds the evaluator-by-condition perplexity table. Every evaluator must
/// have both human and model values in every requested column.
pub fn perplexity_report(
    records: &[PerplexityRecord],
    columns: &[String],
    reference: &str,
) -> Result<PerplexityTable, StatsError> {
    // evaluator -> column -> system -> values
    let mut grouped: BTreeMap<&str, BTreeMap<&str, BTreeMap<&str, Vec<f64>>>> = BTreeMap::new();
    for r in records {
        grouped
            .entry(&r.evaluator)
            .or_default()
            .entry(&r.column)
            .or_default()
            .entry(&r.system)
            .or_default()
            .push(r.value);
    }

    let mut rows = Vec::new();
    for (evaluator, by_column) in &grouped {
        let mut cells = Vec::new();
        for column in columns {
            let empty = || StatsError::EmptyCell {
                evaluator: evaluator.to_string(),
                column: column.clone(),
            };
            let systems = by_column.get(column.as_str()).ok_or_else(empty)?;
            let human = systems
                .get(reference)
                .filter(|v| !v.is_empty())
                .ok_or_else(empty)?;
            let (mean, sd) = mean_sd(human);
            cells.push(PerplexityCell::Human {
                n: human.len(),
                mean,
                sd,
                display: format_mean_sd(mean, sd),
            });

            let source_means: BTreeMap<String, f64> = systems
                .iter()
                .filter(|(s, v)| **s != reference && !v.is_empty())
                .map(|(s, v)| (s.to_string(), mean_sd(v).0))
                .collect();
            if source_means.is_empty() {
                return Err(empty());
            }
            let min = source_means.values().copied().fold(f64::INFINITY, f64::min);
            let max = source_means
                .values()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            cells.push(PerplexityCell::Models {
                min,
                max,
                source_means,
                display: format_range(min, max),
            });
        }
        rows.push(PerplexityRow {
            evaluator: evaluator.to_string(),
            cells,
        });
    }
    Ok(PerplexityTable {
        columns: columns.to_vec(),
        rows,
    })
}
