//! Aggregation and significance testing over per-story scores.

mod describe;
mod paired;
mod perplexity;
pub mod special;

use thiserror::Error;

pub use describe::{aggregate, format_mean_sd, summarize, Summary, SystemOrder};
pub use paired::{gap_change, paired_t, GapChangeResult, PairedSample, Significance, TTestResult};
pub use perplexity::{
    format_range, perplexity_report, PerplexityCell, PerplexityRecord, PerplexityRow,
    PerplexityTable,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("group {group:?} has no values")]
    EmptyGroup { group: String },
    #[error("paired samples differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("paired test needs at least 2 pairs, got {n}")]
    TooFewPairs { n: usize },
    #[error("paired differences have zero variance")]
    ZeroVariance,
    #[error("non-finite value in sample")]
    NonFinite,
    #[error("short and long conditions cover different sequences")]
    MisalignedConditions,
    #[error("perplexity cell {evaluator}/{column} has no values")]
    EmptyCell { evaluator: String, column: String },
}
