use serde::{Deserialize, Serialize};

use crate::corpus::Chain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorefScore {
    /// C: number of chains.
    pub chain_count: usize,
    /// S: mean number of mentions per chain.
    pub mean_chain_size: f64,
    /// R = S / C, or 0 without chains.
    pub raw: f64,
    pub norm: f64,
}

pub fn coreference_score(chains: &[Chain]) -> CorefScore {
    let chain_count = chains.len();
    if chain_count == 0 {
        return CorefScore {
            chain_count,
            mean_chain_size: 0.0,
            raw: 0.0,
            norm: 0.0,
        };
    }
    let mentions: usize = chains.iter().map(Chain::len).sum();
    let mean_chain_size = mentions as f64 / chain_count as f64;
    let raw = mean_chain_size / chain_count as f64;
    CorefScore {
        chain_count,
        mean_chain_size,
        raw,
        norm: raw.tanh(),
    }
}
