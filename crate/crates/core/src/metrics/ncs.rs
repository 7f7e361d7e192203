use serde::{Deserialize, Serialize};

use super::COMPONENTS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcsResult {
    pub arith: f64,
    /// Fifth root of the product of (component + eps); no correction is
    /// applied to the root afterwards.
    pub geom: f64,
    /// Normalized components in order R, D, T, ChP, MCG.
    pub components: [f64; COMPONENTS],
}

/// Arithmetic and geometric narrative coherence scores.
pub fn ncs(components: [f64; COMPONENTS], epsilon: f64) -> NcsResult {
    let arith = components.iter().sum::<f64>() / COMPONENTS as f64;
    let product: f64 = components.iter().map(|x| x + epsilon).product();
    NcsResult {
        arith,
        geom: product.powf(1.0 / COMPONENTS as f64),
        components,
    }
}
