use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{lowbow_at, LowbowParams};
use crate::corpus::WordSequence;
use crate::error::Result;
use crate::geometry::euclidean_distance;
use crate::kernels::{kernel_complexity, KernelComplexity};

/// Allowed excess of the observed ratio over 1, absorbing the error of the
/// numerical complexity estimate.
pub const LIPSCHITZ_SLACK: f64 = 1.05;

const COMPLEXITY_GRID: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub complexity: KernelComplexity,
    pub pairs: usize,
    /// Largest `‖γ_μ − γ_τ‖ / (|μ − τ| · complexity)` over the sampled pairs.
    pub max_ratio: f64,
    /// Pairs whose ratio exceeded [`LIPSCHITZ_SLACK`].
    pub violations: usize,
}

impl LipschitzReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Samples random location pairs and compares how far the curve moves with
/// the kernel-complexity bound `|μ − τ| · complexity`.
///
/// Pairs with `μ = τ` contribute a ratio of 0. With a constant kernel the
/// bound is 0, and any motion at all is reported as an infinite ratio.
pub fn lipschitz_check(
    y: &WordSequence,
    params: &LowbowParams,
    vocab_size: usize,
    pairs: usize,
    seed: u64,
) -> Result<LipschitzReport> {
    let complexity = kernel_complexity(&params.kernel, vocab_size, COMPLEXITY_GRID)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..pairs {
        let mu: f64 = rng.random();
        let tau: f64 = rng.random();
        let ratio = pair_ratio(y, params, vocab_size, mu, tau, complexity.value)?;
        if ratio > LIPSCHITZ_SLACK {
            violations += 1;
        }
        max_ratio = max_ratio.max(ratio);
    }
    Ok(LipschitzReport {
        complexity,
        pairs,
        max_ratio,
        violations,
    })
}

fn pair_ratio(
    y: &WordSequence,
    params: &LowbowParams,
    vocab_size: usize,
    mu: f64,
    tau: f64,
    complexity: f64,
) -> Result<f64> {
    if mu == tau {
        return Ok(0.0);
    }
    let moved = euclidean_distance(
        &lowbow_at(y, mu, params, vocab_size)?,
        &lowbow_at(y, tau, params, vocab_size)?,
    )?;
    if moved == 0.0 {
        return Ok(0.0);
    }
    Ok(moved / ((mu - tau).abs() * complexity))
}
