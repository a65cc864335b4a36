//! Seeded random instances that satisfy Hall's condition.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::model::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub agents: usize,
    pub goods: usize,
    /// Largest valuation; values are drawn uniformly from `0..=max`.
    pub max: i64,
    pub seed: u64,
}

/// Uniform integer valuations in `[0, max]` with a planted matching: a random
/// injection `σ` from agents to goods gets `v_{i,σ(i)} >= 1`, redrawn from
/// `[1, max]` when it came out 0. Deterministic in the seed.
pub fn generate(p: &GenParams) -> Result<Instance> {
    if p.agents > p.goods {
        return Err(Error::invalid(format!("{} agents need at least as many goods, got {}", p.agents, p.goods)));
    }
    if p.max < 1 {
        return Err(Error::invalid(format!("max value must be at least 1, got {}", p.max)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut rows: Vec<Vec<i64>> =
        (0..p.agents).map(|_| (0..p.goods).map(|_| rng.random_range(0..=p.max)).collect()).collect();
    let mut sigma: Vec<usize> = (0..p.goods).collect();
    sigma.shuffle(&mut rng);
    for (i, row) in rows.iter_mut().enumerate() {
        let g = sigma[i];
        if row[g] == 0 {
            row[g] = rng.random_range(1..=p.max);
        }
    }
    let valuations = rows.into_iter().map(|r| r.into_iter().map(Exact::from_integer).collect()).collect();
    Instance::new(p.goods, valuations)
}
