//! Stripping goods nobody values and agents who value nothing, and putting
//! them back afterwards.
//!
//! Re-embedding rule: dropped agents get empty bundles, dropped goods go to the
//! lowest-index surviving agent at price 0. Everyone values a dropped good at
//! 0 and a dropped agent values every good at 0, so neither EF1 nor fPO can be
//! affected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::model::{Allocation, Instance, PriceVector, Solution};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub original_agents: usize,
    pub original_goods: usize,
    /// Core agent `r` is original agent `kept_agents[r]`.
    pub kept_agents: Vec<usize>,
    /// Core good `c` is original good `kept_goods[c]`.
    pub kept_goods: Vec<usize>,
    pub dropped_agents: Vec<usize>,
    pub dropped_goods: Vec<usize>,
}

impl NormalizationRecord {
    pub fn is_identity(&self) -> bool {
        self.dropped_agents.is_empty() && self.dropped_goods.is_empty()
    }
}

pub fn normalize_instance(raw: &Instance) -> Result<(Instance, NormalizationRecord)> {
    let (n, m) = (raw.agents(), raw.goods());
    if raw.rows().iter().flatten().any(Exact::is_negative) {
        return Err(Error::invalid("negative valuation"));
    }
    let (kept_agents, dropped_agents): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&i| raw.row(i).iter().any(Exact::is_positive));
    let (kept_goods, dropped_goods): (Vec<usize>, Vec<usize>) =
        (0..m).partition(|&g| (0..n).any(|i| raw.value(i, g).is_positive()));

    let core = if dropped_agents.is_empty() && dropped_goods.is_empty() {
        raw.clone()
    } else {
        let rows = kept_agents.iter().map(|&i| kept_goods.iter().map(|&g| raw.value(i, g).clone()).collect()).collect();
        Instance::new(kept_goods.len(), rows)?
    };
    let record = NormalizationRecord {
        original_agents: n,
        original_goods: m,
        kept_agents,
        kept_goods,
        dropped_agents,
        dropped_goods,
    };
    Ok((core, record))
}

/// Re-embeds a core solution into the original index space.
pub fn denormalize(sol: &Solution, rec: &NormalizationRecord) -> Result<Solution> {
    if sol.agents() != rec.kept_agents.len() || sol.goods() != rec.kept_goods.len() {
        return Err(Error::invalid(format!(
            "solution has {} agents / {} goods but the record keeps {} / {}",
            sol.agents(),
            sol.goods(),
            rec.kept_agents.len(),
            rec.kept_goods.len()
        )));
    }
    let mut bundles = vec![Vec::new(); rec.original_agents];
    let mut prices = vec![Exact::zero(); rec.original_goods];
    for (r, &i) in rec.kept_agents.iter().enumerate() {
        bundles[i] = sol.allocation.bundle(r).iter().map(|&c| rec.kept_goods[c]).collect();
    }
    for (c, &g) in rec.kept_goods.iter().enumerate() {
        prices[g] = sol.prices.price(c).clone();
    }
    if !rec.dropped_goods.is_empty() {
        let receiver = rec.kept_agents.first().copied().unwrap_or(0);
        if receiver >= rec.original_agents {
            return Err(Error::invalid("goods present but the instance has no agents"));
        }
        bundles[receiver].extend_from_slice(&rec.dropped_goods);
    }
    Solution::new(Allocation::new(bundles, rec.original_goods)?, PriceVector::new(prices))
}

/// Restricts an original-index solution to the core instance.
///
/// Returns `None` when a dropped agent holds a core good, in which case the
/// restriction is not a partition of the core goods.
pub fn project(sol: &Solution, rec: &NormalizationRecord) -> Result<Option<Solution>> {
    if sol.agents() != rec.original_agents || sol.goods() != rec.original_goods {
        return Err(Error::invalid("solution does not match the instance dimensions"));
    }
    let mut core_index = vec![None; rec.original_goods];
    for (c, &g) in rec.kept_goods.iter().enumerate() {
        core_index[g] = Some(c);
    }
    for &i in &rec.dropped_agents {
        if sol.allocation.bundle(i).iter().any(|&g| core_index[g].is_some()) {
            return Ok(None);
        }
    }
    let bundles = rec
        .kept_agents
        .iter()
        .map(|&i| sol.allocation.bundle(i).iter().filter_map(|&g| core_index[g]).collect())
        .collect();
    let prices = rec.kept_goods.iter().map(|&g| sol.prices.price(g).clone()).collect();
    Ok(Some(Solution::new(Allocation::new(bundles, rec.kept_goods.len())?, PriceVector::new(prices))?))
}
