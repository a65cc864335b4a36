use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::engine::trace::{Auditor, Trace};
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::model::{Allocation, Instance, PriceVector, Solution};

/// Tuning knobs for one engine run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    /// Maximum number of trace events kept in memory.
    pub trace_cap: usize,
    /// Run the online invariant checks.
    pub audit: bool,
    /// Turn the first failed check into an error instead of recording it.
    pub strict: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { trace_cap: 100_000, audit: true, strict: true }
    }
}

/// `(|M_0|, ..., |M_k|, |K|)`: goods held by agents of each level, then the
/// number of maximum violators. Ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialVector {
    pub good_counts_by_level: Vec<usize>,
    pub violator_count: usize,
}

impl PotentialVector {
    pub fn to_vec(&self) -> Vec<usize> {
        let mut v = self.good_counts_by_level.clone();
        v.push(self.violator_count);
        v
    }
}

impl PartialOrd for PotentialVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PotentialVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_vec().cmp(&other.to_vec())
    }
}

/// Upper bound `(k-1) * ((m+k)/k * e)^k` on FindSolution iterations for the
/// `k`-th agent, with `e` rounded up to 2.7182818285.
pub fn iteration_bound(k: usize, m: usize) -> Exact {
    if k == 0 {
        return Exact::zero();
    }
    let e_up = Exact::ratio(27_182_818_285, 10_000_000_000);
    let base = Exact::ratio((m + k) as i64, k as i64) * e_up;
    Exact::from_integer(k as i64 - 1) * base.pow(k as u32)
}

/// The incrementally grown market.
///
/// `instance` is the sub-instance of agents `0..=k` and the goods brought in
/// so far. Sub-instance goods are numbered in the order they entered;
/// `goods_map` translates them back to core-instance indices.
#[derive(Debug, Clone)]
pub struct EngineState {
    pub(crate) full: Instance,
    pub(crate) instance: Instance,
    pub(crate) goods_map: Vec<usize>,
    pub(crate) in_market: Vec<bool>,
    pub(crate) solution: Solution,
    /// Number of agents currently in the market; the newest agent is `agents - 1`.
    pub(crate) agents: usize,
    pub(crate) trace: Trace,
    pub(crate) auditor: Auditor,
    pub(crate) config: EngineConfig,
    /// Price of each core good when last seen, for the monotonicity check.
    pub(crate) last_prices: Vec<Option<Exact>>,
    pub(crate) stats: Vec<FindStats>,
}

/// Per-agent FindSolution counters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FindStats {
    /// 1-based position of the agent in the insertion order.
    pub k: usize,
    pub iterations: u64,
    pub transfers: u64,
    pub price_rises: u64,
    /// `iterations / iteration_bound(k, m)`, 0 when the bound is 0.
    pub bound_ratio: f64,
}

impl EngineState {
    /// An empty market over `full`, which must be a core instance.
    pub fn new(full: Instance, config: EngineConfig) -> Self {
        let m = full.goods();
        EngineState {
            instance: Instance::new(0, Vec::new()).expect("empty instance"),
            goods_map: Vec::new(),
            in_market: vec![false; m],
            solution: Solution::new(
                Allocation::new(Vec::new(), 0).expect("empty allocation"),
                PriceVector::new(Vec::new()),
            )
            .expect("empty solution"),
            agents: 0,
            trace: Trace::with_cap(config.trace_cap),
            auditor: Auditor::new(config.audit, config.strict),
            last_prices: vec![None; m],
            stats: Vec::new(),
            full,
            config,
        }
    }

    /// A market that already contains every agent and good of `instance`,
    /// with agent `k` (0-based) as the most recently added one.
    pub fn from_solution(instance: Instance, solution: Solution, k: usize, config: EngineConfig) -> Result<Self> {
        if solution.agents() != instance.agents() || solution.goods() != instance.goods() {
            return Err(Error::invalid("solution does not match instance dimensions"));
        }
        if k + 1 != instance.agents() {
            return Err(Error::invalid(format!(
                "the most recently added agent must be the last one ({}), got {k}",
                instance.agents().saturating_sub(1)
            )));
        }
        let m = instance.goods();
        let last_prices = solution.prices.as_slice().iter().cloned().map(Some).collect();
        Ok(EngineState {
            full: instance.clone(),
            goods_map: (0..m).collect(),
            in_market: vec![true; m],
            solution,
            agents: instance.agents(),
            instance,
            trace: Trace::with_cap(config.trace_cap),
            auditor: Auditor::new(config.audit, config.strict),
            last_prices,
            stats: Vec::new(),
            config,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn full_instance(&self) -> &Instance {
        &self.full
    }

    pub fn solution(&self) -> &Solution {
        &self.solution
    }

    /// Most recently added agent (0-based). Panics on an empty market.
    pub fn k(&self) -> usize {
        self.agents.checked_sub(1).expect("no agent added yet")
    }

    pub fn agent_count(&self) -> usize {
        self.agents
    }

    /// Core-instance index of each sub-instance good.
    pub fn goods_map(&self) -> &[usize] {
        &self.goods_map
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn audit(&self) -> &crate::engine::trace::AuditReport {
        &self.auditor.report
    }

    pub fn stats(&self) -> &[FindStats] {
        &self.stats
    }

    /// The current solution re-indexed to core goods. Goods not yet in the
    /// market are left out, so this is only a partition once every good is in.
    pub fn core_solution(&self) -> Result<Solution> {
        let m = self.full.goods();
        if self.goods_map.len() != m || self.agents != self.full.agents() {
            return Err(Error::invariant("market does not yet contain the whole instance"));
        }
        let bundles =
            self.solution.allocation.bundles().iter().map(|b| b.iter().map(|&g| self.goods_map[g]).collect()).collect();
        let mut prices = vec![Exact::zero(); m];
        for (g, &c) in self.goods_map.iter().enumerate() {
            prices[c] = self.solution.prices.price(g).clone();
        }
        Solution::new(Allocation::new(bundles, m)?, PriceVector::new(prices))
    }

    pub(crate) fn core_goods(&self, goods: &[usize]) -> Vec<usize> {
        goods.iter().map(|&g| self.goods_map[g]).collect()
    }
}
