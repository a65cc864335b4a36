//! Instances, allocations, prices and the price-based fairness vocabulary.
//!
//! Goods and agents are 0-based indices. A good set is a slice of good
//! indices; bundles inside an [`Allocation`] are kept sorted ascending.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;

/// A fair division instance with additive valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    goods: usize,
    valuations: Vec<Vec<Exact>>,
}

impl Instance {
    /// Builds an instance from one valuation row per agent. Rows must all have
    /// length `goods` and every entry must be nonnegative.
    pub fn new(goods: usize, valuations: Vec<Vec<Exact>>) -> Result<Self> {
        for (i, row) in valuations.iter().enumerate() {
            if row.len() != goods {
                return Err(Error::invalid(format!("agent {i} has {} valuations, expected {goods}", row.len())));
            }
            if let Some(g) = row.iter().position(Exact::is_negative) {
                return Err(Error::invalid(format!("negative valuation {:?} for agent {i}, good {g}", row[g])));
            }
        }
        Ok(Instance { goods, valuations })
    }

    /// Convenience constructor from integer rows. Panics on ragged rows.
    pub fn from_integers<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let goods = rows.first().map_or(0, |r| r.as_ref().len());
        let valuations = rows.iter().map(|r| r.as_ref().iter().map(|&v| Exact::from_integer(v)).collect()).collect();
        Instance::new(goods, valuations)
    }

    pub fn agents(&self) -> usize {
        self.valuations.len()
    }

    pub fn goods(&self) -> usize {
        self.goods
    }

    #[inline]
    pub fn value(&self, agent: usize, good: usize) -> &Exact {
        &self.valuations[agent][good]
    }

    pub fn row(&self, agent: usize) -> &[Exact] {
        &self.valuations[agent]
    }

    pub fn rows(&self) -> &[Vec<Exact>] {
        &self.valuations
    }

    /// `v_i(S)`.
    pub fn bundle_value(&self, agent: usize, bundle: &[usize]) -> Exact {
        bundle.iter().map(|&g| self.value(agent, g)).sum()
    }

    /// Goods valued positively by `agent`, ascending.
    pub fn positive_goods(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        self.valuations[agent].iter().enumerate().filter(|(_, v)| v.is_positive()).map(|(g, _)| g)
    }

    /// Returns a copy whose agent `r` is agent `order[r]` of `self`.
    pub fn permute_agents(&self, order: &[usize]) -> Result<Instance> {
        check_permutation(order, self.agents())?;
        let valuations = order.iter().map(|&i| self.valuations[i].clone()).collect();
        Ok(Instance { goods: self.goods, valuations })
    }
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::invalid(format!("agent order has {} entries, expected {n}", order.len())));
    }
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid(format!("agent order {order:?} is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// An integral allocation: an n-partition of the goods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    bundles: Vec<Vec<usize>>,
}

impl Allocation {
    /// Validates that `bundles` partitions `0..goods`; sorts each bundle.
    pub fn new(mut bundles: Vec<Vec<usize>>, goods: usize) -> Result<Self> {
        let mut owner = vec![None; goods];
        for (i, bundle) in bundles.iter_mut().enumerate() {
            bundle.sort_unstable();
            for &g in bundle.iter() {
                if g >= goods {
                    return Err(Error::invalid(format!("good {g} out of range (m = {goods})")));
                }
                if let Some(j) = owner[g].replace(i) {
                    return Err(Error::invalid(format!("good {g} allocated to both agent {j} and agent {i}")));
                }
            }
        }
        if let Some(g) = owner.iter().position(Option::is_none) {
            return Err(Error::invalid(format!("good {g} is not allocated")));
        }
        Ok(Allocation { bundles })
    }

    /// Builds an allocation from each good's owner.
    pub fn from_owners(owners: &[usize], agents: usize) -> Result<Self> {
        let mut bundles = vec![Vec::new(); agents];
        for (g, &i) in owners.iter().enumerate() {
            if i >= agents {
                return Err(Error::invalid(format!("owner {i} of good {g} out of range")));
            }
            bundles[i].push(g);
        }
        Ok(Allocation { bundles })
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn goods(&self) -> usize {
        self.bundles.iter().map(Vec::len).sum()
    }

    pub fn bundle(&self, agent: usize) -> &[usize] {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    pub fn into_bundles(self) -> Vec<Vec<usize>> {
        self.bundles
    }

    /// Owner of each good.
    pub fn owners(&self) -> Vec<usize> {
        let mut owner = vec![usize::MAX; self.goods()];
        for (i, bundle) in self.bundles.iter().enumerate() {
            for &g in bundle {
                owner[g] = i;
            }
        }
        owner
    }

    pub(crate) fn remove_good(&mut self, agent: usize, good: usize) -> bool {
        match self.bundles[agent].binary_search(&good) {
            Ok(pos) => {
                self.bundles[agent].remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub(crate) fn insert_good(&mut self, agent: usize, good: usize) {
        if let Err(pos) = self.bundles[agent].binary_search(&good) {
            self.bundles[agent].insert(pos, good);
        }
    }

    pub(crate) fn push_agent(&mut self, bundle: Vec<usize>) {
        let mut bundle = bundle;
        bundle.sort_unstable();
        self.bundles.push(bundle);
    }
}

/// One price per good.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceVector {
    prices: Vec<Exact>,
}

impl PriceVector {
    pub fn new(prices: Vec<Exact>) -> Self {
        PriceVector { prices }
    }

    pub fn from_integers(prices: &[i64]) -> Self {
        PriceVector::new(prices.iter().map(|&p| Exact::from_integer(p)).collect())
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    #[inline]
    pub fn price(&self, good: usize) -> &Exact {
        &self.prices[good]
    }

    pub fn as_slice(&self) -> &[Exact] {
        &self.prices
    }

    pub(crate) fn set(&mut self, good: usize, price: Exact) {
        self.prices[good] = price;
    }

    pub(crate) fn push(&mut self, price: Exact) {
        self.prices.push(price);
    }

    fn check(&self, set: &[usize]) -> Result<()> {
        match set.iter().find(|&&g| g >= self.prices.len()) {
            Some(g) => Err(Error::invalid(format!("good {g} out of range for {} prices", self.prices.len()))),
            None => Ok(()),
        }
    }

    /// Unchecked `p(S)`.
    pub(crate) fn sum(&self, set: &[usize]) -> Exact {
        set.iter().map(|&g| &self.prices[g]).sum()
    }

    /// Unchecked `p̂(S)`: `p(S)` minus the largest price in `S`, or 0 when empty.
    pub(crate) fn hat(&self, set: &[usize]) -> Exact {
        match set.iter().map(|&g| &self.prices[g]).max() {
            Some(top) => self.sum(set) - top,
            None => Exact::zero(),
        }
    }
}

/// Total price of a good set; `p(∅) = 0`.
pub fn bundle_price(prices: &PriceVector, set: &[usize]) -> Result<Exact> {
    prices.check(set)?;
    Ok(prices.sum(set))
}

/// Price of a good set after removing its most expensive good.
pub fn hat_price(prices: &PriceVector, set: &[usize]) -> Result<Exact> {
    prices.check(set)?;
    Ok(prices.hat(set))
}

/// An allocation paired with a price vector over the same goods.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub allocation: Allocation,
    pub prices: PriceVector,
}

impl Solution {
    pub fn new(allocation: Allocation, prices: PriceVector) -> Result<Self> {
        if allocation.goods() != prices.len() {
            return Err(Error::invalid(format!(
                "allocation covers {} goods but {} prices were given",
                allocation.goods(),
                prices.len()
            )));
        }
        Ok(Solution { allocation, prices })
    }

    pub fn agents(&self) -> usize {
        self.allocation.agents()
    }

    pub fn goods(&self) -> usize {
        self.prices.len()
    }

    /// `p(x_i)`.
    pub fn spending(&self, agent: usize) -> Exact {
        self.prices.sum(self.allocation.bundle(agent))
    }

    /// `p̂(x_i)`.
    pub fn hat_spending(&self, agent: usize) -> Exact {
        self.prices.hat(self.allocation.bundle(agent))
    }

    pub fn spendings(&self) -> Vec<Exact> {
        (0..self.agents()).map(|i| self.spending(i)).collect()
    }

    pub fn hat_spendings(&self) -> Vec<Exact> {
        (0..self.agents()).map(|i| self.hat_spending(i)).collect()
    }

    /// `min(x, p)`; zero when there are no agents.
    pub fn min_spending(&self) -> Exact {
        self.spendings().into_iter().min().unwrap_or_default()
    }

    /// `max(x, p̂)`; zero when there are no agents.
    pub fn max_hat(&self) -> Exact {
        self.hat_spendings().into_iter().max().unwrap_or_default()
    }
}

fn argext(values: &[Exact], pick_max: bool) -> Vec<usize> {
    let target = if pick_max { values.iter().max() } else { values.iter().min() };
    match target {
        Some(t) => (0..values.len()).filter(|&i| &values[i] == t).collect(),
        None => Vec::new(),
    }
}

/// Agents with minimum spending, ascending.
pub fn min_spenders(sol: &Solution) -> Vec<usize> {
    argext(&sol.spendings(), false)
}

/// Agents with maximum `p̂`, ascending.
pub fn max_violators(sol: &Solution) -> Vec<usize> {
    argext(&sol.hat_spendings(), true)
}

/// Price envy-freeness up to one good, via `min(x,p) >= max(x,p̂)`.
pub fn is_pef1(sol: &Solution) -> bool {
    sol.min_spending() >= sol.max_hat()
}

/// pEF1 for every agent other than `k`: `p(x_i) >= max(x,p̂)` for all `i != k`.
pub fn is_pef1_except(sol: &Solution, k: usize) -> bool {
    let max_hat = sol.max_hat();
    (0..sol.agents()).filter(|&i| i != k).all(|i| sol.spending(i) >= max_hat)
}
