//! Single steps of the price dynamics: bringing in an agent, choosing and
//! applying a price rise, and transferring goods along a violator path.

use serde::{Deserialize, Serialize};

use crate::engine::state::{EngineState, PotentialVector};
use crate::engine::trace::{Betas, Check, EventKind, TraceEvent};
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::market::{AlternatingPath, MbbGraph, Reachability};
use crate::model::{max_violators, Instance};

/// What one FindSolution iteration did.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepOutcome {
    Transfer { a: usize, b: usize },
    PriceRise { beta: Exact },
    Terminated,
}

/// Goods agent `k` brings into the market and their opening prices.
///
/// `M_k` is every good outside the market that `k` values positively; each is
/// priced at `v_kg * min_market_price / (m * max_h v_kh)`, where the minimum
/// over an empty market is 1 and `m` counts all goods of the instance.
/// Returned goods are core indices, ascending.
pub fn initial_prices_for_agent(state: &EngineState, k: usize) -> Result<(Vec<usize>, Vec<Exact>)> {
    let full = &state.full;
    if k >= full.agents() {
        return Err(Error::invalid(format!("agent {k} out of range")));
    }
    if k < state.agents {
        return Err(Error::invalid(format!("agent {k} is already in the market")));
    }
    let top = full.row(k).iter().max().cloned().unwrap_or_default();
    if !top.is_positive() {
        return Err(Error::invariant(format!("agent {k} values every good at zero")));
    }
    let floor = state.solution.prices.as_slice().iter().min().cloned().unwrap_or_else(Exact::one);
    let scale = floor / (Exact::from_integer(full.goods() as i64) * top);
    let goods: Vec<usize> = full.positive_goods(k).filter(|&g| !state.in_market[g]).collect();
    let prices = goods.iter().map(|&g| full.value(k, g) * &scale).collect();
    Ok((goods, prices))
}

/// Adds the next agent (in index order) to the market with `M_k` as its bundle.
pub(crate) fn add_next_agent(state: &mut EngineState) -> Result<()> {
    let k = state.agents;
    let (new_goods, new_prices) = initial_prices_for_agent(state, k)?;
    let step = state.trace.next_step();

    if state.auditor.enabled {
        // every opening price is below min existing price / m
        let floor = state.solution.prices.as_slice().iter().min().cloned();
        let m = Exact::from_integer(state.full.goods() as i64);
        let ok = new_prices.iter().all(|p| p.is_positive() && floor.as_ref().is_none_or(|f| &(p * &m) <= f));
        state.auditor.check(Check::InitialPrices, step, ok, || format!("opening prices {new_prices:?}"))?;
    }

    let first_new = state.goods_map.len();
    for &g in &new_goods {
        state.in_market[g] = true;
        state.goods_map.push(g);
    }
    for (&g, p) in new_goods.iter().zip(&new_prices) {
        state.solution.prices.push(p.clone());
        state.last_prices[g] = Some(p.clone());
    }
    state.agents = k + 1;
    let rows =
        (0..state.agents).map(|i| state.goods_map.iter().map(|&g| state.full.value(i, g).clone()).collect()).collect();
    state.instance = Instance::new(state.goods_map.len(), rows)?;
    state.solution.allocation.push_agent((first_new..state.goods_map.len()).collect());

    let event = TraceEvent {
        step,
        k,
        kind: EventKind::AddAgent,
        beta: None,
        path: None,
        a: None,
        b: None,
        potential: None,
        new_goods: Some(new_goods),
        min_spend: state.solution.min_spending(),
        max_hat: state.solution.max_hat(),
    };
    state.trace.record(event);
    Ok(())
}

fn min_finite(values: impl IntoIterator<Item = Exact>) -> Option<Exact> {
    values.into_iter().min()
}

/// Price-rise rates for the current state.
///
/// * `b1`: smallest factor at which some good outside `R_M` becomes MBB for
///   an agent in `R_N` (pairs with zero value are skipped).
/// * `b2`: smallest factor at which an agent in `R_N` with positive `p̂`
///   catches up with `max(x, p̂)`.
/// * `b3`: factor at which agent `k` spends exactly `max(x, p̂)`.
///
/// Fails unless the minimum lies strictly between 1 and infinity.
pub fn compute_betas(state: &EngineState, graph: &MbbGraph, reach: &Reachability) -> Result<Betas> {
    let inst = &state.instance;
    let sol = &state.solution;
    let k = state.k();
    let max_hat = sol.max_hat();
    let reached_agents = reach.agents();
    let outside: Vec<usize> = (0..inst.goods()).filter(|&g| !reach.has_good(g)).collect();

    let b1 = min_finite(reached_agents.iter().flat_map(|&j| {
        outside.iter().filter_map(move |&g| {
            let v = inst.value(j, g);
            v.is_positive().then(|| sol.prices.price(g) * graph.alpha(j) / v)
        })
    }));
    let b2 = min_finite(reached_agents.iter().filter_map(|&j| {
        let hat = sol.hat_spending(j);
        hat.is_positive().then(|| &max_hat / &hat)
    }));
    let spend_k = sol.spending(k);
    let b3 = spend_k.is_positive().then(|| &max_hat / &spend_k);

    let chosen = [&b1, &b2, &b3]
        .into_iter()
        .flatten()
        .min()
        .cloned()
        .ok_or_else(|| Error::invariant("all price-rise rates are infinite"))?;
    if chosen <= Exact::one() {
        return Err(Error::invariant(format!("price-rise rate {chosen:?} is not above 1")));
    }
    let attained = [("b1", &b1), ("b2", &b2), ("b3", &b3)]
        .into_iter()
        .filter(|(_, b)| b.as_ref() == Some(&chosen))
        .map(|(name, _)| name.to_string())
        .collect();
    Ok(Betas { b1, b2, b3, chosen, attained })
}

/// Multiplies the price of every good in `R_M` by `beta`.
pub fn apply_price_rise(state: &mut EngineState, reach: &Reachability, beta: &Exact) -> Result<StepOutcome> {
    if beta <= &Exact::one() {
        return Err(Error::invariant(format!("price-rise rate {beta:?} is not above 1")));
    }
    for g in reach.goods() {
        let raised = state.solution.prices.price(g) * beta;
        state.solution.prices.set(g, raised);
    }
    Ok(StepOutcome::PriceRise { beta: beta.clone() })
}

/// Transfer indices `(a, b)` for a violator path.
///
/// `a` is the first position whose agent still meets `max(x, p̂)` after giving
/// up its path good; `b < a` is the last position whose agent, after taking
/// the next path good in place of its own, stays at or below `max(x, p̂)`
/// (0 when none does).
pub fn transfer_indices(state: &EngineState, path: &AlternatingPath) -> Result<(usize, usize)> {
    let sol = &state.solution;
    let prices = &sol.prices;
    let max_hat = sol.max_hat();
    let len = path.len();
    let bundle = |r: usize| sol.allocation.bundle(path.agents[r]);

    let a = (1..=len)
        .find(|&r| {
            let g = path.goods[r - 1];
            prices.sum(bundle(r)) - prices.price(g) >= max_hat
        })
        .ok_or_else(|| Error::invariant(format!("no transfer index a on path {path:?}")))?;
    let b = (1..a)
        .rev()
        .find(|&r| {
            let own = path.goods[r - 1];
            let next = path.goods[r];
            max_hat >= prices.sum(bundle(r)) + prices.price(next) - prices.price(own)
        })
        .unwrap_or(0);
    Ok((a, b))
}

/// Reallocates goods along a shortest violator path: for every position `r`
/// with `b < r <= a`, good `g_r` moves from `i_r` to `i_{r-1}`.
pub fn transfer(state: &mut EngineState, path: &AlternatingPath) -> Result<StepOutcome> {
    if path.is_empty() || path.agents.len() != path.goods.len() + 1 {
        return Err(Error::invariant(format!("malformed transfer path {path:?}")));
    }
    let (a, b) = transfer_indices(state, path)?;
    for r in (b + 1)..=a {
        let g = path.goods[r - 1];
        let from = path.agents[r];
        let to = path.agents[r - 1];
        if !state.solution.allocation.remove_good(from, g) {
            return Err(Error::invariant(format!("agent {from} does not own path good {g}")));
        }
        state.solution.allocation.insert_good(to, g);
    }
    Ok(StepOutcome::Transfer { a, b })
}

/// Potential vector from levels measured from agent `k` and the current
/// maximum violators.
pub fn compute_potential(state: &EngineState, reach: &Reachability) -> PotentialVector {
    let agents = state.agents;
    let mut counts = vec![0; agents + 1];
    for i in 0..agents {
        counts[reach.level(i).min(agents)] += state.solution.allocation.bundle(i).len();
    }
    PotentialVector { good_counts_by_level: counts, violator_count: max_violators(&state.solution).len() }
}
