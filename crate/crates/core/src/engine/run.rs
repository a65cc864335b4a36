//! The FindSolution loop and the incremental driver around it.

use crate::engine::state::{iteration_bound, EngineConfig, EngineState, FindStats, PotentialVector};
use crate::engine::steps::{add_next_agent, apply_price_rise, compute_betas, compute_potential, transfer, StepOutcome};
use crate::engine::trace::{AuditReport, Check, EventKind, Trace, TraceEvent};
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::hall::check_hall;
use crate::market::{build_graph, reach_from, shortest_path_in, AlternatingPath};
use crate::model::{
    check_permutation, is_pef1, is_pef1_except, max_violators, min_spenders, Allocation, Instance, Solution,
};
use crate::normalize::{denormalize, normalize_instance, NormalizationRecord};

/// What the previous iteration did, kept until the next iteration can check
/// the properties it promised.
enum Pending {
    Rise {
        reached_goods: Vec<usize>,
        unreached_agents: Vec<usize>,
        max_hat: Exact,
        potential: PotentialVector,
    },
    Transfer {
        sizes: Vec<usize>,
        levels: Vec<usize>,
        max_hat: Exact,
        path: AlternatingPath,
        a: usize,
        b: usize,
        potential: PotentialVector,
    },
}

impl Pending {
    fn potential(&self) -> &PotentialVector {
        match self {
            Pending::Rise { potential, .. } | Pending::Transfer { potential, .. } => potential,
        }
    }
}

/// Runs price rises and transfers until the market is pEF1.
///
/// Expects a state that is pEF1 for every agent but the newest and whose
/// bundles are all MBB; returns a pEF1 state with MBB bundles.
pub fn find_solution(mut state: EngineState) -> Result<EngineState> {
    if state.agents == 0 {
        return Ok(state);
    }
    let k = state.k();
    let agents = state.agents;
    let bound = iteration_bound(agents, state.full.goods());
    let mut stats = FindStats { k: agents, ..FindStats::default() };
    let mut pending: Option<Pending> = None;
    let audit = state.auditor.enabled;

    loop {
        let step = state.trace.next_step();
        let graph = build_graph(&state.instance, &state.solution)?;
        let max_hat = state.solution.max_hat();

        if audit {
            check_state(&mut state, &graph, step)?;
            match &pending {
                Some(Pending::Rise { reached_goods, unreached_agents, max_hat: before, .. }) => {
                    let isolated = unreached_agents.iter().all(|&i| reached_goods.iter().all(|&g| !graph.is_mbb(i, g)));
                    state.auditor.check(Check::RaisedGoodsIsolated, step, isolated, || {
                        "an agent outside R_N gained an MBB edge into R_M".into()
                    })?;
                    state.auditor.check(Check::MaxHatStableOnRise, step, &max_hat == before, || {
                        format!("max p̂ moved from {before:?} to {max_hat:?}")
                    })?;
                }
                Some(Pending::Transfer { sizes, max_hat: before, path, a, b, .. }) => {
                    let sol = &state.solution;
                    let ok = &max_hat <= before && (0..agents).filter(|&i| i != k).all(|i| &sol.spending(i) >= before);
                    state.auditor.check(Check::MaxHatNonIncreasingOnTransfer, step, ok, || {
                        format!("max p̂ went from {before:?} to {max_hat:?}")
                    })?;
                    let (ia, ib) = (path.agents[*a], path.agents[*b]);
                    let sizes_ok = (0..agents).all(|i| {
                        let now = sol.allocation.bundle(i).len();
                        let expected = if i == ib {
                            sizes[i] + 1
                        } else if i == ia {
                            sizes[i] - 1
                        } else {
                            sizes[i]
                        };
                        now == expected
                    });
                    state.auditor.check(Check::TransferBundleSizes, step, sizes_ok, || {
                        format!(
                            "bundle sizes {sizes:?} -> {:?}",
                            sol.allocation.bundles().iter().map(Vec::len).collect::<Vec<_>>()
                        )
                    })?;
                }
                None => {}
            }
        }

        if is_pef1(&state.solution) {
            if audit {
                let ok = graph.bundles_are_mbb();
                state.auditor.check(Check::FinalPef1Mbb, step, ok, || "final bundles not MBB".into())?;
            }
            let event = TraceEvent {
                step,
                k,
                kind: EventKind::Terminated,
                beta: None,
                path: None,
                a: None,
                b: None,
                potential: None,
                new_goods: None,
                min_spend: state.solution.min_spending(),
                max_hat,
            };
            state.trace.record(event);
            break;
        }

        let spenders = min_spenders(&state.solution);
        if audit {
            let ok = spenders == [k];
            state.auditor.check(Check::MinSpenderIsK, step, ok, || format!("minimum spenders {spenders:?}"))?;
        }
        let reach = reach_from(&graph, &spenders, agents);
        let from_k;
        let levels = if spenders == [k] {
            &reach
        } else {
            from_k = reach_from(&graph, &[k], agents);
            &from_k
        };
        let violators = max_violators(&state.solution);
        let potential = compute_potential(&state, levels);

        if audit {
            if let Some(prev) = &pending {
                let before = prev.potential();
                state.auditor.check(Check::PotentialIncrease, step, before < &potential, || {
                    format!("potential {:?} -> {:?}", before.to_vec(), potential.to_vec())
                })?;
            }
            if let Some(Pending::Transfer { levels: old, b, .. }) = &pending {
                let kept = (0..agents).filter(|&i| old[i] <= *b).all(|i| levels.level(i) == old[i]);
                state.auditor.check(Check::TransferLevelsKept, step, kept, || {
                    format!("levels {old:?} -> {:?} with b = {b}", levels.levels())
                })?;
            }
        }

        stats.iterations += 1;
        let within = Exact::from_integer(stats.iterations as i64) <= bound;
        if audit {
            state.auditor.check(Check::IterationBound, step, within, || {
                format!("{} iterations exceed the bound {:?}", stats.iterations, bound)
            })?;
        }
        if !within {
            return Err(Error::invariant(format!("FindSolution for agent {k} exceeded {} iterations", bound.to_f64())));
        }

        let event = if violators.iter().any(|&i| reach.has_agent(i)) {
            let path = shortest_path_in(&reach, &violators)
                .ok_or_else(|| Error::invariant("reachable violator without a path"))?;
            if audit {
                let ok = path.agents.iter().enumerate().all(|(r, &i)| levels.level(i) == r);
                state
                    .auditor
                    .check(Check::PathLevels, step, ok, || format!("path {path:?} vs levels {:?}", levels.levels()))?;
            }
            let sizes = state.solution.allocation.bundles().iter().map(Vec::len).collect();
            let old_levels = levels.levels().to_vec();
            let StepOutcome::Transfer { a, b } = transfer(&mut state, &path)? else {
                unreachable!("transfer returns a transfer outcome")
            };
            stats.transfers += 1;
            let core_path = AlternatingPath { agents: path.agents.clone(), goods: state.core_goods(&path.goods) };
            pending = Some(Pending::Transfer {
                sizes,
                levels: old_levels,
                max_hat: max_hat.clone(),
                path,
                a,
                b,
                potential: potential.clone(),
            });
            TraceEvent {
                step,
                k,
                kind: EventKind::Transfer,
                beta: None,
                path: Some(core_path),
                a: Some(a),
                b: Some(b),
                potential: Some(potential.to_vec()),
                new_goods: None,
                min_spend: state.solution.min_spending(),
                max_hat: state.solution.max_hat(),
            }
        } else {
            let betas = compute_betas(&state, &graph, &reach);
            if audit {
                let ok = betas.is_ok();
                let msg = betas.as_ref().err().map(ToString::to_string).unwrap_or_default();
                state.auditor.check(Check::BetaRange, step, ok, || msg)?;
            }
            let betas = betas?;
            apply_price_rise(&mut state, &reach, &betas.chosen)?;
            stats.price_rises += 1;
            pending = Some(Pending::Rise {
                unreached_agents: (0..agents).filter(|&i| !reach.has_agent(i)).collect(),
                reached_goods: reach.goods(),
                max_hat: max_hat.clone(),
                potential: potential.clone(),
            });
            TraceEvent {
                step,
                k,
                kind: EventKind::PriceRise,
                beta: Some(betas),
                path: None,
                a: None,
                b: None,
                potential: Some(potential.to_vec()),
                new_goods: None,
                min_spend: state.solution.min_spending(),
                max_hat: state.solution.max_hat(),
            }
        };
        state.trace.record(event);
    }

    stats.bound_ratio = if bound.is_zero() { 0.0 } else { stats.iterations as f64 / bound.to_f64() };
    state.stats.push(stats);
    Ok(state)
}

/// Partition, MBB containment, pEF1-except-k and price monotonicity.
fn check_state(state: &mut EngineState, graph: &crate::market::MbbGraph, step: u64) -> Result<()> {
    let k = state.k();
    let m = state.instance.goods();
    let partition = Allocation::new(state.solution.allocation.bundles().to_vec(), m).is_ok()
        && state.solution.agents() == state.agents;
    state.auditor.check(Check::Partition, step, partition, || "allocation is not a partition".into())?;
    let mbb = graph.bundles_are_mbb();
    state.auditor.check(Check::MbbContainment, step, mbb, || {
        format!("bundles {:?} not inside MBB sets", state.solution.allocation.bundles())
    })?;
    let pef1k = is_pef1_except(&state.solution, k);
    state.auditor.check(Check::Pef1ExceptK, step, pef1k, || "an agent other than k is below max p̂".into())?;

    let mut positive = true;
    let mut monotone = true;
    for (g, &c) in state.goods_map.iter().enumerate() {
        let p = state.solution.prices.price(g);
        positive &= p.is_positive();
        if let Some(prev) = &state.last_prices[c] {
            monotone &= prev <= p;
        }
        state.last_prices[c] = Some(p.clone());
    }
    state.auditor.check(Check::PricesPositive, step, positive, || "non-positive price".into())?;
    state.auditor.check(Check::PricesNonDecreasing, step, monotone, || "a price decreased".into())?;
    Ok(())
}

/// Options for [`solve_with`].
#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub config: EngineConfig,
    /// Insertion order: position `r` brings in original agent `order[r]`.
    pub order: Option<Vec<usize>>,
}

/// Result of a full run.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    /// Solution in the original index space.
    pub solution: Solution,
    /// Instance the engine ran on (normalized, agents in insertion order).
    pub core_instance: Instance,
    /// Engine output on `core_instance`.
    pub core_solution: Solution,
    pub record: NormalizationRecord,
    pub trace: Trace,
    pub audit: AuditReport,
    pub stats: Vec<FindStats>,
}

impl SolveOutput {
    pub fn total_iterations(&self) -> u64 {
        self.stats.iter().map(|s| s.iterations).sum()
    }
}

/// Computes an EF1 and fPO allocation, inserting agents in index order.
pub fn solve(raw: &Instance) -> Result<SolveOutput> {
    solve_with(raw, &SolveOptions::default())
}

pub fn solve_with(raw: &Instance, opts: &SolveOptions) -> Result<SolveOutput> {
    let permuted;
    let input = match &opts.order {
        Some(order) => {
            check_permutation(order, raw.agents())?;
            permuted = raw.permute_agents(order)?;
            &permuted
        }
        None => raw,
    };
    if input.agents() == 0 && input.goods() > 0 {
        return Err(Error::invalid("an instance with goods needs at least one agent"));
    }
    let (core, record) = normalize_instance(input)?;
    if !check_hall(&core) {
        return Err(Error::HallViolation(format!(
            "no matching saturates all {} agents of the normalized instance",
            core.agents()
        )));
    }

    let mut state = EngineState::new(core.clone(), opts.config.clone());
    for _ in 0..core.agents() {
        add_next_agent(&mut state)?;
        state = find_solution(state)?;
    }

    let core_solution = if core.agents() == 0 {
        Solution::new(Allocation::new(Vec::new(), 0)?, crate::model::PriceVector::new(Vec::new()))?
    } else {
        state.core_solution()?
    };
    let in_order = denormalize(&core_solution, &record)?;
    let solution = match &opts.order {
        Some(order) => {
            let mut bundles = vec![Vec::new(); raw.agents()];
            for (r, &i) in order.iter().enumerate() {
                bundles[i] = in_order.allocation.bundle(r).to_vec();
            }
            Solution::new(Allocation::new(bundles, raw.goods())?, in_order.prices.clone())?
        }
        None => in_order,
    };
    Ok(SolveOutput {
        solution,
        core_instance: core,
        core_solution,
        record,
        trace: state.trace,
        audit: state.auditor.report,
        stats: state.stats,
    })
}
