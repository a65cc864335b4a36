//! Maximum bang-per-buck (MBB) ratios, the augmented MBB graph and
//! breadth-first reachability over it.
//!
//! The augmented graph is bipartite and directed: agent `i -> g` when `g` is
//! in agent `i`'s MBB set, and good `g -> i` when `i` owns `g`. Every search
//! scans adjacency in ascending index order, so reachability sets, levels and
//! returned paths are deterministic.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::model::{Instance, PriceVector, Solution};

/// `v / p`, with `0 / 0 = 0`. A positive value over a zero price has no
/// finite ratio and is reported as an invariant error.
pub fn bang_per_buck(value: &Exact, price: &Exact) -> Result<Exact> {
    if price.is_positive() {
        Ok(value / price)
    } else if value.is_zero() && price.is_zero() {
        Ok(Exact::zero())
    } else {
        Err(Error::invariant(format!("bang-per-buck undefined for value {value:?} at price {price:?}")))
    }
}

/// MBB ratio `α_i = max_g v_ig / p_g` of every agent.
pub fn compute_alphas(inst: &Instance, prices: &PriceVector) -> Result<Vec<Exact>> {
    if prices.len() != inst.goods() {
        return Err(Error::invalid(format!("{} prices for an instance with {} goods", prices.len(), inst.goods())));
    }
    (0..inst.agents())
        .map(|i| {
            let mut best = Exact::zero();
            for g in 0..inst.goods() {
                let r = bang_per_buck(inst.value(i, g), prices.price(g))?;
                if r > best {
                    best = r;
                }
            }
            Ok(best)
        })
        .collect()
}

/// The augmented MBB graph of a solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MbbGraph {
    /// `mbb[i]`: goods in agent `i`'s MBB set, ascending.
    mbb: Vec<Vec<usize>>,
    /// `owner[g]`: the agent holding good `g`.
    owner: Vec<usize>,
    alphas: Vec<Exact>,
}

pub fn build_graph(inst: &Instance, sol: &Solution) -> Result<MbbGraph> {
    if inst.agents() != sol.agents() || inst.goods() != sol.goods() {
        return Err(Error::invalid(format!(
            "solution is {}x{} but instance is {}x{}",
            sol.agents(),
            sol.goods(),
            inst.agents(),
            inst.goods()
        )));
    }
    let alphas = compute_alphas(inst, &sol.prices)?;
    let mut mbb = Vec::with_capacity(inst.agents());
    for (i, alpha) in alphas.iter().enumerate() {
        let mut set = Vec::new();
        for g in 0..inst.goods() {
            if &bang_per_buck(inst.value(i, g), sol.prices.price(g))? == alpha {
                set.push(g);
            }
        }
        mbb.push(set);
    }
    Ok(MbbGraph { mbb, owner: sol.allocation.owners(), alphas })
}

impl MbbGraph {
    pub fn agents(&self) -> usize {
        self.mbb.len()
    }

    pub fn goods(&self) -> usize {
        self.owner.len()
    }

    pub fn mbb_set(&self, agent: usize) -> &[usize] {
        &self.mbb[agent]
    }

    pub fn is_mbb(&self, agent: usize, good: usize) -> bool {
        self.mbb[agent].binary_search(&good).is_ok()
    }

    pub fn owner(&self, good: usize) -> usize {
        self.owner[good]
    }

    pub fn alphas(&self) -> &[Exact] {
        &self.alphas
    }

    pub fn alpha(&self, agent: usize) -> &Exact {
        &self.alphas[agent]
    }

    /// Every good is in its owner's MBB set.
    pub fn bundles_are_mbb(&self) -> bool {
        self.owner.iter().enumerate().all(|(g, &i)| self.is_mbb(i, g))
    }

    pub fn dump(&self, reach: Option<&Reachability>) -> GraphDump {
        GraphDump {
            agents: self.agents(),
            goods: self.goods(),
            alphas: self.alphas.clone(),
            mbb_edges: self.mbb.iter().enumerate().flat_map(|(i, set)| set.iter().map(move |&g| [i, g])).collect(),
            allocation_edges: self.owner.iter().enumerate().map(|(g, &i)| [g, i]).collect(),
            levels: reach.map(|r| r.levels.clone()),
        }
    }
}

/// JSON shape of `--graph-dump`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDump {
    pub agents: usize,
    pub goods: usize,
    pub alphas: Vec<Exact>,
    /// `[agent, good]` pairs.
    pub mbb_edges: Vec<[usize; 2]>,
    /// `[good, agent]` pairs.
    pub allocation_edges: Vec<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub levels: Option<Vec<usize>>,
}

/// Nodes reachable from a source agent set, with BFS parents and levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reachability {
    agent_reached: Vec<bool>,
    good_reached: Vec<bool>,
    /// Good through which each non-source agent was first reached.
    agent_parent: Vec<Option<usize>>,
    /// Agent from which each good was first reached.
    good_parent: Vec<Option<usize>>,
    /// Reachable agents in discovery order.
    order: Vec<usize>,
    levels: Vec<usize>,
}

impl Reachability {
    /// `R_N`, ascending.
    pub fn agents(&self) -> Vec<usize> {
        (0..self.agent_reached.len()).filter(|&i| self.agent_reached[i]).collect()
    }

    /// `R_M`, ascending.
    pub fn goods(&self) -> Vec<usize> {
        (0..self.good_reached.len()).filter(|&g| self.good_reached[g]).collect()
    }

    pub fn has_agent(&self, agent: usize) -> bool {
        self.agent_reached[agent]
    }

    pub fn has_good(&self, good: usize) -> bool {
        self.good_reached[good]
    }

    /// Half the hop length of the shortest path from the sources; the
    /// unreachable level for agents not reached.
    pub fn level(&self, agent: usize) -> usize {
        self.levels[agent]
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn discovery_order(&self) -> &[usize] {
        &self.order
    }

    /// BFS-tree path from a source to a reached agent.
    pub fn path_to(&self, target: usize) -> Option<AlternatingPath> {
        if !self.agent_reached[target] {
            return None;
        }
        let mut agents = vec![target];
        let mut goods = Vec::new();
        let mut cur = target;
        while let Some(g) = self.agent_parent[cur] {
            let prev = self.good_parent[g].expect("reached good has a parent");
            goods.push(g);
            agents.push(prev);
            cur = prev;
        }
        agents.reverse();
        goods.reverse();
        Some(AlternatingPath { agents, goods })
    }

    /// No MBB edge leaves `R_N` towards a good outside `R_M`.
    pub fn is_closed(&self, graph: &MbbGraph) -> bool {
        self.agents().into_iter().all(|i| graph.mbb_set(i).iter().all(|&g| self.good_reached[g]))
    }
}

/// Breadth-first search from `sources` in the augmented MBB graph.
///
/// `unreachable_level` is assigned to agents that cannot be reached.
pub fn reach_from(graph: &MbbGraph, sources: &[usize], unreachable_level: usize) -> Reachability {
    let (n, m) = (graph.agents(), graph.goods());
    let mut reach = Reachability {
        agent_reached: vec![false; n],
        good_reached: vec![false; m],
        agent_parent: vec![None; n],
        good_parent: vec![None; m],
        order: Vec::new(),
        levels: vec![unreachable_level; n],
    };
    let mut sorted: Vec<usize> = sources.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut queue = VecDeque::new();
    for s in sorted {
        reach.agent_reached[s] = true;
        reach.levels[s] = 0;
        reach.order.push(s);
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for &g in graph.mbb_set(u) {
            if reach.good_reached[g] {
                continue;
            }
            reach.good_reached[g] = true;
            reach.good_parent[g] = Some(u);
            let w = graph.owner(g);
            if !reach.agent_reached[w] {
                reach.agent_reached[w] = true;
                reach.agent_parent[w] = Some(g);
                reach.levels[w] = reach.levels[u] + 1;
                reach.order.push(w);
                queue.push_back(w);
            }
        }
    }
    reach
}

/// `(i_0, g_1, i_1, ..., g_l, i_l)` stored as `agents = [i_0..=i_l]` and
/// `goods = [g_1..=g_l]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternatingPath {
    pub agents: Vec<usize>,
    pub goods: Vec<usize>,
}

impl AlternatingPath {
    /// Number of agent-to-agent hops (`l`); the hop length is `2l`.
    pub fn len(&self) -> usize {
        self.goods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goods.is_empty()
    }

    /// Alternates MBB and allocation edges of `graph`.
    pub fn is_valid_in(&self, graph: &MbbGraph) -> bool {
        self.agents.len() == self.goods.len() + 1
            && self
                .goods
                .iter()
                .enumerate()
                .all(|(r, &g)| graph.is_mbb(self.agents[r], g) && graph.owner(g) == self.agents[r + 1])
    }
}

/// Shortest alternating path from `source` to any member of `targets`.
///
/// Among shortest paths, the one whose endpoint the BFS discovers first,
/// which is the lexicographically smallest node sequence.
pub fn shortest_violator_path(graph: &MbbGraph, source: usize, targets: &[usize]) -> Option<AlternatingPath> {
    let reach = reach_from(graph, &[source], graph.agents());
    shortest_path_in(&reach, targets)
}

pub(crate) fn shortest_path_in(reach: &Reachability, targets: &[usize]) -> Option<AlternatingPath> {
    reach.discovery_order().iter().find(|a| targets.contains(a)).and_then(|&t| reach.path_to(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::Allocation;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Exact {
        Exact::ratio(n, d)
    }

    #[test]
    fn alphas_on_unbalanced() {
        let inst = fixtures::three_agent_instance();
        let sol = fixtures::unbalanced_solution();
        assert_eq!(compute_alphas(&inst, &sol.prices).unwrap(), vec![Exact::one(); 3]);

        let single = Instance::from_integers(&[[2]]).unwrap();
        assert_eq!(compute_alphas(&single, &PriceVector::from_integers(&[1])).unwrap(), vec![Exact::from(2)]);

        let doubled = PriceVector::from_integers(&[12, 10, 14, 6, 8]);
        assert_eq!(compute_alphas(&inst, &doubled).unwrap(), vec![q(1, 2); 3]);
    }

    #[test]
    fn zero_price_with_positive_value_is_an_invariant_error() {
        let inst = Instance::from_integers(&[[1, 0]]).unwrap();
        let res = compute_alphas(&inst, &PriceVector::from_integers(&[0, 0]));
        assert!(matches!(res, Err(Error::Invariant(_))));
        // 0/0 is fine
        let inst = Instance::from_integers(&[[0, 1]]).unwrap();
        assert_eq!(compute_alphas(&inst, &PriceVector::from_integers(&[0, 2])).unwrap(), vec![q(1, 2)]);
    }

    #[test]
    fn unbalanced_graph() {
        let inst = fixtures::three_agent_instance();
        let sol = fixtures::unbalanced_solution();
        let g = build_graph(&inst, &sol).unwrap();
        assert_eq!(g.mbb_set(0), &[0, 1]);
        assert_eq!(g.mbb_set(1), &[2, 3]);
        assert_eq!(g.mbb_set(2), &[3, 4]);
        assert!(g.bundles_are_mbb());
        assert_eq!((0..5).map(|x| g.owner(x)).collect::<Vec<_>>(), vec![0, 0, 1, 1, 2]);
    }

    #[test]
    fn uniform_single_owner_is_complete() {
        let inst = Instance::from_integers(&[[3, 3, 3], [3, 3, 3]]).unwrap();
        let sol = Solution::new(
            Allocation::new(vec![vec![0, 1, 2], vec![]], 3).unwrap(),
            PriceVector::from_integers(&[2, 2, 2]),
        )
        .unwrap();
        let g = build_graph(&inst, &sol).unwrap();
        assert_eq!(g.mbb_set(0), &[0, 1, 2]);
        assert_eq!(g.mbb_set(1), &[0, 1, 2]);

        // raising one price pushes that good out of every MBB set
        let mut raised = sol.clone();
        raised.prices.set(1, Exact::from(3));
        let g = build_graph(&inst, &raised).unwrap();
        assert_eq!(g.mbb_set(0), &[0, 2]);
    }

    #[test]
    fn reach_from_minimum_spender() {
        let inst = fixtures::three_agent_instance();
        let sol = fixtures::unbalanced_solution();
        let g = build_graph(&inst, &sol).unwrap();
        let r = reach_from(&g, &[2], 3);
        assert_eq!(r.agents(), vec![1, 2]);
        assert_eq!(r.goods(), vec![2, 3, 4]);
        assert_eq!(r.levels(), &[3, 1, 0]);
        assert!(r.is_closed(&g));

        let all = reach_from(&g, &[0, 1, 2], 3);
        assert_eq!(all.agents(), vec![0, 1, 2]);
    }

    #[test]
    fn vacuous_search() {
        let inst = Instance::from_integers(&[[1, 0], [0, 1]]).unwrap();
        // agent 0 owns nothing and prices make no good MBB edge towards agent 1's good
        let sol =
            Solution::new(Allocation::new(vec![vec![], vec![0, 1]], 2).unwrap(), PriceVector::from_integers(&[1, 1]))
                .unwrap();
        let g = build_graph(&inst, &sol).unwrap();
        let r = reach_from(&g, &[1], 2);
        assert_eq!(r.agents(), vec![1]);
        assert_eq!(r.goods(), vec![1]);
        assert_eq!(r.level(0), 2);
    }

    #[test]
    fn two_agent_violator_path() {
        let inst = Instance::from_integers(&[[1, 1, 1], [1, 1, 1]]).unwrap();
        let sol = Solution::new(
            Allocation::new(vec![vec![0, 1, 2], vec![]], 3).unwrap(),
            PriceVector::from_integers(&[1, 1, 1]),
        )
        .unwrap();
        let g = build_graph(&inst, &sol).unwrap();
        let path = shortest_violator_path(&g, 1, &[0]).unwrap();
        assert_eq!(path, AlternatingPath { agents: vec![1, 0], goods: vec![0] });
        assert!(path.is_valid_in(&g));
    }

    #[test]
    fn unreachable_violator() {
        let inst = fixtures::three_agent_instance();
        let sol = fixtures::unbalanced_solution();
        let g = build_graph(&inst, &sol).unwrap();
        assert_eq!(shortest_violator_path(&g, 2, &[0]), None);
        let p = shortest_violator_path(&g, 2, &[1]).unwrap();
        assert_eq!(p, AlternatingPath { agents: vec![2, 1], goods: vec![3] });
    }

    #[test]
    fn dump_lists_edges() {
        let inst = fixtures::three_agent_instance();
        let sol = fixtures::unbalanced_solution();
        let g = build_graph(&inst, &sol).unwrap();
        let r = reach_from(&g, &[2], 3);
        let d = g.dump(Some(&r));
        assert_eq!(d.mbb_edges, vec![[0, 0], [0, 1], [1, 2], [1, 3], [2, 3], [2, 4]]);
        assert_eq!(d.allocation_edges.len(), 5);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<GraphDump>(&json).unwrap(), d);
    }

    /// Random solutions on random positive instances.
    fn graph_case() -> impl Strategy<Value = (Instance, Solution)> {
        (1usize..5, 1usize..7).prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(0i64..4, n * m),
                proptest::collection::vec(0..n, m),
                proptest::collection::vec(1i64..4, m),
            )
                .prop_map(move |(cells, owners, prices)| {
                    let rows: Vec<Vec<i64>> = (0..n).map(|i| cells[i * m..(i + 1) * m].to_vec()).collect();
                    let inst = Instance::from_integers(&rows).unwrap();
                    let sol = Solution::new(
                        Allocation::from_owners(&owners, n).unwrap(),
                        PriceVector::from_integers(&prices),
                    )
                    .unwrap();
                    (inst, sol)
                })
        })
    }

    proptest! {
        #[test]
        fn paths_alternate_and_match_levels((inst, sol) in graph_case(), source_seed in 0usize..8) {
            let g = build_graph(&inst, &sol).unwrap();
            let n = inst.agents();
            let source = source_seed % n;
            let reach = reach_from(&g, &[source], n);
            prop_assert!(reach.is_closed(&g));
            for target in 0..n {
                if let Some(p) = shortest_violator_path(&g, source, &[target]) {
                    prop_assert!(p.is_valid_in(&g));
                    prop_assert_eq!(p.agents[0], source);
                    prop_assert_eq!(*p.agents.last().unwrap(), target);
                    for (r, &a) in p.agents.iter().enumerate() {
                        prop_assert_eq!(reach.level(a), r);
                    }
                } else {
                    prop_assert!(!reach.has_agent(target));
                }
            }
        }

        #[test]
        fn reach_is_monotone_and_idempotent((inst, sol) in graph_case(), a in 0usize..8, b in 0usize..8) {
            let g = build_graph(&inst, &sol).unwrap();
            let n = inst.agents();
            let small = vec![a % n];
            let big = vec![a % n, b % n];
            let r1 = reach_from(&g, &small, n);
            let r2 = reach_from(&g, &big, n);
            prop_assert!(r1.agents().iter().all(|&i| r2.has_agent(i)));
            let again = reach_from(&g, &r1.agents(), n);
            prop_assert_eq!(again.agents(), r1.agents());
            prop_assert_eq!(again.goods(), r1.goods());
        }
    }
}
