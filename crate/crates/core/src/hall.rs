//! Hall's condition on the valuation graph (edges where `v_ig > 0`), decided
//! by maximum bipartite matching.

use crate::model::Instance;

/// Maximum matching of agents to positively valued goods.
/// Entry `i` is the good matched to agent `i`, if any.
pub fn max_matching(inst: &Instance) -> Vec<Option<usize>> {
    let adjacency: Vec<Vec<usize>> = (0..inst.agents()).map(|i| inst.positive_goods(i).collect()).collect();
    let mut good_owner: Vec<Option<usize>> = vec![None; inst.goods()];
    for agent in 0..inst.agents() {
        let mut visited = vec![false; inst.goods()];
        augment(agent, &adjacency, &mut good_owner, &mut visited);
    }
    let mut matched = vec![None; inst.agents()];
    for (g, owner) in good_owner.iter().enumerate() {
        if let Some(i) = owner {
            matched[*i] = Some(g);
        }
    }
    matched
}

fn augment(agent: usize, adjacency: &[Vec<usize>], good_owner: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &g in &adjacency[agent] {
        if visited[g] {
            continue;
        }
        visited[g] = true;
        let free = match good_owner[g] {
            None => true,
            Some(other) => augment(other, adjacency, good_owner, visited),
        };
        if free {
            good_owner[g] = Some(agent);
            return true;
        }
    }
    false
}

/// True iff every agent subset positively values at least as many goods as
/// its size, i.e. some matching saturates all agents.
pub fn check_hall(inst: &Instance) -> bool {
    max_matching(inst).iter().all(Option::is_some)
}
