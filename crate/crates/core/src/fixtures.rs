//! Small worked instances shared by tests and docs.

use crate::model::{Allocation, Instance, PriceVector, Solution};

/// Three agents, five goods.
///
/// ```text
///            g0  g1  g2  g3  g4
/// agent 0     6   5   0   0   0
/// agent 1     0   1   7   3   0
/// agent 2     2   3   6   3   4
/// ```
pub fn three_agent_instance() -> Instance {
    Instance::from_integers(&[[6, 5, 0, 0, 0], [0, 1, 7, 3, 0], [2, 3, 6, 3, 4]]).unwrap()
}

/// Bundles `{0,1}`, `{2,3}`, `{4}` at prices `(6,5,7,3,4)`.
///
/// Agent 2 is the unique minimum spender and agent 0 the unique maximum
/// violator; the state is pEF1 for everyone but agent 2.
pub fn unbalanced_solution() -> Solution {
    Solution::new(
        Allocation::new(vec![vec![0, 1], vec![2, 3], vec![4]], 5).unwrap(),
        PriceVector::from_integers(&[6, 5, 7, 3, 4]),
    )
    .unwrap()
}
