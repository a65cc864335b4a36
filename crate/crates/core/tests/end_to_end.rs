use fairdiv_core::engine::{EngineConfig, SolveOptions};
use fairdiv_core::gen::{generate, GenParams};
use fairdiv_core::oracles::{verify, BruteConfig, Gated};
use fairdiv_core::{io, solve, solve_with, Error, Exact, Instance};
use proptest::prelude::*;

fn all_true(inst: &Instance, opts: &SolveOptions) -> Result<(), TestCaseError> {
    let out = solve_with(inst, opts).unwrap();
    let report = verify(inst, &out.solution, &BruteConfig::with_cap(200_000)).unwrap();
    prop_assert!(report.all_passed(), "{report:?}");
    prop_assert!(out.audit.is_clean(), "{:?}", out.audit.violations);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_verify(n in 1usize..=4, extra in 0usize..=4, seed: u64) {
        let inst = generate(&GenParams { agents: n, goods: n + extra, max: 8, seed }).unwrap();
        all_true(&inst, &SolveOptions::default())?;
    }

    #[test]
    fn any_insertion_order_verifies(seed: u64, order in Just(vec![0usize, 1, 2]).prop_shuffle()) {
        let inst = generate(&GenParams { agents: 3, goods: 6, max: 6, seed }).unwrap();
        all_true(&inst, &SolveOptions { order: Some(order), ..SolveOptions::default() })?;
    }

    #[test]
    fn fractional_values_verify(
        rows in prop::collection::vec(prop::collection::vec((0i64..5, 1i64..4), 5), 1..=3),
    ) {
        let valuations: Vec<Vec<Exact>> =
            rows.iter().map(|r| r.iter().map(|&(p, q)| Exact::ratio(p, q)).collect()).collect();
        let inst = Instance::new(5, valuations).unwrap();
        match solve(&inst) {
            Ok(out) => {
                let report = verify(&inst, &out.solution, &BruteConfig::default()).unwrap();
                prop_assert!(report.all_passed(), "{report:?}");
            }
            Err(Error::HallViolation(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn solve_is_deterministic(seed: u64) {
        let inst = generate(&GenParams { agents: 3, goods: 5, max: 9, seed }).unwrap();
        let opts = SolveOptions { config: EngineConfig { trace_cap: usize::MAX, ..EngineConfig::default() }, order: None };
        let a = solve_with(&inst, &opts).unwrap();
        let b = solve_with(&inst, &opts).unwrap();
        prop_assert_eq!(io::solution_to_json(&a.solution), io::solution_to_json(&b.solution));
        prop_assert_eq!(a.trace.to_jsonl(), b.trace.to_jsonl());
    }
}

#[test]
fn single_agent_sweeps_need_no_iterations() {
    for seed in 0..20 {
        let inst = generate(&GenParams { agents: 1, goods: 1 + seed as usize % 6, max: 5, seed }).unwrap();
        let out = solve(&inst).unwrap();
        assert_eq!(out.total_iterations(), 0);
    }
}

#[test]
fn zero_goods_and_agents_are_stripped() {
    // agent 2 values nothing; good 3 is valued by no one
    let inst = Instance::from_integers(&[[4, 1, 0, 0], [0, 2, 3, 0], [0, 0, 0, 0]]).unwrap();
    let out = solve(&inst).unwrap();
    assert!(out.solution.allocation.bundle(2).len() <= 1);
    assert_eq!(out.solution.prices.price(3), &Exact::zero());
    let report = verify(&inst, &out.solution, &BruteConfig::default()).unwrap();
    assert!(report.all_passed(), "{report:?}");
    assert_eq!(report.brute_po, Gated::Done(true));
}

#[test]
fn empty_instance() {
    let inst = Instance::new(0, Vec::new()).unwrap();
    let out = solve(&inst).unwrap();
    assert_eq!(out.solution.agents(), 0);
}
