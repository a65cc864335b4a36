//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any FAIL.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fairdiv_core::engine::{find_solution, AuditReport, Check, EngineConfig, EngineState, EventKind, SolveOptions};
use fairdiv_core::fixtures::{three_agent_instance, unbalanced_solution};
use fairdiv_core::gen::{generate, GenParams};
use fairdiv_core::model::{is_pef1, max_violators, min_spenders, Allocation, PriceVector, Solution};
use fairdiv_core::oracles::{
    brute_force_mnw, brute_force_po, check_ef1, check_ef1_literal, check_mbb_consistency, nsw_product, nsw_ratio_holds,
    BruteConfig, Gated,
};
use fairdiv_core::{solve_with, Exact, Instance, SolveOutput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn q(n: i64, d: i64) -> Exact {
    Exact::ratio(n, d)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn audited() -> SolveOptions {
    SolveOptions { config: EngineConfig { strict: false, trace_cap: 0, audit: true }, order: None }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let sol = unbalanced_solution();
    ensure(min_spenders(&sol) == [2], || format!("min spenders {:?}", min_spenders(&sol)))?;
    ensure(max_violators(&sol) == [0], || format!("max violators {:?}", max_violators(&sol)))?;
    let spend = sol.spendings();
    let hat = sol.hat_spendings();
    ensure(spend == [q(11, 1), q(10, 1), q(4, 1)], || format!("spending {spend:?}"))?;
    ensure(hat == [q(5, 1), q(3, 1), q(0, 1)], || format!("p-hat {hat:?}"))?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!("min spender {{3}}, max violator {{1}}, spending 11/10/4, p-hat 5/3/0 in {took:.2?}"))
}

fn criterion_2() -> Outcome {
    let state = EngineState::from_solution(three_agent_instance(), unbalanced_solution(), 2, EngineConfig::default())
        .map_err(|e| e.to_string())?;
    let done = find_solution(state).map_err(|e| e.to_string())?;
    let events = &done.trace().events;
    let kinds: Vec<EventKind> = events.iter().map(|e| e.kind).collect();
    ensure(kinds == [EventKind::PriceRise, EventKind::Terminated], || format!("events {kinds:?}"))?;
    let beta = events[0].beta.as_ref().ok_or("price rise without rates")?;
    let got = (beta.b1.clone(), beta.b2.clone(), beta.b3.clone(), beta.chosen.clone());
    let want = (Some(q(5, 3)), Some(q(5, 3)), Some(q(5, 4)), q(5, 4));
    ensure(got == want, || format!("rates {got:?}"))?;
    let prices = done.solution().prices.as_slice().to_vec();
    ensure(prices == [q(6, 1), q(5, 1), q(35, 4), q(15, 4), q(5, 1)], || format!("prices {prices:?}"))?;
    ensure(is_pef1(done.solution()), || "final state not pEF1".into())?;
    Ok("one price rise, (5/3, 5/3, 5/4; 5/4), final prices (6, 5, 35/4, 15/4, 5), pEF1".into())
}

/// The 1,000 sweep instances: n cycles through 1..=4, m through n..=8.
fn sweep_params() -> Vec<GenParams> {
    (0..1000u64)
        .map(|seed| {
            let n = 1 + (seed % 4) as usize;
            let m = n + ((seed / 4) % (9 - n as u64)) as usize;
            GenParams { agents: n, goods: m, max: 10, seed }
        })
        .collect()
}

struct SweepRun {
    inst: Instance,
    out: SolveOutput,
}

fn run_sweep() -> Result<(Vec<SweepRun>, Duration), String> {
    let start = Instant::now();
    let mut runs = Vec::new();
    for p in sweep_params() {
        let inst = generate(&p).map_err(|e| e.to_string())?;
        let out = solve_with(&inst, &audited()).map_err(|e| format!("seed {}: {e}", p.seed))?;
        runs.push(SweepRun { inst, out });
    }
    Ok((runs, start.elapsed()))
}

fn criterion_3(runs: &[SweepRun], solve_time: Duration) -> Outcome {
    let start = Instant::now();
    let brute = BruteConfig::default();
    for (seed, r) in runs.iter().enumerate() {
        let alloc = &r.out.solution.allocation;
        ensure(check_ef1(&r.inst, alloc), || format!("seed {seed}: not EF1"))?;
        ensure(is_pef1(&r.out.core_solution), || format!("seed {seed}: not pEF1"))?;
        ensure(check_mbb_consistency(&r.out.core_instance, &r.out.core_solution), || {
            format!("seed {seed}: MBB witness fails")
        })?;
        let po = brute_force_po(&r.inst, alloc, &brute).map_err(|e| e.to_string())?;
        ensure(po == Gated::Done(true), || format!("seed {seed}: brute-force PO gave {po:?}"))?;
    }
    let total = solve_time + start.elapsed();
    ensure(total < Duration::from_secs(120), || format!("took {total:?}"))?;
    Ok(format!("{} instances EF1, pEF1, MBB-consistent and PO in {total:.2?}", runs.len()))
}

fn criterion_4(runs: &[SweepRun]) -> Outcome {
    let brute = BruteConfig::default();
    let mut checked = 0;
    let mut worst: Option<f64> = None;
    for (seed, r) in runs.iter().enumerate() {
        let (n, m) = (r.inst.agents(), r.inst.goods());
        if n > 3 || m > 7 {
            continue;
        }
        let (mnw, _) = brute_force_mnw(&r.inst, &brute).map_err(|e| e.to_string())?.done().ok_or("oracle skipped")?;
        let product = nsw_product(&r.inst, &r.out.solution.allocation);
        ensure(nsw_ratio_holds(&product, &mnw, n), || format!("seed {seed}: product {product} vs MNW {mnw}"))?;
        if mnw.is_positive() {
            let ratio = (product / mnw).to_f64().powf(1.0 / n as f64);
            worst = Some(worst.map_or(ratio, |w: f64| w.min(ratio)));
        }
        checked += 1;
    }
    Ok(format!("{checked} instances within (6922/10000)^n of MNW, worst NSW ratio {:.4}", worst.unwrap_or(1.0)))
}

const AUDITED: [Check; 8] = [
    Check::MbbContainment,
    Check::Pef1ExceptK,
    Check::MinSpenderIsK,
    Check::BetaRange,
    Check::PricesPositive,
    Check::PricesNonDecreasing,
    Check::PotentialIncrease,
    Check::IterationBound,
];

fn criterion_5(runs: &[SweepRun]) -> Outcome {
    let mut all = AuditReport::default();
    for r in runs {
        all.merge(&r.out.audit);
    }
    ensure(all.is_clean(), || {
        let v = &all.violations;
        format!("{} violations, first: {:?}", v.len(), v.first())
    })?;
    for c in AUDITED {
        ensure(all.count(c) > 0, || format!("check {c} never ran"))?;
    }
    let evaluated: u64 = AUDITED.iter().map(|&c| all.count(c)).sum();
    Ok(format!("{evaluated} audited check evaluations over {} traces, zero violations", runs.len()))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut premise = 0;
    for pair in 0..10_000 {
        let n = rng.random_range(1..=4usize);
        let m = rng.random_range(0..=6usize);
        let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..m).map(|_| rng.random_range(0..=5)).collect()).collect();
        let inst = Instance::new(m, rows.iter().map(|r| r.iter().map(|&v| Exact::from_integer(v)).collect()).collect())
            .map_err(|e| e.to_string())?;
        let owners: Vec<usize> = (0..m).map(|_| rng.random_range(0..n)).collect();
        let alloc = Allocation::from_owners(&owners, n).map_err(|e| e.to_string())?;
        // prices proportional to some agent's values make MBB bundles likely
        let basis = rng.random_range(0..n);
        let prices = (0..m)
            .map(|g| match rng.random_range(0..3) {
                0 => Exact::from_integer(rng.random_range(1..=4)),
                _ => Exact::from_integer(rows[basis][g].max(1)),
            })
            .collect();
        let sol = Solution::new(alloc, PriceVector::new(prices)).map_err(|e| e.to_string())?;
        let ef1 = check_ef1(&inst, &sol.allocation);
        ensure(ef1 == check_ef1_literal(&inst, &sol.allocation), || format!("pair {pair}: EF1 twins disagree"))?;
        if is_pef1(&sol) && check_mbb_consistency(&inst, &sol) {
            premise += 1;
            ensure(ef1, || format!("pair {pair}: pEF1 and MBB but not EF1"))?;
        }
    }
    ensure(premise > 0, || "no pair satisfied the premise".into())?;
    Ok(format!("10000 pairs, EF1 twins agree, {premise} pEF1+MBB pairs all EF1"))
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    for (m, seed) in [(25, 71), (50, 72), (100, 73)] {
        let inst = generate(&GenParams { agents: 3, goods: m, max: 1000, seed }).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let out = solve_with(&inst, &audited()).map_err(|e| e.to_string())?;
        let took = start.elapsed();
        ensure(took < Duration::from_secs(10), || format!("m={m} took {took:?}"))?;
        ensure(out.audit.is_clean(), || format!("m={m}: {:?}", out.audit.violations.first()))?;
        ensure(check_ef1(&inst, &out.solution.allocation), || format!("m={m}: not EF1"))?;
        ensure(check_mbb_consistency(&out.core_instance, &out.core_solution), || format!("m={m}: MBB fails"))?;
        let iters: Vec<u64> = out.stats.iter().map(|s| s.iterations).collect();
        parts.push(format!("m={m}: {took:.2?}, iterations {iters:?}"));
    }
    Ok(parts.join("; "))
}

fn report(id: u32, name: &str, outcome: Outcome) -> bool {
    match outcome {
        Ok(detail) => {
            println!("PASS criterion {id} ({name}): {detail}");
            true
        }
        Err(why) => {
            println!("FAIL criterion {id} ({name}): {why}");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= report(1, "example fixture", criterion_1());
    ok &= report(2, "hand trace", criterion_2());
    match run_sweep() {
        Ok((runs, solve_time)) => {
            ok &= report(3, "guarantee sweep", criterion_3(&runs, solve_time));
            ok &= report(4, "NSW approximation", criterion_4(&runs));
            ok &= report(5, "invariant audit", criterion_5(&runs));
        }
        Err(why) => {
            for (id, name) in [(3, "guarantee sweep"), (4, "NSW approximation"), (5, "invariant audit")] {
                ok &= report(id, name, Err(why.clone()));
            }
        }
    }
    ok &= report(6, "oracle self-consistency", criterion_6());
    ok &= report(7, "fixed-n scaling", criterion_7());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
