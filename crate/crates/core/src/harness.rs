//! Sweeps over generated instances: iteration counts, bound ratios, wall
//! time and NSW ratios per run.
//!
//! Runs are independent, so a sweep fans out one engine per worker when
//! [`Parallelism::Parallel`] is available.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{solve_with, EngineConfig, SolveOptions};
use crate::error::Result;
use crate::gen::{generate, GenParams};
use crate::oracles::{brute_force_mnw, nsw_product, verify_fast, BruteConfig, DEFAULT_BRUTE_CAP};
use crate::par::{self, Parallelism};

/// One family of runs: every `goods` value crossed with every seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGroup {
    pub agents: usize,
    pub goods: Vec<usize>,
    pub max: i64,
    pub seeds: Vec<u64>,
}

/// Contents of a `bench --spec` file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub groups: Vec<SweepGroup>,
    #[serde(default = "default_cap")]
    pub brute_cap: u64,
    #[serde(default)]
    pub parallelism: Parallelism,
}

fn default_cap() -> u64 {
    DEFAULT_BRUTE_CAP
}

impl BenchSpec {
    pub fn cases(&self) -> Vec<GenParams> {
        let mut out = Vec::new();
        for g in &self.groups {
            for &m in &g.goods {
                for &seed in &g.seeds {
                    out.push(GenParams { agents: g.agents, goods: m, max: g.max, seed });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub max: i64,
    pub seed: u64,
    /// FindSolution iterations for each inserted agent.
    pub iterations: Vec<u64>,
    /// Iterations over the per-agent bound, for each inserted agent.
    pub bound_ratios: Vec<f64>,
    pub wall_ms: f64,
    /// `(∏ v_i(x_i) / MNW)^(1/n)`, when the brute-force oracle ran and MNW > 0.
    pub nsw_ratio: Option<f64>,
    /// EF1, pEF1 and the MBB witness all hold.
    pub verified: bool,
    pub audit_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub parallelism: Parallelism,
    pub rows: Vec<BenchRow>,
    pub total_wall_ms: f64,
}

/// Generates, solves and measures one instance. The engine audits without
/// aborting so violations show up in the row.
pub fn run_case(p: &GenParams, brute: &BruteConfig) -> Result<BenchRow> {
    let inst = generate(p)?;
    let opts =
        SolveOptions { config: EngineConfig { strict: false, trace_cap: 0, ..EngineConfig::default() }, order: None };
    let start = Instant::now();
    let out = solve_with(&inst, &opts)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let (ef1, pef1, mbb) = verify_fast(&inst, &out.solution)?;
    let nsw_ratio = brute_force_mnw(&inst, brute)?.done().and_then(|(mnw, _)| {
        mnw.is_positive().then(|| {
            let r = (nsw_product(&inst, &out.solution.allocation) / mnw).to_f64();
            r.powf(1.0 / p.agents as f64)
        })
    });
    Ok(BenchRow {
        n: p.agents,
        m: p.goods,
        max: p.max,
        seed: p.seed,
        iterations: out.stats.iter().map(|s| s.iterations).collect(),
        bound_ratios: out.stats.iter().map(|s| s.bound_ratio).collect(),
        wall_ms,
        nsw_ratio,
        verified: ef1 && pef1 && mbb,
        audit_violations: out.audit.violations.len(),
    })
}

/// Runs every case, in input order. Under [`Parallelism::Parallel`] cases run
/// concurrently and each brute-force oracle stays sequential.
pub fn run_sweep(cases: &[GenParams], par: Parallelism, brute_cap: u64) -> Result<Vec<BenchRow>> {
    let brute = BruteConfig { cap: brute_cap, parallelism: Parallelism::Sequential };
    par::map(cases.to_vec(), par, |p| run_case(&p, &brute)).into_iter().collect()
}

pub fn run_spec(spec: &BenchSpec) -> Result<BenchReport> {
    let start = Instant::now();
    let rows = run_sweep(&spec.cases(), spec.parallelism, spec.brute_cap)?;
    Ok(BenchReport { parallelism: spec.parallelism, rows, total_wall_ms: start.elapsed().as_secs_f64() * 1e3 })
}

impl BenchReport {
    /// One line per row; list columns are `;`-separated.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("n,m,max,seed,iterations,bound_ratios,wall_ms,nsw_ratio,verified,audit_violations\n");
        let join = |xs: Vec<String>| xs.join(";");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.3},{},{},{}",
                r.n,
                r.m,
                r.max,
                r.seed,
                join(r.iterations.iter().map(u64::to_string).collect()),
                join(r.bound_ratios.iter().map(|b| format!("{b:.3e}")).collect()),
                r.wall_ms,
                r.nsw_ratio.map(|x| format!("{x:.6}")).unwrap_or_default(),
                r.verified,
                r.audit_violations,
            );
        }
        out
    }
}
