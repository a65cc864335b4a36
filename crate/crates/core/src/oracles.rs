//! Independent checkers for the guarantees of a solution.
//!
//! Nothing here shares code with the engine beyond the data model and the
//! MBB graph builder. The brute-force oracles enumerate all `n^m` integral
//! allocations and are gated by a state cap.

use std::ops::{AddAssign, MulAssign, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::market::build_graph;
use crate::model::{is_pef1, Allocation, Instance, Solution};
use crate::normalize::{normalize_instance, project};
use crate::par::{self, Parallelism};

/// Default limit on enumerated allocations.
pub const DEFAULT_BRUTE_CAP: u64 = 10_000_000;

/// `6922/10000`, a rational just below `e^{-1/e}`.
pub fn nsw_rho() -> Exact {
    Exact::ratio(6922, 10_000)
}

/// A size-gated result: either the value or an explicit skip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gated<T> {
    Done(T),
    Skipped(SkipTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SkipTag {
    #[serde(rename = "skipped")]
    Skipped,
}

impl<T> Gated<T> {
    pub fn skipped() -> Self {
        Gated::Skipped(SkipTag::Skipped)
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self, Gated::Skipped(_))
    }

    pub fn done(self) -> Option<T> {
        match self {
            Gated::Done(v) => Some(v),
            Gated::Skipped(_) => None,
        }
    }

    pub fn as_ref(&self) -> Gated<&T> {
        match self {
            Gated::Done(v) => Gated::Done(v),
            Gated::Skipped(t) => Gated::Skipped(*t),
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Gated<U> {
        match self {
            Gated::Done(v) => Gated::Done(f(v)),
            Gated::Skipped(t) => Gated::Skipped(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteConfig {
    /// Enumerate only when `n^m` is at most this many states.
    pub cap: u64,
    pub parallelism: Parallelism,
}

impl Default for BruteConfig {
    fn default() -> Self {
        BruteConfig { cap: DEFAULT_BRUTE_CAP, parallelism: Parallelism::default() }
    }
}

impl BruteConfig {
    pub fn with_cap(cap: u64) -> Self {
        BruteConfig { cap, ..Default::default() }
    }

    /// Number of states for `inst`, or `None` when it exceeds the cap.
    pub fn states(&self, inst: &Instance) -> Option<u64> {
        let n = inst.agents() as u64;
        let m = u32::try_from(inst.goods()).ok()?;
        n.checked_pow(m).filter(|&s| s <= self.cap)
    }
}

fn dims_match(inst: &Instance, alloc: &Allocation) -> bool {
    alloc.agents() == inst.agents() && alloc.goods() == inst.goods()
}

/// EF1 via `v_i(x_i) >= v_i(x_j) - max_{g in x_j} v_ig`. False when the
/// allocation does not fit the instance.
pub fn check_ef1(inst: &Instance, alloc: &Allocation) -> bool {
    if !dims_match(inst, alloc) {
        return false;
    }
    let n = inst.agents();
    (0..n).all(|i| {
        let own = inst.bundle_value(i, alloc.bundle(i));
        (0..n).filter(|&j| j != i).all(|j| {
            let other = alloc.bundle(j);
            let Some(top) = other.iter().map(|&g| inst.value(i, g)).max() else {
                return true;
            };
            inst.bundle_value(i, other) - top <= own
        })
    })
}

/// EF1 straight from the definition: every envied bundle has a good whose
/// removal ends the envy.
pub fn check_ef1_literal(inst: &Instance, alloc: &Allocation) -> bool {
    if !dims_match(inst, alloc) {
        return false;
    }
    let n = inst.agents();
    for i in 0..n {
        let own = inst.bundle_value(i, alloc.bundle(i));
        for j in 0..n {
            let other = alloc.bundle(j);
            if i == j || inst.bundle_value(i, other) <= own {
                continue;
            }
            let cured = other.iter().any(|&g| {
                let rest: Vec<usize> = other.iter().copied().filter(|&h| h != g).collect();
                inst.bundle_value(i, &rest) <= own
            });
            if !cured {
                return false;
            }
        }
    }
    true
}

/// True iff every price is positive and every owned good is MBB for its
/// owner, which makes `sol` a Fisher equilibrium and hence fPO.
pub fn check_mbb_consistency(inst: &Instance, sol: &Solution) -> bool {
    if !dims_match(inst, &sol.allocation) || !sol.prices.as_slice().iter().all(Exact::is_positive) {
        return false;
    }
    build_graph(inst, sol).is_ok_and(|g| g.bundles_are_mbb())
}

/// `∏_i v_i(x_i)`.
pub fn nsw_product(inst: &Instance, alloc: &Allocation) -> Exact {
    let mut acc = Exact::one();
    for i in 0..alloc.agents() {
        acc *= &inst.bundle_value(i, alloc.bundle(i));
    }
    acc
}

/// `product >= rho^n * mnw`, compared exactly.
pub fn nsw_ratio_holds(product: &Exact, mnw: &Exact, agents: usize) -> bool {
    product >= &(nsw_rho().pow(agents as u32) * mnw)
}

trait Scalar:
    Clone
    + Ord
    + Send
    + Sync
    + Zero
    + One
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
}

impl Scalar for i128 {}
impl Scalar for BigInt {}

/// Each row multiplied by the lcm of its denominators.
struct Scaled {
    rows: Vec<Vec<BigInt>>,
    /// `∏_i lcm_i`, the factor between scaled and true products.
    product_scale: BigInt,
}

fn scale_rows(inst: &Instance) -> Scaled {
    let mut product_scale = BigInt::one();
    let rows = inst
        .rows()
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            product_scale *= &l;
            row.iter().map(|v| v.numer() * (&l / v.denom())).collect()
        })
        .collect();
    Scaled { rows, product_scale }
}

/// The scaled rows as `i128` when every product of bundle values fits.
fn narrow(scaled: &Scaled) -> Option<Vec<Vec<i128>>> {
    let limit = BigInt::one() << 126;
    let mut bound = BigInt::one();
    for row in &scaled.rows {
        let total: BigInt = row.iter().sum();
        total.to_i64()?;
        bound *= total.max(BigInt::one());
        if bound >= limit {
            return None;
        }
    }
    scaled.rows.iter().map(|row| row.iter().map(ToPrimitive::to_i128).collect()).collect()
}

/// Splits the `n^m` states into chunks that fix the owners of the top goods.
struct Layout {
    n: usize,
    m: usize,
    /// Goods `0..split` vary inside a chunk.
    split: usize,
    chunks: u64,
}

impl Layout {
    fn new(n: usize, m: usize) -> Self {
        let mut fixed = 0;
        let mut chunks = 1u64;
        if n > 1 {
            while fixed < m && chunks < 256 {
                fixed += 1;
                chunks *= n as u64;
            }
        }
        Layout { n, m, split: m - fixed, chunks }
    }

    fn owners_of(&self, index: u64) -> Vec<usize> {
        let mut rest = index;
        (0..self.m)
            .map(|_| {
                let d = (rest % self.n as u64) as usize;
                rest /= self.n as u64;
                d
            })
            .collect()
    }

    /// Visits every state of `chunk` in ascending index order until `visit`
    /// returns false. The index of a state is `Σ owner[g] * n^g`.
    fn scan<T: Scalar>(&self, rows: &[Vec<T>], chunk: u64, mut visit: impl FnMut(u64, &[T]) -> bool) {
        let n = self.n;
        let mut owner = vec![0usize; self.m];
        let mut rest = chunk;
        for o in owner.iter_mut().skip(self.split) {
            *o = (rest % n as u64) as usize;
            rest /= n as u64;
        }
        let mut totals = vec![T::zero(); n];
        for (g, &o) in owner.iter().enumerate() {
            totals[o] += &rows[o][g];
        }
        let mut index = chunk * (n as u64).pow(self.split as u32);
        loop {
            if !visit(index, &totals) {
                return;
            }
            let mut g = 0;
            loop {
                if g == self.split {
                    return;
                }
                let o = owner[g];
                totals[o] -= &rows[o][g];
                if o + 1 < n {
                    owner[g] = o + 1;
                    totals[o + 1] += &rows[o + 1][g];
                    break;
                }
                owner[g] = 0;
                totals[0] += &rows[0][g];
                g += 1;
            }
            index += 1;
        }
    }
}

fn dominated<T: Scalar>(rows: &[Vec<T>], candidate: &Allocation, par: Parallelism) -> bool {
    let n = rows.len();
    let layout = Layout::new(n, candidate.goods());
    let base: Vec<T> = (0..n)
        .map(|i| {
            let mut t = T::zero();
            for &g in candidate.bundle(i) {
                t += &rows[i][g];
            }
            t
        })
        .collect();
    par::any((0..layout.chunks).collect(), par, |chunk| {
        let mut found = false;
        layout.scan(rows, chunk, |_, totals| {
            found = totals.iter().zip(&base).all(|(t, b)| t >= b) && totals != base.as_slice();
            !found
        });
        found
    })
}

fn best_product<T: Scalar>(rows: &[Vec<T>], m: usize, par: Parallelism) -> (T, u64) {
    let layout = Layout::new(rows.len(), m);
    let per_chunk = par::map((0..layout.chunks).collect(), par, |chunk| {
        let mut best: Option<(T, u64)> = None;
        layout.scan(rows, chunk, |index, totals| {
            let mut p = T::one();
            for t in totals {
                p *= t;
            }
            if best.as_ref().is_none_or(|(b, _)| &p > b) {
                best = Some((p, index));
            }
            true
        });
        best.expect("every chunk has a state")
    });
    // chunks come back in index order, so the first maximum wins ties
    per_chunk.into_iter().reduce(|acc, next| if next.0 > acc.0 { next } else { acc }).expect("at least one chunk")
}

/// Exhaustive integral PO check: true iff no allocation gives every agent at
/// least as much value and someone strictly more.
pub fn brute_force_po(inst: &Instance, alloc: &Allocation, cfg: &BruteConfig) -> Result<Gated<bool>> {
    if !dims_match(inst, alloc) {
        return Err(Error::invalid("allocation does not match instance dimensions"));
    }
    if inst.agents() == 0 {
        return Ok(Gated::Done(true));
    }
    if cfg.states(inst).is_none() {
        return Ok(Gated::skipped());
    }
    let scaled = scale_rows(inst);
    let dom = match narrow(&scaled) {
        Some(rows) => dominated(&rows, alloc, cfg.parallelism),
        None => dominated(&scaled.rows, alloc, cfg.parallelism),
    };
    Ok(Gated::Done(!dom))
}

/// Maximum of `∏_i v_i(x_i)` over integral allocations and the first
/// maximizer in enumeration order.
pub fn brute_force_mnw(inst: &Instance, cfg: &BruteConfig) -> Result<Gated<(Exact, Allocation)>> {
    let (n, m) = (inst.agents(), inst.goods());
    if n == 0 {
        if m > 0 {
            return Err(Error::invalid("goods without agents have no allocation"));
        }
        return Ok(Gated::Done((Exact::one(), Allocation::new(Vec::new(), 0)?)));
    }
    if cfg.states(inst).is_none() {
        return Ok(Gated::skipped());
    }
    let scaled = scale_rows(inst);
    let (product, index) = match narrow(&scaled) {
        Some(rows) => {
            let (p, i) = best_product(&rows, m, cfg.parallelism);
            (BigInt::from(p), i)
        }
        None => best_product(&scaled.rows, m, cfg.parallelism),
    };
    let owners = Layout::new(n, m).owners_of(index);
    let alloc = Allocation::from_owners(&owners, n)?;
    Ok(Gated::Done((Exact::from_bigints(product, scaled.product_scale), alloc)))
}

/// `∏ v_i(x_i) >= rho^n * MNW`, skipped when the MNW oracle is.
pub fn check_nsw_ratio(inst: &Instance, alloc: &Allocation, cfg: &BruteConfig) -> Result<Gated<bool>> {
    if !dims_match(inst, alloc) {
        return Err(Error::invalid("allocation does not match instance dimensions"));
    }
    let product = nsw_product(inst, alloc);
    Ok(brute_force_mnw(inst, cfg)?.map(|(mnw, _)| nsw_ratio_holds(&product, &mnw, inst.agents())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub ef1: bool,
    pub pef1: bool,
    pub mbb_consistent: bool,
    pub brute_po: Gated<bool>,
    pub nsw_product: Exact,
    pub mnw_product: Gated<Exact>,
    pub ratio_ok: Gated<bool>,
}

impl VerificationReport {
    /// Names of the checks that ran and failed.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.ef1 {
            out.push("ef1");
        }
        if !self.pef1 {
            out.push("pef1");
        }
        if !self.mbb_consistent {
            out.push("mbb_consistent");
        }
        if self.brute_po == Gated::Done(false) {
            out.push("brute_po");
        }
        if self.ratio_ok == Gated::Done(false) {
            out.push("ratio_ok");
        }
        out
    }

    pub fn all_passed(&self) -> bool {
        self.failures().is_empty()
    }
}

/// The cheap checks: EF1 on `inst`, pEF1 and the MBB witness on the core
/// projection (goods nobody values and agents who value nothing removed).
///
/// Fails if the witness and pEF1 hold but EF1 does not, which would mean a
/// checker is wrong.
pub fn verify_fast(inst: &Instance, sol: &Solution) -> Result<(bool, bool, bool)> {
    if !dims_match(inst, &sol.allocation) {
        return Err(Error::invalid(format!(
            "solution has {} agents and {} goods, instance has {} and {}",
            sol.agents(),
            sol.goods(),
            inst.agents(),
            inst.goods()
        )));
    }
    let ef1 = check_ef1(inst, &sol.allocation);
    let (core, record) = normalize_instance(inst)?;
    let (pef1, mbb) = match project(sol, &record)? {
        Some(core_sol) => (is_pef1(&core_sol), check_mbb_consistency(&core, &core_sol)),
        None => (false, false),
    };
    if pef1 && mbb && !ef1 {
        return Err(Error::invariant("pEF1 and MBB-consistent but not EF1"));
    }
    Ok((ef1, pef1, mbb))
}

/// Runs every check, the brute-force ones only within the cap.
pub fn verify(inst: &Instance, sol: &Solution, cfg: &BruteConfig) -> Result<VerificationReport> {
    let (ef1, pef1, mbb_consistent) = verify_fast(inst, sol)?;
    let alloc = &sol.allocation;
    let brute_po = brute_force_po(inst, alloc, cfg)?;
    let product = nsw_product(inst, alloc);
    let mnw = brute_force_mnw(inst, cfg)?.map(|(p, _)| p);
    let ratio_ok = mnw.as_ref().map(|m| nsw_ratio_holds(&product, m, inst.agents()));
    Ok(VerificationReport { ef1, pef1, mbb_consistent, brute_po, nsw_product: product, mnw_product: mnw, ratio_ok })
}
