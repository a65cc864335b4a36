//! Event trace and online invariant audit.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::market::AlternatingPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    AddAgent,
    Transfer,
    PriceRise,
    Terminated,
}

/// The three candidate price-rise rates and their minimum.
/// `None` stands for an infinite rate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Betas {
    pub b1: Option<Exact>,
    pub b2: Option<Exact>,
    pub b3: Option<Exact>,
    pub chosen: Exact,
    /// Which of `b1`, `b2`, `b3` equal `chosen`.
    pub attained: Vec<String>,
}

/// One line of the JSON-lines trace. Good indices are core-instance indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub step: u64,
    /// Most recently added agent.
    pub k: usize,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Betas>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<AlternatingPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    /// Potential vector at the start of the iteration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<usize>>,
    /// Goods that entered the market (add-agent events only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_goods: Option<Vec<usize>>,
    pub min_spend: Exact,
    pub max_hat: Exact,
}

/// Bounded event log. Events past `cap` are counted, not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub dropped: u64,
    #[serde(skip)]
    cap: usize,
    #[serde(skip)]
    next_step: u64,
}

impl Trace {
    pub fn with_cap(cap: usize) -> Self {
        Trace { cap, ..Trace::default() }
    }

    pub(crate) fn next_step(&mut self) -> u64 {
        let s = self.next_step;
        self.next_step += 1;
        s
    }

    pub(crate) fn record(&mut self, event: TraceEvent) {
        if self.events.len() < self.cap {
            self.events.push(event);
        } else {
            self.dropped += 1;
        }
    }

    pub fn total_events(&self) -> u64 {
        self.events.len() as u64 + self.dropped
    }

    /// JSON-lines rendering, one event per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }
}

/// Names of the properties checked while the engine runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Partition,
    MbbContainment,
    Pef1ExceptK,
    MinSpenderIsK,
    BetaRange,
    PricesPositive,
    PricesNonDecreasing,
    PotentialIncrease,
    IterationBound,
    MaxHatStableOnRise,
    MaxHatNonIncreasingOnTransfer,
    TransferBundleSizes,
    TransferLevelsKept,
    PathLevels,
    RaisedGoodsIsolated,
    InitialPrices,
    FinalPef1Mbb,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("check names serialize");
        write!(f, "{}", s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub check: Check,
    pub step: u64,
    pub detail: String,
}

/// Counts of checks performed and any violations found.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checked: BTreeMap<Check, u64>,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: &AuditReport) {
        for (c, n) in &other.checked {
            *self.checked.entry(*c).or_default() += n;
        }
        self.violations.extend(other.violations.iter().cloned());
    }

    pub fn count(&self, check: Check) -> u64 {
        self.checked.get(&check).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Auditor {
    pub(crate) enabled: bool,
    strict: bool,
    pub(crate) report: AuditReport,
}

impl Auditor {
    pub(crate) fn new(enabled: bool, strict: bool) -> Self {
        Auditor { enabled, strict, report: AuditReport::default() }
    }

    /// Records the outcome of one check. In strict mode a failed check becomes
    /// an invariant error.
    pub(crate) fn check(&mut self, check: Check, step: u64, ok: bool, detail: impl FnOnce() -> String) -> Result<()> {
        *self.report.checked.entry(check).or_default() += 1;
        if ok {
            return Ok(());
        }
        let violation = Violation { check, step, detail: detail() };
        if self.strict {
            return Err(Error::invariant(format!("{} at step {}: {}", check, step, violation.detail)));
        }
        self.report.violations.push(violation);
        Ok(())
    }
}
