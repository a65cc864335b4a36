//! Incremental market engine.
//!
//! Agents enter one at a time. Each newcomer brings the goods it values that
//! are not yet on the market, priced low enough that nobody price-envies it
//! and its goods are MBB for it. [`find_solution`] then alternates between
//! transferring goods along shortest MBB paths towards maximum violators and
//! uniformly raising the prices of everything reachable from the newcomer,
//! until the market is pEF1. A pEF1 solution whose bundles are MBB is EF1 and
//! fractionally Pareto optimal.

mod run;
mod state;
mod steps;
mod trace;

pub use run::{find_solution, solve, solve_with, SolveOptions, SolveOutput};
pub use state::{iteration_bound, EngineConfig, EngineState, FindStats, PotentialVector};
pub use steps::{
    apply_price_rise, compute_betas, compute_potential, initial_prices_for_agent, transfer, transfer_indices,
    StepOutcome,
};
pub use trace::{AuditReport, Betas, Check, EventKind, Trace, TraceEvent, Violation};
