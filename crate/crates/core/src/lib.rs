//! EF1 and fractionally Pareto optimal allocations of indivisible goods.
//!
//! Goods enter a Fisher market one agent at a time. Prices only rise and
//! goods only move along maximum bang-per-buck edges, so every intermediate
//! allocation stays an equilibrium; the run ends once spending is envy-free
//! up to one good. All arithmetic is exact.
//!
//! ```
//! use fairdiv_core::{oracles, solve, Instance};
//!
//! let inst = Instance::from_integers(&[[3, 1, 2], [1, 4, 1]]).unwrap();
//! let out = solve(&inst).unwrap();
//! assert!(oracles::check_ef1(&inst, &out.solution.allocation));
//! ```

pub mod engine;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod gen;
pub mod hall;
pub mod harness;
pub mod io;
pub mod market;
pub mod model;
pub mod normalize;
pub mod oracles;
pub mod par;

pub use engine::{solve, solve_with, SolveOptions, SolveOutput};
pub use error::{Error, Result};
pub use exact::Exact;
pub use model::{Allocation, Instance, PriceVector, Solution};
pub use par::Parallelism;
