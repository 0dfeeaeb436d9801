//! Exact-arithmetic simulator and analysis toolkit for online makespan
//! minimization on identical machines with job restarts.
//!
//! Everything is computed over arbitrary rationals ([`rat::Rat`]); there is
//! no floating point anywhere on a decision path, so simulated traces,
//! offline optima, and competitive ratios are exact and reproducible.

pub mod analysis;
pub mod adversary;
pub mod engine;
pub mod gantt;
pub mod model;
pub mod offline;
pub mod policy;
pub mod rat;

pub use engine::{makespan, run, run_with_adversary, Adversary, EngineView, SimError};
pub use model::{Instance, Job, PolicyConfig, Trace};
pub use rat::Rat;
