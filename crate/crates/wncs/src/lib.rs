//! Co-design of wireless scheduling and control for scalar plants that share
//! one unreliable channel.
//!
//! A set of `N` scalar continuous-time plants is sampled periodically; each
//! control packet must cross a shared wireless channel that delivers a
//! transmission for sub-system `i` with probability `p_i` per slot. A packet
//! that misses its sampling deadline is dropped. This crate answers three
//! questions about such a system:
//!
//! 1. **Decision** — can all plants be made mean-square stable at all?
//!    ([`capacity_idle::check_stability_general`] runs the subset test over
//!    exact idle-slot distributions; closed forms exist for the
//!    perfect-channel and symmetric cases.)
//! 2. **Synthesis** — if yes, produce a randomized per-slot scheduling policy
//!    (via an occupancy-measure linear program) together with per-plant linear
//!    control gains (via a delay-aware algebraic Riccati equation). See
//!    [`capacity_mdp::synthesize`].
//! 3. **Verification** — co-simulate scheduler, lossy channel, and plants with
//!    a seeded, reproducible Monte-Carlo engine and test the empirical
//!    mean-square decay ([`simulator`]).
//!
//! The crate is primarily a library; start with the runnable programs under
//! `examples/`. A thin `wncs` binary exposes the same flows as subcommands
//! (`check`, `synthesize`, `simulate`, `sweep-h`, `sweep-p`, `pmin`, `hmin`).

pub mod capacity_idle;
pub mod capacity_mdp;
pub mod cli;
pub mod control;
pub mod error;
pub mod lp;
pub mod model;
pub mod simulator;

pub use error::Error;
pub use model::{ContinuousPlant, DiscretePlant, StabilityVerdict, SystemConfig};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
