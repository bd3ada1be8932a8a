//! Stochastic multi-armed bandits with corrupted feedback.
//!
//! The learner never sees rewards, only feedback produced by passing each
//! reward bit through a known per-arm randomized-response channel. This
//! crate provides
//!
//! - [`klmath`]: Bernoulli KL divergence and its confidence-bound inversions,
//! - [`corruption`]: channels, their mean maps, and the LDP channel family,
//! - [`environment`]: the corrupt bandit model,
//! - [`policies`]: kl-UCB-CF, TS-CF, UCB-CF and the classical baselines,
//! - [`bounds`]: lower and upper regret bounds,
//! - [`harness`]: seeded, parallel, reproducible regret experiments.

pub mod bounds;
pub mod corruption;
pub mod environment;
pub mod error;
pub mod harness;
pub mod klmath;
pub mod policies;
pub mod rng;

pub use corruption::{CorruptionFunction, Direction, RandomizedResponseScheme};
pub use environment::{CorruptBanditModel, PullOutcome};
pub use error::{Error, Result};
pub use policies::{BanditPolicy, Classical, Policy, PolicyKind, PolicyState};
