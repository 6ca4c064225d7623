//! Capacity-limited Bayesian decision making.
//!
//! Conjugate Bayesian bandit and tabular-MDP agents whose action selection is
//! a rate-distortion-optimal channel computed by Blahut-Arimoto, together with
//! a seeded experiment harness for regret, rate and rate-distortion curves.
//!
//! Information quantities are in nats throughout.

pub mod agents;
pub mod bandit;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod info;
pub mod mdp;
pub mod mdp_agents;
pub mod rd;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
