//! Coalitional bargaining games with history-dependent proposal rules.
//!
//! - [`engine`]: the proposal/response protocol as a deterministic state machine.
//! - [`embedding`]: the append-only history and canonical state keys.
//! - [`agents`]: uniform baselines and tabular Q-learning over history-keyed observations.
//! - [`audit`]: empirical Markov-property tests on collected trajectories.
//! - [`harness`]: configuration, logs, exact enumeration and the CLI drivers.

pub mod agents;
pub mod audit;
pub mod embedding;
pub mod engine;
pub mod harness;
