//! Configuration, persistence and experiment drivers behind the `cbg` binary.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{LearningConfig, LearningError, PolicyError};
use crate::audit::AuditError;
use crate::engine::ProtocolError;

pub mod config;
pub mod enumerate;
pub mod log;
pub mod run;
pub mod seeds;
pub mod simulate;
pub mod train;

pub use config::{AuditConfig, AuditSource, EnumerateConfig, Settings, SimulateConfig, TrainConfig};
pub use log::{read_log, write_log, LogHeader, TrajectoryRecord};
pub use simulate::{simulate, SimulationSummary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Learning(#[from] LearningError),
}

impl HarnessError {
    /// 1 for configuration problems, 2 for everything that fails at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}

/// How a log's trajectories were played.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    /// Uniform proposals; each responder accepts with `p_accept`.
    Random { p_accept: f64 },
    Learning {
        alpha: f64,
        gamma: f64,
        epsilon_start: f64,
        epsilon_end: f64,
        accept_reward: f64,
        step_cost: f64,
    },
}

impl PolicySpec {
    pub fn of_learning(c: &LearningConfig) -> Self {
        PolicySpec::Learning {
            alpha: c.alpha,
            gamma: c.gamma,
            epsilon_start: c.epsilon_start,
            epsilon_end: c.epsilon_end,
            accept_reward: c.rewards.accept_reward,
            step_cost: c.rewards.step_cost,
        }
    }

    /// Stationary policies whose choices ignore the history beyond legality.
    pub fn is_memoryless(&self) -> bool {
        matches!(self, PolicySpec::Random { .. })
    }

    pub fn describe(&self) -> String {
        match self {
            PolicySpec::Random { p_accept } => format!("random p_accept={p_accept}"),
            PolicySpec::Learning { alpha, gamma, .. } => format!("q-learning alpha={alpha} gamma={gamma}"),
        }
    }
}
