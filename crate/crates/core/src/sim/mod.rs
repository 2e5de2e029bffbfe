//! Synchronous simulation of the center-based policy against an oblivious
//! adversary, plus the regret ledger and bound comparisons.

pub mod adversary;
pub mod report;
pub mod run;
pub mod world;

use thiserror::Error;

use crate::bandit::BanditError;
use crate::graph::GraphError;
use crate::partition::PartitionError;

pub use adversary::{AdversaryError, LossKind, LossOracle};
pub use report::{regret_report, AgentReport, AverageReport, RegretReport};
pub use run::{run_informed, run_uninformed, RunOptions, RunResult, Setting};
pub use world::{InvariantStats, RoundMessage, World};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Bandit(#[from] BanditError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("adversary has {adversary} arms but the run uses {run}")]
    ArmsMismatch { adversary: usize, run: usize },
    #[error("partition covers {partition} nodes but the graph has {graph}")]
    PartitionMismatch { partition: usize, graph: usize },
    #[error("writing the run log failed: {0}")]
    Io(#[from] std::io::Error),
}
