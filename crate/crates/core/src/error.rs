use alloc::boxed::Box;
use alloc::string::String;

use crate::scheduler::ScheduleTrace;
use crate::topology::NodeId;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    /// The scheduler hit `max_rounds` without reaching either termination rule.
    #[error("schedule did not terminate within {rounds} rounds")]
    Divergence {
        rounds: usize,
        trace: Box<ScheduleTrace>,
    },

    #[error("demand of {demand} Mb/s has no route")]
    Unroutable { demand: f64 },

    #[error("cannot summarize sweep: {0}")]
    Summary(String),
}
