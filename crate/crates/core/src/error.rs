use alloc::string::String;

use crate::cascade::NodeId;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("node {0} appears more than once in a cascade")]
    DuplicateNode(NodeId),
    #[error("node {node} has invalid infection time {time}")]
    InvalidTime { node: NodeId, time: f64 },
    #[error("diffusion weight needs 1 <= earlier label < later label, got ({earlier}, {later})")]
    LabelOrder { earlier: u32, later: u32 },
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge ({0}, {1}) references a node outside the graph")]
    NodeOutOfRange(NodeId, NodeId),
    #[error("node {0} is assigned to more than one community")]
    DuplicateAssignment(NodeId),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("cascade {cascade}: no cascade with at least two infections after {attempts} attempts")]
    RetryCapExhausted { cascade: usize, attempts: u32 },
    #[error("ground-truth partition has no communities")]
    NoCommunities,
}

pub type Result<T> = core::result::Result<T, Error>;
