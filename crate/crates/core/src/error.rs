use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid deployment: {0}")]
    InvalidDeployment(String),
    #[error("invalid swarm parameters: {0}")]
    InvalidParams(String),
    #[error("node {0} has no reachable anchor")]
    Unlocalizable(usize),
    #[error("nodes {0} and {1} are not one-hop neighbors")]
    NotNeighbors(usize, usize),
    #[error("fitness evaluated over an empty neighborhood")]
    EmptyNeighborhood,
    #[error("fewer than two mutually reachable anchors")]
    InsufficientAnchors,
    #[error("no unknown node was localized")]
    NoEstimates,
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
}
