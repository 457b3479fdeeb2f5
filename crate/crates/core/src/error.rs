use thiserror::Error;

use crate::model::StoreId;

#[derive(Debug, Error, PartialEq)]
pub enum DssError {
    #[error(
        "misindication ratio is undefined when hit ratio and false positive ratio are both zero"
    )]
    UndefinedRatio,

    #[error("store {id}: access cost {cost} must be finite and at least 1")]
    InvalidCost { id: StoreId, cost: f64 },

    #[error("store {id}: misindication ratio {rho} must lie in [0, 1)")]
    InvalidRatio { id: StoreId, rho: f64 },

    #[error("miss penalty {0} must be finite and at least 1")]
    InvalidMissPenalty(f64),

    #[error("duplicate store id {0} in selection context")]
    DuplicateStore(StoreId),

    #[error("store {id}: access cost {cost} is not an integer")]
    NonIntegralCost { id: StoreId, cost: f64 },

    #[error("{0} candidates exceed the exhaustive search limit of {limit}", limit = crate::strategies::EXHAUSTIVE_LIMIT)]
    TooManyCandidates(usize),

    #[error(
        "miss penalty {0} is below 2; the partition-merge strategy needs at least one cost class"
    )]
    PenaltyTooSmall(f64),

    #[error("log-hit weight needs a ratio in (0, 1), got {0}")]
    WeightDomain(f64),

    #[error("item {0} is already stored")]
    DuplicateInsert(u64),

    #[error("topology: {0}")]
    Topology(String),

    #[error("T = {given} is below the largest pairwise bottleneck bandwidth {required}")]
    BandwidthScaleTooSmall { given: f64, required: f64 },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("simulation aborted at request {request} ({strategy}): {message}")]
    Aborted {
        request: usize,
        strategy: String,
        message: String,
    },
}

pub type Result<T, E = DssError> = std::result::Result<T, E>;
