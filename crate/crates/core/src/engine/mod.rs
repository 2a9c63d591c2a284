//! Partition-refinement search for large complete minors, together with the
//! connected-expander growth step and exact witness verification.

mod grow;
mod params;
mod partition;
mod run;
mod witness;

use thiserror::Error;

pub use grow::{grow_connected_expander, Growth};
pub use params::{
    compute_params, compute_params_with, required_pairs, scaling_ratio, EngineParams, Mode, Overrides, ParamError,
    DEFAULT_RETRY_COEFFICIENT, PAIR_FRACTION,
};
pub use partition::{verify_partition, Constraint, Partition, PartitionReport, PartitionViolation};
pub use run::{find_minor, Event, HistoryEntry, Outcome, RunOptions, RunReport};
pub use witness::{
    brute_force_ccl, verify_witness, MinorWitness, WitnessKind, WitnessReport, WitnessViolation, CCL_LIMIT,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("{0}")]
    Invalid(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("n = {n} exceeds the exhaustive limit {limit}")]
    TooLarge { n: usize, limit: usize },
}
