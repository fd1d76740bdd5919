//! Bitstring distributions and exact distance computations.

mod bitstring;
mod dist;
mod emd;
mod scalar;
mod support;

use thiserror::Error;

pub use bitstring::BitString;
pub use dist::{distance_to_set, hamming_distance, sample_map, variation_distance, DistributionSpec, Weights};
pub use emd::{emd, solve_transport, EmdResult, TransferEntry, TransferPlan, TransportSolution};
pub use scalar::{parse_rational, rational_from_f64, simple_rational, Real, Scalar, FLOAT_TOLERANCE};
pub use support::{distance_to_support_m, SupportDistance, SUPPORT_ORACLE_LIMIT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("coordinate {coord} outside 1..={len}")]
    CoordinateOutOfRange { coord: usize, len: usize },
    #[error("invalid bit character {0:?}")]
    BadBitChar(char),
    #[error("distribution has no atoms")]
    Empty,
    #[error("string length must be at least 1")]
    ZeroLength,
    #[error("atoms {first} and {second} are equal")]
    DuplicateAtom { first: usize, second: usize },
    #[error("weight of atom {index} is not positive")]
    NonPositiveWeight { index: usize },
    #[error("weights sum to {total}, not 1")]
    NotNormalized { total: f64 },
    #[error("malformed weight {0:?}")]
    BadWeight(String),
    #[error("malformed distribution document: {0}")]
    Json(String),
    #[error("distance to an empty set")]
    EmptySet,
    #[error("distributions over {{0,1}}^{left} and {{0,1}}^{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("map changed string length from {before} to {after}")]
    LengthChanged { before: usize, after: usize },
    #[error("support bound m must be at least 1")]
    InvalidM,
    #[error("oracle scale exceeded: {atoms} atoms, limit {limit}")]
    OracleScaleExceeded { atoms: usize, limit: usize },
}
