//! Sample-then-query access to a hidden distribution.
//!
//! Testers see only opaque sample handles and the bits they query, through
//! [`SampleAccess`]. [`OracleSession`] is the concrete implementation and also
//! exposes ground truth to harness code.

mod log;
mod rng;
mod session;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use log::{Event, LogError, QueryLog};
pub use rng::{stream_rng, RNG_VERSION};
pub use session::{Budgets, OracleSession};

/// Opaque reference to a drawn sample: its 0-based draw ordinal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SampleHandle(pub u32);

impl SampleHandle {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Resource {
    Samples,
    Queries,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{resource:?} budget of {limit} exceeded")]
    BudgetExceeded { resource: Resource, limit: usize },
    #[error("unknown sample handle {0}")]
    UnknownHandle(usize),
    #[error("index {j} outside 1..={n}")]
    IndexOutOfRange { j: usize, n: usize },
}

/// Answers to a bulk non-adaptive request.
///
/// Ordinal `r` in the request refers to the sample with handle `base + r`.
/// `queries` is sorted and duplicate-free; `answers[i]` answers `queries[i]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BulkAnswers {
    pub base: u32,
    pub queries: Vec<(u32, u32)>,
    pub answers: Vec<bool>,
}

impl BulkAnswers {
    pub fn handle(&self, ordinal: usize) -> SampleHandle {
        SampleHandle(self.base + ordinal as u32)
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn get(&self, ordinal: usize, j: usize) -> Option<bool> {
        self.queries
            .binary_search(&(ordinal as u32, j as u32))
            .ok()
            .map(|i| self.answers[i])
    }

    /// `(j, answer)` for every queried index of one ordinal, in increasing `j`.
    pub fn for_ordinal(&self, ordinal: usize) -> impl Iterator<Item = (usize, bool)> + '_ {
        let r = ordinal as u32;
        let lo = self.queries.partition_point(|&(o, _)| o < r);
        let hi = self.queries.partition_point(|&(o, _)| o <= r);
        (lo..hi).map(move |i| (self.queries[i].1 as usize, self.answers[i]))
    }
}

/// The only channel through which a tester touches the distribution.
pub trait SampleAccess {
    /// String length of the hidden distribution.
    fn n(&self) -> usize;

    /// Draws a fresh independent sample.
    fn draw_sample(&mut self) -> Result<SampleHandle, OracleError>;

    /// Bit `j` (1-based) of a drawn sample.
    fn query(&mut self, h: SampleHandle, j: usize) -> Result<bool, OracleError>;

    /// Draws samples for ordinals `0..=max ordinal in queries` and answers all
    /// `(ordinal, j)` pairs in one step. The request is a set: order and
    /// repetitions are ignored.
    fn run_nonadaptive(&mut self, queries: &[(usize, usize)]) -> Result<BulkAnswers, OracleError>;

    /// A uniform index in `1..=n` from the algorithm's own random stream.
    fn random_index(&mut self) -> usize;

    fn samples_used(&self) -> usize;

    fn queries_used(&self) -> usize;
}
