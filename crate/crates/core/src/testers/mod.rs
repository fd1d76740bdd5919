//! One-sided testers for the property of being supported on at most `m` strings.
//!
//! Every tester accepts every distribution with at most `m` support elements,
//! because it rejects only after exhibiting `m + 1` samples that are pairwise
//! proven distinct by their answers. That proof is returned as a [`Witness`].

mod adaptive;
mod baseline;
mod nonadaptive;
mod tree;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{OracleError, SampleAccess, SampleHandle};
use crate::witness::{Edge, Witness};

pub use adaptive::{
    delegates_to_nonadaptive, run_adaptive_test, run_batch, run_first_phase, run_second_phase_iteration,
    tree_construct, BatchOutcome, FirstPhaseOutcome, LevelRun,
};
pub use baseline::{baseline_plan, run_baseline_test};
pub use nonadaptive::{
    find_distinguishable_composition, run_nonadaptive_test, Composition, CompositionElement, LevelPlan,
};
pub use tree::DecisionTree;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TesterError {
    #[error("support bound m = {0} must be at least 2")]
    InvalidM(usize),
    #[error("distance parameter {0} outside (0, 1)")]
    InvalidEpsilon(f64),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub(crate) fn check_params(m: usize, eps: f64) -> Result<(), TesterError> {
    if m < 2 {
        return Err(TesterError::InvalidM(m));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TesterError::InvalidEpsilon(eps));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

/// Outcome of one tester run. `queries` and `samples` count what this run used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TesterVerdict {
    pub verdict: Verdict,
    pub queries: usize,
    pub samples: usize,
    pub witness: Option<Witness>,
}

impl TesterVerdict {
    pub fn rejected(&self) -> bool {
        self.verdict == Verdict::Reject
    }

    pub(crate) fn finish<S: SampleAccess + ?Sized>(session: &S, start: (usize, usize), witness: Option<Witness>) -> Self {
        TesterVerdict {
            verdict: if witness.is_some() {
                Verdict::Reject
            } else {
                Verdict::Accept
            },
            queries: session.queries_used() - start.1,
            samples: session.samples_used() - start.0,
            witness,
        }
    }
}

pub(crate) fn counters<S: SampleAccess + ?Sized>(session: &S) -> (usize, usize) {
    (session.samples_used(), session.queries_used())
}

/// Smallest index at which two answer records differ, if any.
pub(crate) fn smallest_difference(x: &BTreeMap<usize, bool>, y: &BTreeMap<usize, bool>) -> Option<usize> {
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    small
        .iter()
        .filter(|(j, a)| large.get(j).is_some_and(|b| b != *a))
        .map(|(&j, _)| j)
        .min()
}

/// Samples that are pairwise proven distinct, with every answer obtained on them.
#[derive(Clone, Debug, Default)]
pub struct DistinguishedSet {
    members: Vec<SampleHandle>,
    records: Vec<BTreeMap<usize, bool>>,
}

impl DistinguishedSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[SampleHandle] {
        &self.members
    }

    pub fn record(&self, i: usize) -> &BTreeMap<usize, bool> {
        &self.records[i]
    }

    /// Adds a sample with the answers already obtained on it; returns its position.
    pub fn push(&mut self, h: SampleHandle, record: BTreeMap<usize, bool>) -> usize {
        self.members.push(h);
        self.records.push(record);
        self.members.len() - 1
    }

    /// Queries member `i` at `j` and records the answer.
    pub fn query<S: SampleAccess + ?Sized>(&mut self, session: &mut S, i: usize, j: usize) -> Result<bool, OracleError> {
        let a = session.query(self.members[i], j)?;
        let prev = self.records[i].insert(j, a);
        assert!(prev.is_none_or(|p| p == a), "oracle changed its answer");
        Ok(a)
    }

    /// Smallest index at which members `i` and `k` were both queried and differ.
    pub fn certificate(&self, i: usize, k: usize) -> Option<usize> {
        smallest_difference(&self.records[i], &self.records[k])
    }

    /// Pairwise certificates for the whole set. Panics if a pair is uncertified,
    /// which would mean the set was not distinguished.
    pub fn witness(&self) -> Witness {
        let mut certificates = Vec::new();
        for i in 0..self.len() {
            for k in i + 1..self.len() {
                let j = self.certificate(i, k).expect("members of a distinguished set are certified");
                certificates.push(Edge {
                    a: self.members[i],
                    b: self.members[k],
                    j,
                });
            }
        }
        Witness {
            clique: self.members.clone(),
            certificates,
        }
    }
}
