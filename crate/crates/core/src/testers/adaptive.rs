use std::collections::BTreeMap;

use serde::Serialize;

use super::{check_params, counters, run_nonadaptive_test, DecisionTree, DistinguishedSet, TesterError, TesterVerdict};
use crate::fishing::{ceil_tol, run_fishing, FishingParams, StopReason};
use crate::oracle::{OracleError, SampleAccess, SampleHandle};

/// The adaptive tester hands over to the non-adaptive one when `eps >= 1/m^2`.
pub fn delegates_to_nonadaptive(m: usize, eps: f64) -> bool {
    eps * (m * m) as f64 >= 1.0 - 1e-12
}

/// `ceil(log2 m)` for `m >= 1`.
fn ceil_log2(m: usize) -> usize {
    m.next_power_of_two().trailing_zeros() as usize
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BatchOutcome {
    /// `y` differs on `j` from every earlier member and has joined the set.
    Success { y: SampleHandle, j: Vec<usize> },
    Fail,
}

/// One batch at level `a`: draws `J` of `ceil(2^(a+2) log2 m)` uniform indices
/// with repetition, queries every member at `J`, then draws
/// `ceil(2^(2-a) eps^-1 log2 m)` samples and queries each at `J`. The first new
/// sample whose answers on `J` differ from those of every member joins the set.
pub fn run_batch<S: SampleAccess + ?Sized>(
    session: &mut S,
    set: &mut DistinguishedSet,
    a: usize,
    eps: f64,
    m: usize,
) -> Result<BatchOutcome, OracleError> {
    let log = (m as f64).log2();
    let width = ceil_tol(2f64.powi(a as i32 + 2) * log);
    let draws = ceil_tol(2f64.powi(2 - a as i32) / eps * log);
    let j: Vec<usize> = (0..width).map(|_| session.random_index()).collect();
    let mut known = Vec::with_capacity(set.len());
    for i in 0..set.len() {
        let row = j.iter().map(|&jj| set.query(session, i, jj)).collect::<Result<Vec<bool>, _>>()?;
        known.push(row);
    }
    let mut chosen: Option<(SampleHandle, Vec<bool>)> = None;
    for _ in 0..draws {
        let y = session.draw_sample()?;
        let row = j.iter().map(|&jj| session.query(y, jj)).collect::<Result<Vec<bool>, _>>()?;
        if chosen.is_none() && known.iter().all(|x| *x != row) {
            chosen = Some((y, row));
        }
    }
    Ok(match chosen {
        Some((y, row)) => {
            set.push(y, j.iter().copied().zip(row).collect());
            BatchOutcome::Success { y, j }
        }
        None => BatchOutcome::Fail,
    })
}

/// Fishing statistics for one level of the first phase.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelRun {
    pub a: usize,
    pub goal: usize,
    pub batches: usize,
    pub successes: usize,
    pub stop_reason: StopReason,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstPhaseOutcome {
    /// The set reached `m + 1` members.
    pub rejected: bool,
    pub levels: Vec<LevelRun>,
}

/// For `a = 0..=ceil(log2 m)`, fishes with batches at level `a` for
/// `m + 1 - |A|` more members, threshold `1/3` and confidence
/// `1/(4 (ceil(log2 m) + 1))`. Stops as soon as the set has `m + 1` members.
pub fn run_first_phase<S: SampleAccess + ?Sized>(
    session: &mut S,
    set: &mut DistinguishedSet,
    eps: f64,
    m: usize,
) -> Result<FirstPhaseOutcome, OracleError> {
    let top = ceil_log2(m);
    let q = 1.0 / (4.0 * (top as f64 + 1.0));
    let mut levels = Vec::new();
    for a in 0..=top {
        if set.len() > m {
            break;
        }
        let goal = m + 1 - set.len();
        let params = FishingParams::new(goal, 1.0 / 3.0, q).expect("goal, threshold and confidence are in range");
        let out = run_fishing(&params, || {
            run_batch(session, set, a, eps, m).map(|b| match b {
                BatchOutcome::Success { y, .. } => Some(y),
                BatchOutcome::Fail => None,
            })
        })?;
        levels.push(LevelRun {
            a,
            goal,
            batches: out.n,
            successes: out.h,
            stop_reason: out.stop_reason,
        });
    }
    Ok(FirstPhaseOutcome {
        rejected: set.len() > m,
        levels,
    })
}

/// Builds a decision tree over the whole set by inserting members in order:
/// each is routed through the current tree (querying it at every node it
/// passes), then split from the member it reached at their smallest
/// certifying index. Uses at most `|A|^2` queries.
///
/// Panics if two members have no certificate, i.e. the set is not distinguished.
pub fn tree_construct<S: SampleAccess + ?Sized>(
    session: &mut S,
    set: &mut DistinguishedSet,
) -> Result<DecisionTree, OracleError> {
    assert!(!set.is_empty(), "a decision tree needs at least one element");
    let mut tree = DecisionTree::singleton(0);
    for k in 1..set.len() {
        let x = tree.locate(|j| set.query(session, k, j))?;
        let j = set
            .certificate(x, k)
            .unwrap_or_else(|| panic!("members {x} and {k} have no certificate"));
        let answer = set.record(k)[&j];
        tree.insert(x, k, j, answer);
    }
    Ok(tree)
}

/// Routes `y` through the tree to a member `x`, queries `x` and `y` at `m`
/// uniform indices drawn with repetition, and inserts `y` when they differ,
/// split at the smallest differing index. Returns the position of `y` if inserted.
pub fn run_second_phase_iteration<S: SampleAccess + ?Sized>(
    session: &mut S,
    y: SampleHandle,
    set: &mut DistinguishedSet,
    tree: &mut DecisionTree,
    m: usize,
) -> Result<Option<usize>, OracleError> {
    let j: Vec<usize> = (0..m).map(|_| session.random_index()).collect();
    let mut record = BTreeMap::new();
    let x = tree.locate(|jj| {
        let a = session.query(y, jj)?;
        record.insert(jj, a);
        Ok(a)
    })?;
    let mut split: Option<(usize, bool)> = None;
    for &jj in &j {
        let ax = set.query(session, x, jj)?;
        let ay = session.query(y, jj)?;
        let prev = record.insert(jj, ay);
        assert!(prev.is_none_or(|p| p == ay), "oracle changed its answer");
        if ax != ay && split.is_none_or(|(s, _)| jj < s) {
            split = Some((jj, ay));
        }
    }
    Ok(split.map(|(jj, ay)| {
        let k = set.push(y, record);
        tree.insert(x, k, jj, ay);
        k
    }))
}

/// The adaptive tester. For `eps >= 1/m^2` it runs the non-adaptive tester.
/// Otherwise it grows a distinguished set from one sample through the
/// first phase, builds a decision tree over it, and runs `ceil(48/eps)`
/// second-phase iterations; it rejects once the set has `m + 1` members.
pub fn run_adaptive_test<S: SampleAccess + ?Sized>(
    session: &mut S,
    m: usize,
    eps: f64,
) -> Result<TesterVerdict, TesterError> {
    check_params(m, eps)?;
    if delegates_to_nonadaptive(m, eps) {
        return run_nonadaptive_test(session, m, eps);
    }
    let start = counters(session);
    let mut set = DistinguishedSet::new();
    let u = session.draw_sample()?;
    set.push(u, BTreeMap::new());
    if run_first_phase(session, &mut set, eps, m)?.rejected {
        return Ok(TesterVerdict::finish(session, start, Some(set.witness())));
    }
    let mut tree = tree_construct(session, &mut set)?;
    for _ in 0..ceil_tol(48.0 / eps) {
        let y = session.draw_sample()?;
        run_second_phase_iteration(session, y, &mut set, &mut tree, m)?;
        if set.len() > m {
            return Ok(TesterVerdict::finish(session, start, Some(set.witness())));
        }
    }
    Ok(TesterVerdict::finish(session, start, None))
}
