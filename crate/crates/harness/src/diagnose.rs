use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use suppsize::bitdist::{BitString, DistributionSpec};
use suppsize::oracle::{Budgets, OracleSession};
use suppsize::testers::{run_nonadaptive_test, LevelPlan, TesterError, TesterVerdict};
use thiserror::Error;

/// Most distinct strings the enumeration handles.
pub const DIAGNOSE_MAX_STRINGS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnoseError {
    #[error("expected {expected} sample strings, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("{0} distinct strings exceed the enumeration guard of {DIAGNOSE_MAX_STRINGS}")]
    ScaleGuard(usize),
    #[error(transparent)]
    Tester(#[from] TesterError),
}

/// One element of a composition: a representative sample and its level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DiagElement {
    pub ordinal: usize,
    pub level: usize,
}

/// Valid compositions of one non-adaptive run, judged with true distances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionDiagnostic {
    /// Distinct strings among the samples.
    pub distinct_strings: usize,
    /// Lexicographically largest level sequence `(a_2, ..., a_l)` of a valid
    /// composition; a proper prefix ranks below its extensions.
    pub max_rank: Vec<usize>,
    /// A valid composition of that rank, starting with `u`.
    pub max_rank_composition: Vec<DiagElement>,
    /// Length of the longest valid composition.
    pub longest_valid: usize,
    pub has_valid_m_plus_1: bool,
    /// The maximum-rank valid composition has at most `m` elements.
    pub bad_event: bool,
}

/// Replays the non-adaptive tester and returns its verdict and the true
/// strings of its samples, by ordinal.
pub fn replay_nonadaptive(
    dist: Arc<DistributionSpec>,
    seed: u64,
    m: usize,
    eps: f64,
) -> Result<(TesterVerdict, Vec<BitString>), DiagnoseError> {
    let mut session = OracleSession::open(dist, seed, Budgets::unlimited());
    session.set_recording(false);
    let v = run_nonadaptive_test(&mut session, m, eps)?;
    Ok((v, session.drawn_strings()))
}

/// Whether `elements` (first one `u` at ordinal 0) form a valid composition:
/// levels after the first are non-increasing and every later element `j` is
/// more than `2^(-a_j - 1)` from each earlier one.
pub fn is_valid_composition(strings: &[BitString], elements: &[DiagElement]) -> bool {
    if elements.first().map(|e| e.ordinal) != Some(0) {
        return false;
    }
    let monotone = elements[1..].windows(2).all(|w| w[0].level >= w[1].level);
    let sound = (1..elements.len()).all(|j| {
        let threshold = 0.5f64.powi(elements[j].level as i32 + 1);
        (0..j).all(|i| {
            let d = strings[elements[i].ordinal].hamming_count(&strings[elements[j].ordinal]).expect("same length");
            d as f64 / strings[0].len() as f64 > threshold
        })
    });
    monotone && sound
}

/// Best continuation from a state: the lexicographically largest suffix of
/// levels with its elements, and the longest suffix.
#[derive(Clone)]
struct Best {
    rank: Vec<usize>,
    path: Vec<(usize, usize)>,
    longest: usize,
}

struct Search<'a> {
    /// `dist[x][y]` in Hamming count.
    dist: Vec<Vec<usize>>,
    n: usize,
    /// Distinct strings present at each level.
    at_level: &'a [Vec<usize>],
    memo: HashMap<(u32, usize), Best>,
}

impl Search<'_> {
    fn fits(&self, chosen: u32, s: usize, level: usize) -> bool {
        let threshold = 0.5f64.powi(level as i32 + 1);
        (0..self.dist.len())
            .filter(|&x| chosen >> x & 1 == 1)
            .all(|x| self.dist[x][s] as f64 / self.n as f64 > threshold)
    }

    fn best(&mut self, chosen: u32, max_level: usize) -> Best {
        if let Some(b) = self.memo.get(&(chosen, max_level)) {
            return b.clone();
        }
        let mut best = Best {
            rank: Vec::new(),
            path: Vec::new(),
            longest: 0,
        };
        for level in (0..=max_level).rev() {
            for &s in &self.at_level[level] {
                if !self.fits(chosen, s, level) {
                    continue;
                }
                let sub = self.best(chosen | 1 << s, level);
                let mut rank = vec![level];
                rank.extend(&sub.rank);
                if rank > best.rank {
                    let mut path = vec![(s, level)];
                    path.extend(&sub.path);
                    best.rank = rank;
                    best.path = path;
                }
                best.longest = best.longest.max(sub.longest + 1);
            }
        }
        self.memo.insert((chosen, max_level), best.clone());
        best
    }
}

/// Enumerates the valid compositions of a non-adaptive run from the true
/// strings of its samples (ordinal `i` at `strings[i]`), which the tester
/// itself never sees. Levels follow the tester's sample layout for `(m, eps)`.
pub fn diagnose_compositions(strings: &[BitString], m: usize, eps: f64) -> Result<CompositionDiagnostic, DiagnoseError> {
    let plan = LevelPlan::new(m, eps, || 1);
    if strings.len() != plan.sample_count() {
        return Err(DiagnoseError::SampleCount {
            expected: plan.sample_count(),
            got: strings.len(),
        });
    }
    let mut id_of: HashMap<&BitString, usize> = HashMap::new();
    let mut representative: Vec<HashMap<usize, usize>> = vec![HashMap::new(); plan.top + 1];
    let mut at_level: Vec<Vec<usize>> = vec![Vec::new(); plan.top + 1];
    for (ordinal, s) in strings.iter().enumerate() {
        let next = id_of.len();
        let id = *id_of.entry(s).or_insert(next);
        if ordinal == 0 {
            continue;
        }
        let level = plan.level_of(ordinal);
        representative[level].entry(id).or_insert_with(|| {
            at_level[level].push(id);
            ordinal
        });
    }
    let k = id_of.len();
    if k > DIAGNOSE_MAX_STRINGS {
        return Err(DiagnoseError::ScaleGuard(k));
    }
    let mut distinct: Vec<&BitString> = vec![&strings[0]; k];
    for (s, &i) in &id_of {
        distinct[i] = s;
    }
    let dist = distinct
        .iter()
        .map(|x| distinct.iter().map(|y| x.hamming_count(y).expect("same length")).collect())
        .collect();
    let mut search = Search {
        dist,
        n: strings[0].len(),
        at_level: &at_level,
        memo: HashMap::new(),
    };
    let best = search.best(1 << id_of[&strings[0]], plan.top);
    let mut composition = vec![DiagElement { ordinal: 0, level: plan.top }];
    composition.extend(best.path.iter().map(|&(s, level)| DiagElement {
        ordinal: representative[level][&s],
        level,
    }));
    let longest_valid = best.longest + 1;
    Ok(CompositionDiagnostic {
        distinct_strings: k,
        max_rank: best.rank,
        bad_event: composition.len() <= m,
        max_rank_composition: composition,
        longest_valid,
        has_valid_m_plus_1: longest_valid > m,
    })
}
