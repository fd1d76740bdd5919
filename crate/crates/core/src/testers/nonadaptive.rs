use std::collections::HashMap;

use serde::Serialize;

use super::{check_params, counters, TesterError, TesterVerdict};
use crate::fishing::ceil_tol;
use crate::oracle::{BulkAnswers, SampleAccess, SampleHandle};
use crate::witness::{BitGraph, Edge, Witness};

/// Query layout of the non-adaptive tester.
///
/// The distance parameter is rounded down to `2^-top`. A master sequence of
/// indices is drawn with repetition; level `a` uses its prefix `I_a` of length
/// `ceil(2^(a+2) log2(m+1))`, so `I_0` is a prefix of `I_1` and so on. Ordinal 0
/// is the sample `u`, queried at `I_top`. It is followed by `2m` block groups;
/// group `k` holds, for each level `a = 0..=top`, a block `S_{a,k}` of
/// `2^(3-a+top)` samples queried at `I_a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelPlan {
    pub m: usize,
    pub top: usize,
    pub master: Vec<usize>,
    pub prefix_lens: Vec<usize>,
    pub block_sizes: Vec<usize>,
}

/// `L` with `2^-L` the largest power of two not exceeding `eps`.
fn rounding_exponent(eps: f64) -> usize {
    let mut l = 0;
    while 0.5f64.powi(l as i32) > eps {
        l += 1;
    }
    l
}

impl LevelPlan {
    /// Draws the master index sequence with `draw_index`, which must return
    /// uniform indices in `1..=n`.
    pub fn new(m: usize, eps: f64, mut draw_index: impl FnMut() -> usize) -> Self {
        let top = rounding_exponent(eps);
        let log = ((m + 1) as f64).log2();
        let prefix_lens: Vec<usize> = (0..=top).map(|a| ceil_tol(2f64.powi(a as i32 + 2) * log)).collect();
        let master = (0..prefix_lens[top]).map(|_| draw_index()).collect();
        let block_sizes = (0..=top).map(|a| 1usize << (3 + top - a)).collect();
        LevelPlan {
            m,
            top,
            master,
            prefix_lens,
            block_sizes,
        }
    }

    /// `2^-top`.
    pub fn epsilon_hat(&self) -> f64 {
        0.5f64.powi(self.top as i32)
    }

    /// `I_a`, with repetitions.
    pub fn index_set(&self, a: usize) -> &[usize] {
        &self.master[..self.prefix_lens[a]]
    }

    fn group_size(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn sample_count(&self) -> usize {
        1 + 2 * self.m * self.group_size()
    }

    /// `(a, k)` of the block holding `ordinal`, with `k` in `1..=2m`; `None` for `u`.
    pub fn block_of(&self, ordinal: usize) -> Option<(usize, usize)> {
        if ordinal == 0 {
            return None;
        }
        let q = ordinal - 1;
        let k = q / self.group_size() + 1;
        let mut off = q % self.group_size();
        for (a, &b) in self.block_sizes.iter().enumerate() {
            if off < b {
                return Some((a, k));
            }
            off -= b;
        }
        unreachable!("offset lies inside its group")
    }

    pub fn level_of(&self, ordinal: usize) -> usize {
        self.block_of(ordinal).map_or(self.top, |(a, _)| a)
    }

    /// Every `(ordinal, j)` pair the tester asks, as one non-adaptive request.
    pub fn query_set(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        out.extend(self.index_set(self.top).iter().map(|&j| (0, j)));
        let mut r = 1;
        for _ in 0..2 * self.m {
            for (a, &b) in self.block_sizes.iter().enumerate() {
                for _ in 0..b {
                    out.extend(self.index_set(a).iter().map(|&j| (r, j)));
                    r += 1;
                }
            }
        }
        out
    }

    /// Pairwise certificates of a composition: for each pair, the smallest
    /// index of `I_min(levels)` at which the two answers differ.
    pub fn witness(&self, answers: &BulkAnswers, composition: &Composition) -> Witness {
        let ordinal = |h: SampleHandle| (h.0 - answers.base) as usize;
        let els = &composition.elements;
        let mut certificates = Vec::new();
        for (i, x) in els.iter().enumerate() {
            for y in &els[i + 1..] {
                let mut common: Vec<usize> = self.index_set(x.level.min(y.level)).to_vec();
                common.sort_unstable();
                common.dedup();
                let j = common
                    .into_iter()
                    .find(|&j| answers.get(ordinal(x.handle), j) != answers.get(ordinal(y.handle), j))
                    .expect("composition members are distinguished");
                certificates.push(Edge {
                    a: x.handle,
                    b: y.handle,
                    j,
                });
            }
        }
        Witness {
            clique: els.iter().map(|e| e.handle).collect(),
            certificates,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CompositionElement {
    pub handle: SampleHandle,
    pub level: usize,
    /// `k` of the block `S_{a,k}`; `None` for the first sample `u`.
    pub block: Option<usize>,
}

/// Pairwise distinguishable samples, `u` first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Composition {
    pub elements: Vec<CompositionElement>,
}

impl Composition {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Answers of one sample packed by position in the first-occurrence order of
/// the master sequence, so that the distinct indices of every `I_a` are a prefix.
struct Packed {
    /// Number of distinct indices in `I_a`.
    prefix: Vec<usize>,
    words: usize,
    bits: Vec<u64>,
}

impl Packed {
    fn new(plan: &LevelPlan, answers: &BulkAnswers) -> Self {
        let mut pos: HashMap<usize, usize> = HashMap::new();
        let mut distinct = Vec::new();
        let mut prefix = Vec::with_capacity(plan.top + 1);
        let mut a = 0;
        for (i, &j) in plan.master.iter().enumerate() {
            while a <= plan.top && plan.prefix_lens[a] == i {
                prefix.push(distinct.len());
                a += 1;
            }
            pos.entry(j).or_insert_with(|| {
                distinct.push(j);
                distinct.len() - 1
            });
        }
        while prefix.len() <= plan.top {
            prefix.push(distinct.len());
        }
        let words = distinct.len().div_ceil(64).max(1);
        let mut bits = vec![0u64; plan.sample_count() * words];
        for (&(r, j), &ans) in answers.queries.iter().zip(&answers.answers) {
            if ans {
                let p = pos[&(j as usize)];
                bits[r as usize * words + p / 64] |= 1 << (p % 64);
            }
        }
        Packed {
            prefix,
            words,
            bits,
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words..(r + 1) * self.words]
    }

    /// Whether two packed rows differ within the first `len` positions.
    fn differ(x: &[u64], y: &[u64], len: usize) -> bool {
        let full = len / 64;
        if x[..full] != y[..full] {
            return true;
        }
        let rest = len % 64;
        rest > 0 && (x[full] ^ y[full]) & ((1u64 << rest) - 1) != 0
    }

    fn masked(&self, r: usize, len: usize) -> Vec<u64> {
        let mut v = self.row(r)[..len.div_ceil(64)].to_vec();
        if len % 64 > 0 {
            *v.last_mut().expect("nonempty") &= (1u64 << (len % 64)) - 1;
        }
        v
    }
}

/// Exact search for `m + 1` pairwise distinguishable samples including `u`.
///
/// Samples at levels `a` and `b` are distinguishable when their answers differ
/// somewhere on `I_min(a,b)`, the common part of their index sets. Samples
/// with equal level and equal answers are interchangeable, so the search runs
/// on those classes.
pub fn find_distinguishable_composition(plan: &LevelPlan, answers: &BulkAnswers, m: usize) -> Option<Composition> {
    let packed = Packed::new(plan, answers);
    let mut class_of_key: HashMap<(usize, Vec<u64>), usize> = HashMap::new();
    let mut reps: Vec<usize> = Vec::new();
    for r in 0..plan.sample_count() {
        let level = plan.level_of(r);
        let key = (level, packed.masked(r, packed.prefix[level]));
        class_of_key.entry(key).or_insert_with(|| {
            reps.push(r);
            reps.len() - 1
        });
    }
    let distinguishable = |x: usize, y: usize| {
        let len = packed.prefix[plan.level_of(x).min(plan.level_of(y))];
        Packed::differ(packed.row(x), packed.row(y), len)
    };
    // reps[0] is ordinal 0, the sample u.
    let mut vertices = vec![0usize];
    vertices.extend(reps[1..].iter().copied().filter(|&r| distinguishable(0, r)));
    if vertices.len() < m + 1 {
        return None;
    }
    let mut g = BitGraph::new(vertices.len());
    for i in 0..vertices.len() {
        for k in i + 1..vertices.len() {
            if i == 0 || distinguishable(vertices[i], vertices[k]) {
                g.add_edge(i, k);
            }
        }
    }
    let clique = g.find_clique_containing(m + 1, 0)?;
    let elements = clique
        .into_iter()
        .map(|v| {
            let r = vertices[v];
            CompositionElement {
                handle: answers.handle(r),
                level: plan.level_of(r),
                block: plan.block_of(r).map(|(_, k)| k),
            }
        })
        .collect();
    Some(Composition { elements })
}

/// The non-adaptive tester: one bulk request laid out by a [`LevelPlan`],
/// then rejection iff a distinguishable composition of size `m + 1` exists.
pub fn run_nonadaptive_test<S: SampleAccess + ?Sized>(
    session: &mut S,
    m: usize,
    eps: f64,
) -> Result<TesterVerdict, TesterError> {
    check_params(m, eps)?;
    let start = counters(session);
    let plan = LevelPlan::new(m, eps, || session.random_index());
    let answers = session.run_nonadaptive(&plan.query_set())?;
    let witness = find_distinguishable_composition(&plan, &answers, m).map(|c| plan.witness(&answers, &c));
    Ok(TesterVerdict::finish(session, start, witness))
}
