//! Contradiction graphs built from transcripts, exact colorability and clique
//! search, and witness verification.
//!
//! Two samples are adjacent when some index was queried on both with different
//! answers; the smallest such index is the edge's certificate. An `(m+1)`-clique
//! proves that the hidden distribution has more than `m` support elements.

mod graph;

use std::collections::{BTreeMap, HashMap};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::{BitGraph, GraphError, COLORING_GUARD};

use crate::oracle::{QueryLog, SampleHandle};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("sample {i} answered both 0 and 1 at index {j}")]
    InconsistentAnswer { i: usize, j: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An edge with its certifying index (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub a: SampleHandle,
    pub b: SampleHandle,
    pub j: usize,
}

/// An explicit witness against `m`-support: pairwise-certified distinct samples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub clique: Vec<SampleHandle>,
    pub certificates: Vec<Edge>,
}

/// `(m+1) * log2(m+1)`: the least capacity of any witness against `m`-support.
pub fn hansel_bound(m: usize) -> f64 {
    let v = (m + 1) as f64;
    v * v.log2()
}

#[derive(Clone, Debug)]
struct Quotient {
    class_of: Vec<u32>,
    members: Vec<Vec<u32>>,
    graph: BitGraph,
}

/// Samples as vertices, edges proven by differing answers at a common index.
///
/// Edges are derived on demand from per-sample query views; algorithms run on
/// the quotient that merges samples with identical views, which is exact for
/// cliques and colorings because such samples have identical neighbourhoods
/// and are never adjacent to each other.
#[derive(Clone, Debug)]
pub struct ContradictionGraph {
    views: Vec<Vec<(u32, bool)>>,
    groups: BTreeMap<u32, (Vec<u32>, Vec<u32>)>,
    quotient: Quotient,
}

impl ContradictionGraph {
    /// Builds the graph over every sample in the log.
    pub fn from_log(log: &QueryLog) -> Result<Self, WitnessError> {
        let mut views: Vec<Vec<(u32, bool)>> = vec![Vec::new(); log.samples_used()];
        for (h, j, a) in log.queries() {
            views[h.index()].push((j as u32, a));
        }
        Self::from_raw_views(views)
    }

    /// Builds the graph from per-sample lists of `(index, answer)` pairs.
    pub fn from_views(views: Vec<Vec<(usize, bool)>>) -> Result<Self, WitnessError> {
        Self::from_raw_views(
            views
                .into_iter()
                .map(|v| v.into_iter().map(|(j, a)| (j as u32, a)).collect())
                .collect(),
        )
    }

    /// A graph realizing an arbitrary edge list: edge `e` gets its own index `e + 1`.
    pub fn realizing(vertices: usize, edges: &[(usize, usize)]) -> Self {
        let mut views = vec![Vec::new(); vertices];
        for (e, &(a, b)) in edges.iter().enumerate() {
            views[a].push((e + 1, false));
            views[b].push((e + 1, true));
        }
        Self::from_views(views).expect("consistent by construction")
    }

    fn from_raw_views(mut views: Vec<Vec<(u32, bool)>>) -> Result<Self, WitnessError> {
        for (i, v) in views.iter_mut().enumerate() {
            v.sort_unstable();
            v.dedup();
            if let Some(w) = v.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(WitnessError::InconsistentAnswer { i, j: w[0].0 as usize });
            }
        }
        let mut groups: BTreeMap<u32, (Vec<u32>, Vec<u32>)> = BTreeMap::new();
        for (i, v) in views.iter().enumerate() {
            for &(j, a) in v {
                let g = groups.entry(j).or_default();
                if a {
                    g.1.push(i as u32);
                } else {
                    g.0.push(i as u32);
                }
            }
        }
        let quotient = build_quotient(&views, &groups);
        Ok(ContradictionGraph { views, groups, quotient })
    }

    pub fn vertex_count(&self) -> usize {
        self.views.len()
    }

    /// Number of classes of samples with identical query views.
    pub fn class_count(&self) -> usize {
        self.quotient.members.len()
    }

    /// Sorted `(index, answer)` pairs recorded for a sample.
    pub fn view(&self, h: SampleHandle) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.views[h.index()].iter().map(|&(j, a)| (j as usize, a))
    }

    /// Smallest index at which both samples were queried with different answers.
    pub fn certificate(&self, a: SampleHandle, b: SampleHandle) -> Option<usize> {
        let (x, y) = (&self.views[a.index()], &self.views[b.index()]);
        let (mut p, mut q) = (0, 0);
        while p < x.len() && q < y.len() {
            match x[p].0.cmp(&y[q].0) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    if x[p].1 != y[q].1 {
                        return Some(x[p].0 as usize);
                    }
                    p += 1;
                    q += 1;
                }
            }
        }
        None
    }

    pub fn has_edge(&self, a: SampleHandle, b: SampleHandle) -> bool {
        self.certificate(a, b).is_some()
    }

    /// Every edge with its certificate. Quadratic in the worst case.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        let q = &self.quotient;
        for ca in 0..q.members.len() {
            for cb in q.graph.neighbors(ca).ones().filter(|&cb| cb > ca) {
                for &a in &q.members[ca] {
                    for &b in &q.members[cb] {
                        let (a, b) = (SampleHandle(a.min(b)), SampleHandle(a.max(b)));
                        let j = self.certificate(a, b).expect("quotient edge");
                        out.push(Edge { a, b, j });
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// `(j, L_j, R_j)`: samples answering 0 and 1 at each queried index.
    pub fn groups(&self) -> impl Iterator<Item = (usize, Vec<SampleHandle>, Vec<SampleHandle>)> + '_ {
        self.groups.iter().map(|(&j, (l, r))| {
            (
                j as usize,
                l.iter().map(|&i| SampleHandle(i)).collect(),
                r.iter().map(|&i| SampleHandle(i)).collect(),
            )
        })
    }

    /// Sum over queried indices of `|S_j|`, which is the number of distinct
    /// `(sample, index)` queries in the transcript.
    pub fn edge_cover_capacity(&self) -> usize {
        self.views.iter().map(Vec::len).sum()
    }

    /// Capacity of the transcript restricted to the given samples.
    pub fn capacity_of(&self, vertices: &[SampleHandle]) -> usize {
        vertices.iter().map(|h| self.views[h.index()].len()).sum()
    }

    /// A clique of `k` samples, if one exists. Exact.
    pub fn find_clique(&self, k: usize) -> Option<Vec<SampleHandle>> {
        let classes = self.quotient.graph.find_clique(k)?;
        Some(self.representatives(&classes))
    }

    /// A clique of `k` samples containing `u`, if one exists. Exact.
    pub fn find_clique_containing(&self, k: usize, u: SampleHandle) -> Option<Vec<SampleHandle>> {
        let cu = self.quotient.class_of[u.index()] as usize;
        let classes = self.quotient.graph.find_clique_containing(k, cu)?;
        let mut out: Vec<SampleHandle> = vec![u];
        out.extend(self.representatives(&classes[1..]));
        Some(out)
    }

    fn representatives(&self, classes: &[usize]) -> Vec<SampleHandle> {
        classes
            .iter()
            .map(|&c| SampleHandle(self.quotient.members[c][0]))
            .collect()
    }

    /// Exact `m`-colorability. `Ok(Some(coloring))` when colorable (one color
    /// per sample), `Ok(None)` when not.
    ///
    /// Tries to find an `(m+1)`-clique first; otherwise runs exact backtracking
    /// under the per-component size guard.
    pub fn is_m_colorable(&self, m: usize) -> Result<Option<Vec<usize>>, WitnessError> {
        if self.quotient.graph.find_clique(m + 1).is_some() {
            return Ok(None);
        }
        let Some(class_colors) = self.quotient.graph.color(m)? else {
            return Ok(None);
        };
        let coloring: Vec<usize> = self
            .quotient
            .class_of
            .iter()
            .map(|&c| class_colors[c as usize])
            .collect();
        assert!(self.is_proper_coloring(&coloring), "backtracking produced an improper coloring");
        Ok(Some(coloring))
    }

    /// A coloring is proper iff no color appears on both sides of any index group.
    pub fn is_proper_coloring(&self, colors: &[usize]) -> bool {
        colors.len() == self.views.len()
            && self.groups.values().all(|(l, r)| {
                let zero: std::collections::HashSet<usize> = l.iter().map(|&i| colors[i as usize]).collect();
                r.iter().all(|&i| !zero.contains(&colors[i as usize]))
            })
    }

    /// Certificates for every pair of `vertices`, or `None` if some pair is not adjacent.
    pub fn clique_certificates(&self, vertices: &[SampleHandle]) -> Option<Vec<Edge>> {
        let mut out = Vec::new();
        for (i, &a) in vertices.iter().enumerate() {
            for &b in &vertices[i + 1..] {
                if a.index() >= self.views.len() || b.index() >= self.views.len() {
                    return None;
                }
                let j = self.certificate(a, b)?;
                out.push(Edge { a, b, j });
            }
        }
        Some(out)
    }

    /// Checks the capacity lower bound for witnesses against `m`-support.
    pub fn check_hansel_bound(&self, m: usize) -> HanselReport {
        let capacity = self.edge_cover_capacity();
        let bound = hansel_bound(m);
        let colorable = if self.quotient.graph.find_clique(m + 1).is_some() {
            Some(false)
        } else {
            match self.quotient.graph.color(m) {
                Ok(c) => Some(c.is_some()),
                Err(_) => None,
            }
        };
        let holds = match colorable {
            Some(true) => true,
            _ => capacity as f64 >= bound,
        };
        HanselReport {
            colorable,
            capacity,
            bound,
            holds,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let groups: Vec<serde_json::Value> = self
            .groups()
            .map(|(j, l, r)| serde_json::json!({"j": j, "zero": l, "one": r}))
            .collect();
        serde_json::json!({
            "vertices": (0..self.views.len()).collect::<Vec<_>>(),
            "edges": self.edges(),
            "groups": groups,
        })
    }
}

fn build_quotient(views: &[Vec<(u32, bool)>], groups: &BTreeMap<u32, (Vec<u32>, Vec<u32>)>) -> Quotient {
    let mut index: HashMap<&[(u32, bool)], u32> = HashMap::new();
    let mut class_of = Vec::with_capacity(views.len());
    let mut members: Vec<Vec<u32>> = Vec::new();
    for (i, v) in views.iter().enumerate() {
        let next = members.len() as u32;
        let c = *index.entry(v.as_slice()).or_insert(next);
        if c == next {
            members.push(Vec::new());
        }
        members[c as usize].push(i as u32);
        class_of.push(c);
    }
    let classes = members.len();
    let mut graph = BitGraph::new(classes);
    for (l, r) in groups.values() {
        let mut lc: Vec<usize> = l.iter().map(|&i| class_of[i as usize] as usize).collect();
        let mut rc: Vec<usize> = r.iter().map(|&i| class_of[i as usize] as usize).collect();
        lc.sort_unstable();
        lc.dedup();
        rc.sort_unstable();
        rc.dedup();
        if lc.len() * rc.len() <= (lc.len() + rc.len()) * (classes / 64 + 1) {
            for &a in &lc {
                for &b in &rc {
                    graph.add_edge(a, b);
                }
            }
        } else {
            let mut rset = FixedBitSet::with_capacity(classes);
            rc.iter().for_each(|&b| rset.insert(b));
            for &a in &lc {
                graph.add_edges_from(a, &rset);
            }
        }
    }
    Quotient {
        class_of,
        members,
        graph,
    }
}

/// Outcome of [`ContradictionGraph::check_hansel_bound`].
///
/// `colorable` is `None` when exact coloring exceeded the size guard; the
/// bound is then checked as if the graph were not colorable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HanselReport {
    pub colorable: Option<bool>,
    pub capacity: usize,
    pub bound: f64,
    pub holds: bool,
}

/// Verdict of checking a tester's witness against its transcript.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessCheck {
    /// Clique has `m+1` distinct samples and every certificate is a real edge.
    pub valid: bool,
    /// Queries on the witness samples alone.
    pub witness_capacity: usize,
    pub total_capacity: usize,
    pub bound: f64,
    pub bound_holds: bool,
}

/// Verifies that `witness` is an `(m+1)`-clique of the transcript's contradiction
/// graph whose stated certificates are the smallest certifying indices, and that
/// the witness samples carry at least `(m+1) log2(m+1)` queries.
pub fn verify_witness(graph: &ContradictionGraph, witness: &Witness, m: usize) -> WitnessCheck {
    let mut distinct = witness.clique.clone();
    distinct.sort();
    distinct.dedup();
    let certs = graph.clique_certificates(&witness.clique);
    let certificates_match = match &certs {
        Some(expected) => {
            let mut a: Vec<Edge> = expected.iter().map(normalize).collect();
            let mut b: Vec<Edge> = witness.certificates.iter().map(normalize).collect();
            a.sort();
            b.sort();
            a == b
        }
        None => false,
    };
    let valid = distinct.len() == m + 1 && witness.clique.len() == m + 1 && certificates_match;
    let witness_capacity = if certs.is_some() { graph.capacity_of(&distinct) } else { 0 };
    let bound = hansel_bound(m);
    WitnessCheck {
        valid,
        witness_capacity,
        total_capacity: graph.edge_cover_capacity(),
        bound,
        bound_holds: valid && witness_capacity as f64 >= bound,
    }
}

fn normalize(e: &Edge) -> Edge {
    Edge {
        a: e.a.min(e.b),
        b: e.a.max(e.b),
        j: e.j,
    }
}
