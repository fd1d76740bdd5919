use fixedbitset::FixedBitSet;
use thiserror::Error;

/// Vertex limit for exact coloring, applied per component after reduction.
pub const COLORING_GUARD: usize = 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("coloring scale exceeded: component of {size} vertices after reduction, limit {limit}")]
    ScaleExceeded { size: usize, limit: usize },
}

/// Undirected simple graph with bitset adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitGraph {
    adj: Vec<FixedBitSet>,
}

impl BitGraph {
    pub fn new(n: usize) -> Self {
        BitGraph {
            adj: vec![FixedBitSet::with_capacity(n); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for a in 0..n {
            for b in a + 1..n {
                g.add_edge(a, b);
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b, "self-loop at {a}");
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    /// Adds edges from `a` to every member of `others`.
    pub fn add_edges_from(&mut self, a: usize, others: &FixedBitSet) {
        self.adj[a].union_with(others);
        for b in others.ones() {
            self.adj[b].insert(a);
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    pub fn neighbors(&self, a: usize) -> &FixedBitSet {
        &self.adj[a]
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adj[a].count_ones(..)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.count_ones(..)).sum::<usize>() / 2
    }

    /// Vertices surviving iterative removal of vertices with fewer than `d`
    /// neighbours among the survivors, plus the removed vertices in removal order.
    pub fn core(&self, d: usize) -> (FixedBitSet, Vec<usize>) {
        let n = self.len();
        let mut alive = FixedBitSet::with_capacity(n);
        alive.insert_range(..);
        let mut deg: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] < d).collect();
        let mut removed = Vec::new();
        while let Some(v) = stack.pop() {
            if !alive.contains(v) {
                continue;
            }
            alive.set(v, false);
            removed.push(v);
            for w in self.adj[v].ones() {
                if alive.contains(w) {
                    deg[w] -= 1;
                    if deg[w] + 1 == d {
                        stack.push(w);
                    }
                }
            }
        }
        (alive, removed)
    }

    /// A clique of exactly `k` vertices, if one exists. Exact branch and bound.
    pub fn find_clique(&self, k: usize) -> Option<Vec<usize>> {
        let mut all = FixedBitSet::with_capacity(self.len());
        all.insert_range(..);
        self.find_clique_within(k, &all)
    }

    /// A `k`-clique containing `u`, if one exists.
    pub fn find_clique_containing(&self, k: usize, u: usize) -> Option<Vec<usize>> {
        if k == 0 {
            return Some(Vec::new());
        }
        let mut cand = self.adj[u].clone();
        let (core, _) = self.core(k - 1);
        cand.intersect_with(&core);
        if k > 1 && !core.contains(u) {
            return None;
        }
        let mut r = vec![u];
        if self.expand(k, &mut r, cand) {
            Some(r)
        } else {
            None
        }
    }

    /// A `k`-clique using only vertices in `allowed`.
    pub fn find_clique_within(&self, k: usize, allowed: &FixedBitSet) -> Option<Vec<usize>> {
        if k == 0 {
            return Some(Vec::new());
        }
        let (mut cand, _) = self.core(k - 1);
        cand.intersect_with(allowed);
        let mut r = Vec::new();
        if self.expand(k, &mut r, cand) {
            Some(r)
        } else {
            None
        }
    }

    fn expand(&self, k: usize, r: &mut Vec<usize>, mut p: FixedBitSet) -> bool {
        if r.len() == k {
            return true;
        }
        let need = k - r.len();
        if p.count_ones(..) < need {
            return false;
        }
        if greedy_color_bound(self, &p) < need {
            return false;
        }
        let order: Vec<usize> = p.ones().collect();
        for v in order {
            if !p.contains(v) {
                continue;
            }
            let mut next = p.clone();
            next.intersect_with(&self.adj[v]);
            r.push(v);
            if self.expand(k, r, next) {
                return true;
            }
            r.pop();
            p.set(v, false);
            if p.count_ones(..) < need {
                return false;
            }
        }
        false
    }

    /// Exact `m`-coloring search.
    ///
    /// Vertices outside the `m`-core are colored greedily afterwards; each core
    /// component is searched by backtracking in degree order and must have at
    /// most [`COLORING_GUARD`] vertices. Returns the coloring when one exists.
    pub fn color(&self, m: usize) -> Result<Option<Vec<usize>>, GraphError> {
        let n = self.len();
        if n == 0 {
            return Ok(Some(Vec::new()));
        }
        if m == 0 {
            return Ok(None);
        }
        let (core, removed) = self.core(m);
        let mut colors = vec![usize::MAX; n];
        let mut seen = FixedBitSet::with_capacity(n);
        for start in core.ones() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = vec![start];
            seen.insert(start);
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                for w in self.adj[v].ones() {
                    if core.contains(w) && !seen.contains(w) {
                        seen.insert(w);
                        comp.push(w);
                    }
                }
                i += 1;
            }
            if comp.len() > COLORING_GUARD {
                return Err(GraphError::ScaleExceeded {
                    size: comp.len(),
                    limit: COLORING_GUARD,
                });
            }
            comp.sort_by_key(|&v| (std::cmp::Reverse(self.degree(v)), v));
            if !self.backtrack(&comp, 0, m, 0, &mut colors) {
                return Ok(None);
            }
        }
        for &v in removed.iter().rev() {
            let used: Vec<bool> = {
                let mut u = vec![false; m];
                for w in self.adj[v].ones() {
                    if colors[w] != usize::MAX {
                        u[colors[w]] = true;
                    }
                }
                u
            };
            colors[v] = used.iter().position(|&b| !b).expect("fewer than m colored neighbours");
        }
        debug_assert!(self.is_proper(&colors, m));
        Ok(Some(colors))
    }

    fn backtrack(&self, order: &[usize], pos: usize, m: usize, used: usize, colors: &mut [usize]) -> bool {
        if pos == order.len() {
            return true;
        }
        let v = order[pos];
        // Colors beyond `used` are interchangeable; try only the first fresh one.
        for c in 0..m.min(used + 1) {
            if self.adj[v].ones().any(|w| colors[w] == c) {
                continue;
            }
            colors[v] = c;
            if self.backtrack(order, pos + 1, m, used.max(c + 1), colors) {
                return true;
            }
        }
        colors[v] = usize::MAX;
        false
    }

    /// Whether `colors` assigns each vertex a color below `m` with no monochromatic edge.
    pub fn is_proper(&self, colors: &[usize], m: usize) -> bool {
        colors.len() == self.len()
            && colors.iter().all(|&c| c < m)
            && (0..self.len()).all(|v| self.adj[v].ones().all(|w| colors[w] != colors[v]))
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices
            .iter()
            .enumerate()
            .all(|(i, &a)| vertices[i + 1..].iter().all(|&b| a != b && self.has_edge(a, b)))
    }
}

/// Number of color classes in a greedy coloring of the subgraph induced by `p`:
/// an upper bound on its clique number.
fn greedy_color_bound(g: &BitGraph, p: &FixedBitSet) -> usize {
    let mut uncolored = p.clone();
    let mut classes = 0;
    while !uncolored.is_clear() {
        classes += 1;
        let mut available = uncolored.clone();
        while let Some(v) = available.ones().next() {
            available.set(v, false);
            available.difference_with(&g.adj[v]);
            uncolored.set(v, false);
        }
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> BitGraph {
        let mut g = BitGraph::new(3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(0, 2);
        g
    }

    #[test]
    fn coloring_examples() {
        assert_eq!(BitGraph::new(0).color(1).unwrap(), Some(vec![]));
        assert!(BitGraph::new(4).color(1).unwrap().is_some());
        assert_eq!(triangle().color(2).unwrap(), None);
        let c = triangle().color(3).unwrap().unwrap();
        assert!(triangle().is_proper(&c, 3));
        for m in 1..6 {
            assert_eq!(BitGraph::complete(m + 1).color(m).unwrap(), None);
            assert!(BitGraph::complete(m + 1).color(m + 1).unwrap().is_some());
        }
    }

    #[test]
    fn clique_examples() {
        assert_eq!(BitGraph::new(5).find_clique(2), None);
        assert_eq!(BitGraph::new(5).find_clique(1).map(|c| c.len()), Some(1));
        let mut c = BitGraph::complete(5).find_clique(5).unwrap();
        c.sort();
        assert_eq!(c, vec![0, 1, 2, 3, 4]);
        assert_eq!(triangle().find_clique_containing(3, 2).map(|c| c.len()), Some(3));
        assert_eq!(triangle().find_clique(4), None);
    }

    #[test]
    fn guard_applies_after_reduction() {
        // A long path reduces to nothing for m = 2, so no guard error.
        let mut path = BitGraph::new(200);
        for v in 0..199 {
            path.add_edge(v, v + 1);
        }
        assert!(path.color(2).unwrap().is_some());
        // An odd cycle of 41 vertices survives the 2-core intact.
        let mut cycle = BitGraph::new(41);
        for v in 0..41 {
            cycle.add_edge(v, (v + 1) % 41);
        }
        assert!(matches!(cycle.color(2), Err(GraphError::ScaleExceeded { size: 41, .. })));
        assert!(cycle.color(3).unwrap().is_some());
    }
}
