use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use suppsize::bitdist::{BitString, DistributionSpec};
use suppsize::oracle::{Budgets, OracleSession, SampleAccess};
use suppsize::witness::{BitGraph, ContradictionGraph};

fn random_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

fn brute_force_has_clique(n: usize, edges: &[(usize, usize)], k: usize) -> bool {
    let set: HashSet<(usize, usize)> = edges.iter().copied().collect();
    (0u32..1 << n).filter(|s| s.count_ones() as usize == k).any(|s| {
        let vs: Vec<usize> = (0..n).filter(|&v| s >> v & 1 == 1).collect();
        vs.iter()
            .enumerate()
            .all(|(i, &a)| vs[i + 1..].iter().all(|&b| set.contains(&(a, b))))
    })
}

fn brute_force_colorable(n: usize, edges: &[(usize, usize)], m: usize) -> bool {
    let total = (m as u64).pow(n as u32);
    (0..total).any(|code| {
        let colors: Vec<u64> = (0..n).map(|v| code / (m as u64).pow(v as u32) % m as u64).collect();
        edges.iter().all(|&(a, b)| colors[a] != colors[b])
    })
}

#[test]
fn clique_search_matches_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let edges = random_edges(&mut rng, 10, 0.5);
        let g = ContradictionGraph::realizing(10, &edges);
        let mut bg = BitGraph::new(10);
        edges.iter().for_each(|&(a, b)| bg.add_edge(a, b));
        for k in 1..=7 {
            let expected = brute_force_has_clique(10, &edges, k);
            let found = g.find_clique(k);
            assert_eq!(found.is_some(), expected, "k={k} edges={edges:?}");
            if let Some(c) = found {
                assert_eq!(c.len(), k);
                assert!(g.clique_certificates(&c).is_some());
            }
            assert_eq!(bg.find_clique(k).is_some(), expected);
        }
    }
}

#[test]
fn coloring_matches_exhaustive_assignment() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..60 {
        let n = rng.gen_range(1..=8);
        let p = rng.gen_range(0.2..0.9);
        let edges = random_edges(&mut rng, n, p);
        let g = ContradictionGraph::realizing(n, &edges);
        for m in 1..=4 {
            let got = g.is_m_colorable(m).unwrap();
            assert_eq!(got.is_some(), brute_force_colorable(n, &edges, m), "m={m} {edges:?}");
            if let Some(c) = got {
                assert!(g.is_proper_coloring(&c));
                assert!(c.iter().all(|&x| x < m));
            }
        }
    }
}

#[test]
fn clique_implies_not_colorable() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let edges = random_edges(&mut rng, 12, 0.6);
        let g = ContradictionGraph::realizing(12, &edges);
        for k in 2..=6 {
            if g.find_clique(k).is_some() {
                assert_eq!(g.is_m_colorable(k - 1).unwrap(), None);
            }
        }
    }
}

/// Runs a random adaptive-looking query pattern against a random distribution.
fn random_session(seed: u64) -> (OracleSession, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=8);
    let k = rng.gen_range(1..=6usize.min(1 << n));
    let mut atoms: Vec<BitString> = Vec::new();
    while atoms.len() < k {
        let s = BitString::random(n, &mut rng);
        if !atoms.contains(&s) {
            atoms.push(s);
        }
    }
    let p = DistributionSpec::uniform(n, atoms).unwrap();
    let mut s = OracleSession::open(p, seed, Budgets::unlimited());
    let draws = rng.gen_range(1..=12);
    let mut handles = Vec::new();
    for _ in 0..draws {
        handles.push(s.draw_sample().unwrap());
        for _ in 0..rng.gen_range(0..=n) {
            let h = handles[rng.gen_range(0..handles.len())];
            let j = rng.gen_range(1..=n);
            s.query(h, j).unwrap();
        }
    }
    (s, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn capacity_counts_distinct_queries(seed in any::<u64>()) {
        let (s, _) = random_session(seed);
        let g = ContradictionGraph::from_log(s.log()).unwrap();
        let distinct: HashSet<_> = s.log().queries().map(|(h, j, _)| (h, j)).collect();
        prop_assert_eq!(g.edge_cover_capacity(), distinct.len());
        for (_, l, r) in g.groups() {
            let ls: HashSet<_> = l.iter().collect();
            prop_assert!(r.iter().all(|x| !ls.contains(x)));
        }
    }

    #[test]
    fn non_colorable_transcripts_are_sound_and_meet_hansel(seed in any::<u64>(), m in 1usize..5) {
        let (s, _) = random_session(seed);
        let g = ContradictionGraph::from_log(s.log()).unwrap();
        let report = g.check_hansel_bound(m);
        prop_assert!(report.holds);
        if report.colorable == Some(false) {
            let distinct: HashSet<String> = s.drawn_strings().iter().map(|x| x.to_string()).collect();
            prop_assert!(distinct.len() > m);
        }
        if let Some(c) = g.find_clique(m + 1) {
            prop_assert!(g.capacity_of(&c) as f64 >= report.bound);
        }
        for e in g.edges() {
            prop_assert_ne!(s.reveal(e.a).unwrap().bit(e.j - 1), s.reveal(e.b).unwrap().bit(e.j - 1));
        }
    }
}
