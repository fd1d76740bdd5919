use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use suppsize::bitdist::{BitString, DistributionSpec};
use suppsize::oracle::{Budgets, Event, OracleSession, QueryLog, SampleAccess, SampleHandle};

fn bs(s: &str) -> BitString {
    s.parse().unwrap()
}

fn uniform(strings: &[&str]) -> DistributionSpec {
    DistributionSpec::uniform(strings[0].len(), strings.iter().map(|s| bs(s)).collect()).unwrap()
}

fn scripted_run(p: &DistributionSpec, seed: u64) -> (Vec<bool>, QueryLog) {
    let mut s = OracleSession::open(p.clone(), seed, Budgets::unlimited());
    let mut answers = Vec::new();
    for _ in 0..20 {
        let h = s.draw_sample().unwrap();
        let j = s.random_index();
        answers.push(s.query(h, j).unwrap());
        answers.push(s.query(h, 1).unwrap());
    }
    (answers, s.log().clone())
}

#[test]
fn same_seed_same_transcript() {
    let p = uniform(&["0000", "0110", "1011", "1111"]);
    assert_eq!(scripted_run(&p, 42), scripted_run(&p, 42));
}

#[test]
fn different_seeds_give_different_streams() {
    // Two seeds agree on 10 draws with probability (sum p_i^2)^10 = 4^-10;
    // over 4950 pairs the expected number of agreeing pairs is below 0.005.
    let p = uniform(&["00", "01", "10", "11"]);
    let streams: Vec<Vec<usize>> = (0..100)
        .map(|seed| {
            let mut s = OracleSession::open(p.clone(), seed, Budgets::unlimited());
            (0..10)
                .map(|_| {
                    let h = s.draw_sample().unwrap();
                    s.reveal_atom(h).unwrap()
                })
                .collect()
        })
        .collect();
    let mut agreeing = 0;
    for a in 0..streams.len() {
        for b in a + 1..streams.len() {
            if streams[a] == streams[b] {
                agreeing += 1;
            }
        }
    }
    assert!(agreeing <= 1, "{agreeing} agreeing pairs");
}

#[test]
fn point_mass_samples_are_identical() {
    let p = DistributionSpec::point_mass(bs("10110"));
    for seed in 0..5 {
        let mut s = OracleSession::open(p.clone(), seed, Budgets::unlimited());
        for _ in 0..5 {
            let h = s.draw_sample().unwrap();
            let bits: Vec<bool> = (1..=5).map(|j| s.query(h, j).unwrap()).collect();
            assert_eq!(BitString::from_bits(&bits), bs("10110"));
        }
    }
}

#[test]
fn fair_coin_frequency() {
    // 10000 Bernoulli(1/2) draws: standard deviation of the frequency is 0.005,
    // so +-0.02 is a four-sigma interval.
    let p = uniform(&["0", "1"]);
    let mut s = OracleSession::open(p, 7, Budgets::unlimited());
    let mut ones = 0;
    for _ in 0..10_000 {
        let h = s.draw_sample().unwrap();
        if s.query(h, 1).unwrap() {
            ones += 1;
        }
    }
    let freq = ones as f64 / 10_000.0;
    assert!((freq - 0.5).abs() <= 0.02, "{freq}");
}

#[test]
fn weighted_sampling_matches_weights() {
    let p = DistributionSpec::new_float(2, vec![(bs("00"), 0.1), (bs("01"), 0.2), (bs("10"), 0.7)]).unwrap();
    let mut s = OracleSession::open(p, 9, Budgets::unlimited());
    let mut counts = [0usize; 3];
    for _ in 0..20_000 {
        let h = s.draw_sample().unwrap();
        counts[s.reveal_atom(h).unwrap()] += 1;
    }
    for (c, w) in counts.iter().zip([0.1, 0.2, 0.7]) {
        let f = *c as f64 / 20_000.0;
        let se = (w * (1.0 - w) / 20_000.0f64).sqrt();
        assert!((f - w).abs() < 4.0 * se, "{f} vs {w}");
    }
}

#[test]
fn bulk_matches_sequential_replay() {
    let p = uniform(&["000111", "101010", "110011", "011100"]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..20 {
        let q: Vec<(usize, usize)> = (0..30).map(|_| (rng.gen_range(0..8), rng.gen_range(1..=6))).collect();
        let distinct: std::collections::BTreeSet<(usize, usize)> = q.iter().copied().collect();
        let mut bulk = OracleSession::open(p.clone(), seed, Budgets::unlimited());
        let ans = bulk.run_nonadaptive(&q).unwrap();
        let mut seq = OracleSession::open(p.clone(), seed, Budgets::unlimited());
        let max = q.iter().map(|&(r, _)| r).max().unwrap();
        let handles: Vec<SampleHandle> = (0..=max).map(|_| seq.draw_sample().unwrap()).collect();
        let mut order: Vec<_> = distinct.iter().copied().collect();
        order.reverse();
        for (r, j) in order {
            assert_eq!(seq.query(handles[r], j).unwrap(), ans.get(r, j).unwrap());
        }
        assert_eq!(bulk.queries_used(), distinct.len());
        assert_eq!(bulk.samples_used(), max + 1);
        assert_eq!(bulk.log().bulk_spans().len(), 1);
    }
}

#[test]
fn bulk_over_point_mass() {
    let p = DistributionSpec::point_mass(bs("101"));
    let mut s = OracleSession::open(p, 0, Budgets::unlimited());
    let ans = s.run_nonadaptive(&[(0, 1), (0, 2), (1, 3), (0, 1)]).unwrap();
    assert_eq!(s.queries_used(), 3);
    assert_eq!(ans.get(0, 1), Some(true));
    assert_eq!(ans.get(0, 2), Some(false));
    assert_eq!(ans.get(1, 3), Some(true));
}

#[test]
fn counters_match_events_and_replay() {
    let p = uniform(&["0101", "1100", "0011"]);
    let mut s = OracleSession::open(p, 11, Budgets::unlimited());
    for _ in 0..10 {
        let h = s.draw_sample().unwrap();
        for _ in 0..3 {
            let j = s.random_index();
            s.query(h, j).unwrap();
        }
    }
    s.run_nonadaptive(&[(0, 2), (3, 4)]).unwrap();
    let log = s.log();
    let samples = log.events().iter().filter(|e| matches!(e, Event::Sample(_))).count();
    let queries = log.events().iter().filter(|e| matches!(e, Event::Query { .. })).count();
    assert_eq!(samples, s.samples_used());
    assert_eq!(queries, s.queries_used());
    assert!(log.replays_against(&s.drawn_strings()));
    assert_eq!(QueryLog::from_jsonl(&log.to_jsonl()).unwrap().events(), log.events());
}

#[test]
fn public_surface_is_blind_to_unqueried_coordinates() {
    // Restricted to coordinates 1..=3 both distributions are uniform on
    // {000, 111} with the same atom order, so every public output coincides.
    let a = uniform(&["0000", "1111"]);
    let b = uniform(&["0001", "1110"]);
    for seed in 0..10 {
        let mut sa = OracleSession::open(a.clone(), seed, Budgets::unlimited());
        let mut sb = OracleSession::open(b.clone(), seed, Budgets::unlimited());
        for _ in 0..10 {
            let ha = sa.draw_sample().unwrap();
            let hb = sb.draw_sample().unwrap();
            assert_eq!(ha, hb);
            for j in 1..=3 {
                assert_eq!(sa.query(ha, j).unwrap(), sb.query(hb, j).unwrap());
            }
            assert_eq!(sa.random_index(), sb.random_index());
        }
        assert_eq!(sa.log().to_jsonl(), sb.log().to_jsonl());
    }
}
