#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use suppsize::bitdist::{BitString, DistributionSpec};

/// Exact distance to `S_m` by enumerating every `m`-subset of `{0,1}^n` as
/// candidate centers. Independent of the partition method; only for `n <= 6`.
pub fn center_enumeration_distance(p: &DistributionSpec, m: usize) -> BigRational {
    let n = p.n();
    assert!(n <= 6);
    let weights = p.exact_weights().expect("exact instance");
    let denom = weights.iter().fold(BigInt::from(1), |acc, w| num_integer::lcm(acc, w.denom().clone()));
    let numers: Vec<i64> = weights
        .iter()
        .map(|w| i64::try_from(w.numer() * (&denom / w.denom())).unwrap())
        .collect();
    let atoms: Vec<u32> = p
        .atoms()
        .iter()
        .map(|a| (0..n).fold(0u32, |acc, j| acc | (u32::from(a.bit(j)) << j)))
        .collect();
    let universe = 1u32 << n;
    let m = m.min(universe as usize);
    let mut best = i64::MAX;
    let mut centers: Vec<u32> = (0..m as u32).collect();
    loop {
        let cost: i64 = atoms
            .iter()
            .zip(&numers)
            .map(|(&x, &w)| w * centers.iter().map(|&c| (x ^ c).count_ones()).min().unwrap() as i64)
            .sum();
        best = best.min(cost);
        // Next m-combination of 0..universe in lexicographic order.
        let mut i = m;
        loop {
            if i == 0 {
                return BigRational::new(BigInt::from(best), denom * BigInt::from(n));
            }
            i -= 1;
            if centers[i] < universe - (m - i) as u32 {
                centers[i] += 1;
                for t in i + 1..m {
                    centers[t] = centers[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Random exact distribution with `k` distinct atoms over `{0,1}^n` and small integer weights.
pub fn random_exact_instance<R: Rng>(rng: &mut R, n: usize, k: usize) -> DistributionSpec {
    assert!(k as u64 <= 1u64 << n.min(63));
    let mut atoms: Vec<BitString> = Vec::new();
    while atoms.len() < k {
        let s = BitString::random(n, rng);
        if !atoms.contains(&s) {
            atoms.push(s);
        }
    }
    let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=12)).collect();
    let total: i64 = raw.iter().sum();
    DistributionSpec::new_exact(
        n,
        atoms
            .into_iter()
            .zip(raw)
            .map(|(a, w)| (a, BigRational::new(w.into(), total.into())))
            .collect(),
    )
    .unwrap()
}
