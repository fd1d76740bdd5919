use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::Serialize;

use super::scalar::Real;
use super::{BitString, DistError, DistributionSpec};

/// Largest support the exact partition oracle accepts.
pub const SUPPORT_ORACLE_LIMIT: usize = 12;

/// Distance from a distribution to the set of distributions supported on at
/// most `m` strings, with an optimal clustering.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportDistance {
    pub value: Real,
    pub centers: Vec<BitString>,
    /// `assignment[i]` is the index into `centers` serving atom `i`.
    pub assignment: Vec<usize>,
}

/// Exact distance to `S_m`: the minimum over partitions of the support into at
/// most `m` clusters of the weighted Hamming cost to each cluster's weighted
/// coordinate-wise majority (ties resolve to 0).
///
/// Runs a subset dynamic program in `O(m * 3^k)` for `k` atoms.
pub fn distance_to_support_m(p: &DistributionSpec, m: usize) -> Result<SupportDistance, DistError> {
    if m == 0 {
        return Err(DistError::InvalidM);
    }
    let k = p.support_size();
    if k > SUPPORT_ORACLE_LIMIT {
        return Err(DistError::OracleScaleExceeded {
            atoms: k,
            limit: SUPPORT_ORACLE_LIMIT,
        });
    }
    let n = p.n();
    if m >= k {
        return Ok(SupportDistance {
            value: if p.is_exact() {
                Real::Exact(BigRational::zero())
            } else {
                Real::Float(0.0)
            },
            centers: p.atoms().to_vec(),
            assignment: (0..k).collect(),
        });
    }
    let patterns = column_patterns(p);
    match p.exact_weights() {
        Some(w) => {
            let denom = w.iter().fold(BigInt::from(1), |acc, r| acc.lcm(r.denom()));
            let numers: Vec<BigInt> = w.iter().map(|r| r.numer() * (&denom / r.denom())).collect();
            let bound = BigInt::from(n) * &denom;
            let (cost, clusters) = if bound.bits() < 120 {
                let small: Vec<i128> = numers.iter().map(|x| x.to_i128().expect("fits")).collect();
                let (c, cl) = solve(&small, &patterns, m);
                (BigInt::from(c), cl)
            } else {
                solve(&numers, &patterns, m)
            };
            let value = BigRational::new(cost, bound);
            let (centers, assignment) = realize(p, &numers, &clusters);
            Ok(SupportDistance {
                value: Real::Exact(value),
                centers,
                assignment,
            })
        }
        None => {
            let w = p.float_weights();
            let (cost, clusters) = solve(&w, &patterns, m);
            let (centers, assignment) = realize(p, &w, &clusters);
            Ok(SupportDistance {
                value: Real::Float(cost / n as f64),
                centers,
                assignment,
            })
        }
    }
}

/// Distinct columns of the atom matrix as atom bitmasks, with multiplicities.
fn column_patterns(p: &DistributionSpec) -> Vec<(usize, usize)> {
    let mut counts = std::collections::BTreeMap::new();
    for j in 0..p.n() {
        let mut mask = 0usize;
        for (i, a) in p.atoms().iter().enumerate() {
            if a.bit(j) {
                mask |= 1 << i;
            }
        }
        *counts.entry(mask).or_insert(0usize) += 1;
    }
    counts.into_iter().collect()
}

/// Optimal cost (in weight-times-coordinate units) and the optimal clusters as masks.
fn solve<T>(weights: &[T], patterns: &[(usize, usize)], m: usize) -> (T, Vec<usize>)
where
    T: Clone + PartialOrd + Zero + Add<Output = T> + Mul<Output = T> + FromPrimitive,
{
    let k = weights.len();
    let full = (1usize << k) - 1;
    let mut subset_weight = vec![T::zero(); 1 << k];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        subset_weight[mask] = subset_weight[mask & (mask - 1)].clone() + weights[low].clone();
    }
    let mut cluster_cost = vec![T::zero(); 1 << k];
    for mask in 1..=full {
        let mut total = T::zero();
        for &(pattern, mult) in patterns {
            let ones = subset_weight[mask & pattern].clone();
            let zeros = subset_weight[mask & !pattern].clone();
            let minority = if ones < zeros { ones } else { zeros };
            total = total + minority * T::from_usize(mult).expect("column count fits");
        }
        cluster_cost[mask] = total;
    }

    let levels = m.min(k);
    // best[r][mask]: cheapest split of `mask` into at most r + 1 clusters.
    let mut best: Vec<Vec<T>> = vec![cluster_cost.clone()];
    let mut choice: Vec<Vec<usize>> = vec![(0..=full).collect()];
    for r in 1..levels {
        let prev = &best[r - 1];
        let mut cur = prev.clone();
        let mut pick: Vec<usize> = (0..=full).collect();
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            // Enumerate proper submasks `sub` of `mask` containing its lowest bit.
            let mut s = rest;
            loop {
                let sub = s | low;
                if sub != mask {
                    let cand = cluster_cost[sub].clone() + prev[mask ^ sub].clone();
                    if cand < cur[mask] {
                        cur[mask] = cand;
                        pick[mask] = sub;
                    }
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & rest;
            }
        }
        best.push(cur);
        choice.push(pick);
    }

    let mut clusters = Vec::new();
    let mut mask = full;
    let mut r = levels - 1;
    while mask != 0 {
        if r == 0 {
            clusters.push(mask);
            break;
        }
        let sub = choice[r][mask];
        if sub != mask {
            clusters.push(sub);
            mask ^= sub;
        }
        r -= 1;
    }
    (best[levels - 1][full].clone(), clusters)
}

fn realize<T>(p: &DistributionSpec, weights: &[T], clusters: &[usize]) -> (Vec<BitString>, Vec<usize>)
where
    T: Clone + PartialOrd + Zero + Add<Output = T>,
{
    let mut assignment = vec![usize::MAX; p.support_size()];
    let mut centers = Vec::with_capacity(clusters.len());
    for (ci, &mask) in clusters.iter().enumerate() {
        let members: Vec<usize> = (0..p.support_size()).filter(|i| mask >> i & 1 == 1).collect();
        let bits: Vec<bool> = (0..p.n())
            .map(|j| {
                let mut ones = T::zero();
                let mut zeros = T::zero();
                for &i in &members {
                    if p.atoms()[i].bit(j) {
                        ones = ones + weights[i].clone();
                    } else {
                        zeros = zeros + weights[i].clone();
                    }
                }
                ones > zeros
            })
            .collect();
        centers.push(BitString::from_bits(&bits));
        for i in members {
            assignment[i] = ci;
        }
    }
    (centers, assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn inside_property_is_zero() {
        let p = DistributionSpec::uniform(3, vec![bs("000"), bs("111")]).unwrap();
        assert!(distance_to_support_m(&p, 2).unwrap().value.is_zero());
        assert!(distance_to_support_m(&p, 5).unwrap().value.is_zero());
    }

    #[test]
    fn two_antipodes_one_center() {
        let p = DistributionSpec::uniform(3, vec![bs("000"), bs("111")]).unwrap();
        let r = distance_to_support_m(&p, 1).unwrap();
        assert_eq!(r.value, Real::Exact(BigRational::new(1.into(), 2.into())));
        assert_eq!(r.centers, vec![bs("000")]);
        assert_eq!(r.assignment, vec![0, 0]);
    }

    #[test]
    fn four_points_two_centers() {
        let p = DistributionSpec::uniform(4, vec![bs("0000"), bs("0011"), bs("1100"), bs("1111")]).unwrap();
        let r = distance_to_support_m(&p, 2).unwrap();
        assert_eq!(r.value, Real::Exact(BigRational::new(1.into(), 4.into())));
        assert_eq!(r.centers.len(), 2);
    }

    #[test]
    fn reported_clustering_achieves_value() {
        let p = DistributionSpec::new_float(
            5,
            vec![
                (bs("00000"), 0.3),
                (bs("00011"), 0.2),
                (bs("11100"), 0.25),
                (bs("11111"), 0.15),
                (bs("10101"), 0.1),
            ],
        )
        .unwrap();
        for m in 1..=4 {
            let r = distance_to_support_m(&p, m).unwrap();
            assert!(r.centers.len() <= m);
            let achieved: f64 = p
                .iter_f64()
                .enumerate()
                .map(|(i, (a, w))| w * a.hamming_count(&r.centers[r.assignment[i]]).unwrap() as f64 / 5.0)
                .sum();
            assert!((achieved - r.value.to_f64()).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn guards() {
        let p = DistributionSpec::point_mass(bs("0"));
        assert_eq!(distance_to_support_m(&p, 0), Err(DistError::InvalidM));
        let atoms: Vec<BitString> = (0..13).map(|i| BitString::indicator(13, [i + 1]).unwrap()).collect();
        let big = DistributionSpec::uniform(13, atoms).unwrap();
        assert!(matches!(
            distance_to_support_m(&big, 2),
            Err(DistError::OracleScaleExceeded { atoms: 13, .. })
        ));
    }
}
