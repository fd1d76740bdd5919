use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use serde::Serialize;

use super::{exact, AdversaryError, DrawnParameters, Family, GroundTruthInstance};
use crate::bitdist::{BitString, DistributionSpec};
use crate::oracle::stream_rng;

/// Largest string length for which the restriction check is run exhaustively.
const ENSEMBLE_MAX_N: usize = 24;
const ATTEMPTS: usize = 10_000;

/// Two equal-size string families that no `r` coordinates tell apart.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SecretEnsemble {
    pub h0: Vec<BitString>,
    pub h1: Vec<BitString>,
    /// Every index set of size at most `r` sees the same multiset of restrictions.
    pub r: usize,
}

impl SecretEnsemble {
    pub fn n(&self) -> usize {
        self.h0[0].len()
    }

    /// Smallest normalized distance between two strings of `h0 ∪ h1`;
    /// 0 if some string repeats.
    pub fn min_distance(&self) -> f64 {
        let all: Vec<&BitString> = self.h0.iter().chain(&self.h1).collect();
        let mut best = usize::MAX;
        for (i, x) in all.iter().enumerate() {
            for y in &all[i + 1..] {
                best = best.min(x.hamming_count(y).expect("same length"));
            }
        }
        best as f64 / self.n() as f64
    }

    /// Equal sizes, all pairwise distances above `delta`, and the exhaustive
    /// restriction check for all index sets of size at most `r`.
    pub fn verify(&self, target: usize, delta: f64) -> bool {
        self.h0.len() == target
            && self.h1.len() == target
            && self.min_distance() > delta
            && verify_shared_secret(&self.h0, &self.h1, self.r)
    }
}

fn to_word(s: &BitString) -> u32 {
    (0..s.len()).fold(0, |acc, j| acc | (u32::from(s.bit(j)) << j))
}

fn from_word(w: u32, n: usize) -> BitString {
    BitString::from_bits(&(0..n).map(|j| w >> j & 1 == 1).collect::<Vec<_>>())
}

/// Calls `f` on every subset of `0..n` of size `1..=r`, as a bit mask.
fn for_each_small_subset(n: usize, r: usize, mut f: impl FnMut(u32) -> bool) -> bool {
    fn rec(start: usize, n: usize, left: usize, mask: u32, f: &mut dyn FnMut(u32) -> bool) -> bool {
        for i in start..n {
            let m = mask | 1 << i;
            if !f(m) {
                return false;
            }
            if left > 1 && !rec(i + 1, n, left - 1, m, f) {
                return false;
            }
        }
        true
    }
    r == 0 || rec(0, n, r, 0, &mut f)
}

/// Whether, for every index set `I` with `|I| <= r`, the multisets of
/// restrictions of `h0` and of `h1` to `I` coincide. Exhaustive.
pub fn verify_shared_secret(h0: &[BitString], h1: &[BitString], r: usize) -> bool {
    if h0.len() != h1.len() {
        return false;
    }
    let Some(n) = h0.first().or(h1.first()).map(BitString::len) else {
        return true;
    };
    assert!(n <= 32, "restriction check packs strings into 32-bit words");
    let w0: Vec<u32> = h0.iter().map(to_word).collect();
    let w1: Vec<u32> = h1.iter().map(to_word).collect();
    for_each_small_subset(n, r.min(n), |mask| {
        let mut a: Vec<u32> = w0.iter().map(|w| w & mask).collect();
        let mut b: Vec<u32> = w1.iter().map(|w| w & mask).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    })
}

/// Columns of a `dim x n` generator matrix such that no nonempty set of at
/// most `r` columns sums to zero, which makes the dual distance exceed `r`.
/// Each column is drawn uniformly among nonzero values that are not the sum
/// of fewer than `r` earlier columns; `None` when a column has no such value
/// within a bounded number of tries.
fn random_columns<R: Rng>(n: usize, dim: usize, r: usize, rng: &mut R) -> Option<Vec<u32>> {
    if dim == 0 {
        return (r == 0).then(|| vec![0; n]);
    }
    let values = 1u32 << dim;
    let mut columns: Vec<u32> = Vec::with_capacity(n);
    let mut forbidden: std::collections::HashSet<u32> = std::collections::HashSet::from([0]);
    for _ in 0..n {
        let pick = (0..64).map(|_| rng.gen_range(1..values)).find(|v| r == 0 || !forbidden.contains(v))?;
        columns.push(pick);
        if r >= 2 {
            // Sums of at most r - 1 columns.
            forbidden.clear();
            let len = columns.len();
            forbidden.insert(0);
            for_each_small_subset(len, (r - 1).min(len), |mask| {
                forbidden.insert((0..len).filter(|&j| mask >> j & 1 == 1).fold(0, |acc, j| acc ^ columns[j]));
                true
            });
        }
    }
    Some(columns)
}

/// Two cosets of a random binary linear code of dimension `log2 target` whose
/// dual distance exceeds `r = floor(zeta n)`, so that the uniform distribution
/// on either coset restricted to any `r` coordinates is uniform. The search is
/// seeded and every returned ensemble has passed [`SecretEnsemble::verify`].
pub fn gen_secret_ensemble(
    n: usize,
    target: usize,
    delta: f64,
    zeta: f64,
    seed: u64,
) -> Result<SecretEnsemble, AdversaryError> {
    if n == 0 || n > ENSEMBLE_MAX_N {
        return Err(AdversaryError::ParameterRange(format!("n = {n} outside 1..={ENSEMBLE_MAX_N}")));
    }
    if !target.is_power_of_two() {
        return Err(AdversaryError::ParameterRange(format!("target = {target} is not a power of two")));
    }
    if !(0.0..1.0).contains(&delta) || !(0.0..1.0).contains(&zeta) {
        return Err(AdversaryError::ParameterRange("delta and zeta must lie in [0, 1)".into()));
    }
    let r = crate::fishing::floor_tol(zeta * n as f64);
    let dim = target.trailing_zeros() as usize;
    let full = (1u32 << n) - 1;
    let mut rng = stream_rng(seed, "gen-secret-ensemble");
    for _ in 0..ATTEMPTS {
        let Some(columns) = random_columns(n, dim, r, &mut rng) else {
            continue;
        };
        let rows: Vec<u32> = (0..dim)
            .map(|i| (0..n).fold(0u32, |acc, j| acc | (columns[j] >> i & 1) << j))
            .collect();
        let code: Vec<u32> = (0..target as u32)
            .map(|c| (0..dim).filter(|&i| c >> i & 1 == 1).fold(0, |acc, i| acc ^ rows[i]))
            .collect();
        let mut distinct = code.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != target {
            continue;
        }
        let s0 = rng.gen::<u32>() & full;
        let s1 = rng.gen::<u32>() & full;
        let ens = SecretEnsemble {
            h0: code.iter().map(|&c| from_word(c ^ s0, n)).collect(),
            h1: code.iter().map(|&c| from_word(c ^ s1, n)).collect(),
            r,
        };
        if ens.verify(target, delta) {
            return Ok(ens);
        }
    }
    Err(AdversaryError::ConstructionFailed { attempts: ATTEMPTS })
}

/// Uniform weight `(1 - 4 eps / delta) / |H0|` on `H0` and `(4 eps / delta) / |H1|`
/// on `H1`; `m = 3 |H0| / 2`. The claim of being `eps`-far from `S_m` is
/// recorded and checked with the exact oracle.
pub fn gen_secret_instance(
    ensemble: &SecretEnsemble,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<GroundTruthInstance, AdversaryError> {
    let h = ensemble.h0.len();
    if h == 0 || h % 2 != 0 || ensemble.h1.len() != h {
        return Err(AdversaryError::ParameterRange(format!(
            "|H0| = {h}, |H1| = {} must be equal and even",
            ensemble.h1.len()
        )));
    }
    if !(eps > 0.0 && 4.0 * eps < delta) {
        return Err(AdversaryError::ParameterRange(format!("need 0 < eps < delta/4, got eps = {eps}, delta = {delta}")));
    }
    let light = exact(eps)? * BigRational::from_integer(4.into()) / exact(delta)?;
    let size = BigRational::from_integer(h.into());
    let w0 = (BigRational::one() - &light) / &size;
    let w1 = light / &size;
    let atoms = ensemble
        .h0
        .iter()
        .map(|a| (a.clone(), w0.clone()))
        .chain(ensemble.h1.iter().map(|a| (a.clone(), w1.clone())))
        .collect();
    let dist = DistributionSpec::new_exact(ensemble.n(), atoms)?;
    let mut inst = GroundTruthInstance::new(dist, Family::Secret, seed, DrawnParameters::default());
    inst.claim_far(3 * h / 2, eps)?;
    Ok(inst)
}

/// Ensemble parameters for [`gen_secret_lifted`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct SecretParams {
    /// String length of the ensemble before lifting.
    pub n_base: usize,
    pub delta: f64,
    pub zeta: f64,
}

impl Default for SecretParams {
    fn default() -> Self {
        SecretParams {
            n_base: 16,
            delta: 0.4,
            zeta: 1.0 / 16.0,
        }
    }
}

/// A secret instance against `S_m` at length `n`: an ensemble with
/// `|H0| = 2m/3` strings of length `n_base`, weighted for `eps`, then
/// repetition-lifted to `n`. Needs `3 | m`, `2m/3` a power of two and
/// `n_base | n`.
pub fn gen_secret_lifted(
    m: usize,
    eps: f64,
    n: usize,
    params: SecretParams,
    seed: u64,
) -> Result<GroundTruthInstance, AdversaryError> {
    if m % 3 != 0 || !(2 * m / 3).is_power_of_two() {
        return Err(AdversaryError::ParameterRange(format!("m = {m} is not 3h/2 with h a power of two")));
    }
    if params.n_base == 0 || n % params.n_base != 0 {
        return Err(AdversaryError::ParameterRange(format!("n = {n} is not a multiple of {}", params.n_base)));
    }
    let ens = gen_secret_ensemble(params.n_base, 2 * m / 3, params.delta, params.zeta, seed)?;
    let inst = gen_secret_instance(&ens, eps, params.delta, seed)?;
    super::lift_instance(&inst, n / params.n_base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn small_example_hides_single_coordinates() {
        let h0 = vec![bs("0000"), bs("1111")];
        let h1 = vec![bs("0011"), bs("1100")];
        assert!(verify_shared_secret(&h0, &h1, 1));
        assert!(!verify_shared_secret(&h0, &h1, 2));
    }

    #[test]
    fn subset_enumeration_counts() {
        let mut count = 0;
        for_each_small_subset(6, 2, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 6 + 15);
    }

    #[test]
    fn generated_ensembles_verify() {
        for seed in 0..10 {
            let e = gen_secret_ensemble(16, 2, 0.4, 1.0 / 16.0, seed).unwrap();
            assert_eq!(e.r, 1);
            assert!(e.verify(2, 0.4));
        }
        // Dual distance above 2 needs 12 distinct nonzero columns, so dimension 4.
        assert!(gen_secret_ensemble(12, 4, 0.1, 0.2, 1).is_err());
        let e = gen_secret_ensemble(12, 16, 0.1, 0.2, 1).unwrap();
        assert_eq!(e.r, 2);
        assert!(e.verify(16, 0.1));
    }

    #[test]
    fn lifted_instance_stays_far() {
        let inst = gen_secret_lifted(3, 1.0 / 32.0, 512, SecretParams::default(), 5).unwrap();
        assert_eq!(inst.distribution.n(), 512);
        assert_eq!(inst.drawn.lift, Some(32));
        assert_eq!(inst.farness(), super::super::Farness::Far);
        assert!(gen_secret_lifted(2, 1.0 / 32.0, 512, SecretParams::default(), 5).is_err());
        assert!(gen_secret_lifted(3, 1.0 / 32.0, 500, SecretParams::default(), 5).is_err());
    }

    #[test]
    fn impossible_request_fails() {
        // Four strings pairwise more than 0.7 apart do not exist.
        assert_eq!(
            gen_secret_ensemble(8, 2, 0.7, 0.1, 0),
            Err(AdversaryError::ConstructionFailed { attempts: ATTEMPTS })
        );
    }
}
