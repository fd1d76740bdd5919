//! Seeded generators for hard and in-property instance families, with
//! ground-truth metadata and exact farness verification.

mod secret;

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bitdist::{distance_to_support_m, simple_rational, BitString, DistError, DistributionSpec, Real, SUPPORT_ORACLE_LIMIT};
use crate::oracle::stream_rng;

pub use secret::{
    gen_secret_ensemble, gen_secret_instance, gen_secret_lifted, verify_shared_secret, SecretEnsemble, SecretParams,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversaryError {
    #[error("parameter out of range: {0}")]
    ParameterRange(String),
    #[error("no ensemble found after {attempts} attempts")]
    ConstructionFailed { attempts: usize },
    #[error(transparent)]
    Dist(#[from] DistError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Dno,
    Dyes,
    Anchor,
    Secret,
    SupportM,
    UniformFar,
    PointMass,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Dno => "dno",
            Family::Dyes => "dyes",
            Family::Anchor => "anchor",
            Family::Secret => "secret",
            Family::SupportM => "support-m",
            Family::UniformFar => "uniform-far",
            Family::PointMass => "point-mass",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            Family::Dno,
            Family::Dyes,
            Family::Anchor,
            Family::Secret,
            Family::SupportM,
            Family::UniformFar,
            Family::PointMass,
        ]
        .into_iter()
        .find(|f| f.name() == s)
        .ok_or_else(|| format!("unknown family {s:?}"))
    }
}

/// Random choices made by a generator.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DrawnParameters {
    /// `alpha = 2^-alpha_exponent`.
    pub alpha_exponent: Option<u32>,
    /// The index set `D` (1-based).
    pub d: Option<Vec<usize>>,
    /// The sets `A_1..A_t` (1-based), before merging equal ones.
    pub sets: Vec<Vec<usize>>,
    /// Repetition factor applied after generation.
    pub lift: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Farness {
    Far,
    NotFar,
    Unverified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FarnessClaim {
    pub m: usize,
    pub eps: f64,
}

/// A generated distribution with the parameters that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroundTruthInstance {
    #[serde(serialize_with = "serialize_distribution")]
    pub distribution: DistributionSpec,
    pub family: Family,
    pub seed: u64,
    pub drawn: DrawnParameters,
    pub claimed_far_from_m: Option<FarnessClaim>,
    /// Exact distance to `S_m` for the claimed `m`, when the support is small
    /// enough for the exact oracle.
    pub verified_distance: Option<Real>,
}

fn serialize_distribution<S: serde::Serializer>(d: &DistributionSpec, s: S) -> Result<S::Ok, S::Error> {
    let v: serde_json::Value = serde_json::from_str(&d.to_json()).map_err(serde::ser::Error::custom)?;
    v.serialize(s)
}

impl GroundTruthInstance {
    fn new(distribution: DistributionSpec, family: Family, seed: u64, drawn: DrawnParameters) -> Self {
        GroundTruthInstance {
            distribution,
            family,
            seed,
            drawn,
            claimed_far_from_m: None,
            verified_distance: None,
        }
    }

    /// Records the claim that the distribution is `eps`-far from `S_m` and
    /// checks it with the exact oracle when the support is within its limit.
    pub fn claim_far(&mut self, m: usize, eps: f64) -> Result<Farness, AdversaryError> {
        self.claimed_far_from_m = Some(FarnessClaim { m, eps });
        self.verified_distance = None;
        if self.distribution.support_size() > SUPPORT_ORACLE_LIMIT {
            return Ok(Farness::Unverified);
        }
        self.verified_distance = Some(distance_to_support_m(&self.distribution, m)?.value);
        Ok(self.farness())
    }

    /// Verdict of the last claim.
    pub fn farness(&self) -> Farness {
        match (&self.claimed_far_from_m, &self.verified_distance) {
            (Some(c), Some(d)) => {
                if exceeds(d, c.eps) {
                    Farness::Far
                } else {
                    Farness::NotFar
                }
            }
            _ => Farness::Unverified,
        }
    }

    /// Metadata sidecar: everything except the distribution itself.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "seed": self.seed,
            "n": self.distribution.n(),
            "support_size": self.distribution.support_size(),
            "drawn": self.drawn,
            "claimed_far_from_m": self.claimed_far_from_m,
            "verified_distance": self.verified_distance.as_ref().map(|d| d.to_string()),
            "farness": self.farness(),
        })
    }
}

/// `d > eps`, exactly when `d` is exact.
fn exceeds(d: &Real, eps: f64) -> bool {
    match (d, simple_rational(eps)) {
        (Real::Exact(x), Some(e)) => *x > e,
        _ => d.to_f64() > eps,
    }
}

fn exact(x: f64) -> Result<BigRational, AdversaryError> {
    simple_rational(x).ok_or_else(|| AdversaryError::ParameterRange(format!("{x} is not finite")))
}

/// Largest `L` with `2^L <= 1/eps`.
fn floor_log2_inv(eps: f64) -> u32 {
    let mut l = 0;
    while eps * 2f64.powi(l as i32 + 1) <= 1.0 {
        l += 1;
    }
    l
}

fn check_eps(eps: f64) -> Result<(), AdversaryError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(AdversaryError::ParameterRange(format!("eps = {eps} outside (0, 1)")))
    }
}

fn check_n(n: usize) -> Result<(), AdversaryError> {
    if n == 0 {
        Err(AdversaryError::ParameterRange("n must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `alpha = 2^-r` with `r` uniform on `{2, ..., floor(log2 1/eps) - 2}`.
fn draw_alpha_exponent<R: Rng>(eps: f64, rng: &mut R) -> Result<u32, AdversaryError> {
    check_eps(eps)?;
    let top = floor_log2_inv(eps);
    if top < 4 {
        return Err(AdversaryError::ParameterRange(format!(
            "eps = {eps} too large: floor(log2 1/eps) - 2 = {} < 2",
            top as i64 - 2
        )));
    }
    Ok(rng.gen_range(2..=top - 2))
}

fn subset<R: Rng>(from: impl IntoIterator<Item = usize>, p: f64, rng: &mut R) -> Vec<usize> {
    from.into_iter().filter(|_| rng.gen_bool(p)).collect()
}

/// `0^n` with weight `1 - heavy` and each listed set's indicator with weight
/// `heavy / t`, merging equal atoms.
fn zero_plus_indicators(n: usize, heavy: &BigRational, sets: &[Vec<usize>]) -> Result<DistributionSpec, AdversaryError> {
    let t = BigRational::from_integer(sets.len().into());
    let mut atoms = vec![(BitString::zeros(n), BigRational::one() - heavy)];
    for s in sets {
        atoms.push((BitString::indicator(n, s.iter().copied())?, heavy / &t));
    }
    Ok(DistributionSpec::exact_merged(n, atoms)?)
}

/// The `t`-set construction: `alpha = 2^-r` with `r` uniform on
/// `{2, ..., floor(log2 1/eps) - 2}`; `D` holds each index with probability
/// `4 alpha`; each `A_k` holds each index of `D` with probability `1/2`.
/// `0^n` gets weight `1 - 2 eps / alpha` and each `1_{A_k}` gets `2 eps / (alpha t)`.
pub fn gen_dno(t: usize, eps: f64, n: usize, seed: u64) -> Result<GroundTruthInstance, AdversaryError> {
    if t == 0 {
        return Err(AdversaryError::ParameterRange("t must be at least 1".into()));
    }
    check_n(n)?;
    let mut rng = stream_rng(seed, "gen-dno");
    let r = draw_alpha_exponent(eps, &mut rng)?;
    let alpha = 0.5f64.powi(r as i32);
    let d = subset(1..=n, 4.0 * alpha, &mut rng);
    let sets: Vec<Vec<usize>> = (0..t).map(|_| subset(d.iter().copied(), 0.5, &mut rng)).collect();
    let heavy = exact(eps)? * BigRational::from_integer(2.into()) / exact(alpha)?;
    let dist = zero_plus_indicators(n, &heavy, &sets)?;
    Ok(GroundTruthInstance::new(
        dist,
        Family::Dno,
        seed,
        DrawnParameters {
            alpha_exponent: Some(r),
            d: Some(d),
            sets,
            lift: None,
        },
    ))
}

/// The single-set construction drawn directly: the same `alpha`, one set `A`
/// holding each index with probability `2 alpha`, weights `1 - 2 eps / alpha`
/// on `0^n` and `2 eps / alpha` on `1_A`. Equal in law to `gen_dno` with `t = 1`.
pub fn gen_dyes(eps: f64, n: usize, seed: u64) -> Result<GroundTruthInstance, AdversaryError> {
    check_n(n)?;
    let mut rng = stream_rng(seed, "gen-dyes");
    let r = draw_alpha_exponent(eps, &mut rng)?;
    let alpha = 0.5f64.powi(r as i32);
    let a = subset(1..=n, 2.0 * alpha, &mut rng);
    let heavy = exact(eps)? * BigRational::from_integer(2.into()) / exact(alpha)?;
    let sets = vec![a];
    let dist = zero_plus_indicators(n, &heavy, &sets)?;
    Ok(GroundTruthInstance::new(
        dist,
        Family::Dyes,
        seed,
        DrawnParameters {
            alpha_exponent: Some(r),
            d: None,
            sets,
            lift: None,
        },
    ))
}

/// `0^n` with weight `1 - 10 eps` and `2m` uniform random strings with weight
/// `5 eps / m` each (equal strings merged). The claim of being `eps`-far from
/// `S_m` is recorded and checked when the support is small enough.
pub fn gen_anchor(m: usize, eps: f64, n: usize, seed: u64) -> Result<GroundTruthInstance, AdversaryError> {
    check_eps(eps)?;
    check_n(n)?;
    if m == 0 {
        return Err(AdversaryError::ParameterRange("m must be at least 1".into()));
    }
    if 10.0 * eps > 1.0 {
        return Err(AdversaryError::ParameterRange(format!("10 eps = {} exceeds 1", 10.0 * eps)));
    }
    let mut rng = stream_rng(seed, "gen-anchor");
    let e = exact(eps)?;
    let each = &e * BigRational::from_integer(5.into()) / BigRational::from_integer(m.into());
    let mut atoms = vec![(BitString::zeros(n), BigRational::one() - &e * BigRational::from_integer(10.into()))];
    for _ in 0..2 * m {
        atoms.push((BitString::random(n, &mut rng), each.clone()));
    }
    let dist = DistributionSpec::exact_merged(n, atoms)?;
    let mut inst = GroundTruthInstance::new(dist, Family::Anchor, seed, DrawnParameters::default());
    inst.claim_far(m, eps)?;
    Ok(inst)
}

/// Each atom replaced by its `l`-fold concatenation; weights unchanged.
pub fn repetition_lift(p: &DistributionSpec, l: usize) -> Result<DistributionSpec, AdversaryError> {
    if l == 0 {
        return Err(AdversaryError::ParameterRange("l must be at least 1".into()));
    }
    let n = p.n() * l;
    let atoms: Vec<BitString> = p.atoms().iter().map(|a| a.repeat(l)).collect();
    Ok(match p.exact_weights() {
        Some(w) => DistributionSpec::new_exact(n, atoms.into_iter().zip(w.iter().cloned()).collect())?,
        None => DistributionSpec::new_float(n, atoms.into_iter().zip(p.float_weights()).collect())?,
    })
}

/// The instance with every atom repeated `l` times; any farness claim is
/// re-checked on the lifted distribution.
pub fn lift_instance(inst: &GroundTruthInstance, l: usize) -> Result<GroundTruthInstance, AdversaryError> {
    let mut drawn = inst.drawn.clone();
    drawn.lift = Some(inst.drawn.lift.unwrap_or(1) * l);
    let mut out = GroundTruthInstance::new(repetition_lift(&inst.distribution, l)?, inst.family, inst.seed, drawn);
    if let Some(c) = &inst.claimed_far_from_m {
        out.claim_far(c.m, c.eps)?;
    }
    Ok(out)
}

/// A random distribution with between 1 and `m` atoms and small integer
/// weights. Half of the seeds draw atoms as light perturbations of one base
/// string, so that they are close to each other.
pub fn gen_support_m(m: usize, n: usize, seed: u64) -> Result<GroundTruthInstance, AdversaryError> {
    check_n(n)?;
    if m == 0 {
        return Err(AdversaryError::ParameterRange("m must be at least 1".into()));
    }
    let mut rng = stream_rng(seed, "gen-support-m");
    let k = rng.gen_range(1..=m);
    let clustered = rng.gen_bool(0.5);
    let base = BitString::random(n, &mut rng);
    let flip = (2.0 / n as f64).min(0.5);
    let mut atoms: BTreeSet<BitString> = BTreeSet::new();
    // At most k draws succeed; duplicates simply lower the support size.
    for _ in 0..k {
        let s = if clustered {
            let noise: Vec<bool> = (0..n).map(|_| rng.gen_bool(flip)).collect();
            base.xor(&BitString::from_bits(&noise))?
        } else {
            BitString::random(n, &mut rng)
        };
        atoms.insert(s);
    }
    let mut atoms: Vec<BitString> = atoms.into_iter().collect();
    atoms.shuffle(&mut rng);
    let raw: Vec<u32> = atoms.iter().map(|_| rng.gen_range(1..=16)).collect();
    let total: u32 = raw.iter().sum();
    let weighted = atoms
        .into_iter()
        .zip(raw)
        .map(|(a, w)| (a, BigRational::new(w.into(), total.into())))
        .collect();
    let dist = DistributionSpec::new_exact(n, weighted)?;
    Ok(GroundTruthInstance::new(dist, Family::SupportM, seed, DrawnParameters::default()))
}

/// Uniform over `k` uniform random strings (equal strings merged).
pub fn gen_uniform_far(k: usize, n: usize, seed: u64) -> Result<GroundTruthInstance, AdversaryError> {
    check_n(n)?;
    if k == 0 {
        return Err(AdversaryError::ParameterRange("k must be at least 1".into()));
    }
    let mut rng = stream_rng(seed, "gen-uniform-far");
    let w = BigRational::new(1.into(), k.into());
    let atoms = (0..k).map(|_| (BitString::random(n, &mut rng), w.clone())).collect();
    let dist = DistributionSpec::exact_merged(n, atoms)?;
    Ok(GroundTruthInstance::new(dist, Family::UniformFar, seed, DrawnParameters::default()))
}

/// A point mass on a uniform random string.
pub fn gen_point_mass(n: usize, seed: u64) -> Result<GroundTruthInstance, AdversaryError> {
    check_n(n)?;
    let mut rng = stream_rng(seed, "gen-point-mass");
    let dist = DistributionSpec::point_mass(BitString::random(n, &mut rng));
    Ok(GroundTruthInstance::new(dist, Family::PointMass, seed, DrawnParameters::default()))
}
