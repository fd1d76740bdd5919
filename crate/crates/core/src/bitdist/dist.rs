use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::scalar::{parse_rational, ratio_to_f64, Real, Scalar, FLOAT_TOLERANCE};
use super::{BitString, DistError};

/// Atom weights, either all exact or all floating-point.
#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

impl Weights {
    pub fn len(&self) -> usize {
        match self {
            Weights::Exact(w) => w.len(),
            Weights::Float(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_f64(&self, i: usize) -> f64 {
        match self {
            Weights::Exact(w) => ratio_to_f64(&w[i]),
            Weights::Float(w) => w[i],
        }
    }

    pub fn get(&self, i: usize) -> Real {
        match self {
            Weights::Exact(w) => Real::Exact(w[i].clone()),
            Weights::Float(w) => Real::Float(w[i]),
        }
    }
}

/// An explicit distribution over `{0,1}^n`: distinct atoms with positive weights
/// summing to one.
///
/// Atom order is significant: sampling walks the cumulative weights in this order.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionSpec {
    n: usize,
    atoms: Vec<BitString>,
    weights: Weights,
}

impl DistributionSpec {
    pub fn new_exact(n: usize, atoms: Vec<(BitString, BigRational)>) -> Result<Self, DistError> {
        let (atoms, weights): (Vec<_>, Vec<_>) = atoms.into_iter().unzip();
        Self::validated(n, atoms, Weights::Exact(weights))
    }

    pub fn new_float(n: usize, atoms: Vec<(BitString, f64)>) -> Result<Self, DistError> {
        let (atoms, weights): (Vec<_>, Vec<_>) = atoms.into_iter().unzip();
        Self::validated(n, atoms, Weights::Float(weights))
    }

    /// Like [`DistributionSpec::new_exact`] but sums the weights of repeated atoms,
    /// keeping first-appearance order. Zero-weight entries are dropped.
    pub fn exact_merged(n: usize, atoms: Vec<(BitString, BigRational)>) -> Result<Self, DistError> {
        let mut order: Vec<BitString> = Vec::new();
        let mut acc: HashMap<BitString, BigRational> = HashMap::new();
        for (a, w) in atoms {
            if w.is_zero() {
                continue;
            }
            match acc.get_mut(&a) {
                Some(x) => *x += w,
                None => {
                    order.push(a.clone());
                    acc.insert(a, w);
                }
            }
        }
        let merged = order
            .into_iter()
            .map(|a| {
                let w = acc.remove(&a).expect("present");
                (a, w)
            })
            .collect();
        Self::new_exact(n, merged)
    }

    /// Uniform exact distribution over distinct strings.
    pub fn uniform(n: usize, atoms: Vec<BitString>) -> Result<Self, DistError> {
        let k = atoms.len();
        if k == 0 {
            return Err(DistError::Empty);
        }
        let w = BigRational::new(1.into(), k.into());
        Self::new_exact(n, atoms.into_iter().map(|a| (a, w.clone())).collect())
    }

    pub fn point_mass(atom: BitString) -> Self {
        let n = atom.len();
        Self::new_exact(n, vec![(atom, BigRational::one())]).expect("point mass is valid")
    }

    fn validated(n: usize, atoms: Vec<BitString>, weights: Weights) -> Result<Self, DistError> {
        if n == 0 {
            return Err(DistError::ZeroLength);
        }
        if atoms.is_empty() {
            return Err(DistError::Empty);
        }
        let mut seen = HashMap::with_capacity(atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            if a.len() != n {
                return Err(DistError::LengthMismatch {
                    left: n,
                    right: a.len(),
                });
            }
            if let Some(prev) = seen.insert(a, i) {
                return Err(DistError::DuplicateAtom {
                    first: prev,
                    second: i,
                });
            }
        }
        match &weights {
            Weights::Exact(w) => {
                if let Some(i) = w.iter().position(|x| !x.is_positive()) {
                    return Err(DistError::NonPositiveWeight { index: i });
                }
                let total: BigRational = w.iter().cloned().sum();
                if !total.is_one() {
                    return Err(DistError::NotNormalized {
                        total: ratio_to_f64(&total),
                    });
                }
            }
            Weights::Float(w) => {
                if let Some(i) = w.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(DistError::NonPositiveWeight { index: i });
                }
                let total: f64 = w.iter().sum();
                if (total - 1.0).abs() > FLOAT_TOLERANCE {
                    return Err(DistError::NotNormalized { total });
                }
            }
        }
        Ok(DistributionSpec { n, atoms, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[BitString] {
        &self.atoms
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn weight_f64(&self, i: usize) -> f64 {
        self.weights.get_f64(i)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.weights, Weights::Exact(_))
    }

    pub fn iter_f64(&self) -> impl Iterator<Item = (&BitString, f64)> + '_ {
        self.atoms.iter().enumerate().map(move |(i, a)| (a, self.weight_f64(i)))
    }

    /// Exact weights, if this distribution carries them.
    pub fn exact_weights(&self) -> Option<&[BigRational]> {
        match &self.weights {
            Weights::Exact(w) => Some(w),
            Weights::Float(_) => None,
        }
    }

    pub fn float_weights(&self) -> Vec<f64> {
        (0..self.atoms.len()).map(|i| self.weight_f64(i)).collect()
    }

    /// The same distribution with floating-point weights.
    pub fn to_float(&self) -> DistributionSpec {
        DistributionSpec {
            n: self.n,
            atoms: self.atoms.clone(),
            weights: Weights::Float(self.float_weights()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, DistError> {
        let doc: DistributionDoc =
            serde_json::from_str(text).map_err(|e| DistError::Json(e.to_string()))?;
        Self::from_doc(doc)
    }

    fn to_doc(&self) -> DistributionDoc {
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| AtomDoc {
                bits: a.to_string(),
                weight: match &self.weights {
                    Weights::Exact(w) => WeightDoc::Text(w[i].to_string()),
                    Weights::Float(w) => WeightDoc::Number(w[i]),
                },
            })
            .collect();
        DistributionDoc { n: self.n, atoms }
    }

    fn from_doc(doc: DistributionDoc) -> Result<Self, DistError> {
        let mut bits = Vec::with_capacity(doc.atoms.len());
        let mut exact = Vec::new();
        let mut float = Vec::new();
        let mut all_exact = true;
        for atom in doc.atoms {
            bits.push(atom.bits.parse::<BitString>()?);
            match atom.weight {
                WeightDoc::Text(t) => {
                    let r = parse_rational(&t).ok_or(DistError::BadWeight(t))?;
                    float.push(ratio_to_f64(&r));
                    exact.push(r);
                }
                WeightDoc::Number(x) => {
                    all_exact = false;
                    float.push(x);
                }
            }
        }
        let weights = if all_exact {
            Weights::Exact(exact)
        } else {
            Weights::Float(float)
        };
        Self::validated(doc.n, bits, weights)
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionDoc {
    n: usize,
    atoms: Vec<AtomDoc>,
}

#[derive(Serialize, Deserialize)]
struct AtomDoc {
    bits: String,
    weight: WeightDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WeightDoc {
    Number(f64),
    Text(String),
}

/// Normalized Hamming distance `|{i : u_i != v_i}| / n`.
pub fn hamming_distance(u: &BitString, v: &BitString) -> Result<f64, DistError> {
    let k = u.hamming_count(v)?;
    Ok(k as f64 / u.len() as f64)
}

/// Minimum normalized Hamming distance from `x` to a member of `set`.
pub fn distance_to_set(x: &BitString, set: &[BitString]) -> Result<f64, DistError> {
    if set.is_empty() {
        return Err(DistError::EmptySet);
    }
    let mut best = usize::MAX;
    for v in set {
        best = best.min(x.hamming_count(v)?);
    }
    Ok(best as f64 / x.len() as f64)
}

/// Half the L1 distance between the weight vectors.
pub fn variation_distance(p: &DistributionSpec, q: &DistributionSpec) -> Result<Real, DistError> {
    if p.n() != q.n() {
        return Err(DistError::DimensionMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    match (p.exact_weights(), q.exact_weights()) {
        (Some(pw), Some(qw)) => Ok(Real::Exact(tv_generic(p.atoms(), pw, q.atoms(), qw))),
        _ => Ok(Real::Float(tv_generic(
            p.atoms(),
            &p.float_weights(),
            q.atoms(),
            &q.float_weights(),
        ))),
    }
}

fn tv_generic<T: Scalar>(pa: &[BitString], pw: &[T], qa: &[BitString], qw: &[T]) -> T {
    let mut diff: HashMap<&BitString, T> = HashMap::new();
    for (a, w) in pa.iter().zip(pw) {
        diff.insert(a, w.clone());
    }
    for (a, w) in qa.iter().zip(qw) {
        let entry = diff.entry(a).or_insert_with(T::zero);
        *entry = entry.clone() - w.clone();
    }
    let mut total = T::zero();
    for v in diff.into_values() {
        let abs = if v < T::zero() { T::zero() - v } else { v };
        total = total + abs;
    }
    total / T::from_count(2)
}

/// Pushforward of `p` under `f`; atoms mapped to the same string merge.
pub fn sample_map<F>(p: &DistributionSpec, f: F) -> Result<DistributionSpec, DistError>
where
    F: Fn(&BitString) -> BitString,
{
    let images: Vec<BitString> = p.atoms().iter().map(&f).collect();
    let n_out = images[0].len();
    if let Some(bad) = images.iter().find(|b| b.len() != n_out) {
        return Err(DistError::LengthMismatch {
            left: n_out,
            right: bad.len(),
        });
    }
    if n_out != p.n() {
        return Err(DistError::LengthChanged {
            before: p.n(),
            after: n_out,
        });
    }
    match p.exact_weights() {
        Some(w) => DistributionSpec::exact_merged(n_out, images.into_iter().zip(w.iter().cloned()).collect()),
        None => {
            let mut order: Vec<BitString> = Vec::new();
            let mut acc: HashMap<BitString, f64> = HashMap::new();
            for (b, w) in images.into_iter().zip(p.float_weights()) {
                if !acc.contains_key(&b) {
                    order.push(b.clone());
                }
                *acc.entry(b).or_insert(0.0) += w;
            }
            let atoms = order
                .into_iter()
                .map(|b| {
                    let w = acc[&b];
                    (b, w)
                })
                .collect();
            DistributionSpec::new_float(n_out, atoms)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&bs("000"), &bs("000")).unwrap(), 0.0);
        assert_eq!(hamming_distance(&bs("000"), &bs("111")).unwrap(), 1.0);
        assert_eq!(hamming_distance(&bs("0011"), &bs("0101")).unwrap(), 0.5);
        assert!(matches!(
            hamming_distance(&bs("00"), &bs("000")),
            Err(DistError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn distance_to_set_examples() {
        let d = distance_to_set(&bs("111"), &[bs("000"), bs("110")]).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(distance_to_set(&bs("101"), &[bs("000"), bs("101")]).unwrap(), 0.0);
        assert_eq!(distance_to_set(&bs("0000"), &[bs("1111"), bs("1100")]).unwrap(), 0.5);
        assert!(matches!(distance_to_set(&bs("0"), &[]), Err(DistError::EmptySet)));
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(matches!(
            DistributionSpec::new_exact(2, vec![(bs("00"), q(1, 2))]),
            Err(DistError::NotNormalized { .. })
        ));
        assert!(matches!(
            DistributionSpec::new_exact(2, vec![(bs("00"), q(1, 2)), (bs("00"), q(1, 2))]),
            Err(DistError::DuplicateAtom { .. })
        ));
        assert!(matches!(
            DistributionSpec::new_exact(2, vec![(bs("00"), q(3, 2)), (bs("01"), q(-1, 2))]),
            Err(DistError::NonPositiveWeight { index: 1 })
        ));
        assert!(matches!(
            DistributionSpec::new_float(2, vec![(bs("001"), 1.0)]),
            Err(DistError::LengthMismatch { .. })
        ));
        assert!(DistributionSpec::new_float(2, vec![(bs("00"), 0.5), (bs("01"), 0.5 + 1e-14)]).is_ok());
    }

    #[test]
    fn json_round_trip_keeps_mode() {
        let p = DistributionSpec::new_exact(3, vec![(bs("001"), q(1, 3)), (bs("110"), q(2, 3))]).unwrap();
        let text = p.to_json();
        assert!(text.contains("\"1/3\""));
        assert_eq!(DistributionSpec::from_json(&text).unwrap(), p);

        let f = DistributionSpec::new_float(1, vec![(bs("0"), 0.25), (bs("1"), 0.75)]).unwrap();
        let back = DistributionSpec::from_json(&f.to_json()).unwrap();
        assert!(!back.is_exact());
        assert_eq!(back, f);
    }

    #[test]
    fn json_accepts_decimal_strings_and_numbers() {
        let text = r#"{"n": 2, "atoms": [{"bits": "01", "weight": "0.5"}, {"bits": "10", "weight": "1/2"}]}"#;
        let p = DistributionSpec::from_json(text).unwrap();
        assert!(p.is_exact());
        let text = r#"{"n": 2, "atoms": [{"bits": "01", "weight": 0.5}, {"bits": "10", "weight": "1/2"}]}"#;
        assert!(!DistributionSpec::from_json(text).unwrap().is_exact());
    }

    #[test]
    fn variation_distance_examples() {
        let p = DistributionSpec::new_float(1, vec![(bs("0"), 0.75), (bs("1"), 0.25)]).unwrap();
        let r = DistributionSpec::new_float(1, vec![(bs("0"), 0.25), (bs("1"), 0.75)]).unwrap();
        assert!((variation_distance(&p, &r).unwrap().to_f64() - 0.5).abs() < 1e-15);
        assert!(variation_distance(&p, &p).unwrap().is_zero());
        let a = DistributionSpec::point_mass(bs("0"));
        let b = DistributionSpec::point_mass(bs("1"));
        assert_eq!(variation_distance(&a, &b).unwrap(), Real::Exact(BigRational::one()));
        let c = DistributionSpec::point_mass(bs("00"));
        assert!(matches!(
            variation_distance(&a, &c),
            Err(DistError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sample_map_examples() {
        let p = DistributionSpec::uniform(2, vec![bs("01"), bs("10")]).unwrap();
        assert_eq!(sample_map(&p, |x| x.clone()).unwrap(), p);
        let collapsed = sample_map(&p, |_| bs("00")).unwrap();
        assert_eq!(collapsed, DistributionSpec::point_mass(bs("00")));
        let reversed = sample_map(&p, |x| {
            let bits: Vec<bool> = x.iter().collect::<Vec<_>>().into_iter().rev().collect();
            BitString::from_bits(&bits)
        })
        .unwrap();
        assert!(variation_distance(&reversed, &p).unwrap().is_zero());
        assert!(matches!(
            sample_map(&p, |_| bs("000")),
            Err(DistError::LengthChanged { .. })
        ));
    }
}
