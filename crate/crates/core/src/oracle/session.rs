use std::sync::Arc;

use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::rng::stream_rng;
use super::{BulkAnswers, OracleError, QueryLog, Resource, SampleAccess, SampleHandle};
use crate::bitdist::{BitString, DistributionSpec};

/// Optional caps on samples and queries for one session.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budgets {
    pub max_samples: Option<usize>,
    pub max_queries: Option<usize>,
}

impl Budgets {
    pub fn unlimited() -> Self {
        Self::default()
    }
}

enum Cumulative {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

/// A seeded sample-then-query session over a hidden distribution.
///
/// Sample ordinal `i` is drawn from the `"sample"` stream with ChaCha stream
/// id `i`: one uniform `f64` in `[0,1)` inverted through the cumulative weights
/// in atom order. The draw therefore depends only on `(distribution, seed, i)`.
/// Algorithmic randomness comes from the separate `"alg"` stream.
pub struct OracleSession {
    dist: Arc<DistributionSpec>,
    cumulative: Cumulative,
    sample_base: ChaCha20Rng,
    alg: ChaCha20Rng,
    budgets: Budgets,
    drawn: Vec<u32>,
    log: QueryLog,
}

impl OracleSession {
    pub fn open(dist: impl Into<Arc<DistributionSpec>>, seed: u64, budgets: Budgets) -> Self {
        let dist = dist.into();
        let cumulative = match dist.exact_weights() {
            Some(w) => {
                let mut acc = BigRational::from_integer(0.into());
                Cumulative::Exact(
                    w.iter()
                        .map(|x| {
                            acc += x;
                            acc.clone()
                        })
                        .collect(),
                )
            }
            None => {
                let mut acc = 0.0;
                Cumulative::Float(
                    dist.float_weights()
                        .iter()
                        .map(|x| {
                            acc += x;
                            acc
                        })
                        .collect(),
                )
            }
        };
        OracleSession {
            dist,
            cumulative,
            sample_base: stream_rng(seed, "sample"),
            alg: stream_rng(seed, "alg"),
            budgets,
            drawn: Vec::new(),
            log: QueryLog::new(),
        }
    }

    fn atom_for_ordinal(&self, ordinal: usize) -> u32 {
        let mut rng = self.sample_base.clone();
        rng.set_stream(ordinal as u64);
        rng.set_word_pos(0);
        let u: f64 = rng.gen();
        let k = self.dist.support_size();
        let idx = match &self.cumulative {
            Cumulative::Float(c) => c.partition_point(|&x| x <= u),
            Cumulative::Exact(c) => {
                let u = BigRational::from_float(u).expect("finite");
                c.partition_point(|x| *x <= u)
            }
        };
        idx.min(k - 1) as u32
    }

    fn check_sample_budget(&self, extra: usize) -> Result<(), OracleError> {
        if let Some(limit) = self.budgets.max_samples {
            if self.drawn.len() + extra > limit {
                return Err(OracleError::BudgetExceeded {
                    resource: Resource::Samples,
                    limit,
                });
            }
        }
        Ok(())
    }

    fn check_query_budget(&self, extra: usize) -> Result<(), OracleError> {
        if let Some(limit) = self.budgets.max_queries {
            if self.log.queries_used() + extra > limit {
                return Err(OracleError::BudgetExceeded {
                    resource: Resource::Queries,
                    limit,
                });
            }
        }
        Ok(())
    }

    fn push_sample(&mut self) -> SampleHandle {
        let h = SampleHandle(self.drawn.len() as u32);
        let atom = self.atom_for_ordinal(self.drawn.len());
        self.drawn.push(atom);
        self.log.push_sample(h);
        h
    }

    fn answer(&self, h: SampleHandle, j: usize) -> bool {
        self.dist.atoms()[self.drawn[h.index()] as usize].bit(j - 1)
    }

    /// Keeps counting but stops storing transcript events. For large
    /// benchmark runs whose transcripts are not inspected.
    pub fn set_recording(&mut self, on: bool) {
        self.log.set_recording(on);
    }

    pub fn log(&self) -> &QueryLog {
        &self.log
    }

    pub fn budgets(&self) -> Budgets {
        self.budgets
    }

    /// Ground truth for harness diagnostics. Testers never see this.
    pub fn distribution(&self) -> &DistributionSpec {
        &self.dist
    }

    /// The hidden string behind a handle. Harness-side only.
    pub fn reveal(&self, h: SampleHandle) -> Option<&BitString> {
        self.drawn.get(h.index()).map(|&a| &self.dist.atoms()[a as usize])
    }

    /// Atom index (in the distribution's atom order) behind a handle. Harness-side only.
    pub fn reveal_atom(&self, h: SampleHandle) -> Option<usize> {
        self.drawn.get(h.index()).map(|&a| a as usize)
    }

    /// All hidden strings in draw order. Harness-side only.
    pub fn drawn_strings(&self) -> Vec<BitString> {
        self.drawn.iter().map(|&a| self.dist.atoms()[a as usize].clone()).collect()
    }
}

impl SampleAccess for OracleSession {
    fn n(&self) -> usize {
        self.dist.n()
    }

    fn draw_sample(&mut self) -> Result<SampleHandle, OracleError> {
        self.check_sample_budget(1)?;
        Ok(self.push_sample())
    }

    fn query(&mut self, h: SampleHandle, j: usize) -> Result<bool, OracleError> {
        if h.index() >= self.drawn.len() {
            return Err(OracleError::UnknownHandle(h.index()));
        }
        if j == 0 || j > self.n() {
            return Err(OracleError::IndexOutOfRange { j, n: self.n() });
        }
        self.check_query_budget(1)?;
        let a = self.answer(h, j);
        self.log.push_query(h, j, a);
        Ok(a)
    }

    fn run_nonadaptive(&mut self, queries: &[(usize, usize)]) -> Result<BulkAnswers, OracleError> {
        let base = self.drawn.len() as u32;
        let n = self.n();
        if let Some(&(_, j)) = queries.iter().find(|&&(_, j)| j == 0 || j > n) {
            return Err(OracleError::IndexOutOfRange { j, n });
        }
        let mut set: Vec<(u32, u32)> = queries.iter().map(|&(r, j)| (r as u32, j as u32)).collect();
        set.sort_unstable();
        set.dedup();
        let Some(&(max_ordinal, _)) = set.last() else {
            return Ok(BulkAnswers {
                base,
                ..BulkAnswers::default()
            });
        };
        self.check_sample_budget(max_ordinal as usize + 1)?;
        self.check_query_budget(set.len())?;
        let start = self.log.len();
        for _ in 0..=max_ordinal {
            self.push_sample();
        }
        let mut answers = Vec::with_capacity(set.len());
        for &(r, j) in &set {
            let h = SampleHandle(base + r);
            let a = self.answer(h, j as usize);
            self.log.push_query(h, j as usize, a);
            answers.push(a);
        }
        self.log.mark_bulk(start);
        Ok(BulkAnswers {
            base,
            queries: set,
            answers,
        })
    }

    fn random_index(&mut self) -> usize {
        let n = self.n();
        self.alg.gen_range(1..=n)
    }

    fn samples_used(&self) -> usize {
        self.drawn.len()
    }

    fn queries_used(&self) -> usize {
        self.log.queries_used()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn point_mass_answers() {
        let p = DistributionSpec::point_mass(BitString::indicator(3, [2]).unwrap());
        let mut s = OracleSession::open(p, 5, Budgets::unlimited());
        let h = s.draw_sample().unwrap();
        assert!(s.query(h, 2).unwrap());
        assert!(!s.query(h, 1).unwrap());
        assert!(!s.query(h, 1).unwrap());
        assert_eq!(s.queries_used(), 3);
        assert_eq!(s.query(h, 4), Err(OracleError::IndexOutOfRange { j: 4, n: 3 }));
        assert_eq!(s.query(SampleHandle(7), 1), Err(OracleError::UnknownHandle(7)));
    }

    #[test]
    fn budgets_are_enforced() {
        let p = DistributionSpec::point_mass(bs("01"));
        let mut s = OracleSession::open(
            p.clone(),
            0,
            Budgets {
                max_samples: Some(0),
                max_queries: None,
            },
        );
        assert!(matches!(s.draw_sample(), Err(OracleError::BudgetExceeded { resource: Resource::Samples, .. })));
        let mut s = OracleSession::open(
            p,
            0,
            Budgets {
                max_samples: None,
                max_queries: Some(1),
            },
        );
        let h = s.draw_sample().unwrap();
        s.query(h, 1).unwrap();
        assert!(matches!(s.query(h, 1), Err(OracleError::BudgetExceeded { resource: Resource::Queries, .. })));
        assert_eq!(s.queries_used(), 1);
    }

    #[test]
    fn empty_bulk_request() {
        let mut s = OracleSession::open(DistributionSpec::point_mass(bs("1")), 0, Budgets::unlimited());
        let r = s.run_nonadaptive(&[]).unwrap();
        assert!(r.is_empty());
        assert_eq!(s.queries_used(), 0);
        assert_eq!(s.samples_used(), 0);
    }
}
