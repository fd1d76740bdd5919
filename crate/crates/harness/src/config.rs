use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use suppsize::adversary::{Family, SecretParams};
use suppsize::oracle::SampleAccess;
use suppsize::testers::{run_adaptive_test, run_baseline_test, run_nonadaptive_test, TesterError, TesterVerdict};

/// Which tester a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TesterKind {
    Nonadaptive,
    Adaptive,
    Baseline,
}

impl TesterKind {
    pub fn name(self) -> &'static str {
        match self {
            TesterKind::Nonadaptive => "nonadaptive",
            TesterKind::Adaptive => "adaptive",
            TesterKind::Baseline => "baseline",
        }
    }

    pub fn run<S: SampleAccess + ?Sized>(self, session: &mut S, m: usize, eps: f64) -> Result<TesterVerdict, TesterError> {
        match self {
            TesterKind::Nonadaptive => run_nonadaptive_test(session, m, eps),
            TesterKind::Adaptive => run_adaptive_test(session, m, eps),
            TesterKind::Baseline => run_baseline_test(session, m, eps),
        }
    }
}

/// Seeds `base, base + 1, ..., base + count - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub base: u64,
    pub count: usize,
}

impl SeedRange {
    pub fn iter(self) -> impl Iterator<Item = u64> {
        (0..self.count as u64).map(move |i| self.base.wrapping_add(i))
    }
}

/// A campaign: every family is run on the full `m x eps x n` grid; `t` only
/// applies to `dno`, where an empty list means `t = 2m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub families: Vec<Family>,
    pub m: Vec<usize>,
    pub eps: Vec<f64>,
    pub n: Vec<usize>,
    #[serde(default)]
    pub t: Vec<usize>,
    pub testers: Vec<TesterKind>,
    pub seeds: SeedRange,
    /// Result CSV; standard output when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Aggregate CSV grouped by family, m, eps, n, t and tester.
    #[serde(default)]
    pub summary: Option<PathBuf>,
    /// Records wall time per row, which makes the output nondeterministic.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub max_queries: Option<usize>,
    /// Ensemble parameters of the `secret` family.
    #[serde(default)]
    pub secret: SecretParams,
}

/// One grid point; `t` is set for `dno` only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub family: Family,
    pub m: usize,
    pub eps: f64,
    pub n: usize,
    pub t: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Nonempty grids and tester list, at least one seed, positive parameters.
    pub fn validate(&self) -> Result<(), String> {
        let empty = [
            ("families", self.families.is_empty()),
            ("m", self.m.is_empty()),
            ("eps", self.eps.is_empty()),
            ("n", self.n.is_empty()),
            ("testers", self.testers.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(format!("{name} must not be empty"));
        }
        if self.seeds.count == 0 {
            return Err("seeds.count must be at least 1".into());
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(format!("eps = {e} outside (0, 1]"));
        }
        if self.n.contains(&0) || self.t.contains(&0) {
            return Err("n and t must be positive".into());
        }
        Ok(())
    }

    /// Grid points in `family, m, eps, n, t` order.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &family in &self.families {
            for &m in &self.m {
                for &eps in &self.eps {
                    for &n in &self.n {
                        let ts: Vec<Option<usize>> = match family {
                            Family::Dno if self.t.is_empty() => vec![Some(2 * m)],
                            Family::Dno => self.t.iter().map(|&t| Some(t)).collect(),
                            _ => vec![None],
                        };
                        out.extend(ts.into_iter().map(|t| GridPoint { family, m, eps, n, t }));
                    }
                }
            }
        }
        out
    }
}
