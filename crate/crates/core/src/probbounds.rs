use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::oracle::stream_rng;

/// Trials per independently seeded Monte-Carlo chunk.
const CHUNK: usize = 4096;
/// Fixed violation threshold of every Monte-Carlo check, in standard errors.
pub const VIOLATION_SE: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("expectation must be finite and nonnegative, got {0}")]
    Expectation(f64),
    #[error("delta out of range for this side: {0}")]
    Delta(f64),
    #[error("probability out of range: {0}")]
    Probability(f64),
}

/// Which tail a multiplicative Chernoff bound controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `Pr[X < (1 - delta) E[X]]`.
    Lower,
    /// `Pr[X > (1 + delta) E[X]]`.
    Upper,
}

fn check_expectation(e: f64) -> Result<(), BoundError> {
    if e.is_finite() && e >= 0.0 {
        Ok(())
    } else {
        Err(BoundError::Expectation(e))
    }
}

/// `Pr[X = 0] <= exp(-E[X])` for a sum of independent indicators.
pub fn chernoff_zero_bound(expectation: f64) -> Result<f64, BoundError> {
    check_expectation(expectation)?;
    Ok((-expectation).exp())
}

/// Natural log of the multiplicative Chernoff bound:
/// `E * (-delta - (1 - delta) ln(1 - delta))` below,
/// `E * (delta - (1 + delta) ln(1 + delta))` above.
pub fn log_multiplicative_chernoff(expectation: f64, delta: f64, side: Side) -> Result<f64, BoundError> {
    check_expectation(expectation)?;
    let per_unit = match side {
        Side::Lower if delta > 0.0 && delta < 1.0 => -delta - (1.0 - delta) * (-delta).ln_1p(),
        Side::Upper if delta > 0.0 && delta.is_finite() => delta - (1.0 + delta) * delta.ln_1p(),
        _ => return Err(BoundError::Delta(delta)),
    };
    Ok(expectation * per_unit)
}

/// `(e^{-delta} / (1 - delta)^{1 - delta})^E` below and
/// `(e^{delta} / (1 + delta)^{1 + delta})^E` above, evaluated in log space.
pub fn multiplicative_chernoff(expectation: f64, delta: f64, side: Side) -> Result<f64, BoundError> {
    log_multiplicative_chernoff(expectation, delta, side).map(f64::exp)
}

/// Contribution of a random variable over an event: the sum of
/// `weight * value` over observations `(weight, value, in_event)` in the event.
pub fn contribution<I>(observations: I) -> f64
where
    I: IntoIterator<Item = (f64, f64, bool)>,
{
    observations
        .into_iter()
        .filter(|&(_, _, b)| b)
        .map(|(w, v, _)| w * v)
        .sum()
}

/// Result of comparing an empirical tail frequency with an analytic bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailBoundReport {
    pub bound: String,
    pub parameters: Vec<(String, f64)>,
    pub analytic_bound: f64,
    pub empirical_frequency: f64,
    pub trials: usize,
    /// Standard error of the frequency under the bound as null value.
    pub standard_error: f64,
    pub violated: bool,
}

impl TailBoundReport {
    fn new(bound: &str, parameters: Vec<(String, f64)>, analytic_bound: f64, hits: usize, trials: usize) -> Self {
        assert!(trials >= 1);
        let b = analytic_bound.clamp(0.0, 1.0);
        let freq = hits as f64 / trials as f64;
        let se = (b * (1.0 - b) / trials as f64).sqrt();
        Self {
            bound: bound.to_string(),
            parameters,
            analytic_bound,
            empirical_frequency: freq,
            trials,
            standard_error: se,
            violated: freq > b + VIOLATION_SE * se,
        }
    }

    /// Parameters as `name=value` pairs joined by `;`.
    pub fn parameter_string(&self) -> String {
        self.parameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Counts trials in which `event` holds, split into independently seeded chunks.
fn monte_carlo<F>(trials: usize, seed: u64, label: &str, event: F) -> usize
where
    F: Fn(&mut ChaCha20Rng) -> bool + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, &format!("{label}/{c}"));
            let len = CHUNK.min(trials - c * CHUNK);
            (0..len).filter(|_| event(&mut rng)).count()
        })
        .sum()
}

fn check_probs(ps: &[f64]) -> Result<(), BoundError> {
    match ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(&p) => Err(BoundError::Probability(p)),
        None => Ok(()),
    }
}

fn bernoulli_sum(ps: &[f64], rng: &mut ChaCha20Rng) -> usize {
    ps.iter().filter(|&&p| rng.gen::<f64>() < p).count()
}

/// Empirical `Pr[X = 0]` for independent `Bernoulli(p_i)` against `exp(-sum p_i)`.
pub fn validate_chernoff_zero(ps: &[f64], trials: usize, seed: u64) -> Result<TailBoundReport, BoundError> {
    check_probs(ps)?;
    let e: f64 = ps.iter().sum();
    let hits = monte_carlo(trials, seed, "chernoff-zero", |rng| bernoulli_sum(ps, rng) == 0);
    let params = vec![("terms".into(), ps.len() as f64), ("expectation".into(), e)];
    Ok(TailBoundReport::new("chernoff-zero", params, chernoff_zero_bound(e)?, hits, trials))
}

/// Empirical tail of a sum of independent `Bernoulli(p_i)` against the
/// multiplicative Chernoff bound on the given side.
pub fn validate_chernoff_mult(
    ps: &[f64],
    delta: f64,
    side: Side,
    trials: usize,
    seed: u64,
) -> Result<TailBoundReport, BoundError> {
    check_probs(ps)?;
    let e: f64 = ps.iter().sum();
    let bound = multiplicative_chernoff(e, delta, side)?;
    let hits = monte_carlo(trials, seed, "chernoff-mult", |rng| {
        let x = bernoulli_sum(ps, rng) as f64;
        match side {
            Side::Lower => x < (1.0 - delta) * e,
            Side::Upper => x > (1.0 + delta) * e,
        }
    });
    let name = match side {
        Side::Lower => "chernoff-mult-lower",
        Side::Upper => "chernoff-mult-upper",
    };
    let params = vec![
        ("terms".into(), ps.len() as f64),
        ("expectation".into(), e),
        ("delta".into(), delta),
    ];
    Ok(TailBoundReport::new(name, params, bound, hits, trials))
}

/// A sequence of dependent indicators `X_1..X_m` with an upward-closed goal
/// set: while the prefix is outside the goal, `Pr[X_i = 1 | prefix] >= p_i`.
pub trait GoalSimulator: Sync {
    fn name(&self) -> &str;
    /// The conditional lower bounds `p_1..p_m`.
    fn lower_bounds(&self) -> &[f64];
    /// Success probability of step `i` given the outcomes of steps before it.
    fn success_probability(&self, i: usize, history: &[bool]) -> f64;
    /// Whether the prefix `history` lies in the goal set.
    fn in_goal(&self, history: &[bool]) -> bool;
}

/// Independent `Bernoulli(p_i)` steps with an empty goal set.
#[derive(Clone, Debug)]
pub struct IndependentSim {
    pub p: Vec<f64>,
}

impl GoalSimulator for IndependentSim {
    fn name(&self) -> &str {
        "independent"
    }
    fn lower_bounds(&self) -> &[f64] {
        &self.p
    }
    fn success_probability(&self, i: usize, _: &[bool]) -> f64 {
        self.p[i]
    }
    fn in_goal(&self, _: &[bool]) -> bool {
        false
    }
}

/// Goal is reached after `goal` successes; steps keep probability `p_i`
/// afterwards, and before the goal a history with many failures raises the
/// success probability by up to `boost`.
#[derive(Clone, Debug)]
pub struct GoalOnSuccessSim {
    pub p: Vec<f64>,
    pub goal: usize,
    pub boost: f64,
}

impl GoalSimulator for GoalOnSuccessSim {
    fn name(&self) -> &str {
        "goal-on-success"
    }
    fn lower_bounds(&self) -> &[f64] {
        &self.p
    }
    fn success_probability(&self, i: usize, history: &[bool]) -> f64 {
        if i == 0 || self.in_goal(history) {
            return self.p[i];
        }
        let failures = history.iter().filter(|&&x| !x).count() as f64 / i as f64;
        (self.p[i] + self.boost * failures).min(1.0)
    }
    fn in_goal(&self, history: &[bool]) -> bool {
        history.iter().filter(|&&x| x).count() >= self.goal
    }
}

/// Goal is reached after `goal` successes, after which every step fails.
#[derive(Clone, Debug)]
pub struct DropToZeroSim {
    pub p: Vec<f64>,
    pub goal: usize,
}

impl GoalSimulator for DropToZeroSim {
    fn name(&self) -> &str {
        "drop-to-zero"
    }
    fn lower_bounds(&self) -> &[f64] {
        &self.p
    }
    fn success_probability(&self, i: usize, history: &[bool]) -> f64 {
        if self.in_goal(history) {
            0.0
        } else {
            self.p[i]
        }
    }
    fn in_goal(&self, history: &[bool]) -> bool {
        history.iter().filter(|&&x| x).count() >= self.goal
    }
}

/// Estimates `Pr[(sequence not in goal) and X < (1 - delta) sum p_i]` and
/// compares it with the lower multiplicative Chernoff bound at `sum p_i`.
pub fn validate_goal_chernoff<S: GoalSimulator>(
    sim: &S,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<TailBoundReport, BoundError> {
    let p = sim.lower_bounds();
    check_probs(p)?;
    let total: f64 = p.iter().sum();
    let bound = multiplicative_chernoff(total, delta, Side::Lower)?;
    let label = format!("goal-chernoff-{}", sim.name());
    let hits = monte_carlo(trials, seed, &label, |rng| {
        let mut history = Vec::with_capacity(p.len());
        for i in 0..p.len() {
            let q = sim.success_probability(i, &history);
            history.push(rng.gen::<f64>() < q);
        }
        let x = history.iter().filter(|&&b| b).count() as f64;
        !sim.in_goal(&history) && x < (1.0 - delta) * total
    });
    let params = vec![
        ("steps".into(), p.len() as f64),
        ("sum_p".into(), total),
        ("delta".into(), delta),
    ];
    Ok(TailBoundReport::new(&format!("chernoff-with-goal/{}", sim.name()), params, bound, hits, trials))
}

/// Analytic check of `1 - (1 - p)^n >= n p / 2` for `0 <= p < 1/(2n)` on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearizationReport {
    pub points: usize,
    pub violations: usize,
    /// Smallest `(1 - (1 - p)^n) - n p / 2` seen.
    pub worst_margin: f64,
}

/// Grid over `n in 1..=max_n` and `steps` equally spaced `p` in `[0, 1/(2n))`.
pub fn check_exp_linearization(max_n: usize, steps: usize) -> LinearizationReport {
    let mut report = LinearizationReport {
        points: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
    };
    for n in 1..=max_n {
        let nf = n as f64;
        for s in 0..steps {
            let p = s as f64 / steps as f64 / (2.0 * nf);
            // 1 - (1 - p)^n without cancellation.
            let lhs = -(nf * (-p).ln_1p()).exp_m1();
            let margin = lhs - 0.5 * nf * p;
            report.points += 1;
            // Relative slack for rounding near p = 0.
            if margin < -1e-12 * lhs.max(f64::MIN_POSITIVE) {
                report.violations += 1;
            }
            report.worst_margin = report.worst_margin.min(margin);
        }
    }
    report
}

/// The Monte-Carlo suite for all tail bounds plus the linearization grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSuite {
    pub tail: Vec<TailBoundReport>,
    pub linearization: LinearizationReport,
}

impl BoundSuite {
    pub fn passed(&self) -> bool {
        self.linearization.violations == 0 && self.tail.iter().all(|r| !r.violated)
    }
}

/// Fixed, seeded configurations: 20 random independent-sum configurations
/// for the zero bound, both Chernoff sides, and every goal simulator.
pub fn standard_suite(seed: u64, trials: usize) -> BoundSuite {
    let mut rng = stream_rng(seed, "bound-suite-configs");
    let random_ps = |rng: &mut ChaCha20Rng, max_len: usize, max_p: f64| -> Vec<f64> {
        let len = rng.gen_range(1..=max_len);
        (0..len).map(|_| rng.gen_range(0.0..max_p)).collect()
    };
    let mut tail = Vec::new();
    for c in 0..20u64 {
        let ps = random_ps(&mut rng, 40, 0.3);
        tail.push(validate_chernoff_zero(&ps, trials, seed ^ c).expect("valid"));
    }
    for c in 0..10u64 {
        let ps = random_ps(&mut rng, 200, 0.5);
        let delta = rng.gen_range(0.1..0.9);
        tail.push(validate_chernoff_mult(&ps, delta, Side::Lower, trials, seed ^ (100 + c)).expect("valid"));
        let delta = rng.gen_range(0.1..2.0);
        tail.push(validate_chernoff_mult(&ps, delta, Side::Upper, trials, seed ^ (200 + c)).expect("valid"));
    }
    for c in 0..5u64 {
        let ps = random_ps(&mut rng, 60, 0.6);
        let delta = rng.gen_range(0.2..0.8);
        let goal = rng.gen_range(1..=ps.len().max(2) / 2);
        let s = seed ^ (300 + c);
        tail.push(validate_goal_chernoff(&IndependentSim { p: ps.clone() }, delta, trials, s).expect("valid"));
        let on_success = GoalOnSuccessSim {
            p: ps.clone(),
            goal,
            boost: 0.2,
        };
        tail.push(validate_goal_chernoff(&on_success, delta, trials, s).expect("valid"));
        let drop = DropToZeroSim { p: ps, goal };
        tail.push(validate_goal_chernoff(&drop, delta, trials, s).expect("valid"));
    }
    BoundSuite {
        tail,
        linearization: check_exp_linearization(200, 200),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(chernoff_zero_bound(0.0).unwrap(), 1.0);
        assert!((chernoff_zero_bound(2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        let direct = ((-0.5f64).exp() / 0.5f64.powf(0.5)).powi(10);
        assert!((multiplicative_chernoff(10.0, 0.5, Side::Lower).unwrap() - direct).abs() < 1e-14);
        let up = (1f64.exp() / 4.0).powi(3);
        assert!((multiplicative_chernoff(3.0, 1.0, Side::Upper).unwrap() - up).abs() < 1e-14);
    }

    #[test]
    fn small_delta_tends_to_one() {
        for side in [Side::Lower, Side::Upper] {
            assert!(multiplicative_chernoff(10.0, 1e-9, side).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn log_space_survives_huge_expectations() {
        let l = log_multiplicative_chernoff(1e6, 0.5, Side::Lower).unwrap();
        assert!(l.is_finite() && l < -1e4);
        assert_eq!(multiplicative_chernoff(1e6, 0.5, Side::Lower).unwrap(), 0.0);
    }

    #[test]
    fn argument_errors() {
        assert!(chernoff_zero_bound(-1.0).is_err());
        assert!(chernoff_zero_bound(f64::NAN).is_err());
        assert!(multiplicative_chernoff(1.0, 1.0, Side::Lower).is_err());
        assert!(multiplicative_chernoff(1.0, 0.0, Side::Upper).is_err());
        assert!(validate_chernoff_zero(&[1.5], 10, 0).is_err());
    }

    #[test]
    fn contribution_edges() {
        let obs = [(0.25, 2.0, false), (0.75, 4.0, false)];
        assert_eq!(contribution(obs), 0.0);
        let all = obs.map(|(w, v, _)| (w, v, true));
        assert_eq!(contribution(all), 0.25 * 2.0 + 0.75 * 4.0);
    }

    #[test]
    fn report_flags_excess() {
        let r = TailBoundReport::new("x", vec![], 0.1, 500, 1000);
        assert!(r.violated);
        let r = TailBoundReport::new("x", vec![("a".into(), 1.0)], 0.1, 100, 1000);
        assert!(!r.violated);
        assert_eq!(r.parameter_string(), "a=1");
    }

    #[test]
    fn linearization_grid_holds() {
        let r = check_exp_linearization(50, 50);
        assert_eq!(r.points, 2500);
        assert_eq!(r.violations, 0);
    }
}
