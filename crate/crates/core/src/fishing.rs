//! Repeat a stochastic subroutine until it has succeeded `k` times, or until a
//! checkpoint shows that its success rate has fallen below a threshold.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FishingError {
    #[error("goal k must be at least 1")]
    ZeroGoal,
    #[error("threshold p = {0} outside (0, 1]")]
    Threshold(f64),
    #[error("confidence q = {0} outside (0, 1)")]
    Confidence(f64),
}

/// Goal `k`, threshold probability `p` and confidence `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FishingParams {
    pub k: usize,
    pub p: f64,
    pub q: f64,
}

impl FishingParams {
    pub fn new(k: usize, p: f64, q: f64) -> Result<Self, FishingError> {
        if k == 0 {
            return Err(FishingError::ZeroGoal);
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(FishingError::Threshold(p));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(FishingError::Confidence(q));
        }
        Ok(FishingParams { k, p, q })
    }

    /// `floor(log2 k + 1)`, the last checkpoint of the schedule for `k >= 2`.
    pub fn t_max(&self) -> u32 {
        self.k.ilog2() + 1
    }

    /// `5 (log2 q^-1 + log2(log2 k + 1))`, the confidence floor of every checkpoint.
    pub fn confidence_term(&self) -> f64 {
        5.0 * ((1.0 / self.q).log2() + ((self.k as f64).log2() + 1.0).log2())
    }

    /// Upper bound on executions given `h` successes:
    /// `p^-1 (4h + 5(log2 q^-1 + log2(log2 k + 1))) + 1`.
    pub fn termination_bound(&self, h: usize) -> f64 {
        (4.0 * h as f64 + self.confidence_term()) / self.p + 1.0
    }
}

/// Ceiling that ignores floating-point noise just above an integer.
pub(crate) fn ceil_tol(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Floor that ignores floating-point noise just below an integer.
pub(crate) fn floor_tol(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

/// Checkpoints `(t, N_t)` with `N_t = ceil(p^-1 max{2^t, 5(log2 q^-1 + log2(log2 k + 1))})`
/// for `t = 2..=t_max`. For `k = 1` the range is empty and a single checkpoint
/// at `N = ceil(p^-1 5(log2 q^-1 + log2(log2 k + 1)))` is used instead, which
/// keeps both the termination bound and the confidence guarantee.
pub fn checkpoint_schedule(params: &FishingParams) -> Vec<(u32, usize)> {
    let floor = params.confidence_term();
    if params.k == 1 {
        return vec![(1, ceil_tol(floor / params.p).max(1))];
    }
    let last = params.t_max();
    (2..=last)
        .map(|t| {
            let v = 2f64.powi(t as i32).max(floor) / params.p;
            (t, ceil_tol(v))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StopReason {
    /// `k` successes.
    GoalReached,
    /// Fewer than `p N_t / 2` successes at checkpoint `N_t`.
    Futility,
    /// Every checkpoint passed without reaching the goal. Possible only when
    /// `k` is not a power of two (see [`run_fishing`]).
    ScheduleExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FishingOutcome<R> {
    /// Total executions.
    pub n: usize,
    /// Successful executions.
    pub h: usize,
    /// Outcome of every execution in order; `None` is a failure.
    pub results: Vec<Option<R>>,
    pub stop_reason: StopReason,
}

impl<R> FishingOutcome<R> {
    pub fn successes(&self) -> impl Iterator<Item = &R> {
        self.results.iter().flatten()
    }
}

/// Runs `subroutine` under the checkpoint schedule.
///
/// Stops as soon as `k` executions succeeded; at checkpoint `N_t` stops when
/// `H < p N_t / 2`. The subroutine is expected to be fail stable and to have
/// diminishing returns; this is not checked.
///
/// When `k` is not a power of two the last checkpoint is only guaranteed to be
/// at least `p^-1 2^{floor(log2 k)+1} > p^-1 k`, not `2 p^-1 k`, so a run can pass
/// every checkpoint with `p N / 2 <= H < k`. Such runs stop there with
/// [`StopReason::ScheduleExhausted`]; the bound `N <= 2H/p` then holds, so the
/// termination bound is unaffected.
pub fn run_fishing<R, E, F>(params: &FishingParams, mut subroutine: F) -> Result<FishingOutcome<R>, E>
where
    F: FnMut() -> Result<Option<R>, E>,
{
    let mut results = Vec::new();
    let mut h = 0;
    let mut done = 0;
    for (_, nt) in checkpoint_schedule(params) {
        while done < nt {
            let r = subroutine()?;
            done += 1;
            if r.is_some() {
                h += 1;
            }
            results.push(r);
            if h == params.k {
                return Ok(FishingOutcome {
                    n: done,
                    h,
                    results,
                    stop_reason: StopReason::GoalReached,
                });
            }
        }
        if (h as f64) < 0.5 * params.p * nt as f64 {
            return Ok(FishingOutcome {
                n: done,
                h,
                results,
                stop_reason: StopReason::Futility,
            });
        }
    }
    Ok(FishingOutcome {
        n: done,
        h,
        results,
        stop_reason: StopReason::ScheduleExhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn schedule_example() {
        let p = FishingParams::new(4, 1.0 / 3.0, 0.125).unwrap();
        assert_eq!(p.t_max(), 3);
        // 3 * 5 * (3 + log2 3) = 68.77...
        assert_eq!(checkpoint_schedule(&p), vec![(2, 69), (3, 69)]);
    }

    #[test]
    fn schedule_for_goal_one_has_single_checkpoint() {
        let p = FishingParams::new(1, 0.5, 0.5).unwrap();
        assert_eq!(p.t_max(), 1);
        // 2 * 5 * log2 2 = 10.
        assert_eq!(checkpoint_schedule(&p), vec![(1, 10)]);
        let loose = FishingParams::new(1, 0.02, 0.99).unwrap();
        let n = checkpoint_schedule(&loose)[0].1;
        assert!(n as f64 <= loose.termination_bound(0));
    }

    #[test]
    fn schedule_doubles_when_power_term_dominates() {
        let p = FishingParams::new(1 << 20, 1.0, 0.5).unwrap();
        let s = checkpoint_schedule(&p);
        for w in s.windows(2) {
            assert!(w[1].1 <= 2 * w[0].1);
        }
        assert_eq!(s.last().unwrap().1, 1 << 21);
    }

    #[test]
    fn exact_products_are_not_rounded_up() {
        assert_eq!(ceil_tol(4.0 / (1.0 / 3.0)), 12);
        assert_eq!(ceil_tol(12.2), 13);
    }

    #[test]
    fn always_succeeds() {
        let p = FishingParams::new(5, 0.5, 0.1).unwrap();
        let out = run_fishing(&p, || Ok::<_, Infallible>(Some(()))).unwrap();
        assert_eq!((out.n, out.h, out.stop_reason), (5, 5, StopReason::GoalReached));
    }

    #[test]
    fn always_fails() {
        let p = FishingParams::new(5, 0.5, 0.1).unwrap();
        let out = run_fishing(&p, || Ok::<Option<()>, Infallible>(None)).unwrap();
        assert_eq!(out.h, 0);
        assert_eq!(out.n, checkpoint_schedule(&p)[0].1);
        assert_eq!(out.stop_reason, StopReason::Futility);
    }

    #[test]
    fn errors_propagate() {
        let p = FishingParams::new(3, 0.5, 0.1).unwrap();
        let mut calls = 0;
        let r = run_fishing(&p, || {
            calls += 1;
            if calls == 2 {
                Err("budget")
            } else {
                Ok(Some(()))
            }
        });
        assert_eq!(r, Err("budget"));
    }

    #[test]
    fn invalid_params() {
        assert_eq!(FishingParams::new(0, 0.5, 0.5), Err(FishingError::ZeroGoal));
        assert!(FishingParams::new(1, 0.0, 0.5).is_err());
        assert!(FishingParams::new(1, 1.5, 0.5).is_err());
        assert!(FishingParams::new(1, 0.5, 1.0).is_err());
    }
}
