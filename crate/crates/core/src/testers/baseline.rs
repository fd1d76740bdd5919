use std::collections::HashMap;

use super::{check_params, counters, TesterError, TesterVerdict};
use crate::fishing::ceil_tol;
use crate::oracle::SampleAccess;
use crate::witness::{Edge, Witness};

/// `(samples, indices)` of the pairwise baseline: `ceil(2m/eps) + 1` samples and
/// `ceil(2/eps * ln(3 * C(samples, 2)))` indices.
pub fn baseline_plan(m: usize, eps: f64) -> (usize, usize) {
    let s = ceil_tol(2.0 * m as f64 / eps) + 1;
    let pairs = (s * (s - 1) / 2) as f64;
    (s, ceil_tol(2.0 / eps * (3.0 * pairs).ln()))
}

/// Naive comparator: queries every sample at one common set of uniform
/// indices and rejects when `m + 1` samples have pairwise different answers.
pub fn run_baseline_test<S: SampleAccess + ?Sized>(
    session: &mut S,
    m: usize,
    eps: f64,
) -> Result<TesterVerdict, TesterError> {
    check_params(m, eps)?;
    let start = counters(session);
    let (s, width) = baseline_plan(m, eps);
    let mut j: Vec<usize> = (0..width).map(|_| session.random_index()).collect();
    j.sort_unstable();
    j.dedup();
    let request: Vec<(usize, usize)> = (0..s).flat_map(|r| j.iter().map(move |&jj| (r, jj))).collect();
    let answers = session.run_nonadaptive(&request)?;
    let rows: Vec<Vec<bool>> = (0..s).map(|r| answers.for_ordinal(r).map(|(_, a)| a).collect()).collect();
    let mut seen: HashMap<&[bool], usize> = HashMap::new();
    let mut reps = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        if reps.len() > m {
            break;
        }
        seen.entry(row.as_slice()).or_insert_with(|| {
            reps.push(r);
            r
        });
    }
    let witness = (reps.len() > m).then(|| {
        let mut certificates = Vec::new();
        for (i, &x) in reps.iter().enumerate() {
            for &y in &reps[i + 1..] {
                let pos = (0..j.len())
                    .find(|&p| rows[x][p] != rows[y][p])
                    .expect("distinct rows differ");
                certificates.push(Edge {
                    a: answers.handle(x),
                    b: answers.handle(y),
                    j: j[pos],
                });
            }
        }
        Witness {
            clique: reps.iter().map(|&r| answers.handle(r)).collect(),
            certificates,
        }
    });
    Ok(TesterVerdict::finish(session, start, witness))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_sizes() {
        // s = 17, C(17,2) = 136, 8 ln 408 = 48.1
        assert_eq!(baseline_plan(2, 0.25), (17, 49));
    }
}
