use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;
use suppsize::adversary::Family;

use crate::campaign::{HarnessError, ResultRow};
use crate::config::TesterKind;

/// Normal quantile of the 95% two-sided interval.
const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `trials` at 95%; `(0, 1)` for no trials.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKey {
    Family,
    M,
    Eps,
    N,
    T,
    Tester,
}

impl GroupKey {
    pub const ALL: [GroupKey; 6] = [
        GroupKey::Family,
        GroupKey::M,
        GroupKey::Eps,
        GroupKey::N,
        GroupKey::T,
        GroupKey::Tester,
    ];
}

/// Aggregates of one group. Key columns not grouped on are empty. Rates over
/// `far_rows` only count rows whose instance was verified far.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub family: Option<Family>,
    pub m: Option<usize>,
    pub eps: Option<f64>,
    pub n: Option<usize>,
    pub t: Option<usize>,
    pub tester: Option<TesterKind>,
    pub rows: usize,
    pub errors: usize,
    pub mean_queries: f64,
    pub max_queries: usize,
    pub mean_samples: f64,
    pub rejections: usize,
    pub reject_rate: f64,
    pub reject_lo: f64,
    pub reject_hi: f64,
    pub far_rows: usize,
    pub far_rejections: usize,
    pub far_reject_rate: f64,
    pub far_reject_lo: f64,
    pub far_reject_hi: f64,
}

type Key = (Option<Family>, Option<usize>, Option<u64>, Option<usize>, Option<Option<usize>>, Option<TesterKind>);

fn key_of(r: &ResultRow, keys: &[GroupKey]) -> Key {
    let has = |k| keys.contains(&k);
    (
        has(GroupKey::Family).then_some(r.family),
        has(GroupKey::M).then_some(r.m),
        has(GroupKey::Eps).then_some(r.eps.to_bits()),
        has(GroupKey::N).then_some(r.n),
        has(GroupKey::T).then_some(r.t),
        has(GroupKey::Tester).then_some(r.tester),
    )
}

/// Groups rows by `keys`, in order of first appearance, and aggregates
/// queries, samples and rejection rates with Wilson intervals. Error rows
/// count in `errors` only.
pub fn scaling_table(rows: &[ResultRow], keys: &[GroupKey]) -> Vec<SummaryRow> {
    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut groups: Vec<(Key, Vec<&ResultRow>)> = Vec::new();
    for r in rows {
        let k = key_of(r, keys);
        let i = *index.entry(k).or_insert_with(|| {
            groups.push((k, Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(r);
    }
    groups
        .into_iter()
        .map(|(k, members)| {
            let ok: Vec<&&ResultRow> = members.iter().filter(|r| !r.is_error()).collect();
            let count = ok.len();
            let queries: Vec<usize> = ok.iter().filter_map(|r| r.queries_used).collect();
            let samples: Vec<usize> = ok.iter().filter_map(|r| r.samples_used).collect();
            let mean = |v: &[usize]| {
                if v.is_empty() {
                    0.0
                } else {
                    v.iter().sum::<usize>() as f64 / v.len() as f64
                }
            };
            let rejections = ok.iter().filter(|r| r.rejected()).count();
            let far: Vec<&&&ResultRow> = ok.iter().filter(|r| r.verified_far()).collect();
            let far_rejections = far.iter().filter(|r| r.rejected()).count();
            let rate = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
            let (lo, hi) = wilson_interval(rejections, count);
            let (flo, fhi) = wilson_interval(far_rejections, far.len());
            SummaryRow {
                family: k.0,
                m: k.1,
                eps: k.2.map(f64::from_bits),
                n: k.3,
                t: k.4.flatten(),
                tester: k.5,
                rows: members.len(),
                errors: members.len() - count,
                mean_queries: mean(&queries),
                max_queries: queries.iter().copied().max().unwrap_or(0),
                mean_samples: mean(&samples),
                rejections,
                reject_rate: rate(rejections, count),
                reject_lo: lo,
                reject_hi: hi,
                far_rows: far.len(),
                far_rejections,
                far_reject_rate: rate(far_rejections, far.len()),
                far_reject_lo: flo,
                far_reject_hi: fhi,
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(out: W, table: &[SummaryRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in table {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
