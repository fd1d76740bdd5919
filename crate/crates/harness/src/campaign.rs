use std::io::{Read, Write};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use suppsize::adversary::{
    gen_anchor, gen_dno, gen_dyes, gen_point_mass, gen_secret_lifted, gen_support_m, gen_uniform_far, AdversaryError,
    Family, Farness, GroundTruthInstance, SecretParams,
};
use suppsize::oracle::{Budgets, OracleSession};
use suppsize::witness::{verify_witness, ContradictionGraph};
use thiserror::Error;

use crate::config::{ExperimentConfig, GridPoint, TesterKind};

pub const SCHEMA_VERSION: u32 = 1;

/// Column order of the result CSV.
pub const HEADER: [&str; 16] = [
    "schema_version",
    "family",
    "m",
    "eps",
    "n",
    "t",
    "seed",
    "tester",
    "verdict",
    "queries_used",
    "samples_used",
    "witness_valid",
    "claimed_far",
    "verified_distance",
    "wall_time_ms",
    "error",
];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("rejection without a valid witness: {0}")]
    InvalidWitness(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessValidity {
    #[serde(rename = "true")]
    Valid,
    #[serde(rename = "false")]
    Invalid,
    #[serde(rename = "na")]
    NotApplicable,
}

/// One tester run on one generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema_version: u32,
    pub family: Family,
    pub m: usize,
    pub eps: f64,
    pub n: usize,
    pub t: Option<usize>,
    pub seed: u64,
    pub tester: TesterKind,
    /// `accept`, `reject` or `error`.
    pub verdict: String,
    pub queries_used: Option<usize>,
    pub samples_used: Option<usize>,
    pub witness_valid: WitnessValidity,
    /// `far`, `not-far`, `unverified`, or `none` without a farness claim.
    pub claimed_far: String,
    /// Exact distance to `S_m` as a decimal, or `unverified`.
    pub verified_distance: String,
    pub wall_time_ms: Option<f64>,
    pub error: String,
}

impl ResultRow {
    pub fn rejected(&self) -> bool {
        self.verdict == "reject"
    }

    pub fn is_error(&self) -> bool {
        self.verdict == "error"
    }

    pub fn verified_far(&self) -> bool {
        self.claimed_far == "far"
    }
}

/// The instance of one grid point and seed. `dno` and `uniform-far` (with
/// `m + 1` atoms) are checked for being `eps`-far from `S_m`; `anchor` and
/// `secret` carry their own claim; the other families are in-property or
/// unclaimed.
pub fn generate_instance(point: &GridPoint, seed: u64, secret: SecretParams) -> Result<GroundTruthInstance, AdversaryError> {
    let GridPoint { family, m, eps, n, t } = *point;
    Ok(match family {
        Family::Dno => {
            let mut inst = gen_dno(t.unwrap_or(2 * m), eps, n, seed)?;
            inst.claim_far(m, eps)?;
            inst
        }
        Family::Dyes => gen_dyes(eps, n, seed)?,
        Family::Anchor => gen_anchor(m, eps, n, seed)?,
        Family::Secret => gen_secret_lifted(m, eps, n, secret, seed)?,
        Family::SupportM => gen_support_m(m, n, seed)?,
        Family::UniformFar => {
            let mut inst = gen_uniform_far(m + 1, n, seed)?;
            inst.claim_far(m, eps)?;
            inst
        }
        Family::PointMass => gen_point_mass(n, seed)?,
    })
}

fn claim_column(inst: &GroundTruthInstance) -> String {
    match (&inst.claimed_far_from_m, inst.farness()) {
        (None, _) => "none",
        (Some(_), Farness::Far) => "far",
        (Some(_), Farness::NotFar) => "not-far",
        (Some(_), Farness::Unverified) => "unverified",
    }
    .to_string()
}

fn run_point(cfg: &ExperimentConfig, point: &GridPoint, seed: u64) -> Result<Vec<ResultRow>, HarnessError> {
    let blank = |tester: TesterKind| ResultRow {
        schema_version: SCHEMA_VERSION,
        family: point.family,
        m: point.m,
        eps: point.eps,
        n: point.n,
        t: point.t,
        seed,
        tester,
        verdict: "error".into(),
        queries_used: None,
        samples_used: None,
        witness_valid: WitnessValidity::NotApplicable,
        claimed_far: "none".into(),
        verified_distance: "unverified".into(),
        wall_time_ms: None,
        error: String::new(),
    };
    let inst = match generate_instance(point, seed, cfg.secret) {
        Ok(inst) => inst,
        Err(e) => {
            return Ok(cfg
                .testers
                .iter()
                .map(|&k| ResultRow {
                    error: format!("generation: {e}"),
                    ..blank(k)
                })
                .collect())
        }
    };
    let dist = Arc::new(inst.distribution.clone());
    let budgets = Budgets {
        max_samples: None,
        max_queries: cfg.max_queries,
    };
    let mut rows = Vec::with_capacity(cfg.testers.len());
    for &kind in &cfg.testers {
        let mut row = blank(kind);
        row.claimed_far = claim_column(&inst);
        if let Some(d) = &inst.verified_distance {
            row.verified_distance = d.to_f64().to_string();
        }
        // Every tester sees the same sample stream.
        let mut session = OracleSession::open(dist.clone(), seed, budgets);
        let start = Instant::now();
        let result = kind.run(&mut session, point.m, point.eps);
        if cfg.timing {
            row.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        match result {
            Err(e) => row.error = e.to_string(),
            Ok(v) => {
                row.verdict = if v.rejected() { "reject" } else { "accept" }.into();
                row.queries_used = Some(v.queries);
                row.samples_used = Some(v.samples);
                if let Some(w) = &v.witness {
                    let describe = || {
                        format!(
                            "{} m={} eps={} n={} seed={} tester={}",
                            point.family.name(),
                            point.m,
                            point.eps,
                            point.n,
                            seed,
                            kind.name()
                        )
                    };
                    let graph = ContradictionGraph::from_log(session.log())
                        .map_err(|e| HarnessError::InvalidWitness(format!("{}: {e}", describe())))?;
                    let check = verify_witness(&graph, w, point.m);
                    if !(check.valid && check.bound_holds) {
                        return Err(HarnessError::InvalidWitness(format!("{}: {check:?}", describe())));
                    }
                    row.witness_valid = WitnessValidity::Valid;
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Runs every grid point and seed, in parallel, and returns the rows in
/// `(grid point, seed, tester)` order. Generation and tester errors become
/// rows with verdict `error`; a rejection whose witness fails verification
/// aborts the campaign.
pub fn run_campaign(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let jobs: Vec<(GridPoint, u64)> = cfg
        .grid()
        .into_iter()
        .flat_map(|p| cfg.seeds.iter().map(move |s| (p, s)))
        .collect();
    let per_job: Vec<Vec<ResultRow>> = jobs
        .par_iter()
        .map(|(p, s)| run_point(cfg, p, *s))
        .collect::<Result<_, _>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

/// Header plus one record per row; header only for no rows.
pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(HarnessError::Config(format!("unexpected CSV header {header:?}")));
    }
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// The campaign's result CSV as a string.
pub fn campaign_csv(cfg: &ExperimentConfig) -> Result<String, HarnessError> {
    let rows = run_campaign(cfg)?;
    let mut buf = Vec::new();
    write_rows(&mut buf, &rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
