use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use suppsize::adversary::{Family, SecretParams};
use suppsize::bitdist::DistributionSpec;
use suppsize::oracle::{Budgets, OracleSession, QueryLog};
use suppsize::probbounds::standard_suite;
use suppsize::witness::{verify_witness, ContradictionGraph, Witness};
use suppsize_harness::{
    generate_instance, run_campaign, scaling_table, write_rows, write_summary, ExperimentConfig, GridPoint,
    GroupKey, HarnessError, TesterKind,
};

#[derive(Parser)]
#[command(name = "suppsize", version, about = "Support-size testing laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and print it as JSON.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 1.0 / 16.0)]
        eps: f64,
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Number of sets for `dno`; defaults to 2m.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one tester on one instance and print its verdict as JSON.
    Test {
        /// Instance JSON from `gen`, or a bare distribution JSON.
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum)]
        tester: TesterKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_queries: Option<usize>,
        /// Write the query transcript as JSONL.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Run a campaign described by a JSON config and write CSV results.
    Campaign {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check a transcript for a witness against support size m.
    VerifyWitness {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        m: usize,
        /// A tester's witness JSON to check instead of searching for one.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Monte-Carlo checks of the tail bounds and the linearization grid.
    ValidateBounds {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Invariant(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::InvalidWitness(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn usage<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Usage(format!("{context}: {e}"))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(usage(&path.display().to_string()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(usage(&p.display().to_string())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(usage("stdout"))
        }
    }
}

fn load_distribution(text: &str) -> Result<DistributionSpec, Failure> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(usage("instance"))?;
    let body = match value.get("distribution") {
        Some(d) => d.to_string(),
        None => text.to_string(),
    };
    DistributionSpec::from_json(&body).map_err(usage("instance"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen {
            family,
            m,
            eps,
            n,
            t,
            seed,
            out,
        } => {
            let t = (family == Family::Dno).then(|| t.unwrap_or(2 * m));
            let point = GridPoint { family, m, eps, n, t };
            let inst = generate_instance(&point, seed, SecretParams::default()).map_err(usage("gen"))?;
            let text = serde_json::to_string_pretty(&inst).expect("instance serializes") + "\n";
            emit(out.as_deref(), &text)
        }
        Command::Test {
            instance,
            m,
            eps,
            tester,
            seed,
            max_queries,
            transcript,
        } => {
            let dist = load_distribution(&read(&instance)?)?;
            let budgets = Budgets {
                max_samples: None,
                max_queries,
            };
            let mut session = OracleSession::open(Arc::new(dist), seed, budgets);
            let verdict = tester.run(&mut session, m, eps).map_err(usage("test"))?;
            if let Some(w) = &verdict.witness {
                let graph = ContradictionGraph::from_log(session.log()).map_err(|e| Failure::Invariant(e.to_string()))?;
                let check = verify_witness(&graph, w, m);
                if !(check.valid && check.bound_holds) {
                    return Err(Failure::Invariant(format!("witness failed verification: {check:?}")));
                }
            }
            if let Some(p) = transcript {
                emit(Some(&p), &session.log().to_jsonl())?;
            }
            emit(None, &(serde_json::to_string(&verdict).expect("verdict serializes") + "\n"))
        }
        Command::Campaign { config } => {
            let cfg = ExperimentConfig::from_json(&read(&config)?).map_err(usage("config"))?;
            let rows = run_campaign(&cfg)?;
            let mut buf = Vec::new();
            write_rows(&mut buf, &rows)?;
            emit(cfg.output.as_deref(), &String::from_utf8(buf).expect("utf-8"))?;
            if let Some(path) = &cfg.summary {
                let table = scaling_table(&rows, &GroupKey::ALL);
                let mut buf = Vec::new();
                write_summary(&mut buf, &table)?;
                emit(Some(path), &String::from_utf8(buf).expect("utf-8"))?;
            }
            Ok(())
        }
        Command::VerifyWitness { transcript, m, witness } => {
            let log = QueryLog::from_jsonl(&read(&transcript)?).map_err(usage("transcript"))?;
            let graph = ContradictionGraph::from_log(&log).map_err(usage("transcript"))?;
            let report = match witness {
                Some(p) => {
                    let w: Witness = serde_json::from_str(&read(&p)?).map_err(usage("witness"))?;
                    let check = verify_witness(&graph, &w, m);
                    let verdict = if check.valid && check.bound_holds { "reject" } else { "invalid" };
                    serde_json::json!({"verdict": verdict, "check": check})
                }
                None => match graph.find_clique(m + 1) {
                    Some(clique) => serde_json::json!({
                        "verdict": "reject",
                        "clique": clique,
                        "certificates": graph.clique_certificates(&clique),
                        "hansel": graph.check_hansel_bound(m),
                    }),
                    None => {
                        let verdict = match graph.is_m_colorable(m) {
                            Ok(Some(_)) => "accept",
                            Ok(None) => "reject",
                            Err(_) => "unknown",
                        };
                        serde_json::json!({"verdict": verdict, "hansel": graph.check_hansel_bound(m)})
                    }
                },
            };
            emit(None, &(report.to_string() + "\n"))
        }
        Command::ValidateBounds { seed, trials, out } => {
            if trials == 0 {
                return Err(Failure::Usage("trials must be positive".into()));
            }
            let suite = standard_suite(seed, trials);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "bound",
                "parameters",
                "analytic_bound",
                "empirical_frequency",
                "trials",
                "standard_error",
                "violated",
            ])
            .map_err(usage("csv"))?;
            for r in &suite.tail {
                w.write_record([
                    r.bound.clone(),
                    r.parameter_string(),
                    r.analytic_bound.to_string(),
                    r.empirical_frequency.to_string(),
                    r.trials.to_string(),
                    r.standard_error.to_string(),
                    r.violated.to_string(),
                ])
                .map_err(usage("csv"))?;
            }
            let lin = &suite.linearization;
            w.write_record([
                "exp-linearization".to_string(),
                format!("points={}", lin.points),
                String::new(),
                String::new(),
                lin.points.to_string(),
                String::new(),
                (lin.violations > 0).to_string(),
            ])
            .map_err(usage("csv"))?;
            let text = String::from_utf8(w.into_inner().map_err(usage("csv"))?).expect("utf-8");
            emit(out.as_deref(), &text)?;
            let violations = suite.tail.iter().filter(|r| r.violated).count() + lin.violations;
            eprintln!("{} checks, {} violations", suite.tail.len() + 1, violations);
            if suite.passed() {
                Ok(())
            } else {
                Err(Failure::Invariant("bound violated beyond 3 standard errors".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violation: {msg}");
            ExitCode::from(2)
        }
    }
}
