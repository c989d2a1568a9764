//! Batch experiments: expand a JSON config into runs, execute them (in
//! parallel when asked), compare every result with the exact optimum and
//! write CSV and JSON reports in config order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clique::{clique_kcenter_with, Phase1, Phase1Spec};
use crate::congest::congest_kcenter_with;
use crate::generate::{generate, GenSpec};
use crate::graph::{diameter, DistMatrix, Graph, Length};
use crate::kcenter::{binomial, cycle_opt_k, greedy_gonzalez, opt_k_with, DistanceSource};
use crate::local::{local_kcenter_alg1, parse_rational};
use crate::sim::{Model, ModelConfig, DEFAULT_KAPPA};

/// Version of the CSV column layout and JSON report shape.
pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "KCENTER_THREADS";

/// Oracle work limit used by the harness; larger instances report no optimum.
pub const BENCH_ORACLE_LIMIT: u64 = 2_000_000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    /// Centralized farthest-first greedy, optionally with a stretched oracle.
    Greedy,
    Local,
    Congest,
    Clique,
}

impl Algo {
    fn model(self) -> Option<Model> {
        match self {
            Self::Greedy => None,
            Self::Local => Some(Model::Local),
            Self::Congest => Some(Model::Congest),
            Self::Clique => Some(Model::Clique),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// `eps` for the LOCAL algorithm, as `a/b`, integer or decimal.
    pub eps: Option<String>,
    /// Stretch of the injected oracle for `greedy`.
    pub alpha: Option<f64>,
    /// `exact` or `inject:ALPHA[:SEED]` for `clique`.
    pub phase1: Option<String>,
    pub elect: Option<bool>,
    pub kappa: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub gen: Option<GenSpec>,
    pub file: Option<PathBuf>,
    pub k: usize,
    pub algo: Algo,
    pub model: Option<Model>,
    /// Number of instances; generated graphs get a fresh seed each time.
    pub repeat: Option<usize>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub runs: Vec<RunSpec>,
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One report line. Column order is part of the format version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub instance: String,
    pub algorithm: String,
    pub model: String,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: usize,
    pub diameter: Option<Length>,
    pub radius: Option<Length>,
    pub opt: Option<Length>,
    pub ratio: Option<f64>,
    /// Proven approximation factor for this run.
    pub ratio_bound: Option<f64>,
    pub rounds: Option<u64>,
    pub round_bound: Option<u64>,
    pub max_message_bits: Option<u64>,
    pub ok: bool,
    pub error: Option<String>,
    /// Volatile; excluded from reproducibility comparisons.
    pub wallclock_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoSummary {
    pub runs: usize,
    pub max_ratio: Option<f64>,
    pub violations: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub summary: BTreeMap<String, AlgoSummary>,
}

impl Report {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    /// Copy with the wallclock column cleared.
    pub fn without_volatile(&self) -> Self {
        let mut r = self.clone();
        for row in &mut r.rows {
            row.wallclock_ms = None;
        }
        r
    }

    pub fn to_json(&self) -> Result<String, BenchError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        if self.rows.is_empty() {
            w.write_record(CSV_COLUMNS)?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Io(e.into_error()))?;
        Ok(format!(
            "# kcenter report v{REPORT_FORMAT_VERSION}\n{}",
            String::from_utf8(bytes).expect("csv output is utf-8")
        ))
    }
}

pub const CSV_COLUMNS: [&str; 17] = [
    "instance",
    "algorithm",
    "model",
    "n",
    "m",
    "k",
    "diameter",
    "radius",
    "opt",
    "ratio",
    "ratio_bound",
    "rounds",
    "round_bound",
    "max_message_bits",
    "ok",
    "error",
    "wallclock_ms",
];

/// One expanded run.
#[derive(Debug, Clone)]
struct Job {
    run: RunSpec,
    seed: u64,
    label: String,
}

fn job_seed(base: u64, run: usize, rep: usize) -> u64 {
    base.wrapping_mul(1_000_003)
        .wrapping_add(run as u64 * 100_000)
        .wrapping_add(rep as u64)
}

fn expand(cfg: &BenchConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (i, run) in cfg.runs.iter().enumerate() {
        for rep in 0..run.repeat.unwrap_or(1).max(1) {
            let seed = job_seed(cfg.seed, i, rep);
            let label = match (&run.gen, &run.file) {
                (Some(g), _) => match g {
                    GenSpec::Gnp { .. } | GenSpec::WeightedGnp { .. } => {
                        format!("{}#seed={seed}", g.label())
                    }
                    _ => g.label(),
                },
                (None, Some(f)) => f.display().to_string(),
                (None, None) => "?".into(),
            };
            jobs.push(Job {
                run: run.clone(),
                seed,
                label,
            });
        }
    }
    jobs
}

fn model_name(m: Model) -> String {
    format!("{m:?}").to_uppercase()
}

struct Outcome {
    radius: Length,
    ratio_bound: f64,
    rounds: Option<u64>,
    round_bound: Option<u64>,
    max_message_bits: Option<u64>,
    budget_ok: bool,
}

fn load_graph(job: &Job, base_dir: &Path) -> Result<Graph, String> {
    match (&job.run.gen, &job.run.file) {
        (Some(spec), None) => generate(spec, job.seed).map_err(|e| e.to_string()),
        (None, Some(path)) => {
            let path = base_dir.join(path);
            let text =
                std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            Graph::parse(&text).map_err(|e| e.to_string())
        }
        _ => Err("each run needs exactly one of `gen` and `file`".into()),
    }
}

fn execute(job: &Job, g: &Graph) -> Result<Outcome, String> {
    let k = job.run.k;
    let p = &job.run.params;
    let kappa = p.kappa.unwrap_or(DEFAULT_KAPPA);
    let err = |e: &dyn std::fmt::Display| e.to_string();
    if let (Some(want), Some(have)) = (job.run.model, job.run.algo.model()) {
        if want != have {
            return Err(format!(
                "this algorithm runs under {}, not {}",
                model_name(have),
                model_name(want)
            ));
        }
    }
    match job.run.algo {
        Algo::Greedy => {
            let alpha = p.alpha.unwrap_or(1.0);
            let ds = DistanceSource::stretched(g, alpha, job.seed).map_err(|e| err(&e))?;
            let sol = greedy_gonzalez(g, &ds, k, 1).map_err(|e| err(&e))?;
            Ok(Outcome {
                radius: sol.radius,
                ratio_bound: 2.0 * alpha,
                rounds: None,
                round_bound: None,
                max_message_bits: None,
                budget_ok: true,
            })
        }
        Algo::Local => {
            let eps_text = p.eps.as_deref().unwrap_or("1");
            let eps = parse_rational(eps_text).ok_or_else(|| format!("bad eps `{eps_text}`"))?;
            let run = local_kcenter_alg1(g, k, eps).map_err(|e| err(&e))?;
            let eps = *eps.numer() as f64 / *eps.denom() as f64;
            Ok(Outcome {
                radius: run.solution.radius,
                ratio_bound: (2.0 + eps) * k as f64,
                rounds: Some(run.stats.rounds),
                round_bound: None,
                max_message_bits: Some(run.stats.max_message_bits),
                budget_ok: true,
            })
        }
        Algo::Congest => {
            let cfg = ModelConfig::congest().with_kappa(kappa);
            let run = congest_kcenter_with(g, k, cfg, false).map_err(|e| err(&e))?;
            Ok(Outcome {
                radius: run.solution.radius,
                ratio_bound: 2.0,
                rounds: Some(run.stats.rounds),
                round_bound: Some(run.round_bound),
                max_message_bits: Some(run.stats.max_message_bits),
                budget_ok: run
                    .stats
                    .budget_bits
                    .is_none_or(|b| run.stats.max_message_bits <= b),
            })
        }
        Algo::Clique => {
            let spec: Phase1Spec = p.phase1.as_deref().unwrap_or("exact").parse()?;
            let cfg = ModelConfig::clique().with_kappa(kappa);
            let elect = p.elect.unwrap_or(false);
            let (run, alpha) = match spec {
                Phase1Spec::Exact => (
                    clique_kcenter_with(g, k, Phase1::ExactBroadcast, elect, cfg),
                    1.0,
                ),
                Phase1Spec::Inject { alpha, seed } => {
                    let ds = DistanceSource::stretched(g, alpha, seed.unwrap_or(job.seed))
                        .map_err(|e| err(&e))?;
                    (
                        clique_kcenter_with(g, k, Phase1::Injected(&ds), elect, cfg),
                        alpha,
                    )
                }
            };
            let run = run.map_err(|e| err(&e))?;
            let phase2_ok = run.phase2_rounds == (k.min(g.n()) as u64).saturating_sub(1);
            Ok(Outcome {
                radius: run.solution.radius,
                ratio_bound: 2.0 * alpha,
                rounds: Some(run.stats.rounds),
                round_bound: None,
                max_message_bits: Some(run.stats.max_message_bits),
                budget_ok: phase2_ok
                    && run
                        .stats
                        .budget_bits
                        .is_none_or(|b| run.stats.max_message_bits <= b),
            })
        }
    }
}

fn optimum(spec: Option<&GenSpec>, g: &Graph, k: usize) -> Option<Length> {
    if let Some(GenSpec::Cycle { n }) = spec {
        return Some(cycle_opt_k(*n, k));
    }
    if binomial(g.n(), k.min(g.n())) > BENCH_ORACLE_LIMIT as u128 {
        return None;
    }
    let dm = DistMatrix::new(g).ok()?;
    opt_k_with(&dm, k, BENCH_ORACLE_LIMIT)
        .ok()
        .map(|s| s.radius)
}

fn run_job(job: &Job, base_dir: &Path) -> Row {
    let start = Instant::now();
    let algo = serde_json::to_value(job.run.algo)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    let model = job
        .run
        .algo
        .model()
        .map_or("CENTRAL".to_owned(), model_name);
    let mut row = Row {
        instance: job.label.clone(),
        algorithm: algo,
        model,
        n: None,
        m: None,
        k: job.run.k,
        diameter: None,
        radius: None,
        opt: None,
        ratio: None,
        ratio_bound: None,
        rounds: None,
        round_bound: None,
        max_message_bits: None,
        ok: false,
        error: None,
        wallclock_ms: None,
    };
    let result = load_graph(job, base_dir).and_then(|g| {
        row.n = Some(g.n());
        row.m = Some(g.m());
        row.diameter = diameter(&g).ok();
        execute(job, &g).map(|o| (g, o))
    });
    match result {
        Err(e) => row.error = Some(e),
        Ok((g, o)) => {
            let opt = optimum(job.run.gen.as_ref(), &g, job.run.k);
            row.radius = Some(o.radius);
            row.opt = opt;
            row.ratio_bound = Some(o.ratio_bound);
            row.rounds = o.rounds;
            row.round_bound = o.round_bound;
            row.max_message_bits = o.max_message_bits;
            let mut ok = o.budget_ok;
            if let Some(opt) = opt {
                if opt > 0 {
                    let ratio = o.radius as f64 / opt as f64;
                    row.ratio = Some(ratio);
                    ok &= ratio <= o.ratio_bound + 1e-9;
                } else {
                    ok &= o.radius == 0;
                }
            }
            if let (Some(r), Some(b)) = (o.rounds, o.round_bound) {
                ok &= r <= b;
            }
            row.ok = ok;
        }
    }
    row.wallclock_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    row
}

fn summarize(rows: &[Row]) -> BTreeMap<String, AlgoSummary> {
    let mut out: BTreeMap<String, AlgoSummary> = BTreeMap::new();
    for row in rows {
        let s = out.entry(row.algorithm.clone()).or_insert(AlgoSummary {
            runs: 0,
            max_ratio: None,
            violations: 0,
            errors: 0,
        });
        s.runs += 1;
        if let Some(r) = row.ratio {
            s.max_ratio = Some(s.max_ratio.map_or(r, |m: f64| m.max(r)));
        }
        if row.error.is_some() {
            s.errors += 1;
        } else if !row.ok {
            s.violations += 1;
        }
    }
    out
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&t| t > 0)
}

/// Runs every job; relative `file` paths resolve against `base_dir`.
pub fn run_bench(
    cfg: &BenchConfig,
    base_dir: &Path,
    threads: Option<usize>,
) -> Result<Report, BenchError> {
    use rayon::prelude::*;

    let jobs = expand(cfg);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    // collect() on an indexed parallel iterator keeps input order
    let rows: Vec<Row> = pool.install(|| jobs.par_iter().map(|j| run_job(j, base_dir)).collect());
    Ok(Report {
        format_version: REPORT_FORMAT_VERSION,
        seed: cfg.seed,
        summary: summarize(&rows),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bench(json: &str, threads: Option<usize>) -> Report {
        let cfg = BenchConfig::from_json(json).unwrap();
        run_bench(&cfg, Path::new("."), threads).unwrap()
    }

    #[test]
    fn empty_config() {
        let r = bench("{}", None);
        assert!(r.rows.is_empty());
        assert!(r.all_ok());
        let csv = r.to_csv().unwrap();
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("instance,algorithm,model"));
    }

    #[test]
    fn congest_suite_respects_two() {
        let r = bench(
            r#"{"seed": 3, "runs": [
                {"gen": {"kind": "gnp", "n": 9, "p": 0.35}, "k": 2, "algo": "congest", "repeat": 15},
                {"gen": {"kind": "cycle", "n": 12}, "k": 3, "algo": "congest", "model": "CONGEST"}
            ]}"#,
            Some(2),
        );
        assert_eq!(r.rows.len(), 16);
        assert!(r.all_ok(), "{:?}", r.rows.iter().find(|r| !r.ok));
        let s = &r.summary["congest"];
        assert!(s.max_ratio.unwrap() <= 2.0);
        assert_eq!(r.rows[15].instance, "cycle(n=12)");
    }

    #[test]
    fn clique_inject_and_local() {
        let r = bench(
            r#"{"runs": [
                {"gen": {"kind": "weighted-gnp", "n": 8, "p": 0.5, "max_weight": 5}, "k": 3,
                 "algo": "clique", "repeat": 5, "params": {"phase1": "inject:1.5"}},
                {"gen": {"kind": "cycle", "n": 30}, "k": 2, "algo": "local", "params": {"eps": "1"}},
                {"gen": {"kind": "path", "n": 7}, "k": 2, "algo": "greedy", "params": {"alpha": 2.0}}
            ]}"#,
            None,
        );
        assert!(r.all_ok());
        assert!(r.summary["clique"].max_ratio.unwrap() <= 3.0);
    }

    #[test]
    fn errors_are_rows() {
        let r = bench(
            r#"{"runs": [
                {"gen": {"kind": "gnp", "n": 6, "p": 0.0}, "k": 1, "algo": "greedy"},
                {"gen": {"kind": "cycle", "n": 6}, "k": 1, "algo": "congest", "model": "LOCAL"},
                {"gen": {"kind": "cycle", "n": 6}, "k": 1, "algo": "greedy"}
            ]}"#,
            None,
        );
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows[0].error.is_some());
        assert!(r.rows[1].error.as_deref().unwrap().contains("CONGEST"));
        assert!(r.rows[2].ok);
        assert!(!r.all_ok());
        assert_eq!(r.summary["greedy"].errors, 1);
    }

    #[test]
    fn reports_are_reproducible_across_thread_counts() {
        let json = r#"{"seed": 11, "runs": [
            {"gen": {"kind": "gnp", "n": 10, "p": 0.3}, "k": 3, "algo": "greedy", "repeat": 6,
             "params": {"alpha": 1.25}},
            {"gen": {"kind": "gnp", "n": 10, "p": 0.3}, "k": 2, "algo": "clique", "repeat": 4}
        ]}"#;
        let a = bench(json, Some(1)).without_volatile();
        let b = bench(json, Some(4)).without_volatile();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(BenchConfig::from_json(r#"{"runs": [], "bogus": 1}"#).is_err());
    }
}
