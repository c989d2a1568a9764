use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kcenter_core::adversary::{build_rearranged_cycle, named_algorithm, ALGORITHMS};
use kcenter_core::bench::{run_bench, threads_from_env, BenchConfig, REPORT_FORMAT_VERSION};
use kcenter_core::clique::{clique_kcenter_with, Phase1, Phase1Spec};
use kcenter_core::congest::congest_kcenter_with;
use kcenter_core::gadgets::{
    bits_to_string, build_gkxy, build_gxy, verify_claim1, verify_claim2, verify_lemma4,
    DisjointnessInstance, GADGET_FORMAT_VERSION,
};
use kcenter_core::generate::{cycle, generate, GenSpec};
use kcenter_core::graph::{Graph, Length};
use kcenter_core::kcenter::{opt_k_bruteforce_limited, DistanceSource, KCenterError};
use kcenter_core::local::{local_kcenter_alg1, parse_rational};
use kcenter_core::sim::{write_trace, ModelConfig, DEFAULT_KAPPA};

/// Oracle evaluations allowed for single runs before the optimum is omitted.
const ORACLE_LIMIT: u64 = 20_000_000;

#[derive(Parser)]
#[command(
    name = "kcenter",
    about = "Distributed k-center simulator and verifier"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a graph in the text format.
    Gen(GenArgs),
    /// Run the LOCAL algorithm on a graph or an n-cycle.
    LocalRun(LocalArgs),
    /// Build the rearranged cycle against a test rule.
    LocalAdversary(AdversaryArgs),
    /// Run the CONGEST algorithm.
    CongestRun(CongestArgs),
    /// Run the CLIQUE algorithm.
    CliqueRun(CliqueArgs),
    /// Build or verify disjointness gadgets.
    #[command(subcommand)]
    Gadget(GadgetCmd),
    /// Run a batch config and write CSV and JSON reports.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cycle,
    Path,
    Star,
    Gnp,
    WeightedGnp,
}

#[derive(Args)]
struct GenArgs {
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 10)]
    max_weight: Length,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LocalArgs {
    #[arg(long, conflicts_with = "n", required_unless_present = "n")]
    graph: Option<PathBuf>,
    /// Use the canonical n-cycle instead of a file.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: usize,
    /// Accuracy parameter, e.g. `1`, `1/2` or `0.25`.
    #[arg(long)]
    eps: String,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(ALGORITHMS))]
    alg: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
}

#[derive(Args)]
struct CongestArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    /// Write the message trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: u32,
}

#[derive(Args)]
struct CliqueArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    /// `exact` or `inject:ALPHA[:SEED]`.
    #[arg(long, default_value = "exact")]
    phase1: Phase1Spec,
    /// Spend one extra round electing the seed node.
    #[arg(long)]
    elect: bool,
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: u32,
}

#[derive(Subcommand)]
enum GadgetCmd {
    /// Write a gadget graph plus its role sidecar.
    Build {
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 1)]
        copies: usize,
        #[arg(long)]
        out: PathBuf,
        /// Sidecar path; defaults to OUT with `.json` appended.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Check the optimum gap and distance claims.
    Verify {
        #[arg(long)]
        ell: usize,
        #[arg(long, conflicts_with_all = ["x", "y"])]
        exhaustive: bool,
        #[arg(long, requires = "y", required_unless_present = "exhaustive")]
        x: Option<String>,
        #[arg(long, requires = "x")]
        y: Option<String>,
    },
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Worker threads; overrides KCENTER_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

fn version() -> String {
    format!(
        "{}\nreport format {REPORT_FORMAT_VERSION}\ngadget sidecar format {GADGET_FORMAT_VERSION}",
        env!("CARGO_PKG_VERSION")
    )
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Graph::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn print_json(v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    write_out(None, &text)
}

/// Exact optimum, or `None` when the oracle would be too expensive.
fn oracle(g: &Graph, k: usize) -> Result<Option<Length>> {
    match opt_k_bruteforce_limited(g, k, ORACLE_LIMIT) {
        Ok(sol) => Ok(Some(sol.radius)),
        Err(KCenterError::OracleTooLarge { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn ratio(radius: Length, opt: Option<Length>) -> Option<f64> {
    match opt {
        Some(0) => Some(if radius == 0 { 1.0 } else { f64::INFINITY }),
        Some(o) => Some(radius as f64 / o as f64),
        None => None,
    }
}

fn gen(a: GenArgs) -> Result<ExitCode> {
    let spec = match a.kind {
        Kind::Cycle => GenSpec::Cycle { n: a.n },
        Kind::Path => GenSpec::Path { n: a.n },
        Kind::Star => GenSpec::Star { n: a.n },
        Kind::Gnp => GenSpec::Gnp { n: a.n, p: a.p },
        Kind::WeightedGnp => GenSpec::WeightedGnp {
            n: a.n,
            p: a.p,
            max_weight: a.max_weight,
        },
    };
    let g = generate(&spec, a.seed)?;
    write_out(a.out.as_deref(), &g.to_text())?;
    Ok(ExitCode::SUCCESS)
}

fn local_run(a: LocalArgs) -> Result<ExitCode> {
    let g = match (&a.graph, a.n) {
        (Some(p), _) => read_graph(p)?,
        (None, Some(n)) => cycle(n)?,
        (None, None) => bail!("need --graph or --n"),
    };
    let eps = parse_rational(&a.eps).with_context(|| format!("bad --eps {:?}", a.eps))?;
    let run = local_kcenter_alg1(&g, a.k, eps)?;
    let opt = oracle(&g, a.k)?;
    let bound = (2.0 + *eps.numer() as f64 / *eps.denom() as f64) * a.k as f64;
    let r = ratio(run.solution.radius, opt);
    let mut out = serde_json::to_value(&run)?;
    out["opt"] = json!(opt);
    out["ratio"] = json!(r);
    out["ratio_bound"] = json!(bound);
    out["bound_ok"] = json!(r.map(|r| r <= bound + 1e-9));
    print_json(&out)?;
    Ok(ExitCode::SUCCESS)
}

fn local_adversary(a: AdversaryArgs) -> Result<ExitCode> {
    let alg = named_algorithm(&a.alg, a.n, a.k, a.t, a.beta).context("unknown rule")?;
    let rep = build_rearranged_cycle(alg.as_ref(), a.n, a.k, a.beta)?;
    let mut out = serde_json::to_value(&rep)?;
    out["holds"] = json!(rep.holds());
    print_json(&out)?;
    Ok(if rep.holds() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn congest_run(a: CongestArgs) -> Result<ExitCode> {
    let g = read_graph(&a.graph)?;
    let cfg = ModelConfig::congest().with_kappa(a.kappa);
    let run = congest_kcenter_with(&g, a.k, cfg, a.trace.is_some())?;
    if let Some(path) = &a.trace {
        let file =
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_trace(std::io::BufWriter::new(file), &run.trace)?;
    }
    let opt = oracle(&g, a.k)?;
    print_json(&json!({
        "centers": run.solution.centers,
        "radius": run.solution.radius,
        "opt": opt,
        "ratio": ratio(run.solution.radius, opt),
        "rounds": run.stats.rounds,
        "round_bound": run.round_bound,
        "kD_bound_ok": run.rounds_ok(),
        "diameter": run.diameter,
        "d_prime": run.d_prime,
        "leader": run.leader,
        "max_message_bits": run.stats.max_message_bits,
        "budget_bits": run.stats.budget_bits,
        "total_messages": run.stats.total_messages,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn clique_run(a: CliqueArgs) -> Result<ExitCode> {
    let g = read_graph(&a.graph)?;
    let cfg = ModelConfig::clique().with_kappa(a.kappa);
    let source;
    let (phase1, alpha) = match a.phase1 {
        Phase1Spec::Exact => (Phase1::ExactBroadcast, 1.0),
        Phase1Spec::Inject { alpha, seed } => {
            source = DistanceSource::stretched(&g, alpha, seed.unwrap_or(0))?;
            (Phase1::Injected(&source), alpha)
        }
    };
    let run = clique_kcenter_with(&g, a.k, phase1, a.elect, cfg)?;
    let opt = oracle(&g, a.k)?;
    print_json(&json!({
        "centers": run.solution.centers,
        "sequence": run.sequence,
        "radius": run.solution.radius,
        "opt": opt,
        "ratio_vs_oracle": ratio(run.solution.radius, opt),
        "ratio_bound": 2.0 * alpha,
        "phase1_rounds": run.phase1_rounds,
        "phase2_rounds": run.phase2_rounds,
        "rounds": run.stats.rounds,
        "split_records": run.split_records,
        "max_message_bits": run.stats.max_message_bits,
        "budget_bits": run.stats.budget_bits,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn verify_one(inst: &DisjointnessInstance) -> Result<(bool, Value)> {
    let lemma = verify_lemma4(inst)?;
    let claim1 = verify_claim1(&build_gxy(inst)?)?;
    let mut ok = lemma.holds && lemma.short_pairs_match && claim1.holds();
    let mut v = json!({
        "x": bits_to_string(&inst.x),
        "y": bits_to_string(&inst.y),
        "optimum": lemma,
        "distances": claim1,
    });
    if inst.ell <= 4 {
        let claim2 = verify_claim2(inst, 2)?;
        ok &= claim2.holds();
        v["two_copies"] = serde_json::to_value(&claim2)?;
    }
    v["holds"] = json!(ok);
    Ok((ok, v))
}

fn gadget(cmd: GadgetCmd) -> Result<ExitCode> {
    match cmd {
        GadgetCmd::Build {
            ell,
            x,
            y,
            copies,
            out,
            sidecar,
        } => {
            let inst = DisjointnessInstance::parse(&x, &y)?;
            if inst.ell != ell {
                bail!(
                    "--ell {ell} does not match bit strings of length {}",
                    inst.ell
                );
            }
            let gg = build_gkxy(&inst, copies)?;
            fs::write(&out, gg.graph.to_text())
                .with_context(|| format!("writing {}", out.display()))?;
            let side = sidecar.unwrap_or_else(|| {
                let mut s = out.clone().into_os_string();
                s.push(".json");
                s.into()
            });
            fs::write(&side, serde_json::to_string_pretty(&gg.sidecar())?)
                .with_context(|| format!("writing {}", side.display()))?;
            eprintln!(
                "{} nodes, {} edges -> {}, {}",
                gg.graph.n(),
                gg.graph.m(),
                out.display(),
                side.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        GadgetCmd::Verify {
            ell,
            exhaustive,
            x,
            y,
        } => {
            if exhaustive {
                if ell > 4 {
                    bail!("--exhaustive supports ell <= 4");
                }
                let (mut passed, mut failed) = (0, Vec::new());
                for code in 0..1u64 << (2 * ell) {
                    let (ok, v) = verify_one(&DisjointnessInstance::from_code(ell, code)?)?;
                    if ok {
                        passed += 1;
                    } else {
                        failed.push(v);
                    }
                }
                let ok = failed.is_empty();
                print_json(
                    &json!({ "ell": ell, "passed": passed, "failed": failed, "holds": ok }),
                )?;
                return Ok(if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::FAILURE
                });
            }
            let (x, y) = (x.unwrap_or_default(), y.unwrap_or_default());
            let inst = DisjointnessInstance::parse(&x, &y)?;
            if inst.ell != ell {
                bail!(
                    "--ell {ell} does not match bit strings of length {}",
                    inst.ell
                );
            }
            let (ok, v) = verify_one(&inst)?;
            print_json(&v)?;
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn bench(a: BenchArgs) -> Result<ExitCode> {
    let text =
        fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let cfg = BenchConfig::from_json(&text)?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let report = run_bench(&cfg, base, a.threads.or_else(threads_from_env))?;
    if let Some(p) = &a.csv {
        write_out(Some(p), &report.to_csv()?)?;
    }
    match &a.json {
        Some(p) => write_out(Some(p), &report.to_json()?)?,
        None if a.csv.is_none() => write_out(None, &(report.to_json()? + "\n"))?,
        None => {}
    }
    let bad = report.rows.iter().filter(|r| !r.ok).count();
    eprintln!("{} rows, {bad} failed", report.rows.len());
    Ok(if bad == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let matches = Cli::command().version(version()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let res = match cli.cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::LocalRun(a) => local_run(a),
        Cmd::LocalAdversary(a) => local_adversary(a),
        Cmd::CongestRun(a) => congest_run(a),
        Cmd::CliqueRun(a) => clique_run(a),
        Cmd::Gadget(c) => gadget(c),
        Cmd::Bench(a) => bench(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
