//! Command-line front end: generate instances, run the algorithms, sweep
//! families and inspect permutation graphs.
//!
//! All ids on the command line and in the output are 1-based.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use linematch::harness::{self, SweepConfig};
use linematch::instances::{self, Distribution, GenSpec, KMode};
use linematch::io::{self, JsonFormat};
use linematch::model::{self, derive_profile, Instance, Matching, OrdinalProfile};
use linematch::optimal::greedy_optimal;
use linematch::ordermatch::{self, RecoveryOptions};
use linematch::permgraph::{self, PermutationGraph};
use linematch::rational::{self, Rational};
use linematch::twosided::{self, QueryOracle, TwoSidedInstance};

#[derive(Parser)]
#[command(name = "linematch", version, about = "Ordinal matching of agents and items on a line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Gen(GenArgs),
    /// Run an algorithm on an instance or a bare profile.
    Run(RunArgs),
    /// Run a sweep described by a config file.
    Eval(EvalArgs),
    /// Print the permutation graph of an order_match output and its
    /// forward-edge removal trace.
    Analyze(AnalyzeArgs),
    /// Solve a two-sided instance, optionally through rank queries.
    Twosided(TwoSidedArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFamily {
    Random,
    LbK1,
    LbKgeq2,
    TiebreakK1,
    TiebreakKgeq2,
    QueryLb,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: GenFamily,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "1/1000", value_parser = parse_rational)]
    eps: Rational,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coordinate range for the random family.
    #[arg(long, default_value_t = -100, allow_hyphen_values = true)]
    lo: i64,
    #[arg(long, default_value_t = 100, allow_hyphen_values = true)]
    hi: i64,
    /// Random family only: write takers and givers instead.
    #[arg(long)]
    two_sided: bool,
    /// Lower-bound families: the agent placed next to `g_n`. Defaults to the
    /// adversary's choice against order_match.
    #[arg(long)]
    slot: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Ordermatch,
    OrdermatchNaive,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "ordermatch")]
    algo: Algo,
    /// Two agent ids `i,j` for ordermatch-naive.
    #[arg(long, value_parser = parse_pair)]
    anchors: Option<(usize, usize)>,
    #[arg(long, conflicts_with = "instance", required_unless_present = "instance")]
    profile: Option<PathBuf>,
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Report only this `SC_k`.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "ordermatch")]
    algo: Algo,
    #[arg(long, value_parser = parse_pair)]
    anchors: Option<(usize, usize)>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Both sides' full rankings are known.
    Optimal,
    /// Takers' rankings known, givers answer rank queries.
    Ranks1side,
    /// Both sides answer rank queries only.
    Zeroknowledge,
}

#[derive(clap::Args)]
struct TwoSidedArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    instance: PathBuf,
    /// Relabel takers and givers with a seeded shuffle before solving.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected two ids like 1,4")?;
    let id = |t: &str| match t.trim().parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v - 1),
        _ => Err(format!("'{t}' is not a 1-based id")),
    };
    Ok((id(a)?, id(b)?))
}

fn q(v: &Rational) -> Value {
    Value::String(rational::format(v))
}

fn matching_json(m: &Matching) -> Value {
    json!(m.as_slice().iter().map(|g| g + 1).collect::<Vec<_>>())
}

fn costs_json(costs: &[Rational], only: Option<usize>) -> Value {
    let mut out = serde_json::Map::new();
    for (i, c) in costs.iter().enumerate() {
        if only.is_none_or(|k| k == i + 1) {
            out.insert((i + 1).to_string(), q(c));
        }
    }
    Value::Object(out)
}

fn print(value: &Value) {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    // a closed pipe is not an error worth reporting
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn load<T: JsonFormat>(path: &Path) -> Result<T> {
    Ok(io::load(path)?)
}

fn gen(args: &GenArgs) -> Result<()> {
    let mode = |f| match f {
        GenFamily::LbK1 | GenFamily::TiebreakK1 => KMode::K1,
        _ => KMode::Kgeq2,
    };
    match args.family {
        GenFamily::Random => {
            let mut spec = GenSpec::new(args.n, args.seed);
            spec.distribution = Distribution::Uniform {
                lo: args.lo,
                hi: args.hi,
            };
            if args.two_sided {
                spec.distinct = true;
                io::save(&args.out, &instances::random_two_sided(&spec)?)?;
            } else {
                io::save(&args.out, &instances::random_instance(&spec)?)?;
            }
        }
        f @ (GenFamily::LbK1 | GenFamily::LbKgeq2) => {
            let instance = match args.slot {
                Some(0) => bail!("--slot is a 1-based agent id"),
                Some(slot) => instances::lower_bound_instance(args.n, mode(f), &args.eps, slot - 1)?,
                None => {
                    let profile = instances::common_ranking_profile(args.n);
                    let m = ordermatch::order_match(&profile)?;
                    let r = instances::adversarial_ratio(&profile, &m, mode(f), &args.eps)?;
                    log::info!("order_match ratio at k = {}: {}", r.k, r.ratio);
                    r.instance
                }
            };
            io::save(&args.out, &instance)?;
        }
        f @ (GenFamily::TiebreakK1 | GenFamily::TiebreakKgeq2) => {
            io::save(&args.out, &instances::gen_tiebreak_pathology(args.n, mode(f), &args.eps)?)?;
        }
        GenFamily::QueryLb => {
            // a seeded queried set of the largest allowed size
            let mut givers: Vec<usize> = (0..args.n).collect();
            givers.shuffle(&mut ChaCha8Rng::seed_from_u64(args.seed));
            let mut queried: Vec<usize> = givers.into_iter().take(args.n.saturating_sub(2)).collect();
            queried.sort_unstable();
            let (first, second) = twosided::fullpref_lb_witness(args.n, &queried)?;
            let doc = json!({
                "queried": queried.iter().map(|b| b + 1).collect::<Vec<_>>(),
                "first": serde_json::from_str::<Value>(&first.to_json())?,
                "second": serde_json::from_str::<Value>(&second.to_json())?,
            });
            std::fs::write(&args.out, serde_json::to_string_pretty(&doc)? + "\n")
                .with_context(|| format!("writing {}", args.out.display()))?;
        }
    }
    Ok(())
}

fn run_algo(algo: Algo, anchors: Option<(usize, usize)>, profile: &OrdinalProfile) -> Result<ordermatch::OrderMatchRun> {
    let options = RecoveryOptions::default();
    Ok(match (algo, anchors) {
        (Algo::Ordermatch, None) => ordermatch::order_match_run(profile, options)?,
        (Algo::Ordermatch, Some(_)) => bail!("--anchors only applies to ordermatch-naive"),
        (Algo::OrdermatchNaive, Some(pair)) => ordermatch::order_match_naive_run(profile, pair, options)?,
        (Algo::OrdermatchNaive, None) => bail!("ordermatch-naive needs --anchors i,j"),
    })
}

fn run(args: &RunArgs) -> Result<()> {
    let instance: Option<Instance> = args.instance.as_deref().map(load).transpose()?;
    let profile = match (&instance, &args.profile) {
        (Some(inst), _) => derive_profile(inst),
        (None, Some(path)) => load(path)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    if let Some(k) = args.k {
        if k == 0 || k > profile.n() {
            bail!("k must lie in 1..={}", profile.n());
        }
    }
    let result = run_algo(args.algo, args.anchors, &profile)?;
    if let Some(stage) = result.item_order.fallback {
        log::info!("inner order needed the axis search ({stage:?})");
    }
    let costs = match &instance {
        Some(inst) => costs_json(&model::cost_per_k(inst, &result.matching)?, args.k),
        None => Value::Null,
    };
    print(&json!({
        "matching": matching_json(&result.matching),
        "cost_per_k": costs,
    }));
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let config = SweepConfig::parse(&text).with_context(|| args.config.display().to_string())?;
    let report = harness::eval_sweep(&config)?;
    harness::write_outputs(&report, &config)?;
    for s in report.summary() {
        let worst = s.max_ratio.as_ref().map_or("inf".to_string(), rational::format);
        println!("{:<16} {:<18} k={:<3} rows={:<6} max_ratio={worst}", s.family.to_string(), s.algorithm.to_string(), s.k, s.rows);
    }
    println!("{} rows, {} failures, {} fallbacks", report.rows.len(), report.failures.len(), report.fallbacks);
    if report.all_ok() {
        return Ok(true);
    }
    for path in harness::dump_reproducers(&report, &config, &config.reproducers)? {
        eprintln!("reproducer: {}", path.display());
    }
    Ok(false)
}

fn edges_json(graph: &PermutationGraph, instance: &Instance) -> Value {
    graph
        .edges()
        .into_iter()
        .map(|(t, h, kind)| {
            json!({
                "tail": t + 1,
                "head": h + 1,
                "kind": kind.name(),
                "cost": q(&graph.edge_cost(instance, t, h)),
            })
        })
        .collect()
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let instance: Instance = load(&args.instance)?;
    let profile = derive_profile(&instance);
    let result = run_algo(args.algo, args.anchors, &profile)?;
    let a = harness::analyze_run(&instance, &profile, &result)?;
    let labels: Vec<String> = a.graph.labels().iter().map(|l| l.name()).collect();
    let removal = match permgraph::remove_forward_edges(&a.graph, &a.frame) {
        Ok(r) => {
            let pair = |(x, y): (usize, usize)| json!([x + 1, y + 1]);
            let swaps: Vec<Value> = r
                .swaps
                .iter()
                .map(|s| {
                    json!({
                        "removed": s.removed.map(pair),
                        "added": s.added.map(pair),
                        "max_ok": s.max_ok,
                        "sum_ok": s.sum_ok,
                        "cost_after": s.cost_after.iter().map(q).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let violations: Vec<Value> = permgraph::check_edge_bound(&a.frame, &r.graph)?
                .iter()
                .map(|v| json!({"tail": v.tail + 1, "head": v.head + 1, "cost": q(&v.cost), "bound": q(&v.bound)}))
                .collect();
            json!({
                "swaps": swaps,
                "monotone": r.monotone(),
                "edges": edges_json(&r.graph, &a.frame),
                "edge_bound_violations": violations,
                "dot": r.graph.to_dot(),
            })
        }
        Err(e) => json!({"error": e.to_string()}),
    };
    let opt = greedy_optimal(&instance);
    print(&json!({
        "matching": matching_json(&result.matching),
        "optimal": matching_json(&opt.matching),
        "mirrored": a.mirrored,
        "pi_g": result.item_order.items.iter().map(|g| g + 1).collect::<Vec<_>>(),
        "pi_g_ok": a.pi_g_ok,
        "labels": labels,
        "edges": edges_json(&a.graph, &a.frame),
        "dot": a.graph.to_dot(),
        "removal": removal,
    }));
    Ok(())
}

/// Relabels takers by `tp` and givers by `gp`: new taker `i` is old `tp[i]`.
fn relabel(inst: &TwoSidedInstance, tp: &[usize], gp: &[usize]) -> Result<TwoSidedInstance> {
    let takers = tp.iter().map(|&a| inst.takers()[a].clone()).collect();
    let givers = gp.iter().map(|&b| inst.givers()[b].clone()).collect();
    Ok(TwoSidedInstance::new(takers, givers)?)
}

fn twosided_cmd(args: &TwoSidedArgs) -> Result<()> {
    let original: TwoSidedInstance = load(&args.instance)?;
    let n = original.n();
    let mut tp: Vec<usize> = (0..n).collect();
    let mut gp: Vec<usize> = (0..n).collect();
    if let Some(seed) = args.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        tp.shuffle(&mut rng);
        gp.shuffle(&mut rng);
    }
    let inst = relabel(&original, &tp, &gp)?;
    let tprof = inst.taker_profile();
    let (m, rank_queries, full_queries, bound, within, case) = match args.mode {
        Mode::Optimal => {
            let m = twosided::two_sided_optimal(&tprof, &inst.giver_profile())?;
            (m, 0, 2 * n, None, true, None)
        }
        Mode::Ranks1side | Mode::Zeroknowledge => {
            let mut oracle = QueryOracle::new(&inst);
            let out = match args.mode {
                Mode::Ranks1side => twosided::solve_one_sided_ranks(&mut oracle, &tprof)?,
                _ => twosided::solve_zero_knowledge(&mut oracle)?,
            };
            let within = out.within_bound();
            (out.matching, out.rank_queries, out.full_queries, Some(out.bound), within, Some(format!("{:?}", out.case)))
        }
    };
    // back to the file's ids
    let mut item_of = vec![0; n];
    for (a, b) in m.pairs() {
        item_of[tp[a]] = gp[b];
    }
    let m = Matching::new(item_of)?;
    let plain = original.as_instance();
    let optimal = model::cost_per_k(&plain, &m)? == greedy_optimal(&plain).cost_per_k;
    print(&json!({
        "matching": matching_json(&m),
        "rank_queries": rank_queries,
        "full_queries": full_queries,
        "bound": bound,
        "within_bound": within,
        "case": case,
        "optimal": optimal,
    }));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen(a) => gen(a).map(|_| true),
        Command::Run(a) => run(a).map(|_| true),
        Command::Eval(a) => eval(a),
        Command::Analyze(a) => analyze(a).map(|_| true),
        Command::Twosided(a) => twosided_cmd(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
