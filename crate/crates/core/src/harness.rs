//! Sweeps: run algorithms over instance families and score them exactly.
//!
//! A sweep is described by a [`SweepConfig`], usually read from a small
//! `key = value` file:
//!
//! ```text
//! # comments start with '#'
//! families = random, lb-k1, tiebreak-kgeq2
//! sizes = 2..12
//! k = all
//! algorithms = ordermatch, optimal
//! repetitions = 100
//! seed = 7
//! ```
//!
//! Jobs are enumerated family by family, size by size; the job index is the
//! instance id. Random instances use the seed `seed + id`. Lower-bound
//! families produce one instance per slot agent and store its 1-based id in
//! the seed column; pathology families produce one instance per size.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{self, Distribution, GenSpec, KMode};
use crate::io::JsonFormat;
use crate::model::{self, derive_profile, Instance, Matching, OrdinalProfile};
use crate::optimal::greedy_optimal;
use crate::ordermatch::{self, FallbackStage, OrderMatchRun, RecoveryOptions};
use crate::permgraph::{self, EdgeKind, PermutationGraph};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Random,
    LbK1,
    LbKgeq2,
    TiebreakK1,
    TiebreakKgeq2,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Random,
        Family::LbK1,
        Family::LbKgeq2,
        Family::TiebreakK1,
        Family::TiebreakKgeq2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::LbK1 => "lb-k1",
            Family::LbKgeq2 => "lb-kgeq2",
            Family::TiebreakK1 => "tiebreak-k1",
            Family::TiebreakKgeq2 => "tiebreak-kgeq2",
        }
    }

    fn mode(self) -> Option<KMode> {
        match self {
            Family::LbK1 | Family::TiebreakK1 => Some(KMode::K1),
            Family::LbKgeq2 | Family::TiebreakKgeq2 => Some(KMode::Kgeq2),
            Family::Random => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown family '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    OrderMatch,
    /// Same algorithm with the anchors that minimize the inner set (or the
    /// family's designated anchors on the pathology families).
    OrderMatchNaive,
    /// Agents pick in id order.
    SerialDictatorship,
    Optimal,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::OrderMatch,
        Algorithm::OrderMatchNaive,
        Algorithm::SerialDictatorship,
        Algorithm::Optimal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::OrderMatch => "ordermatch",
            Algorithm::OrderMatchNaive => "ordermatch-naive",
            Algorithm::SerialDictatorship => "serial-dictatorship",
            Algorithm::Optimal => "optimal",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KSelect {
    All,
    List(Vec<usize>),
}

impl KSelect {
    /// The selected `k` that make sense for size `n`.
    pub fn for_n(&self, n: usize) -> Vec<usize> {
        match self {
            KSelect::All => (1..=n).collect(),
            KSelect::List(ks) => ks.iter().copied().filter(|&k| k >= 1 && k <= n).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub families: Vec<Family>,
    pub sizes: Vec<usize>,
    pub ks: KSelect,
    pub algorithms: Vec<Algorithm>,
    /// Instances per size for the random family.
    pub repetitions: usize,
    pub seed: u64,
    pub eps: Rational,
    pub distribution: Distribution,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub fallback_cap: usize,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub reproducers: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            families: vec![Family::Random],
            sizes: (2..=8).collect(),
            ks: KSelect::All,
            algorithms: vec![Algorithm::OrderMatch],
            repetitions: 100,
            seed: 0,
            eps: instances::default_eps(),
            distribution: Distribution::default(),
            threads: 0,
            fallback_cap: ordermatch::DEFAULT_FALLBACK_CAP,
            csv: None,
            json: None,
            reproducers: PathBuf::from("reproducers"),
        }
    }
}

fn list<T>(value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

fn number<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::domain(format!("'{s}' is not a valid number")))
}

/// `"a..b"` (inclusive) or `"a"`.
fn span(s: &str) -> Result<(i64, i64)> {
    match s.split_once("..") {
        Some((lo, hi)) => Ok((number(lo)?, number(hi.trim_start_matches('='))?)),
        None => {
            let v = number(s)?;
            Ok((v, v))
        }
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: Error| Error::parse(format!("line {}", i + 1), e.to_string());
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("line {}", i + 1), "expected 'key = value'"))?;
            cfg.set(key.trim(), value.trim()).map_err(at)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "families" => self.families = list(value, str::parse)?,
            "sizes" => {
                let mut sizes = Vec::new();
                for part in list(value, |s| Ok(s.to_string()))? {
                    let (lo, hi) = span(&part)?;
                    if lo < 1 || hi < lo {
                        return Err(Error::domain(format!("bad size range '{part}'")));
                    }
                    sizes.extend(lo as usize..=hi as usize);
                }
                self.sizes = sizes;
            }
            "k" => {
                self.ks = if value == "all" {
                    KSelect::All
                } else {
                    KSelect::List(list(value, number)?)
                }
            }
            "algorithms" => self.algorithms = list(value, str::parse)?,
            "repetitions" => self.repetitions = number(value)?,
            "seed" => self.seed = number(value)?,
            "eps" => self.eps = rational::parse(value)?,
            "range" => {
                let (lo, hi) = span(value)?;
                self.distribution = Distribution::Uniform { lo, hi };
            }
            "threads" => self.threads = number(value)?,
            "fallback_cap" => self.fallback_cap = number(value)?,
            "csv" => self.csv = Some(PathBuf::from(value)),
            "json" => self.json = Some(PathBuf::from(value)),
            "reproducers" => self.reproducers = PathBuf::from(value),
            _ => return Err(Error::domain(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.algorithms.is_empty() || self.sizes.is_empty() {
            return Err(Error::domain("families, algorithms and sizes must be non-empty"));
        }
        if self.eps <= rational::zero() || self.eps >= rational::one() {
            return Err(Error::domain("eps must lie strictly between 0 and 1"));
        }
        Ok(())
    }

    /// Key-value text that parses back to the same config.
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let mut out = vec![
            format!("families = {}", join(self.families.iter().map(|f| f.to_string()).collect())),
            format!("sizes = {}", join(self.sizes.iter().map(|n| n.to_string()).collect())),
            format!(
                "k = {}",
                match &self.ks {
                    KSelect::All => "all".to_string(),
                    KSelect::List(ks) => join(ks.iter().map(|k| k.to_string()).collect()),
                }
            ),
            format!("algorithms = {}", join(self.algorithms.iter().map(|a| a.to_string()).collect())),
            format!("repetitions = {}", self.repetitions),
            format!("seed = {}", self.seed),
            format!("eps = {}", self.eps),
            format!("threads = {}", self.threads),
            format!("fallback_cap = {}", self.fallback_cap),
            format!("reproducers = {}", self.reproducers.display()),
        ];
        if let Distribution::Uniform { lo, hi } = self.distribution {
            out.push(format!("range = {lo}..{hi}"));
        }
        if let Some(p) = &self.csv {
            out.push(format!("csv = {}", p.display()));
        }
        if let Some(p) = &self.json {
            out.push(format!("json = {}", p.display()));
        }
        out.join("\n") + "\n"
    }
}

/// One instance to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub id: usize,
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

pub fn jobs(config: &SweepConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for &family in &config.families {
        for &n in &config.sizes {
            let seeds: Vec<u64> = match family {
                Family::Random => vec![0; config.repetitions],
                Family::LbK1 | Family::LbKgeq2 if n >= 2 => (1..=n as u64).collect(),
                Family::TiebreakK1 if n >= 4 => vec![0],
                Family::TiebreakKgeq2 if n >= 3 => vec![0],
                _ => Vec::new(),
            };
            for s in seeds {
                let id = out.len();
                let seed = match family {
                    Family::Random => config.seed.wrapping_add(id as u64),
                    _ => s,
                };
                out.push(Job { id, family, n, seed });
            }
        }
    }
    out
}

pub fn job_instance(job: &Job, config: &SweepConfig) -> Result<Instance> {
    match job.family {
        Family::Random => {
            let mut spec = GenSpec::new(job.n, job.seed);
            spec.distribution = config.distribution.clone();
            instances::random_instance(&spec)
        }
        Family::LbK1 | Family::LbKgeq2 => {
            let mode = job.family.mode().expect("lower-bound family");
            let slot = (job.seed as usize).checked_sub(1).filter(|&s| s < job.n);
            let slot = slot.ok_or_else(|| Error::domain(format!("slot {} out of range 1..={}", job.seed, job.n)))?;
            instances::lower_bound_instance(job.n, mode, &config.eps, slot)
        }
        Family::TiebreakK1 | Family::TiebreakKgeq2 => {
            instances::gen_tiebreak_pathology(job.n, job.family.mode().expect("pathology family"), &config.eps)
        }
    }
}

/// Each agent in `order` takes its favourite item that is still free.
pub fn serial_dictatorship(profile: &OrdinalProfile, order: &[usize]) -> Result<Matching> {
    let n = profile.n();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&a| a >= n || std::mem::replace(&mut seen[a], true)) {
        return Err(Error::domain("picking order must be a permutation of the agents"));
    }
    let mut taken = vec![false; n];
    let mut item_of = vec![0; n];
    for &a in order {
        let g = *profile.ranking(a).iter().find(|&&g| !taken[g]).expect("a free item remains");
        taken[g] = true;
        item_of[a] = g;
    }
    Matching::new(item_of)
}

/// Anchors used for `ordermatch-naive` on a job's instance.
pub fn naive_anchors(family: Family, n: usize, profile: &OrdinalProfile) -> Result<(usize, usize)> {
    match family {
        Family::TiebreakK1 | Family::TiebreakKgeq2 => {
            Ok(instances::pathology_anchors(n, family.mode().expect("pathology family")))
        }
        _ => ordermatch::minimizing_anchors(profile),
    }
}

/// Results of the structural checks on one run of the algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderMatchChecks {
    pub matching: Matching,
    pub fallback: Option<FallbackStage>,
    /// The recovered inner order is monotone in the true coordinates and
    /// every favourite item is inner (when the inner set is non-empty).
    pub pi_g_ok: bool,
    pub no_backward_edges: bool,
    /// Inward edges out of the right outer group end at the rightmost
    /// favourite.
    pub inward_ok: bool,
    /// Forward-edge removal ran at most `n` swaps, left neither forward nor
    /// backward edges, kept a permutation and never lowered any `SC_k`, and
    /// every swap kept both local inequalities.
    pub removal_ok: bool,
    /// Every edge of the transformed graph obeys the per-edge bound and the
    /// transformed cost stays within three times the optimum for every `k`.
    pub edge_bound_ok: bool,
    pub swaps: usize,
}

impl OrderMatchChecks {
    pub fn all_ok(&self) -> bool {
        self.failed().is_empty()
    }

    pub fn failed(&self) -> Vec<&'static str> {
        [
            ("pi_g_ok", self.pi_g_ok),
            ("no_backward_edges", self.no_backward_edges),
            ("inward_ok", self.inward_ok),
            ("removal_ok", self.removal_ok),
            ("edge_bound_ok", self.edge_bound_ok),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }
}

fn monotone(values: &[&Rational]) -> bool {
    values.windows(2).all(|w| w[0] <= w[1]) || values.windows(2).all(|w| w[0] >= w[1])
}

/// The permutation graph of an order_match run, in the frame where the
/// recovered inner order increases.
#[derive(Debug, Clone)]
pub struct Analysis {
    /// The instance itself or its mirror image.
    pub frame: Instance,
    pub mirrored: bool,
    /// The recovered inner order is monotone in the true coordinates and
    /// every favourite item is inner (when the inner set is non-empty).
    pub pi_g_ok: bool,
    pub graph: PermutationGraph,
}

pub fn analyze_run(instance: &Instance, profile: &OrdinalProfile, run: &OrderMatchRun) -> Result<Analysis> {
    let n = instance.n();
    let coords: Vec<&Rational> = run.item_order.items.iter().map(|&g| instance.item(g)).collect();
    let tops_inner = run.partition.g_in.is_empty() || (0..n).all(|a| run.partition.contains(profile.top(a)));
    let pi_g_ok = monotone(&coords) && tops_inner;

    // The analysis reads the inner order left to right. The profile cannot
    // tell a line from its mirror image, so work in whichever frame the
    // recovered order is increasing in; costs are the same in both.
    let mirrored = coords.first() > coords.last();
    let frame = if mirrored { instance.mirrored() } else { instance.clone() };
    let graph = if pi_g_ok {
        permgraph::build_graph_ordered(&frame, profile, &run.matching, &run.partition, &run.item_order.items)?
    } else {
        permgraph::build_graph_with(&frame, &run.matching, &run.partition)?
    };
    Ok(Analysis {
        frame,
        mirrored,
        pi_g_ok,
        graph,
    })
}

/// Runs the algorithm on the instance's derived profile and checks every
/// structural property against the true coordinates.
pub fn check_order_match(instance: &Instance, options: RecoveryOptions) -> Result<OrderMatchChecks> {
    let n = instance.n();
    let profile = derive_profile(instance);
    let run = ordermatch::order_match_run(&profile, options)?;
    let Analysis {
        frame, pi_g_ok, graph, ..
    } = analyze_run(instance, &profile, &run)?;
    let instance = &frame;
    let no_backward_edges = graph.count(EdgeKind::Backward) == 0;
    let inward_ok = permgraph::check_inward_right(&graph).is_empty();
    let opt = greedy_optimal(instance);

    let (mut removal_ok, mut edge_bound_ok, mut swaps) = (false, false, 0);
    if no_backward_edges {
        if let Ok(removal) = permgraph::remove_forward_edges(&graph, instance) {
            let out = &removal.graph;
            swaps = removal.iterations();
            removal_ok = swaps <= n
                && out.count(EdgeKind::Forward) + out.count(EdgeKind::Backward) == 0
                && out.is_permutation()
                && removal.monotone();
            let final_cost = out.cost_per_k(instance)?;
            let three = rational::int(3);
            edge_bound_ok = permgraph::check_edge_bound(instance, out).map(|v| v.is_empty()).unwrap_or(false)
                && final_cost.iter().zip(&opt.cost_per_k).all(|(c, o)| *c <= &three * o);
        }
    }
    Ok(OrderMatchChecks {
        matching: run.matching,
        fallback: run.item_order.fallback,
        pi_g_ok,
        no_backward_edges,
        inward_ok,
        removal_ok,
        edge_bound_ok,
        swaps,
    })
}

/// `alg / opt`, with `0 / 0 = 1` and `None` for a positive cost against a
/// zero optimum.
pub fn ratio(alg: &Rational, opt: &Rational) -> Option<Rational> {
    if opt == &rational::zero() {
        (alg == &rational::zero()).then(rational::one)
    } else {
        Some(alg / opt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub instance_id: usize,
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub k: usize,
    pub alg_cost: Rational,
    pub opt_cost: Rational,
    pub ratio: Option<Rational>,
    /// `alg_cost <= 3 * opt_cost`; set on ordermatch rows only, like the
    /// flags below.
    pub ratio_ok: Option<bool>,
    pub pi_g_ok: Option<bool>,
    pub no_backward_edges: Option<bool>,
    pub inward_ok: Option<bool>,
    pub removal_ok: Option<bool>,
    pub edge_bound_ok: Option<bool>,
    pub fallback: Option<FallbackStage>,
}

impl ReportRow {
    pub fn flags_ok(&self) -> bool {
        [
            self.ratio_ok,
            self.pi_g_ok,
            self.no_backward_edges,
            self.inward_ok,
            self.removal_ok,
            self.edge_bound_ok,
        ]
        .iter()
        .all(|f| f.unwrap_or(true))
    }

    pub fn to_flat(&self) -> FlatRow {
        let flag = |f: Option<bool>| f.map(|b| b.to_string()).unwrap_or_default();
        FlatRow {
            instance_id: self.instance_id.to_string(),
            family: self.family.to_string(),
            n: self.n.to_string(),
            seed: self.seed.to_string(),
            algorithm: self.algorithm.to_string(),
            k: self.k.to_string(),
            alg_cost: rational::format(&self.alg_cost),
            opt_cost: rational::format(&self.opt_cost),
            ratio: self.ratio.as_ref().map(rational::format).unwrap_or_else(|| "inf".into()),
            ratio_approx: self
                .ratio
                .as_ref()
                .map(|r| format!("{:.6}", rational::approx(r)))
                .unwrap_or_else(|| "inf".into()),
            ratio_ok: flag(self.ratio_ok),
            pi_g_ok: flag(self.pi_g_ok),
            no_backward_edges: flag(self.no_backward_edges),
            inward_ok: flag(self.inward_ok),
            removal_ok: flag(self.removal_ok),
            edge_bound_ok: flag(self.edge_bound_ok),
            fallback: match self.fallback {
                Some(FallbackStage::Strict) => "strict".into(),
                Some(FallbackStage::Merged) => "merged".into(),
                None => String::new(),
            },
        }
    }
}

/// A report row as text, the shape shared by the CSV and JSON outputs.
/// Empty flags mean "not checked for this algorithm".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatRow {
    pub instance_id: String,
    pub family: String,
    pub n: String,
    pub seed: String,
    pub algorithm: String,
    pub k: String,
    pub alg_cost: String,
    pub opt_cost: String,
    pub ratio: String,
    pub ratio_approx: String,
    pub ratio_ok: String,
    pub pi_g_ok: String,
    pub no_backward_edges: String,
    pub inward_ok: String,
    pub removal_ok: String,
    pub edge_bound_ok: String,
    pub fallback: String,
}

/// An instance that errored or failed a flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub job: Job,
    pub algorithm: Algorithm,
    pub reasons: Vec<String>,
    pub instance: Instance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub family: Family,
    pub algorithm: Algorithm,
    pub k: usize,
    pub rows: usize,
    /// `None` when some row had an unbounded ratio.
    pub max_ratio: Option<Rational>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub rows: Vec<ReportRow>,
    pub failures: Vec<Failure>,
    /// Instances where the ordering fallback was needed.
    pub fallbacks: usize,
}

impl SweepReport {
    pub fn all_ok(&self) -> bool {
        self.failures.is_empty() && self.rows.iter().all(ReportRow::flags_ok)
    }

    /// Worst ratio per (family, algorithm, k).
    pub fn summary(&self) -> Vec<Summary> {
        let mut acc: BTreeMap<(Family, Algorithm, usize), (usize, Option<Rational>)> = BTreeMap::new();
        for r in &self.rows {
            let e = acc
                .entry((r.family, r.algorithm, r.k))
                .or_insert((0, Some(rational::zero())));
            e.0 += 1;
            e.1 = match (&e.1, &r.ratio) {
                (Some(a), Some(b)) => Some(a.max(b).clone()),
                _ => None,
            };
        }
        acc.into_iter()
            .map(|((family, algorithm, k), (rows, max_ratio))| Summary {
                family,
                algorithm,
                k,
                rows,
                max_ratio,
            })
            .collect()
    }

    pub fn flat_rows(&self) -> Vec<FlatRow> {
        self.rows.iter().map(ReportRow::to_flat).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in self.flat_rows() {
            w.serialize(r).map_err(|e| Error::invariant(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invariant(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.flat_rows()).expect("plain data serializes") + "\n"
    }
}

struct JobOutcome {
    rows: Vec<ReportRow>,
    failures: Vec<Failure>,
    fallback: bool,
}

/// Rows for one job, in algorithm then `k` order.
pub fn eval_job(job: &Job, config: &SweepConfig) -> Result<Vec<ReportRow>> {
    let out = run_job(job, config)?;
    match out.failures.into_iter().next() {
        Some(f) => Err(Error::invariant(format!("{} on instance {}: {}", f.algorithm, job.id, f.reasons.join(", ")))),
        None => Ok(out.rows),
    }
}

fn run_job(job: &Job, config: &SweepConfig) -> Result<JobOutcome> {
    let instance = job_instance(job, config)?;
    let n = instance.n();
    let profile = derive_profile(&instance);
    let opt = greedy_optimal(&instance);
    let options = RecoveryOptions {
        fallback_cap: config.fallback_cap,
        ..RecoveryOptions::default()
    };
    let ks = config.ks.for_n(n);
    let mut out = JobOutcome {
        rows: Vec::new(),
        failures: Vec::new(),
        fallback: false,
    };

    for &algorithm in &config.algorithms {
        let fail = |reasons: Vec<String>| Failure {
            job: *job,
            algorithm,
            reasons,
            instance: instance.clone(),
        };
        let result = match algorithm {
            Algorithm::OrderMatch => check_order_match(&instance, options).map(|c| (c.matching.clone(), Some(c))),
            Algorithm::OrderMatchNaive => naive_anchors(job.family, n, &profile)
                .and_then(|a| ordermatch::order_match_naive_run(&profile, a, options))
                .map(|r| (r.matching, None)),
            Algorithm::SerialDictatorship => {
                serial_dictatorship(&profile, &(0..n).collect::<Vec<_>>()).map(|m| (m, None))
            }
            Algorithm::Optimal => Ok((opt.matching.clone(), None)),
        };
        let (matching, checks) = match result {
            Ok(v) => v,
            Err(e) => {
                out.failures.push(fail(vec![e.to_string()]));
                continue;
            }
        };
        if let Some(c) = &checks {
            out.fallback |= c.fallback.is_some();
            let failed = c.failed();
            if !failed.is_empty() {
                out.failures.push(fail(failed.iter().map(|s| s.to_string()).collect()));
            }
        }
        let costs = model::cost_per_k(&instance, &matching)?;
        let three = rational::int(3);
        let mut over = false;
        for &k in &ks {
            let alg_cost = costs[k - 1].clone();
            let opt_cost = opt.cost(k).clone();
            let ratio_ok = checks.as_ref().map(|_| alg_cost <= &three * &opt_cost);
            over |= ratio_ok == Some(false);
            out.rows.push(ReportRow {
                instance_id: job.id,
                family: job.family,
                n,
                seed: job.seed,
                algorithm,
                k,
                ratio: ratio(&alg_cost, &opt_cost),
                alg_cost,
                opt_cost,
                ratio_ok,
                pi_g_ok: checks.as_ref().map(|c| c.pi_g_ok),
                no_backward_edges: checks.as_ref().map(|c| c.no_backward_edges),
                inward_ok: checks.as_ref().map(|c| c.inward_ok),
                removal_ok: checks.as_ref().map(|c| c.removal_ok),
                edge_bound_ok: checks.as_ref().map(|c| c.edge_bound_ok),
                fallback: checks.as_ref().and_then(|c| c.fallback),
            });
        }
        if over {
            out.failures.push(fail(vec!["ratio_ok".to_string()]));
        }
    }
    Ok(out)
}

/// Evaluates every job on a worker pool. Rows come back in job order no
/// matter which worker finishes first.
pub fn eval_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let jobs = jobs(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::domain(e.to_string()))?;
    let outcomes: Vec<Result<JobOutcome>> = pool.install(|| jobs.par_iter().map(|j| run_job(j, config)).collect());
    let mut report = SweepReport::default();
    for o in outcomes {
        let o = o?;
        report.rows.extend(o.rows);
        report.failures.extend(o.failures);
        report.fallbacks += usize::from(o.fallback);
    }
    if report.fallbacks > 0 {
        log::info!("ordering fallback used on {} instance(s)", report.fallbacks);
    }
    Ok(report)
}

/// The instance with `(agent i, item j)` pairs removed greedily while
/// `fails` still holds. Returns the input unchanged if it does not fail.
pub fn minimize(instance: &Instance, fails: impl Fn(&Instance) -> bool) -> Instance {
    let mut cur = instance.clone();
    if !fails(&cur) {
        return cur;
    }
    'outer: loop {
        let n = cur.n();
        if n == 1 {
            return cur;
        }
        for i in 0..n {
            for j in 0..n {
                let mut agents = cur.agents().to_vec();
                let mut items = cur.items().to_vec();
                agents.remove(i);
                items.remove(j);
                let smaller = Instance::new(agents, items).expect("same sizes");
                if fails(&smaller) {
                    cur = smaller;
                    continue 'outer;
                }
            }
        }
        return cur;
    }
}

/// Whether the algorithm errors or fails a check on `instance`.
pub fn order_match_fails(instance: &Instance, options: RecoveryOptions) -> bool {
    match check_order_match(instance, options) {
        Err(_) => true,
        Ok(c) => {
            let opt = greedy_optimal(instance);
            let costs = model::cost_per_k(instance, &c.matching).expect("sizes agree");
            let three = rational::int(3);
            !c.all_ok() || costs.iter().zip(&opt.cost_per_k).any(|(a, o)| *a > &three * o)
        }
    }
}

#[derive(Serialize)]
struct ReproducerDoc<'a> {
    instance_id: usize,
    family: &'a str,
    n: usize,
    seed: u64,
    algorithm: &'a str,
    reasons: &'a [String],
    config: String,
    instance: serde_json::Value,
    original: serde_json::Value,
}

/// Writes one JSON reproducer per failure into `dir` and returns the
/// paths. Order-match failures are shrunk first.
pub fn dump_reproducers(report: &SweepReport, config: &SweepConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    if report.failures.is_empty() {
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let options = RecoveryOptions {
        fallback_cap: config.fallback_cap,
        ..RecoveryOptions::default()
    };
    let mut paths = Vec::new();
    for f in &report.failures {
        let small = if f.algorithm == Algorithm::OrderMatch {
            minimize(&f.instance, |i| order_match_fails(i, options))
        } else {
            f.instance.clone()
        };
        let json = |i: &Instance| serde_json::from_str(&i.to_json()).expect("own output parses");
        let doc = ReproducerDoc {
            instance_id: f.job.id,
            family: f.job.family.name(),
            n: f.job.n,
            seed: f.job.seed,
            algorithm: f.algorithm.name(),
            reasons: &f.reasons,
            config: config.to_text(),
            instance: json(&small),
            original: json(&f.instance),
        };
        let path = dir.join(format!("repro-{}-{}-{}.json", f.job.id, f.job.family, f.algorithm));
        let text = serde_json::to_string_pretty(&doc).expect("plain data serializes") + "\n";
        std::fs::write(&path, text).map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes the CSV and JSON reports named in the config, if any.
pub fn write_outputs(report: &SweepReport, config: &SweepConfig) -> Result<()> {
    let write = |path: &PathBuf, text: String| {
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })
    };
    if let Some(p) = &config.csv {
        write(p, report.to_csv()?)?;
    }
    if let Some(p) = &config.json {
        write(p, report.to_json())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::common_ranking_profile;

    fn small_config() -> SweepConfig {
        SweepConfig {
            families: Family::ALL.to_vec(),
            sizes: (1..=6).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            repetitions: 10,
            seed: 3,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn config_round_trips_through_text() {
        let cfg = SweepConfig::parse(
            "families = random, lb-k1 # two\nsizes = 2..4, 7\nk = 1,2\nalgorithms = ordermatch, optimal\nseed = 9\neps = 1/100\nrange = -5..5\n",
        )
        .unwrap();
        assert_eq!(cfg.sizes, vec![2, 3, 4, 7]);
        assert_eq!(cfg.ks, KSelect::List(vec![1, 2]));
        assert_eq!(cfg.distribution, Distribution::Uniform { lo: -5, hi: 5 });
        assert_eq!(SweepConfig::parse(&cfg.to_text()).unwrap(), cfg);
        let err = SweepConfig::parse("sizes = 2\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn serial_dictatorship_on_common_ranking() {
        let p = common_ranking_profile(4);
        let m = serial_dictatorship(&p, &[0, 1, 2, 3]).unwrap();
        assert_eq!(m, Matching::identity(4));
        let m = serial_dictatorship(&p, &[3, 2, 1, 0]).unwrap();
        assert_eq!(m.as_slice(), &[3, 2, 1, 0]);
        assert!(serial_dictatorship(&p, &[0, 0, 1, 2]).is_err());
        let one = common_ranking_profile(1);
        assert_eq!(serial_dictatorship(&one, &[0]).unwrap(), Matching::identity(1));
    }

    #[test]
    fn ratio_edge_cases() {
        let q = rational::int;
        assert_eq!(ratio(&q(0), &q(0)), Some(q(1)));
        assert_eq!(ratio(&q(1), &q(0)), None);
        assert_eq!(ratio(&q(3), &q(2)), Some(rational::ratio(3, 2)));
    }

    #[test]
    fn sweep_is_clean_and_order_stable() {
        let mut cfg = small_config();
        cfg.threads = 1;
        let a = eval_sweep(&cfg).unwrap();
        assert!(a.all_ok(), "{:?}", a.failures);
        cfg.threads = 4;
        let b = eval_sweep(&cfg).unwrap();
        assert_eq!(a.rows, b.rows);
        for r in a.rows.iter().filter(|r| r.algorithm == Algorithm::Optimal) {
            assert_eq!(r.ratio, Some(rational::one()));
        }
    }

    #[test]
    fn rows_replay_from_their_job() {
        let cfg = small_config();
        let report = eval_sweep(&cfg).unwrap();
        let row = &report.rows[report.rows.len() / 2];
        let job = jobs(&cfg)[row.instance_id];
        assert_eq!((job.family, job.seed), (row.family, row.seed));
        let again = eval_job(&job, &cfg).unwrap();
        assert!(again.contains(row));
    }

    #[test]
    fn csv_and_json_agree() {
        let mut cfg = small_config();
        cfg.sizes = vec![3];
        let report = eval_sweep(&cfg).unwrap();
        let csv_text = report.to_csv().unwrap();
        let from_csv: Vec<FlatRow> = csv::Reader::from_reader(csv_text.as_bytes())
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .unwrap();
        let from_json: Vec<FlatRow> = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(from_csv, from_json);
        assert!(csv_text.starts_with("instance_id,family,n,seed,algorithm,k,"));
    }

    #[test]
    fn minimize_shrinks_to_the_core() {
        let inst = Instance::from_ints(&[0, 5, 9, 100], &[1, 6, 8, 50]).unwrap();
        // "fails" while some item sits at 50
        let small = minimize(&inst, |i| i.items().contains(&rational::int(50)));
        assert_eq!(small.n(), 1);
        assert_eq!(small.item(0), &rational::int(50));
    }

    #[test]
    fn failures_are_dumped() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config();
        let inst = Instance::from_ints(&[0, 1], &[0, 1]).unwrap();
        let report = SweepReport {
            rows: Vec::new(),
            failures: vec![Failure {
                job: jobs(&cfg)[0],
                algorithm: Algorithm::Optimal,
                reasons: vec!["made up".into()],
                instance: inst.clone(),
            }],
            fallbacks: 0,
        };
        let paths = dump_reproducers(&report, &cfg, dir.path()).unwrap();
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        let back = Instance::from_json(&doc["instance"].to_string()).unwrap();
        assert_eq!(back, inst);
        assert!(SweepConfig::parse(doc["config"].as_str().unwrap()).is_ok());
    }
}
