//! Seeded random instances and the hand-built adversarial families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{self, Instance, Matching, OrdinalProfile};
use crate::optimal;
use crate::rational::{self, Rational};
use crate::twosided::TwoSidedInstance;

pub fn default_eps() -> Rational {
    rational::ratio(1, 1000)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Distribution {
    /// Integers drawn uniformly from `lo..=hi`.
    Uniform { lo: i64, hi: i64 },
    /// `clusters` centres drawn uniformly from `lo..=hi`; each point picks a
    /// centre and adds an integer offset in `-spread..=spread`.
    Clustered {
        lo: i64,
        hi: i64,
        clusters: usize,
        spread: i64,
    },
}

impl Default for Distribution {
    fn default() -> Self {
        Distribution::Uniform { lo: -100, hi: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sidedness {
    #[default]
    OneSided,
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub seed: u64,
    pub distribution: Distribution,
    pub side: Sidedness,
    /// Reject draws until all `2n` coordinates differ.
    pub distinct: bool,
}

impl GenSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        GenSpec {
            n,
            seed,
            distribution: Distribution::default(),
            side: Sidedness::OneSided,
            distinct: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generated {
    OneSided(Instance),
    TwoSided(TwoSidedInstance),
}

pub fn gen_random(spec: &GenSpec) -> Result<Generated> {
    let (left, right) = draw(spec)?;
    Ok(match spec.side {
        Sidedness::OneSided => Generated::OneSided(Instance::new(left, right)?),
        Sidedness::TwoSided => Generated::TwoSided(TwoSidedInstance::new(left, right)?),
    })
}

pub fn random_instance(spec: &GenSpec) -> Result<Instance> {
    let (agents, items) = draw(spec)?;
    Instance::new(agents, items)
}

/// Two-sided instances always get distinct coordinates.
pub fn random_two_sided(spec: &GenSpec) -> Result<TwoSidedInstance> {
    let spec = GenSpec {
        distinct: true,
        ..spec.clone()
    };
    let (takers, givers) = draw(&spec)?;
    TwoSidedInstance::new(takers, givers)
}

fn draw(spec: &GenSpec) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let (lo, hi) = match spec.distribution {
        Distribution::Uniform { lo, hi } => (lo, hi),
        Distribution::Clustered {
            lo,
            hi,
            clusters,
            spread,
        } => {
            if clusters == 0 || spread < 0 {
                return Err(Error::domain("clustered distribution needs clusters >= 1 and spread >= 0"));
            }
            (lo, hi)
        }
    };
    if lo > hi {
        return Err(Error::domain(format!("empty range {lo}..={hi}")));
    }
    let span = (hi as i128 - lo as i128 + 1) as u128;
    if spec.distinct && span < 2 * n as u128 {
        return Err(Error::domain(format!(
            "range {lo}..={hi} has fewer than {} distinct values",
            2 * n
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centres: Vec<i64> = match spec.distribution {
        Distribution::Clustered { clusters, .. } => (0..clusters).map(|_| rng.gen_range(lo..=hi)).collect(),
        Distribution::Uniform { .. } => Vec::new(),
    };
    let sample = |rng: &mut ChaCha8Rng| -> i64 {
        match spec.distribution {
            Distribution::Uniform { .. } => rng.gen_range(lo..=hi),
            Distribution::Clustered { spread, .. } => {
                let c = centres[rng.gen_range(0..centres.len())];
                c + rng.gen_range(-spread..=spread)
            }
        }
    };

    let mut values: Vec<i64> = Vec::with_capacity(2 * n);
    let budget = 1000 * 2 * n;
    let mut attempts = 0;
    while values.len() < 2 * n {
        let v = sample(&mut rng);
        attempts += 1;
        if spec.distinct && values.contains(&v) {
            if attempts > budget {
                return Err(Error::domain(
                    "could not draw distinct coordinates; widen the distribution",
                ));
            }
            continue;
        }
        values.push(v);
    }
    let right = values.split_off(n);
    let to_q = |v: Vec<i64>| v.into_iter().map(rational::int).collect::<Vec<_>>();
    Ok((to_q(values), to_q(right)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMode {
    /// Targets `k = 1`.
    K1,
    /// Targets `k >= 2`.
    Kgeq2,
}

impl KMode {
    /// The `k` at which the family's ratio is read off.
    pub fn k(self) -> usize {
        match self {
            KMode::K1 => 1,
            KMode::Kgeq2 => 2,
        }
    }
}

fn check_eps(eps: &Rational) -> Result<()> {
    if *eps <= rational::zero() || *eps >= rational::one() {
        return Err(Error::domain(format!("eps must lie strictly between 0 and 1, got {eps}")));
    }
    Ok(())
}

/// The common-ranking instance where every agent ranks `g_1 ≻ … ≻ g_n` and
/// agent `slot` is the only one that should receive `g_n`.
///
/// `K1`: the other agents sit at 0, `g_1..g_{n-1}` at 1, `slot` at `2-eps`
/// and `g_n` at `3-eps`. `Kgeq2`: the other agents and `g_1..g_{n-1}` sit at
/// 0, `slot` at `1-eps` and `g_n` at `2-eps`.
pub fn lower_bound_instance(n: usize, mode: KMode, eps: &Rational, slot: usize) -> Result<Instance> {
    if n < 2 {
        return Err(Error::domain("the lower-bound family needs n >= 2"));
    }
    check_eps(eps)?;
    if slot >= n {
        return Err(Error::domain(format!("agent {} out of range", slot + 1)));
    }
    let q = rational::int;
    let (others, inner, slot_at, last) = match mode {
        KMode::K1 => (q(0), q(1), q(2) - eps, q(3) - eps),
        KMode::Kgeq2 => (q(0), q(0), q(1) - eps, q(2) - eps),
    };
    let agents = (0..n).map(|a| if a == slot { slot_at.clone() } else { others.clone() }).collect();
    let items = (0..n).map(|g| if g == n - 1 { last.clone() } else { inner.clone() }).collect();
    Instance::new(agents, items)
}

/// [`lower_bound_instance`] with `victim` among the agents at the origin and
/// the slot given to the smallest other id.
pub fn gen_lower_bound(n: usize, mode: KMode, eps: &Rational, victim: usize) -> Result<Instance> {
    if victim >= n {
        return Err(Error::domain(format!("victim {} out of range", victim + 1)));
    }
    let slot = if victim == 0 { 1 } else { 0 };
    lower_bound_instance(n, mode, eps, slot)
}

/// The identity ranking for every agent.
pub fn common_ranking_profile(n: usize) -> OrdinalProfile {
    OrdinalProfile::new(vec![(0..n).collect(); n]).expect("identity rankings")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversarialResponse {
    pub instance: Instance,
    /// The agent that received `g_n`.
    pub victim: usize,
    /// The agent placed where only it should get `g_n`.
    pub slot: usize,
    pub k: usize,
    pub alg_cost: Rational,
    pub opt_cost: Rational,
    pub ratio: Rational,
}

/// Ratio of `matching` on the lower-bound metric with `slot` in the special
/// position, read at the mode's `k`.
pub fn casting_ratio(
    profile: &OrdinalProfile,
    matching: &Matching,
    mode: KMode,
    eps: &Rational,
    slot: usize,
) -> Result<AdversarialResponse> {
    let n = profile.n();
    if *profile != common_ranking_profile(n) {
        return Err(Error::domain("adversary expects the common ranking g_1 > ... > g_n"));
    }
    if matching.n() != n {
        return Err(Error::domain("matching and profile sizes differ"));
    }
    let instance = lower_bound_instance(n, mode, eps, slot)?;
    if !model::check_consistency(profile, &instance)? {
        return Err(Error::invariant("lower-bound metric does not induce the common ranking"));
    }
    let k = mode.k().min(n);
    let alg_cost = model::k_centrum_cost(&instance, matching, k)?;
    let opt_cost = optimal::greedy_optimal(&instance).cost(k).clone();
    let ratio = &alg_cost / &opt_cost;
    let victim = matching.agent_of_items()[n - 1];
    Ok(AdversarialResponse {
        instance,
        victim,
        slot,
        k,
        alg_cost,
        opt_cost,
        ratio,
    })
}

/// The adversary's answer to an algorithm's matching on the common-ranking
/// profile: place whoever got `g_n` among the agents at the origin. Every
/// slot other than the victim is tried and the worst ratio is reported
/// (smallest slot on ties), which is the same as the smallest slot id
/// different from the victim.
pub fn adversarial_ratio(
    profile: &OrdinalProfile,
    matching: &Matching,
    mode: KMode,
    eps: &Rational,
) -> Result<AdversarialResponse> {
    let n = profile.n();
    let mut best: Option<AdversarialResponse> = None;
    for slot in 0..n {
        let r = casting_ratio(profile, matching, mode, eps, slot)?;
        if best.as_ref().is_none_or(|b| r.ratio > b.ratio) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::domain("empty profile"))
}

/// The instances on which arbitrary anchor choices go wrong.
///
/// `K1` (n >= 4): `g_1` at 0, `a_1` at 1, `g_i` and `a_i` for `2 <= i <= n-2`
/// at `2-eps`, `g_{n-1}` and `a_{n-1}` at `4-3eps`, `a_n` at `5-5eps`, `g_n`
/// at `6-6eps`.
///
/// `Kgeq2` (n >= 3): `g_{n-1}` at 0, `a_{n-1}` at 1, `g_i` and `a_i` for
/// `1 <= i <= n-2` at `2-eps`, `g_n` and `a_n` at `4-3eps`.
pub fn gen_tiebreak_pathology(n: usize, mode: KMode, eps: &Rational) -> Result<Instance> {
    check_eps(eps)?;
    let q = rational::int;
    let mid = q(2) - eps;
    match mode {
        KMode::K1 => {
            if n < 4 {
                return Err(Error::domain("this family needs n >= 4"));
            }
            let far = q(4) - eps * q(3);
            let mut agents = vec![mid.clone(); n];
            let mut items = vec![mid; n];
            agents[0] = q(1);
            items[0] = q(0);
            agents[n - 2] = far.clone();
            items[n - 2] = far;
            agents[n - 1] = q(5) - eps * q(5);
            items[n - 1] = q(6) - eps * q(6);
            Instance::new(agents, items)
        }
        KMode::Kgeq2 => {
            if n < 3 {
                return Err(Error::domain("this family needs n >= 3"));
            }
            let far = q(4) - eps * q(3);
            let mut agents = vec![mid.clone(); n];
            let mut items = vec![mid; n];
            agents[n - 2] = q(1);
            items[n - 2] = q(0);
            agents[n - 1] = far.clone();
            items[n - 1] = far;
            Instance::new(agents, items)
        }
    }
}

/// The anchors an arbitrary choice would pick on the pathology family:
/// `(a_2, a_{n-1})` for `K1` and `(a_1, a_n)` for `Kgeq2` (0-based ids).
pub fn pathology_anchors(n: usize, mode: KMode) -> (usize, usize) {
    match mode {
        KMode::K1 => (1, n - 2),
        KMode::Kgeq2 => (0, n - 1),
    }
}

/// Moves the point with global index `p` (agents first, then items) by
/// `delta * (p + 1) / (2n + 1)`. A small `delta` pulls coincident points
/// apart without reordering distinct ones.
pub fn perturb(instance: &Instance, delta: &Rational) -> Instance {
    let n = instance.n();
    let step = delta / rational::int(2 * n as i64 + 1);
    let shift = |p: usize, x: &Rational| x + &step * rational::int(p as i64 + 1);
    let agents = instance.agents().iter().enumerate().map(|(p, x)| shift(p, x)).collect();
    let items = instance.items().iter().enumerate().map(|(p, x)| shift(n + p, x)).collect();
    Instance::new(agents, items).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_profile, k_centrum_cost};
    use crate::rational::{int, ratio};

    #[test]
    fn seeded_generation_is_deterministic() {
        let spec = GenSpec::new(5, 42);
        let a = random_instance(&spec).unwrap();
        assert_eq!(a, random_instance(&spec).unwrap());
        assert_eq!(a.n(), 5);
        let other = random_instance(&GenSpec::new(5, 43)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn distinct_flag_and_small_ranges() {
        let mut spec = GenSpec::new(6, 1);
        spec.distribution = Distribution::Uniform { lo: 0, hi: 11 };
        spec.distinct = true;
        assert!(random_instance(&spec).unwrap().all_distinct());
        spec.distribution = Distribution::Uniform { lo: 0, hi: 10 };
        assert!(matches!(random_instance(&spec), Err(Error::Domain(_))));
    }

    #[test]
    fn clustered_points_stay_near_centres() {
        let mut spec = GenSpec::new(8, 5);
        spec.distribution = Distribution::Clustered {
            lo: 0,
            hi: 1000,
            clusters: 2,
            spread: 3,
        };
        let inst = random_instance(&spec).unwrap();
        let mut xs: Vec<_> = inst.agents().iter().chain(inst.items()).cloned().collect();
        xs.sort();
        let gaps = xs.windows(2).filter(|w| &w[1] - &w[0] > int(6)).count();
        assert!(gaps <= 1);
    }

    #[test]
    fn lower_bound_profile_is_common() {
        let eps = ratio(1, 100);
        for mode in [KMode::K1, KMode::Kgeq2] {
            let inst = gen_lower_bound(4, mode, &eps, 2).unwrap();
            assert_eq!(derive_profile(&inst), common_ranking_profile(4));
        }
        assert!(gen_lower_bound(4, KMode::K1, &int(1), 2).is_err());
        assert!(gen_lower_bound(1, KMode::K1, &eps, 0).is_err());
    }

    #[test]
    fn lower_bound_optimum_per_k() {
        let eps = ratio(1, 1000);
        let k1 = lower_bound_instance(5, KMode::K1, &eps, 0).unwrap();
        let costs: Vec<_> = (1..=5).map(int).collect();
        assert_eq!(optimal::greedy_optimal(&k1).cost_per_k, costs);
        let k2 = lower_bound_instance(5, KMode::Kgeq2, &eps, 0).unwrap();
        assert_eq!(optimal::greedy_optimal(&k2).cost_per_k, vec![int(1); 5]);
    }

    #[test]
    fn victim_on_last_item_costs_three_minus_eps() {
        let eps = ratio(1, 100);
        let inst = gen_lower_bound(4, KMode::K1, &eps, 2).unwrap();
        // victim 2 gets g_4, the slot agent 0 gets g_3
        let m = Matching::new(vec![2, 0, 3, 1]).unwrap();
        assert_eq!(k_centrum_cost(&inst, &m, 1).unwrap(), int(3) - &eps);
    }

    #[test]
    fn perturbation_separates_points() {
        let inst = gen_tiebreak_pathology(5, KMode::Kgeq2, &ratio(1, 1000)).unwrap();
        assert!(!inst.all_distinct());
        assert!(perturb(&inst, &ratio(1, 10_000)).all_distinct());
    }
}
