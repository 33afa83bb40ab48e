use num_traits::Signed;
use proptest::prelude::*;

use linematch::harness::check_order_match;
use linematch::io::JsonFormat;
use linematch::model::{self, derive_profile, k_centrum, Instance, Matching, OrdinalProfile};
use linematch::optimal::greedy_optimal;
use linematch::ordermatch::{self, RecoveryOptions};
use linematch::rational::{self, ratio, Rational};
use linematch::twosided::{self, QueryOracle, TwoSidedInstance};

fn coord() -> impl Strategy<Value = Rational> {
    (-40i64..40, 1i64..4).prop_map(|(p, q)| ratio(p, q))
}

fn instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n).prop_flat_map(|n| {
        (prop::collection::vec(coord(), n), prop::collection::vec(coord(), n))
            .prop_map(|(a, g)| Instance::new(a, g).unwrap())
    })
}

/// Points from a small integer grid, so ties are common.
fn crowded(max_n: usize) -> impl Strategy<Value = Instance> {
    (2..=max_n).prop_flat_map(|n| {
        (prop::collection::vec(0i64..6, n), prop::collection::vec(0i64..6, n))
            .prop_map(|(a, g)| Instance::from_ints(&a, &g).unwrap())
    })
}

fn two_sided(max_n: usize) -> impl Strategy<Value = TwoSidedInstance> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::btree_set(-200i64..200, 2 * n)
            .prop_map(|s| s.into_iter().collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(move |v| {
                let q: Vec<Rational> = v.into_iter().map(rational::int).collect();
                TwoSidedInstance::new(q[..n].to_vec(), q[n..].to_vec()).unwrap()
            })
    })
}

fn distances(inst: &Instance, m: &Matching) -> Vec<Rational> {
    m.pairs().map(|(a, g)| rational::dist(inst.agent(a), inst.item(g))).collect()
}

/// `SC_k` by sorting, for every `k`.
fn sorted_sums(mut d: Vec<Rational>) -> Vec<Rational> {
    d.sort_unstable_by(|x, y| y.cmp(x));
    let mut acc = rational::zero();
    d.into_iter()
        .map(|x| {
            acc += x;
            acc.clone()
        })
        .collect()
}

/// Agents sharing a favourite are contiguous on the line, and the groups
/// appear in the order of their favourites.
fn favourites_are_sorted(inst: &Instance) -> Result<(), TestCaseError> {
    let p = derive_profile(inst);
    let n = inst.n();
    for a in 0..n {
        for b in 0..n {
            let (ta, tb) = (p.top(a), p.top(b));
            if ta == tb {
                for c in 0..n {
                    let between = inst.agent(a) <= inst.agent(c) && inst.agent(c) <= inst.agent(b);
                    prop_assert!(!between || p.top(c) == ta, "agent {} between {} and {}", c, a, b);
                }
            } else if inst.item(ta) < inst.item(tb) {
                prop_assert!(inst.agent(a) <= inst.agent(b), "agents {} and {}", a, b);
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn k_centrum_is_sum_of_largest(d in prop::collection::vec(coord(), 1..9)) {
        let d: Vec<Rational> = d.into_iter().map(|x| x.abs()).collect();
        let expect = sorted_sums(d.clone());
        for k in 1..=d.len() {
            prop_assert_eq!(k_centrum(&d, k).unwrap(), expect[k - 1].clone());
        }
        prop_assert!(k_centrum(&d, 0).is_err());
        prop_assert!(k_centrum(&d, d.len() + 1).is_err());
    }

    #[test]
    fn cost_grows_with_k(inst in instance(8), seed in any::<u64>()) {
        let n = inst.n();
        let mut p: Vec<usize> = (0..n).collect();
        p.rotate_left((seed % n as u64) as usize);
        let m = Matching::new(p).unwrap();
        let c = model::cost_per_k(&inst, &m).unwrap();
        prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(c, sorted_sums(distances(&inst, &m)));
    }

    #[test]
    fn greedy_beats_every_matching(inst in instance(7), seed in 0usize..5040) {
        let n = inst.n();
        let opt = greedy_optimal(&inst);
        prop_assert_eq!(model::cost_per_k(&inst, &opt.matching).unwrap(), opt.cost_per_k.clone());
        // one arbitrary matching, chosen by factorial digits of the seed
        let mut pool: Vec<usize> = (0..n).collect();
        let mut s = seed;
        let mut p = Vec::with_capacity(n);
        for r in (1..=n).rev() {
            p.push(pool.remove(s % r));
            s /= r;
        }
        let other = model::cost_per_k(&inst, &Matching::new(p).unwrap()).unwrap();
        prop_assert!(other.iter().zip(&opt.cost_per_k).all(|(x, o)| x >= o));
    }

    #[test]
    fn swapping_two_partners_of_the_optimum_never_helps(inst in instance(8), i in 0usize..8, j in 0usize..8) {
        let n = inst.n();
        let (i, j) = (i % n, j % n);
        let opt = greedy_optimal(&inst);
        let mut p = opt.matching.as_slice().to_vec();
        p.swap(i, j);
        let swapped = model::cost_per_k(&inst, &Matching::new(p).unwrap()).unwrap();
        prop_assert!(swapped.iter().zip(&opt.cost_per_k).all(|(x, o)| x >= o));
    }

    #[test]
    fn favourite_groups_follow_the_line(inst in instance(9)) {
        favourites_are_sorted(&inst)?;
    }

    #[test]
    fn favourite_groups_follow_the_line_with_ties(inst in crowded(9)) {
        favourites_are_sorted(&inst)?;
    }

    #[test]
    fn derived_profile_is_consistent(inst in instance(8)) {
        let p = derive_profile(&inst);
        prop_assert!(model::check_consistency(&p, &inst).unwrap());
    }

    #[test]
    fn mirror_image_fits_the_profile_and_keeps_costs(inst in instance(8)) {
        let m = inst.mirrored();
        // equidistant ties may break the other way, but the profile still fits
        prop_assert!(model::check_consistency(&derive_profile(&inst), &m).unwrap());
        prop_assert_eq!(greedy_optimal(&m).cost_per_k, greedy_optimal(&inst).cost_per_k);
        let alg = ordermatch::order_match(&derive_profile(&inst)).unwrap();
        prop_assert_eq!(model::cost_per_k(&m, &alg).unwrap(), model::cost_per_k(&inst, &alg).unwrap());
    }

    #[test]
    fn order_match_within_three_and_structure_holds(inst in instance(9)) {
        let checks = check_order_match(&inst, RecoveryOptions::default()).unwrap();
        prop_assert!(checks.all_ok(), "failed {:?}", checks.failed());
        let alg = model::cost_per_k(&inst, &checks.matching).unwrap();
        let opt = greedy_optimal(&inst).cost_per_k;
        let three = rational::int(3);
        prop_assert!(alg.iter().zip(&opt).all(|(a, o)| *a <= &three * o));
    }

    #[test]
    fn structure_holds_with_many_ties(inst in crowded(9)) {
        let checks = check_order_match(&inst, RecoveryOptions::default()).unwrap();
        prop_assert!(checks.all_ok(), "failed {:?}", checks.failed());
    }

    #[test]
    fn axis_search_agrees_with_the_rules(inst in instance(7)) {
        let p = derive_profile(&inst);
        let ruled = ordermatch::order_match_run(&p, RecoveryOptions::default()).unwrap();
        let alone = RecoveryOptions { pairwise_rules: false, ..RecoveryOptions::default() };
        let searched = ordermatch::order_match_run(&p, alone).unwrap();
        let xs = |items: &[usize]| items.iter().map(|&g| inst.item(g).clone()).collect::<Vec<_>>();
        prop_assert_eq!(xs(&searched.item_order.items), xs(&ruled.item_order.items));
    }

    #[test]
    fn instance_json_round_trip(inst in instance(8)) {
        let text = inst.to_json();
        let back = Instance::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn profile_json_round_trip(inst in instance(8)) {
        let p = derive_profile(&inst);
        prop_assert_eq!(OrdinalProfile::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn rational_text_round_trip(x in coord(), scale in 1i64..1000) {
        let y = x / rational::int(scale);
        prop_assert_eq!(rational::parse(&rational::format(&y)).unwrap(), y);
    }

    #[test]
    fn two_sided_matches_the_one_sided_optimum(ts in two_sided(9)) {
        let m = twosided::two_sided_optimal(&ts.taker_profile(), &ts.giver_profile()).unwrap();
        let inst = ts.as_instance();
        prop_assert_eq!(model::cost_per_k(&inst, &m).unwrap(), greedy_optimal(&inst).cost_per_k);
        prop_assert_eq!(TwoSidedInstance::from_json(&ts.to_json()).unwrap(), ts);
    }

    #[test]
    fn query_solvers_are_optimal_within_budget(ts in two_sided(10)) {
        let inst = ts.as_instance();
        let opt = greedy_optimal(&inst).cost_per_k;
        let mut oracle = QueryOracle::new(&ts);
        let ranks = twosided::solve_one_sided_ranks(&mut oracle, &ts.taker_profile()).unwrap();
        prop_assert!(ranks.within_bound());
        prop_assert_eq!(model::cost_per_k(&inst, &ranks.matching).unwrap(), opt.clone());
        let mut oracle = QueryOracle::new(&ts);
        let zero = twosided::solve_zero_knowledge(&mut oracle).unwrap();
        prop_assert!(zero.within_bound());
        prop_assert_eq!(zero.full_queries, 0);
        prop_assert_eq!(model::cost_per_k(&inst, &zero.matching).unwrap(), opt);
    }
}
