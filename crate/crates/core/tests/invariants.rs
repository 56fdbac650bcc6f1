use boston_core::decomposition::{expand_subagents, gpbm_lottery, sample_realization};
use boston_core::mechanisms::{gebm_expected, gebm_lottery, gebm_sample, gpbm, DEFAULT_BRANCH_CAP};
use boston_core::oracle::{
    enumerate_assignments, fcm_max_bruteforce, neutrality_audit, pe_bruteforce, sd_wsp_audit,
    AuditedMechanism, OracleLimits,
};
use boston_core::properties::{check_pe_acyclic, check_sde_acyclic, fcm_max, first_choice_items};
use boston_core::{default_item_names, Instance, Rational, Scalar};
use proptest::prelude::*;

fn profile(m: usize, orders: Vec<Vec<usize>>) -> Instance {
    Instance::from_orders(&default_item_names(m), &orders).unwrap()
}

fn instance_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        proptest::collection::vec(Just((0..m).collect::<Vec<_>>()).prop_shuffle(), n)
            .prop_map(move |orders| profile(m, orders))
    })
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..k {
        for rest in permutations(k - 1) {
            let mut p = vec![first];
            p.extend(rest.into_iter().map(|x| if x >= first { x + 1 } else { x }));
            out.push(p);
        }
    }
    out
}

#[test]
fn acyclicity_matches_brute_force_for_two_agents_up_to_four_items() {
    for m in 1..=4 {
        let orders = permutations(m);
        for o1 in &orders {
            for o2 in &orders {
                let inst = profile(m, vec![o1.clone(), o2.clone()]);
                for a in enumerate_assignments(&inst, false, 1 << 20).unwrap() {
                    assert_eq!(
                        check_pe_acyclic(&inst, &a).unwrap().verdict,
                        pe_bruteforce(&inst, &a, 1 << 20).unwrap(),
                        "{inst:?} {a:?}"
                    );
                    let as_random = a.to_random::<Rational>();
                    assert_eq!(
                        check_sde_acyclic(&inst, &as_random).unwrap().verdict,
                        check_pe_acyclic(&inst, &a).unwrap().verdict
                    );
                }
            }
        }
    }
}

#[test]
fn audits_find_manipulations_in_the_two_agent_four_item_family() {
    let orders = permutations(4);
    let limits = OracleLimits::default();
    for mech in [AuditedMechanism::Gebm, AuditedMechanism::Gpbm] {
        let found = orders.iter().find_map(|o2| {
            let inst = profile(4, vec![vec![0, 1, 2, 3], o2.clone()]);
            sd_wsp_audit::<Rational>(mech, &inst, &limits).unwrap()
        });
        let w = found.expect("some profile admits a profitable misreport");
        assert!(w.replay(DEFAULT_BRANCH_CAP).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fcm_maximum_is_the_number_of_distinct_first_choices(inst in instance_strategy(3, 5)) {
        let brute = fcm_max_bruteforce(&inst, 1 << 20).unwrap();
        prop_assert_eq!(brute, first_choice_items(&inst).len());
        prop_assert_eq!(brute, fcm_max(&inst));
    }

    #[test]
    fn gebm_outcomes_are_balanced_and_complete(inst in instance_strategy(5, 9), seed in any::<u64>()) {
        let out = gebm_sample(&inst, seed);
        prop_assert!(out.total.is_complete());
        let (lo, hi) = (inst.m() / inst.n(), inst.m().div_ceil(inst.n()));
        for b in out.total.bundles() {
            prop_assert!((lo..=hi).contains(&b.len()));
        }
        prop_assert_eq!(out.rounds.len(), inst.round_count());
        prop_assert_eq!(gebm_sample(&inst, seed), out);
    }

    #[test]
    fn gebm_expectation_is_the_lottery_mean(inst in instance_strategy(3, 6)) {
        let lottery = gebm_lottery::<Rational>(&inst, DEFAULT_BRANCH_CAP).unwrap();
        let expected = gebm_expected::<Rational>(&inst, DEFAULT_BRANCH_CAP).unwrap();
        prop_assert_eq!(lottery.expected(), expected);
    }

    #[test]
    fn gpbm_conserves_supply(inst in instance_strategy(4, 8)) {
        let out = gpbm::<Rational>(&inst);
        prop_assert_eq!(out.rounds.round_count(), inst.round_count());
        let one = Rational::from_count(1);
        for o in 0..inst.m() {
            prop_assert_eq!(out.total.column_sum(o), one.clone());
        }
        let mut left = inst.m();
        for p in out.rounds.rounds() {
            let eaten: Rational = (0..inst.m()).fold(Rational::from_count(0), |acc, o| acc + p.column_sum(o));
            prop_assert_eq!(eaten, Rational::from_count(left.min(inst.n())));
            left -= left.min(inst.n());
        }
    }

    #[test]
    fn both_mechanisms_are_neutral(inst in instance_strategy(3, 5), seed in any::<u64>()) {
        let m = inst.m();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut rng = boston_core::rng::rng_from_seed(seed);
        boston_core::rng::shuffle(&mut rng, &mut perm);
        for mech in [AuditedMechanism::Gebm, AuditedMechanism::Gpbm] {
            let rep = neutrality_audit::<Rational>(mech, &inst, &perm, DEFAULT_BRANCH_CAP).unwrap();
            prop_assert!(rep.verdict, "{:?}", rep.witness);
        }
    }

    #[test]
    fn decomposition_round_trips(inst in instance_strategy(4, 8), seed in any::<u64>()) {
        let g = gpbm_lottery::<Rational>(&inst).unwrap();
        prop_assert_eq!(&expand_subagents(g.outcome.rounds.rounds()).unwrap(), &g.matrix);
        prop_assert_eq!(g.decomposed.reconstruct(), g.matrix.clone());
        prop_assert_eq!(g.lottery().expected(), g.outcome.total.clone());
        let r = sample_realization(&g.decomposed, seed);
        prop_assert!(g.lottery().prob_of(&r.assignment).is_positive_share());
    }

    #[test]
    fn float_and_exact_gpbm_agree(inst in instance_strategy(4, 8)) {
        let exact = gpbm::<Rational>(&inst).total;
        let float = gpbm::<f64>(&inst).total;
        for j in 0..inst.n() {
            for o in 0..inst.m() {
                prop_assert!((exact.get(j, o).to_f64() - float.get(j, o)).abs() < 1e-9);
            }
        }
    }
}
