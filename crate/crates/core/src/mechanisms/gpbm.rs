use crate::model::{Instance, RandomAssignment, RoundDecomposition};
use crate::scalar::Scalar;

/// One item eaten during one consumption step.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsumptionEvent<S> {
    /// 1-based round.
    pub round: usize,
    /// 1-based consumption round (the global rank being served).
    pub consumption_round: usize,
    pub item: usize,
    pub consumers: Vec<usize>,
    /// Amount of `item` eaten by each consumer, aligned with `consumers`.
    pub amounts: Vec<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GpbmOutcome<S> {
    pub total: RandomAssignment<S>,
    pub rounds: RoundDecomposition<S>,
    pub trace: Vec<ConsumptionEvent<S>>,
}

/// Equal-rate consumption of one item by agents with unequal budgets.
/// Returns the amount each consumer ate.
fn waterfill<S: Scalar>(supply: &mut S, budgets: &mut [S], consumers: &[usize]) -> Vec<S> {
    let mut eaten = vec![S::zero(); consumers.len()];
    let mut active: Vec<usize> = (0..consumers.len()).collect();
    while !active.is_empty() && supply.is_positive_share() {
        let k = S::from_count(active.len());
        let min_budget = active
            .iter()
            .map(|&i| budgets[consumers[i]].clone())
            .fold(None::<S>, |acc, b| {
                Some(match acc {
                    Some(a) if a <= b => a,
                    _ => b,
                })
            })
            .expect("active is nonempty");
        let even_split = supply.clone() / k.clone();
        let dt = if min_budget <= even_split {
            min_budget
        } else {
            even_split
        };
        for &i in &active {
            budgets[consumers[i]] -= dt.clone();
            eaten[i] += dt.clone();
            if budgets[consumers[i]].is_negligible() {
                budgets[consumers[i]] = S::zero();
            }
        }
        *supply -= dt * k;
        if supply.is_negligible() {
            *supply = S::zero();
        }
        active.retain(|&i| budgets[consumers[i]].is_positive_share());
    }
    eaten
}

/// The generalized probabilistic Boston mechanism.
///
/// Rounds repeat while some item has supply left. Each round gives every agent
/// a fresh unit budget and runs consumption rounds `r = 1..=m`; in step `r`
/// each unexhausted item is eaten at equal rates by the agents with budget
/// left that rank it `r`-th over all items. Consumer sets of different items
/// in the same step are disjoint, so items are processed independently.
pub fn gpbm<S: Scalar>(inst: &Instance) -> GpbmOutcome<S> {
    let (n, m) = (inst.n(), inst.m());
    let mut supply = vec![S::one(); m];
    let mut rounds = Vec::new();
    let mut trace = Vec::new();
    while supply.iter().any(|s| s.is_positive_share()) {
        let round = rounds.len() + 1;
        let mut p = RandomAssignment::zeros(n, m);
        let mut budget = vec![S::one(); n];
        for r in 1..=m {
            if budget.iter().all(|b| !b.is_positive_share()) {
                break;
            }
            for o in 0..m {
                if !supply[o].is_positive_share() {
                    continue;
                }
                let consumers: Vec<usize> = (0..n)
                    .filter(|&j| budget[j].is_positive_share() && inst.pref(j).rank(o) == r)
                    .collect();
                if consumers.is_empty() {
                    continue;
                }
                let amounts = waterfill(&mut supply[o], &mut budget, &consumers);
                for (&j, amount) in consumers.iter().zip(&amounts) {
                    p.add_to(j, o, amount);
                }
                trace.push(ConsumptionEvent {
                    round,
                    consumption_round: r,
                    item: o,
                    consumers,
                    amounts,
                });
            }
        }
        rounds.push(p);
        // Each round either fills every budget or exhausts every item, so this
        // bound is only reachable through float drift.
        if rounds.len() > inst.round_count() {
            break;
        }
    }
    let rounds = RoundDecomposition::new(rounds).expect("rows never exceed one unit");
    GpbmOutcome {
        total: rounds.total(),
        rounds,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn rows(p: &RandomAssignment<Rational>) -> Vec<Vec<String>> {
        p.rows()
            .map(|row| row.iter().map(ToString::to_string).collect())
            .collect()
    }

    #[test]
    fn two_agent_rounds() {
        let inst =
            Instance::from_orders(&["a", "b", "c", "d"], &[vec![0, 1, 2, 3], vec![0, 2, 1, 3]])
                .unwrap();
        let out = gpbm::<Rational>(&inst);
        assert_eq!(out.rounds.round_count(), 2);
        assert_eq!(
            rows(&out.rounds.rounds()[0]),
            vec![vec!["1/2", "1/2", "0", "0"], vec!["1/2", "0", "1/2", "0"]]
        );
        assert_eq!(
            rows(&out.rounds.rounds()[1]),
            vec![vec!["0", "1/2", "0", "1/2"], vec!["0", "0", "1/2", "1/2"]]
        );
        // round 2 skips consumption rounds 1 and 3
        let steps: Vec<usize> = out
            .trace
            .iter()
            .filter(|e| e.round == 2)
            .map(|e| e.consumption_round)
            .collect();
        assert_eq!(steps, vec![2, 2, 4]);
    }

    #[test]
    fn four_agent_table() {
        let inst = Instance::from_orders(
            &["a", "b", "c", "d"],
            &[
                vec![0, 1, 2, 3],
                vec![0, 1, 2, 3],
                vec![0, 3, 1, 2],
                vec![3, 0, 1, 2],
            ],
        )
        .unwrap();
        let out = gpbm::<Rational>(&inst);
        assert_eq!(out.rounds.round_count(), 1);
        let t = rows(&out.total);
        assert_eq!(t[0], vec!["1/3", "1/2", "1/6", "0"]);
        assert_eq!(t[1], vec!["1/3", "1/2", "1/6", "0"]);
        assert_eq!(t[2], vec!["1/3", "0", "2/3", "0"]);
        assert_eq!(t[3], vec!["0", "0", "0", "1"]);
    }

    #[test]
    fn disjoint_ranks_give_a_deterministic_output() {
        let inst =
            Instance::from_orders(&["a", "b", "c", "d"], &[vec![0, 1, 2, 3], vec![3, 0, 1, 2]])
                .unwrap();
        let out = gpbm::<Rational>(&inst);
        let a = out.total.to_deterministic().unwrap();
        assert_eq!(a.bundle(0), vec![0, 1]);
        assert_eq!(a.bundle(1), vec![2, 3]);
    }

    #[test]
    fn uneven_rounds_leave_slack_only_at_the_end() {
        let inst =
            Instance::from_orders(&["x", "y", "z"], &[vec![0, 1, 2], vec![0, 1, 2]]).unwrap();
        let out = gpbm::<Rational>(&inst);
        assert_eq!(out.rounds.round_count(), 2);
        for j in 0..2 {
            assert_eq!(out.rounds.rounds()[0].row_sum(j), r("1"));
            assert_eq!(out.rounds.rounds()[1].row_sum(j), r("1/2"));
        }
        assert!(out.total.is_fully_allocating());
    }

    #[test]
    fn waterfill_with_heterogeneous_budgets() {
        let mut supply = r("1");
        let mut budgets = vec![r("1/6"), r("1"), r("1")];
        let eaten = waterfill(&mut supply, &mut budgets, &[0, 1, 2]);
        assert_eq!(eaten, vec![r("1/6"), r("5/12"), r("5/12")]);
        assert_eq!(supply, r("0"));
    }

    #[test]
    fn float_run_matches_exact_run() {
        let inst = Instance::from_orders(
            &["a", "b", "c", "d", "e"],
            &[
                vec![0, 1, 2, 3, 4],
                vec![0, 2, 1, 4, 3],
                vec![1, 0, 2, 3, 4],
            ],
        )
        .unwrap();
        let exact = gpbm::<Rational>(&inst);
        let float = gpbm::<f64>(&inst);
        assert!(float.total.approx_eq(&exact.total.map(Scalar::to_f64)));
        assert_eq!(float.rounds.round_count(), exact.rounds.round_count());
    }
}
