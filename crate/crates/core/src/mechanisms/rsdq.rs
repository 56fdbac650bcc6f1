use crate::error::{input, Result};
use crate::model::{DeterministicAssignment, Instance, Lottery};
use crate::rng::{rng_from_seed, shuffle};
use crate::scalar::Scalar;

/// Quota that lets every item be allocated, `⌈m/n⌉`.
pub fn default_quota(inst: &Instance) -> usize {
    inst.round_count()
}

/// Block serial dictatorship: agents in `priority` order each take their
/// `quota` favourite remaining items in a single turn.
pub fn rsdq(inst: &Instance, priority: &[usize], quota: usize) -> Result<DeterministicAssignment> {
    if quota == 0 {
        return input("quota must be at least 1");
    }
    let mut seen = vec![false; inst.n()];
    if priority.len() != inst.n()
        || priority
            .iter()
            .any(|&j| j >= inst.n() || std::mem::replace(&mut seen[j], true))
    {
        return input(format!(
            "{priority:?} is not an ordering of the {} agents",
            inst.n()
        ));
    }
    let mut a = DeterministicAssignment::empty(inst.n(), inst.m());
    for &j in priority {
        let picks: Vec<usize> = inst
            .pref(j)
            .order()
            .iter()
            .copied()
            .filter(|&o| a.owner(o).is_none())
            .take(quota)
            .collect();
        for o in picks {
            a.assign(o, j);
        }
    }
    Ok(a)
}

/// One draw with a uniformly random priority order.
pub fn rsdq_sample(inst: &Instance, quota: usize, seed: u64) -> Result<DeterministicAssignment> {
    let mut order: Vec<usize> = (0..inst.n()).collect();
    shuffle(&mut rng_from_seed(seed), &mut order);
    rsdq(inst, &order, quota)
}

const MAX_LOTTERY_AGENTS: usize = 9;

/// Uniform average over all `n!` priority orders.
pub fn rsdq_lottery<S: Scalar>(inst: &Instance, quota: usize) -> Result<Lottery<S>> {
    if inst.n() > MAX_LOTTERY_AGENTS {
        return input(format!(
            "the exact serial dictatorship lottery enumerates n! orders; n = {} exceeds {MAX_LOTTERY_AGENTS}",
            inst.n()
        ));
    }
    let orders = permutations(inst.n());
    let weight = S::one() / S::from_count(orders.len());
    let atoms = orders
        .iter()
        .map(|order| Ok((weight.clone(), rsdq(inst, order, quota)?)))
        .collect::<Result<Vec<_>>>()?;
    Lottery::new(atoms)
}

/// All permutations of `0..k` in lexicographic order.
pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..k)
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .expect("pivot exists");
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn identical() -> Instance {
        Instance::from_orders(&["a", "b", "c", "d"], &[vec![0, 1, 2, 3], vec![0, 1, 2, 3]]).unwrap()
    }

    #[test]
    fn first_dictator_takes_a_and_b() {
        let a = rsdq(&identical(), &[0, 1], 2).unwrap();
        assert_eq!(a.bundle(0), vec![0, 1]);
        assert_eq!(a.bundle(1), vec![2, 3]);
        let b = rsdq(&identical(), &[1, 0], 2).unwrap();
        assert_eq!(b.bundle(0), vec![2, 3]);
        assert_eq!(b.bundle(1), vec![0, 1]);
    }

    #[test]
    fn single_agent_is_capped_by_quota() {
        let inst = Instance::from_orders(&["x", "y", "z"], &[vec![1, 2, 0]]).unwrap();
        assert_eq!(rsdq(&inst, &[0], 2).unwrap().bundle(0), vec![1, 2]);
        assert_eq!(rsdq(&inst, &[0], 5).unwrap().bundle(0), vec![0, 1, 2]);
    }

    #[test]
    fn lottery_averages_both_orders() {
        let lot = rsdq_lottery::<Rational>(&identical(), 2).unwrap();
        assert_eq!(lot.len(), 2);
        let half: Rational = "1/2".parse().unwrap();
        assert!(lot
            .expected()
            .rows()
            .all(|row| row.iter().all(|v| *v == half)));
    }

    #[test]
    fn rejects_bad_orders_and_quota() {
        assert!(rsdq(&identical(), &[0, 0], 2).is_err());
        assert!(rsdq(&identical(), &[0], 2).is_err());
        assert!(rsdq(&identical(), &[0, 1], 0).is_err());
    }

    #[test]
    fn permutations_are_lexicographic() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
        assert_eq!(permutations(1), vec![vec![0]]);
    }
}
