use std::collections::VecDeque;

use crate::error::{input, Error, Result};
use crate::model::{DeterministicAssignment, Instance};
use crate::rng::{rng_from_seed, uniform_index, Rng};

/// Resolves contested items. Only called when two or more agents apply.
pub trait TieBreaker {
    /// Returns the winning agent among `applicants` (sorted ascending).
    fn pick(&mut self, item: usize, applicants: &[usize]) -> Result<usize>;
}

/// Uniform random winner from a seeded stream.
pub struct SeededTieBreaker {
    rng: Rng,
}

impl SeededTieBreaker {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: rng_from_seed(seed),
        }
    }
}

impl TieBreaker for SeededTieBreaker {
    fn pick(&mut self, _item: usize, applicants: &[usize]) -> Result<usize> {
        Ok(applicants[uniform_index(&mut self.rng, applicants.len())])
    }
}

/// Replays an explicit list of winners, one per contested item, in the order
/// contests occur (ascending item index within each step).
pub struct ScriptedTieBreaker {
    winners: VecDeque<usize>,
}

impl ScriptedTieBreaker {
    pub fn new(winners: impl IntoIterator<Item = usize>) -> Self {
        Self {
            winners: winners.into_iter().collect(),
        }
    }
}

impl TieBreaker for ScriptedTieBreaker {
    fn pick(&mut self, item: usize, applicants: &[usize]) -> Result<usize> {
        let w = self.winners.pop_front().ok_or_else(|| {
            Error::Input(format!("no scripted winner left for item index {item}"))
        })?;
        if !applicants.contains(&w) {
            return input(format!(
                "scripted winner {w} did not apply for item index {item} (applicants {applicants:?})"
            ));
        }
        Ok(w)
    }
}

/// Always favors the applicant that comes first in a fixed priority list.
pub struct PriorityTieBreaker {
    priority: Vec<usize>,
}

impl PriorityTieBreaker {
    pub fn new(priority: Vec<usize>) -> Self {
        Self { priority }
    }
}

impl TieBreaker for PriorityTieBreaker {
    fn pick(&mut self, item: usize, applicants: &[usize]) -> Result<usize> {
        self.priority
            .iter()
            .copied()
            .find(|j| applicants.contains(j))
            .ok_or_else(|| Error::Input(format!("no prioritized applicant for item index {item}")))
    }
}

/// For every item that someone applies for, the active agents whose top
/// remaining item it is. Sorted by item index; applicants ascending.
pub fn applicant_sets(
    inst: &Instance,
    active: &[bool],
    remaining: &[usize],
) -> Vec<(usize, Vec<usize>)> {
    let mut sets: Vec<(usize, Vec<usize>)> = Vec::new();
    for j in (0..inst.n()).filter(|&j| active[j]) {
        let Some(top) = inst.pref(j).top_in(remaining) else {
            continue;
        };
        match sets.iter_mut().find(|(o, _)| *o == top) {
            Some((_, apps)) => apps.push(j),
            None => sets.push((top, vec![j])),
        }
    }
    sets.sort_by_key(|(o, _)| *o);
    sets
}

/// Eager Boston matching over `available`: in each step every unmatched agent
/// applies for its favourite remaining item, each applied-for item goes to one
/// applicant chosen by `tie`, and all applied-for items and winners leave.
pub fn ebm(
    inst: &Instance,
    available: &[usize],
    tie: &mut dyn TieBreaker,
) -> Result<DeterministicAssignment> {
    if available.is_empty() {
        return input("the eager Boston matching needs a nonempty item set");
    }
    if let Some(&o) = available.iter().find(|&&o| o >= inst.m()) {
        return input(format!("item index {o} out of range"));
    }
    let mut matching = DeterministicAssignment::empty(inst.n(), inst.m());
    let mut active = vec![true; inst.n()];
    let mut remaining = available.to_vec();
    while active.iter().any(|&a| a) && !remaining.is_empty() {
        let sets = applicant_sets(inst, &active, &remaining);
        for (o, apps) in &sets {
            let winner = if apps.len() == 1 {
                apps[0]
            } else {
                tie.pick(*o, apps)?
            };
            matching.assign(*o, winner);
            active[winner] = false;
        }
        remaining.retain(|o| sets.iter().all(|(taken, _)| taken != o));
    }
    Ok(matching)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_agent_profile() -> Instance {
        Instance::from_orders(&["a", "b", "c", "d"], &[vec![0, 1, 2, 3], vec![0, 2, 1, 3]]).unwrap()
    }

    #[test]
    fn agent_one_wins_a_then_two_takes_c() {
        let inst = two_agent_profile();
        let mut tie = PriorityTieBreaker::new(vec![0, 1]);
        let m = ebm(&inst, &[0, 1, 2, 3], &mut tie).unwrap();
        assert_eq!(m.item_of(0), Some(0));
        assert_eq!(m.item_of(1), Some(2));
        assert!(m.is_matching());
    }

    #[test]
    fn second_round_items_b_and_d() {
        let inst = two_agent_profile();
        let mut tie = ScriptedTieBreaker::new([0]);
        let m = ebm(&inst, &[1, 3], &mut tie).unwrap();
        assert_eq!(m.item_of(0), Some(1));
        assert_eq!(m.item_of(1), Some(3));
    }

    #[test]
    fn lone_agent_takes_its_top() {
        let inst = Instance::from_orders(&["x", "y"], &[vec![0, 1]]).unwrap();
        let m = ebm(&inst, &[0, 1], &mut SeededTieBreaker::new(0)).unwrap();
        assert_eq!(m.bundle(0), vec![0]);
        assert_eq!(m.owner(1), None);
    }

    #[test]
    fn empty_item_set_is_rejected() {
        let inst = two_agent_profile();
        assert!(ebm(&inst, &[], &mut SeededTieBreaker::new(0)).is_err());
    }

    #[test]
    fn scripted_winner_must_have_applied() {
        let inst = two_agent_profile();
        let err = ebm(&inst, &[0, 1, 2, 3], &mut ScriptedTieBreaker::new([5])).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn applicants_are_computed_against_the_step_start() {
        // All three agents rank x first; y is nobody's first choice.
        let inst = Instance::from_orders(
            &["x", "y", "z"],
            &[vec![0, 1, 2], vec![0, 2, 1], vec![0, 1, 2]],
        )
        .unwrap();
        let sets = applicant_sets(&inst, &[true, true, true], &[0, 1, 2]);
        assert_eq!(sets, vec![(0, vec![0, 1, 2])]);
    }
}
