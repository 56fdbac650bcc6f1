use crate::error::{Error, Result};
use crate::mechanisms::ebm::{applicant_sets, ebm, SeededTieBreaker, TieBreaker};
use crate::model::{DeterministicAssignment, Instance, Lottery, RandomAssignment};
use crate::scalar::Scalar;

/// Default limit on the number of tie-break branches explored in exact mode.
pub const DEFAULT_BRANCH_CAP: u64 = 1_000_000;

/// One realized run of the generalized eager Boston mechanism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GebmOutcome {
    pub total: DeterministicAssignment,
    /// The matching computed in each round.
    pub rounds: Vec<DeterministicAssignment>,
    /// Items still unallocated at the start of each round.
    pub remaining: Vec<Vec<usize>>,
}

/// A leaf of the exhaustive tie-break enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct GebmBranch<S> {
    pub prob: S,
    pub outcome: GebmOutcome,
}

fn unallocated(total: &DeterministicAssignment) -> Vec<usize> {
    (0..total.m())
        .filter(|&o| total.owner(o).is_none())
        .collect()
}

/// Runs `⌈m/n⌉` rounds of eager Boston matching, each over the items left by
/// the previous rounds with every agent active again.
pub fn gebm_with(inst: &Instance, tie: &mut dyn TieBreaker) -> Result<GebmOutcome> {
    let mut total = DeterministicAssignment::empty(inst.n(), inst.m());
    let mut rounds = Vec::new();
    let mut remaining = Vec::new();
    for _ in 0..inst.round_count() {
        let free = unallocated(&total);
        if free.is_empty() {
            break;
        }
        let matching = ebm(inst, &free, tie)?;
        total = total.merged(&matching)?;
        rounds.push(matching);
        remaining.push(free);
    }
    Ok(GebmOutcome {
        total,
        rounds,
        remaining,
    })
}

/// Sampled run; the seed fixes every tie-break.
pub fn gebm_sample(inst: &Instance, seed: u64) -> GebmOutcome {
    gebm_with(inst, &mut SeededTieBreaker::new(seed))
        .expect("seeded tie-breaking always picks an applicant")
}

struct Partial<S> {
    prob: S,
    total: DeterministicAssignment,
    rounds: Vec<DeterministicAssignment>,
    remaining: Vec<Vec<usize>>,
    current: DeterministicAssignment,
    active: Vec<bool>,
    avail: Vec<usize>,
}

/// Every tie-break branch with its exact probability (a product of
/// `1/|applicants|` factors). Branches are not merged.
pub fn gebm_branches<S: Scalar>(inst: &Instance, cap: u64) -> Result<Vec<GebmBranch<S>>> {
    let (n, m) = (inst.n(), inst.m());
    let rounds_total = inst.round_count();
    let all = inst.all_items();
    let mut stack = vec![Partial {
        prob: S::one(),
        total: DeterministicAssignment::empty(n, m),
        rounds: Vec::new(),
        remaining: vec![all.clone()],
        current: DeterministicAssignment::empty(n, m),
        active: vec![true; n],
        avail: all,
    }];
    let mut leaves = Vec::new();
    while let Some(mut state) = stack.pop() {
        if !state.active.iter().any(|&a| a) || state.avail.is_empty() {
            state.total = state.total.merged(&state.current)?;
            state.rounds.push(state.current.clone());
            let free = unallocated(&state.total);
            if state.rounds.len() == rounds_total || free.is_empty() {
                if leaves.len() as u64 >= cap {
                    return Err(Error::BranchCap { cap });
                }
                leaves.push(GebmBranch {
                    prob: state.prob,
                    outcome: GebmOutcome {
                        total: state.total,
                        rounds: state.rounds,
                        remaining: state.remaining,
                    },
                });
            } else {
                state.remaining.push(free.clone());
                state.current = DeterministicAssignment::empty(n, m);
                state.active = vec![true; n];
                state.avail = free;
                stack.push(state);
            }
            continue;
        }
        let sets = applicant_sets(inst, &state.active, &state.avail);
        let sizes: Vec<usize> = sets.iter().map(|(_, a)| a.len()).collect();
        let combos: usize = sizes.iter().product();
        let weight = state.prob.clone() / S::from_count(combos);
        let avail: Vec<usize> = state
            .avail
            .iter()
            .copied()
            .filter(|o| sets.iter().all(|(taken, _)| taken != o))
            .collect();
        // Push in reverse so branches are explored in lexicographic order.
        for idx in (0..combos).rev() {
            let mut rest = idx;
            let mut current = state.current.clone();
            let mut active = state.active.clone();
            for (o, apps) in sets.iter().rev() {
                let w = apps[rest % apps.len()];
                rest /= apps.len();
                current.assign(*o, w);
                active[w] = false;
            }
            stack.push(Partial {
                prob: weight.clone(),
                total: state.total.clone(),
                rounds: state.rounds.clone(),
                remaining: state.remaining.clone(),
                current,
                active,
                avail: avail.clone(),
            });
        }
    }
    Ok(leaves)
}

/// Exact output distribution, identical leaves merged.
pub fn gebm_lottery<S: Scalar>(inst: &Instance, cap: u64) -> Result<Lottery<S>> {
    let branches = gebm_branches::<S>(inst, cap)?;
    Lottery::new(branches.into_iter().map(|b| (b.prob, b.outcome.total)))
}

/// Expected assignment `E[GEBM(R)]`.
pub fn gebm_expected<S: Scalar>(inst: &Instance, cap: u64) -> Result<RandomAssignment<S>> {
    Ok(gebm_lottery::<S>(inst, cap)?.expected())
}
