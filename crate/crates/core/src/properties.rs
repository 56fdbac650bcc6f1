//! Decision procedures for the efficiency and fairness properties.
//!
//! Every checker returns a [`PropertyReport`]; a `false` verdict always comes
//! with a witness naming the agents and items involved, so the failure can be
//! re-checked by hand.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::model::{sd_dominates, DeterministicAssignment, Instance, Lottery, RandomAssignment};
use crate::scalar::Scalar;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "pe")]
    Pe,
    #[serde(rename = "sde")]
    SdE,
    #[serde(rename = "fcm")]
    Fcm,
    #[serde(rename = "ef1")]
    Ef1,
    #[serde(rename = "sdwef")]
    SdWef,
    #[serde(rename = "sdef")]
    SdEf,
    #[serde(rename = "fhr")]
    Fhr,
    #[serde(rename = "feri")]
    Feri,
    #[serde(rename = "round-ordering")]
    RoundOrdering,
    #[serde(rename = "expost-pe")]
    ExPostPe,
    #[serde(rename = "expost-fcm")]
    ExPostFcm,
    #[serde(rename = "expost-ef1")]
    ExPostEf1,
    #[serde(rename = "neutrality")]
    Neutrality,
}

impl Property {
    pub const ALL: [Property; 13] = [
        Property::Pe,
        Property::SdE,
        Property::Fcm,
        Property::Ef1,
        Property::SdWef,
        Property::SdEf,
        Property::Fhr,
        Property::Feri,
        Property::RoundOrdering,
        Property::ExPostPe,
        Property::ExPostFcm,
        Property::ExPostEf1,
        Property::Neutrality,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::Pe => "pe",
            Property::SdE => "sde",
            Property::Fcm => "fcm",
            Property::Ef1 => "ef1",
            Property::SdWef => "sdwef",
            Property::SdEf => "sdef",
            Property::Fhr => "fhr",
            Property::Feri => "feri",
            Property::RoundOrdering => "round-ordering",
            Property::ExPostPe => "expost-pe",
            Property::ExPostFcm => "expost-fcm",
            Property::ExPostEf1 => "expost-ef1",
            Property::Neutrality => "neutrality",
        }
    }

    /// The deterministic property an ex-post property lifts.
    pub fn ex_post_base(self) -> Option<Property> {
        match self {
            Property::ExPostPe => Some(Property::Pe),
            Property::ExPostFcm => Some(Property::Fcm),
            Property::ExPostEf1 => Some(Property::Ef1),
            _ => None,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Input(format!("unknown property `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Items `o1 → o2 → … → ok → o1`, each edge pointing to an item the
    /// holder of its source prefers.
    Cycle { items: Vec<String> },
    /// `judge` envies `envied`.
    Pair { judge: String, envied: String },
    /// A first-choice item not held by anyone who ranks it first.
    FirstChoice {
        item: String,
        holder: Option<String>,
    },
    /// `holder` got `item` although `other` ranks it higher, and `other`'s
    /// own `other_item` is worse for `other` than `item`.
    RankInversion {
        holder: String,
        item: String,
        other: String,
        other_item: String,
    },
    /// An item of tier `tier` not held by an agent that ranks it top.
    Tier {
        tier: usize,
        item: String,
        holder: Option<String>,
    },
    /// `agent` got `item` in round `round` but prefers `later_item`, which
    /// went out in round `round + 1`.
    RoundOrder {
        round: usize,
        agent: String,
        item: String,
        later_item: String,
    },
    /// `agent` holds a share of `item` while part of the preferred
    /// `preferred` is left unallocated.
    Waste {
        agent: String,
        item: String,
        preferred: String,
    },
    /// Relabeling items by `permutation` (item `i` becomes `permutation[i]`)
    /// does not commute with the mechanism.
    Relabeling {
        permutation: Vec<String>,
        detail: String,
    },
    /// A failing lottery atom.
    Atom {
        index: usize,
        prob: String,
        report: Box<PropertyReport>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub verdict: bool,
    pub witness: Option<Witness>,
}

impl PropertyReport {
    pub(crate) fn pass(property: Property) -> Self {
        Self {
            property,
            verdict: true,
            witness: None,
        }
    }

    pub(crate) fn fail(property: Property, witness: Witness) -> Self {
        Self {
            property,
            verdict: false,
            witness: Some(witness),
        }
    }
}

/// First cycle found by a depth-first search over `adj`, vertices and edges
/// visited in index order.
fn find_cycle(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        OnStack,
        Done,
    }
    let mut mark = vec![Mark::New; adj.len()];
    for start in 0..adj.len() {
        if mark[start] != Mark::New {
            continue;
        }
        let mut path = vec![start];
        let mut next_edge = vec![0usize];
        mark[start] = Mark::OnStack;
        while let Some(&v) = path.last() {
            let i = next_edge.last_mut().expect("parallel stacks");
            if let Some(&w) = adj[v].get(*i) {
                *i += 1;
                match mark[w] {
                    Mark::OnStack => {
                        let from = path.iter().position(|&x| x == w).expect("on stack");
                        return Some(path[from..].to_vec());
                    }
                    Mark::New => {
                        mark[w] = Mark::OnStack;
                        path.push(w);
                        next_edge.push(0);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                path.pop();
                next_edge.pop();
            }
        }
    }
    None
}

fn preference_graph(inst: &Instance, holds: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); inst.m()];
    for o in 0..inst.m() {
        for j in (0..inst.n()).filter(|&j| holds(j, o)) {
            for &better in inst.pref(j).upper_contour(o) {
                if better != o && !adj[o].contains(&better) {
                    adj[o].push(better);
                }
            }
        }
        adj[o].sort_unstable();
    }
    adj
}

fn cycle_report(inst: &Instance, property: Property, adj: &[Vec<usize>]) -> PropertyReport {
    match find_cycle(adj) {
        None => PropertyReport::pass(property),
        Some(cycle) => PropertyReport::fail(
            property,
            Witness::Cycle {
                items: cycle
                    .iter()
                    .map(|&o| inst.item_name(o).to_string())
                    .collect(),
            },
        ),
    }
}

fn check_shape(inst: &Instance, n: usize, m: usize) -> Result<()> {
    if (n, m) != (inst.n(), inst.m()) {
        return input(format!(
            "assignment is {n}×{m} but the instance has {} agents and {} items",
            inst.n(),
            inst.m()
        ));
    }
    Ok(())
}

/// Pareto efficiency via acyclicity of "the holder of `o` prefers `o'`".
pub fn check_pe_acyclic(inst: &Instance, a: &DeterministicAssignment) -> Result<PropertyReport> {
    check_shape(inst, a.n(), a.m())?;
    if !a.is_complete() {
        return input("Pareto efficiency is defined for complete assignments");
    }
    let adj = preference_graph(inst, |j, o| a.holds(j, o));
    Ok(cycle_report(inst, Property::Pe, &adj))
}

/// sd-efficiency via acyclicity of the positive-share preference relation.
pub fn check_sde_acyclic<S: Scalar>(
    inst: &Instance,
    p: &RandomAssignment<S>,
) -> Result<PropertyReport> {
    check_shape(inst, p.n(), p.m())?;
    if !p.is_fully_allocating() {
        return input("sd-efficiency is checked on fully allocating random assignments");
    }
    let adj = preference_graph(inst, |j, o| p.get(j, o).is_positive_share());
    Ok(cycle_report(inst, Property::SdE, &adj))
}

/// sd-efficiency of `p` as an allocation of the fractional `supply` (one
/// entry per item): no agent holds a share of an item while a preferred item
/// has supply left over, and the positive-share relation is acyclic. Used for
/// single rounds of a fractional mechanism.
pub fn check_sde_with_supply<S: Scalar>(
    inst: &Instance,
    p: &RandomAssignment<S>,
    supply: &[S],
) -> Result<PropertyReport> {
    check_shape(inst, p.n(), p.m())?;
    if supply.len() != inst.m() {
        return Err(Error::Dimension {
            expected: inst.m(),
            got: supply.len(),
        });
    }
    let mut left = Vec::with_capacity(inst.m());
    for (o, s) in supply.iter().enumerate() {
        let rest = s.clone() - p.column_sum(o);
        if rest < S::zero() && !rest.is_negligible() {
            return input(format!(
                "item `{}` is allocated beyond its supply",
                inst.item_name(o)
            ));
        }
        left.push(rest.is_positive_share());
    }
    for j in 0..inst.n() {
        for o in (0..inst.m()).filter(|&o| p.get(j, o).is_positive_share()) {
            if let Some(&better) = inst
                .pref(j)
                .upper_contour(o)
                .iter()
                .find(|&&b| b != o && left[b])
            {
                return Ok(PropertyReport::fail(
                    Property::SdE,
                    Witness::Waste {
                        agent: inst.agent_name(j).into(),
                        item: inst.item_name(o).into(),
                        preferred: inst.item_name(better).into(),
                    },
                ));
            }
        }
    }
    let adj = preference_graph(inst, |j, o| p.get(j, o).is_positive_share());
    Ok(cycle_report(inst, Property::SdE, &adj))
}

/// Items that are somebody's global first choice, ascending.
pub fn first_choice_items(inst: &Instance) -> Vec<usize> {
    let mut items: Vec<usize> = (0..inst.n()).map(|j| inst.pref(j).top()).collect();
    items.sort_unstable();
    items.dedup();
    items
}

/// First-choice maximality: every first-choice item goes to an agent that
/// ranks it first.
pub fn check_fcm(inst: &Instance, a: &DeterministicAssignment) -> Result<PropertyReport> {
    check_shape(inst, a.n(), a.m())?;
    for o in first_choice_items(inst) {
        let holder = a.owner(o);
        if holder.is_none_or(|j| inst.pref(j).top() != o) {
            return Ok(PropertyReport::fail(
                Property::Fcm,
                Witness::FirstChoice {
                    item: inst.item_name(o).into(),
                    holder: holder.map(|j| inst.agent_name(j).into()),
                },
            ));
        }
    }
    Ok(PropertyReport::pass(Property::Fcm))
}

/// Number of agents holding their first choice.
pub fn fcm_count(inst: &Instance, a: &DeterministicAssignment) -> usize {
    (0..inst.n())
        .filter(|&j| a.holds(j, inst.pref(j).top()))
        .count()
}

/// Largest achievable [`fcm_count`]: the number of distinct first choices.
pub fn fcm_max(inst: &Instance) -> usize {
    first_choice_items(inst).len()
}

fn ef1_pair(inst: &Instance, a: &DeterministicAssignment, judge: usize, envied: usize) -> bool {
    let theirs = a.bundle(envied);
    if theirs.is_empty() {
        return true;
    }
    let order = inst.pref(judge).order();
    theirs.iter().any(|&drop| {
        // cumulative counts along the judge's order
        let (mut mine, mut other) = (0usize, 0usize);
        order.iter().all(|&o| {
            mine += usize::from(a.holds(judge, o));
            other += usize::from(a.holds(envied, o) && o != drop);
            mine >= other
        })
    })
}

/// Envy-freeness up to one item, over every ordered pair of agents.
pub fn check_ef1(inst: &Instance, a: &DeterministicAssignment) -> Result<PropertyReport> {
    check_shape(inst, a.n(), a.m())?;
    for j in 0..inst.n() {
        for k in (0..inst.n()).filter(|&k| k != j) {
            if !ef1_pair(inst, a, j, k) {
                return Ok(PropertyReport::fail(
                    Property::Ef1,
                    Witness::Pair {
                        judge: inst.agent_name(j).into(),
                        envied: inst.agent_name(k).into(),
                    },
                ));
            }
        }
    }
    Ok(PropertyReport::pass(Property::Ef1))
}

/// Replays an EF1 pair with every single-item removal; `true` if envy survives all.
pub fn ef1_pair_fails(
    inst: &Instance,
    a: &DeterministicAssignment,
    judge: usize,
    envied: usize,
) -> bool {
    !ef1_pair(inst, a, judge, envied)
}

/// sd weak envy-freeness: nobody's row sd-dominates the judge's own row under
/// the judge's order unless the rows are equal.
pub fn check_sd_wef<S: Scalar>(inst: &Instance, p: &RandomAssignment<S>) -> Result<PropertyReport> {
    check_shape(inst, p.n(), p.m())?;
    for j in 0..inst.n() {
        for k in (0..inst.n()).filter(|&k| k != j) {
            let same = p.row(j).iter().zip(p.row(k)).all(|(x, y)| x.approx_eq(y));
            if !same && sd_dominates(inst.pref(j), p.row(k), p.row(j))? {
                return Ok(PropertyReport::fail(
                    Property::SdWef,
                    Witness::Pair {
                        judge: inst.agent_name(j).into(),
                        envied: inst.agent_name(k).into(),
                    },
                ));
            }
        }
    }
    Ok(PropertyReport::pass(Property::SdWef))
}

/// sd envy-freeness: every agent's row sd-dominates every other row under its
/// own order.
pub fn check_sd_ef<S: Scalar>(inst: &Instance, p: &RandomAssignment<S>) -> Result<PropertyReport> {
    check_shape(inst, p.n(), p.m())?;
    for j in 0..inst.n() {
        for k in (0..inst.n()).filter(|&k| k != j) {
            if !sd_dominates(inst.pref(j), p.row(j), p.row(k))? {
                return Ok(PropertyReport::fail(
                    Property::SdEf,
                    Witness::Pair {
                        judge: inst.agent_name(j).into(),
                        envied: inst.agent_name(k).into(),
                    },
                ));
            }
        }
    }
    Ok(PropertyReport::pass(Property::SdEf))
}

/// Favoring higher ranks with ranks taken inside `domain`: for all agents
/// `j, k` and items `o_j ∈ A(j)`, `o_k ∈ A(k)`, either `j` ranks `o_j` at least
/// as high as `k` does, or `k` ranks its own `o_k` strictly above `o_j`.
pub fn check_fhr(
    inst: &Instance,
    a: &DeterministicAssignment,
    domain: &[usize],
) -> Result<PropertyReport> {
    check_shape(inst, a.n(), a.m())?;
    for o in a.allocated_items() {
        if !domain.contains(&o) {
            return input(format!(
                "allocated item `{}` is outside the ranking domain",
                inst.item_name(o)
            ));
        }
    }
    let rank = |j: usize, o: usize| inst.pref(j).rank_within(o, domain).expect("item in domain");
    let bundles = a.bundles();
    for j in 0..inst.n() {
        for k in (0..inst.n()).filter(|&k| k != j) {
            for &oj in &bundles[j] {
                for &ok in &bundles[k] {
                    if !(rank(j, oj) <= rank(k, oj) || rank(k, ok) < rank(k, oj)) {
                        return Ok(PropertyReport::fail(
                            Property::Fhr,
                            Witness::RankInversion {
                                holder: inst.agent_name(j).into(),
                                item: inst.item_name(oj).into(),
                                other: inst.agent_name(k).into(),
                                other_item: inst.item_name(ok).into(),
                            },
                        ));
                    }
                }
            }
        }
    }
    Ok(PropertyReport::pass(Property::Fhr))
}

/// Favoring eagerness for remaining items on a matching over `domain`.
///
/// Tier `r` holds the items that are the top remaining item (outside earlier
/// tiers) of some agent whose own item is not in an earlier tier; each such
/// item must be held by an agent for which it is the top remaining item.
pub fn check_feri(
    inst: &Instance,
    matching: &DeterministicAssignment,
    domain: &[usize],
) -> Result<PropertyReport> {
    check_shape(inst, matching.n(), matching.m())?;
    if !matching.is_matching() {
        return input("FERI is defined for one-to-one matchings");
    }
    if let Some(o) = matching
        .allocated_items()
        .into_iter()
        .find(|o| !domain.contains(o))
    {
        return input(format!(
            "matched item `{}` is outside the item domain",
            inst.item_name(o)
        ));
    }
    let mut rest: Vec<usize> = domain.to_vec();
    let mut in_tier = vec![false; inst.m()];
    let mut tier = 1;
    while !rest.is_empty() {
        let mut items: Vec<usize> = (0..inst.n())
            .filter(|&j| matching.item_of(j).is_none_or(|o| !in_tier[o]))
            .filter_map(|j| inst.pref(j).top_in(&rest))
            .collect();
        items.sort_unstable();
        items.dedup();
        if items.is_empty() {
            break;
        }
        for &o in &items {
            let holder = matching.owner(o);
            if holder.is_none_or(|h| inst.pref(h).top_in(&rest) != Some(o)) {
                return Ok(PropertyReport::fail(
                    Property::Feri,
                    Witness::Tier {
                        tier,
                        item: inst.item_name(o).into(),
                        holder: holder.map(|h| inst.agent_name(h).into()),
                    },
                ));
            }
        }
        for &o in &items {
            in_tier[o] = true;
        }
        rest.retain(|&o| !in_tier[o]);
        tier += 1;
    }
    Ok(PropertyReport::pass(Property::Feri))
}

/// Every agent strictly prefers its round-`c` item to every item handed out in
/// round `c + 1`.
pub fn check_round_ordering(
    inst: &Instance,
    rounds: &[DeterministicAssignment],
) -> Result<PropertyReport> {
    for (c, pair) in rounds.windows(2).enumerate() {
        let (now, next) = (&pair[0], &pair[1]);
        check_shape(inst, now.n(), now.m())?;
        for j in 0..inst.n() {
            for o in now.bundle(j) {
                for later in next.allocated_items() {
                    if !inst.pref(j).prefers(o, later) {
                        return Ok(PropertyReport::fail(
                            Property::RoundOrdering,
                            Witness::RoundOrder {
                                round: c + 1,
                                agent: inst.agent_name(j).into(),
                                item: inst.item_name(o).into(),
                                later_item: inst.item_name(later).into(),
                            },
                        ));
                    }
                }
            }
        }
    }
    Ok(PropertyReport::pass(Property::RoundOrdering))
}

/// Runs a deterministic-assignment property (`pe`, `fcm` or `ef1`).
pub fn check_deterministic(
    inst: &Instance,
    a: &DeterministicAssignment,
    property: Property,
) -> Result<PropertyReport> {
    match property {
        Property::Pe => check_pe_acyclic(inst, a),
        Property::Fcm => check_fcm(inst, a),
        Property::Ef1 => check_ef1(inst, a),
        Property::Fhr => check_fhr(inst, a, &inst.all_items()),
        Property::Feri => check_feri(inst, a, &inst.all_items()),
        Property::SdE => check_sde_acyclic(inst, &a.to_random::<Rational>()),
        Property::SdWef => check_sd_wef(inst, &a.to_random::<Rational>()),
        Property::SdEf => check_sd_ef(inst, &a.to_random::<Rational>()),
        other => input(format!(
            "`{other}` does not apply to a deterministic assignment"
        )),
    }
}

/// Ex-post properties: the base checker on every atom; the first failing atom
/// becomes the witness.
pub fn check_lottery_expost<S: Scalar>(
    inst: &Instance,
    lottery: &Lottery<S>,
    properties: &[Property],
) -> Result<Vec<PropertyReport>> {
    properties
        .iter()
        .map(|&prop| {
            let base = prop
                .ex_post_base()
                .ok_or_else(|| Error::Input(format!("`{prop}` is not an ex-post property")))?;
            for (index, atom) in lottery.atoms().iter().enumerate() {
                let report = check_deterministic(inst, &atom.assignment, base)?;
                if !report.verdict {
                    return Ok(PropertyReport::fail(
                        prop,
                        Witness::Atom {
                            index,
                            prob: atom.prob.to_string(),
                            report: Box::new(report),
                        },
                    ));
                }
            }
            Ok(PropertyReport::pass(prop))
        })
        .collect()
}
