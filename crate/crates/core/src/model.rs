//! Core domain types: instances with strict preferences, deterministic and
//! random assignments, lotteries, and the two dominance relations.
//!
//! Agents and items are referred to by dense indices that follow the order in
//! which they appear in the instance; names are only used at the I/O boundary.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{input, Error, Result};
use crate::scalar::Scalar;

/// A strict linear order over the item indices `0..m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Preference {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl Preference {
    /// Builds an order from items listed most preferred first.
    pub fn new(order: Vec<usize>, m: usize) -> Result<Self> {
        if order.len() != m {
            return input(format!(
                "preference lists {} items, expected {m}",
                order.len()
            ));
        }
        let mut position = vec![usize::MAX; m];
        for (pos, &o) in order.iter().enumerate() {
            if o >= m {
                return input(format!("item index {o} out of range"));
            }
            if position[o] != usize::MAX {
                return input(format!("item index {o} listed twice"));
            }
            position[o] = pos;
        }
        Ok(Self { order, position })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            order: (0..m).collect(),
            position: (0..m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Items from most to least preferred.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// 1-based rank of `item` over the whole item set.
    pub fn rank(&self, item: usize) -> usize {
        self.position[item] + 1
    }

    /// Strict preference `a ≻ b`.
    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.position[a] < self.position[b]
    }

    pub fn item_at_rank(&self, rank: usize) -> usize {
        self.order[rank - 1]
    }

    pub fn top(&self) -> usize {
        self.order[0]
    }

    /// Most preferred member of `subset`, `None` if it is empty.
    pub fn top_in(&self, subset: &[usize]) -> Option<usize> {
        subset.iter().copied().min_by_key(|&o| self.position[o])
    }

    /// 1-based rank of `item` among the members of `subset`.
    pub fn rank_within(&self, item: usize, subset: &[usize]) -> Result<usize> {
        if !subset.contains(&item) {
            return input(format!("item index {item} is not in the subset"));
        }
        Ok(1 + subset.iter().filter(|&&o| self.prefers(o, item)).count())
    }

    /// Items weakly preferred to `item`, most preferred first.
    pub fn upper_contour(&self, item: usize) -> &[usize] {
        &self.order[..=self.position[item]]
    }

    /// The order obtained by renaming every item `o` to `perm[o]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let order = self.order.iter().map(|&o| perm[o]).collect();
        Self::new(order, self.len()).expect("permutation of a permutation")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agent {
    pub name: String,
    pub prefs: Preference,
}

/// Agents, items and a strict preference profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    items: Vec<String>,
    agents: Vec<Agent>,
}

impl Instance {
    /// Validates names and preference lists given by item name.
    pub fn new<S: AsRef<str>>(items: &[S], agents: &[(S, Vec<S>)]) -> Result<Self> {
        let items: Vec<String> = items.iter().map(|s| s.as_ref().to_string()).collect();
        if items.is_empty() {
            return input("an instance needs at least one item");
        }
        if agents.is_empty() {
            return input("an instance needs at least one agent");
        }
        let mut index = BTreeMap::new();
        for (i, name) in items.iter().enumerate() {
            if index.insert(name.as_str(), i).is_some() {
                return input(format!("duplicate item `{name}`"));
            }
        }
        let mut seen = BTreeMap::new();
        let mut parsed = Vec::with_capacity(agents.len());
        for (name, prefs) in agents {
            let name = name.as_ref().to_string();
            if seen.insert(name.clone(), ()).is_some() {
                return input(format!("duplicate agent `{name}`"));
            }
            let mut order = Vec::with_capacity(prefs.len());
            for p in prefs {
                match index.get(p.as_ref()) {
                    Some(&o) => order.push(o),
                    None => {
                        return Err(Error::Preference {
                            agent: name,
                            reason: format!("unknown item `{}`", p.as_ref()),
                        })
                    }
                }
            }
            let prefs = Preference::new(order, items.len()).map_err(|e| Error::Preference {
                agent: name.clone(),
                reason: match e {
                    Error::Input(msg) => msg,
                    other => other.to_string(),
                },
            })?;
            parsed.push(Agent { name, prefs });
        }
        Ok(Self {
            items,
            agents: parsed,
        })
    }

    /// Builds an instance from index-based orders; agents are named `1..=n`.
    pub fn from_orders<S: AsRef<str>>(items: &[S], orders: &[Vec<usize>]) -> Result<Self> {
        let items: Vec<&str> = items.iter().map(|s| s.as_ref()).collect();
        let named: Vec<(String, Vec<&str>)> = orders
            .iter()
            .enumerate()
            .map(|(j, order)| {
                let prefs = order
                    .iter()
                    .map(|&o| items.get(o).copied().unwrap_or("?"))
                    .collect();
                ((j + 1).to_string(), prefs)
            })
            .collect();
        let agents: Vec<(&str, Vec<&str>)> = named
            .iter()
            .map(|(name, prefs)| (name.as_str(), prefs.clone()))
            .collect();
        Self::new(&items, &agents)
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn m(&self) -> usize {
        self.items.len()
    }

    /// Number of rounds, `⌈m/n⌉`.
    pub fn round_count(&self) -> usize {
        self.m().div_ceil(self.n())
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn item_name(&self, o: usize) -> &str {
        &self.items[o]
    }

    pub fn agent_name(&self, j: usize) -> &str {
        &self.agents[j].name
    }

    pub fn item_index(&self, name: &str) -> Result<usize> {
        self.items
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownItem(name.into()))
    }

    pub fn agent_index(&self, name: &str) -> Result<usize> {
        self.agents
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAgent(name.into()))
    }

    pub fn item_indices<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|s| self.item_index(s.as_ref())).collect()
    }

    pub fn pref(&self, agent: usize) -> &Preference {
        &self.agents[agent].prefs
    }

    pub fn all_items(&self) -> Vec<usize> {
        (0..self.m()).collect()
    }

    /// Rank of `item` within `subset` under agent `agent`'s order.
    pub fn rank(&self, agent: usize, item: usize, subset: &[usize]) -> Result<usize> {
        self.check_agent(agent)?;
        self.check_subset(subset)?;
        if item >= self.m() {
            return input(format!("item index {item} out of range"));
        }
        self.pref(agent).rank_within(item, subset)
    }

    /// Agent `agent`'s most preferred item in `subset`.
    pub fn top(&self, agent: usize, subset: &[usize]) -> Result<usize> {
        self.check_agent(agent)?;
        self.check_subset(subset)?;
        self.pref(agent)
            .top_in(subset)
            .ok_or_else(|| Error::Input("empty subset".into()))
    }

    /// Copy of the instance with agent `agent` reporting `prefs` instead.
    pub fn with_preference(&self, agent: usize, prefs: Preference) -> Result<Self> {
        self.check_agent(agent)?;
        if prefs.len() != self.m() {
            return Err(Error::Dimension {
                expected: self.m(),
                got: prefs.len(),
            });
        }
        let mut out = self.clone();
        out.agents[agent].prefs = prefs;
        Ok(out)
    }

    /// The profile with every item `o` renamed to `perm[o]` inside each
    /// preference order. Item names and agents stay in place.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.m())?;
        let mut out = self.clone();
        for a in &mut out.agents {
            a.prefs = a.prefs.relabeled(perm);
        }
        Ok(out)
    }

    fn check_agent(&self, agent: usize) -> Result<()> {
        if agent >= self.n() {
            return input(format!("agent index {agent} out of range"));
        }
        Ok(())
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.m()];
        for &o in subset {
            if o >= self.m() || seen[o] {
                return input(format!("item index {o} is not a valid subset member"));
            }
            seen[o] = true;
        }
        Ok(())
    }
}

/// `a, b, c, …` for up to 26 items, `o1, o2, …` beyond that.
pub fn default_item_names(m: usize) -> Vec<String> {
    if m <= 26 {
        (0..m)
            .map(|i| char::from(b'a' + i as u8).to_string())
            .collect()
    } else {
        (1..=m).map(|i| format!("o{i}")).collect()
    }
}

pub(crate) fn check_permutation(perm: &[usize], m: usize) -> Result<()> {
    Preference::new(perm.to_vec(), m)
        .map(|_| ())
        .map_err(|_| Error::Input(format!("{perm:?} is not a permutation of the {m} items")))
}

/// An allocation of items to agents; each item has at most one holder.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicAssignment {
    n: usize,
    owner: Vec<Option<usize>>,
}

impl DeterministicAssignment {
    pub fn empty(n: usize, m: usize) -> Self {
        Self {
            n,
            owner: vec![None; m],
        }
    }

    /// From per-item holders.
    pub fn from_owners(n: usize, owner: Vec<Option<usize>>) -> Result<Self> {
        if let Some(j) = owner.iter().flatten().find(|&&j| j >= n) {
            return input(format!("agent index {j} out of range"));
        }
        Ok(Self { n, owner })
    }

    /// From per-agent bundles; rejects an item given to two agents.
    pub fn from_bundles(n: usize, m: usize, bundles: &[Vec<usize>]) -> Result<Self> {
        if bundles.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: bundles.len(),
            });
        }
        let mut a = Self::empty(n, m);
        for (j, bundle) in bundles.iter().enumerate() {
            for &o in bundle {
                if o >= m {
                    return input(format!("item index {o} out of range"));
                }
                if a.owner[o].is_some() {
                    return input(format!("item index {o} allocated twice"));
                }
                a.owner[o] = Some(j);
            }
        }
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self, item: usize) -> Option<usize> {
        self.owner[item]
    }

    pub fn owners(&self) -> &[Option<usize>] {
        &self.owner
    }

    pub fn assign(&mut self, item: usize, agent: usize) {
        debug_assert!(agent < self.n);
        self.owner[item] = Some(agent);
    }

    pub fn holds(&self, agent: usize, item: usize) -> bool {
        self.owner[item] == Some(agent)
    }

    /// Items held by `agent`, in index order.
    pub fn bundle(&self, agent: usize) -> Vec<usize> {
        (0..self.m())
            .filter(|&o| self.owner[o] == Some(agent))
            .collect()
    }

    pub fn bundles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for (o, j) in self.owner.iter().enumerate() {
            if let Some(j) = j {
                out[*j].push(o);
            }
        }
        out
    }

    pub fn allocated_items(&self) -> Vec<usize> {
        (0..self.m()).filter(|&o| self.owner[o].is_some()).collect()
    }

    /// Every item has a holder.
    pub fn is_complete(&self) -> bool {
        self.owner.iter().all(Option::is_some)
    }

    /// Every agent holds at most one item.
    pub fn is_matching(&self) -> bool {
        self.bundles().iter().all(|b| b.len() <= 1)
    }

    /// The single item of `agent` in a matching.
    pub fn item_of(&self, agent: usize) -> Option<usize> {
        self.owner.iter().position(|&j| j == Some(agent))
    }

    /// Entrywise sum, failing if an item would get two holders.
    pub fn merged(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.m() != other.m() {
            return input("assignments have different shapes");
        }
        let mut out = self.clone();
        for (o, j) in other.owner.iter().enumerate() {
            if let Some(j) = j {
                if out.owner[o].is_some() {
                    return input(format!("item index {o} allocated twice"));
                }
                out.owner[o] = Some(*j);
            }
        }
        Ok(out)
    }

    /// Renames every item `o` to `perm[o]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let mut owner = vec![None; self.m()];
        for (o, j) in self.owner.iter().enumerate() {
            owner[perm[o]] = *j;
        }
        Self { n: self.n, owner }
    }

    /// 0/1 allocation vector of `agent`.
    pub fn indicator<S: Scalar>(&self, agent: usize) -> Vec<S> {
        self.owner
            .iter()
            .map(|&j| {
                if j == Some(agent) {
                    S::one()
                } else {
                    S::zero()
                }
            })
            .collect()
    }

    pub fn to_random<S: Scalar>(&self) -> RandomAssignment<S> {
        let mut p = RandomAssignment::zeros(self.n, self.m());
        for (o, j) in self.owner.iter().enumerate() {
            if let Some(j) = j {
                p.set(*j, o, S::one());
            }
        }
        p
    }
}

/// An `n × m` matrix of probabilistic shares.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomAssignment<S> {
    n: usize,
    m: usize,
    data: Vec<S>,
}

impl<S: Scalar> RandomAssignment<S> {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: vec![S::zero(); n * m],
        }
    }

    /// Builds from rows, checking that every entry lies in `[0, 1]`.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::Dimension {
                    expected: m,
                    got: row.len(),
                });
            }
            for v in row {
                if v < S::zero() || v > S::one() {
                    return input(format!("share {v} outside [0, 1]"));
                }
                data.push(v);
            }
        }
        Ok(Self { n, m, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, agent: usize, item: usize) -> &S {
        &self.data[agent * self.m + item]
    }

    pub fn set(&mut self, agent: usize, item: usize, value: S) {
        self.data[agent * self.m + item] = value;
    }

    pub fn add_to(&mut self, agent: usize, item: usize, value: &S) {
        self.data[agent * self.m + item] += value.clone();
    }

    pub fn row(&self, agent: usize) -> &[S] {
        &self.data[agent * self.m..(agent + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.data.chunks(self.m.max(1)).take(self.n)
    }

    pub fn row_sum(&self, agent: usize) -> S {
        sum(self.row(agent).iter())
    }

    pub fn column_sum(&self, item: usize) -> S {
        sum((0..self.n).map(|j| self.get(j, item)))
    }

    /// Every item column sums to one.
    pub fn is_fully_allocating(&self) -> bool {
        (0..self.m).all(|o| self.column_sum(o).approx_eq(&S::one()))
    }

    pub fn is_deterministic(&self) -> bool {
        self.data
            .iter()
            .all(|v| v.is_negligible() || v.approx_eq(&S::one()))
    }

    /// Rounds to the nearest 0/1 assignment; `None` unless deterministic.
    pub fn to_deterministic(&self) -> Option<DeterministicAssignment> {
        if !self.is_deterministic() {
            return None;
        }
        let mut a = DeterministicAssignment::empty(self.n, self.m);
        for o in 0..self.m {
            let holders: Vec<usize> = (0..self.n)
                .filter(|&j| self.get(j, o).approx_eq(&S::one()))
                .collect();
            match holders.as_slice() {
                [] => {}
                [j] => a.assign(o, *j),
                _ => return None,
            }
        }
        Some(a)
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!((self.n, self.m), (other.n, other.m), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b.clone();
        }
    }

    pub fn add_scaled(&mut self, weight: &S, a: &DeterministicAssignment) {
        for (o, j) in a.owners().iter().enumerate() {
            if let Some(j) = j {
                self.add_to(*j, o, weight);
            }
        }
    }

    /// Exact (or tolerance-level) entrywise equality.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.m == other.m
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.approx_eq(b))
    }

    /// Moves the share of item `o` to column `perm[o]`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.n, self.m);
        for j in 0..self.n {
            for o in 0..self.m {
                out.set(j, perm[o], self.get(j, o).clone());
            }
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> RandomAssignment<T> {
        RandomAssignment {
            n: self.n,
            m: self.m,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<S: Scalar> fmt::Display for RandomAssignment<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

pub(crate) fn sum<'a, S: Scalar>(values: impl Iterator<Item = &'a S>) -> S {
    values.fold(S::zero(), |acc, v| acc + v.clone())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LotteryAtom<S> {
    pub prob: S,
    pub assignment: DeterministicAssignment,
}

/// A finite distribution over deterministic assignments.
#[derive(Clone, Debug, PartialEq)]
pub struct Lottery<S> {
    atoms: Vec<LotteryAtom<S>>,
}

impl<S: Scalar> Lottery<S> {
    /// Merges duplicate assignments (keeping first-seen order) and checks that
    /// the probabilities are positive and sum to one.
    pub fn new(atoms: impl IntoIterator<Item = (S, DeterministicAssignment)>) -> Result<Self> {
        let mut merged: Vec<LotteryAtom<S>> = Vec::new();
        let mut index: BTreeMap<DeterministicAssignment, usize> = BTreeMap::new();
        for (prob, assignment) in atoms {
            if !prob.is_positive_share() {
                return input(format!("lottery probability {prob} is not positive"));
            }
            match index.get(&assignment) {
                Some(&i) => merged[i].prob += prob,
                None => {
                    index.insert(assignment.clone(), merged.len());
                    merged.push(LotteryAtom { prob, assignment });
                }
            }
        }
        let total = sum(merged.iter().map(|a| &a.prob));
        if !total.approx_eq(&S::one()) {
            return input(format!("lottery probabilities sum to {total}, not 1"));
        }
        if let Some(first) = merged.first() {
            let shape = (first.assignment.n(), first.assignment.m());
            if merged
                .iter()
                .any(|a| (a.assignment.n(), a.assignment.m()) != shape)
            {
                return input("lottery atoms have different shapes");
            }
        }
        Ok(Self { atoms: merged })
    }

    pub fn certain(a: DeterministicAssignment) -> Self {
        Self {
            atoms: vec![LotteryAtom {
                prob: S::one(),
                assignment: a,
            }],
        }
    }

    pub fn atoms(&self) -> &[LotteryAtom<S>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn prob_of(&self, a: &DeterministicAssignment) -> S {
        self.atoms
            .iter()
            .find(|x| &x.assignment == a)
            .map_or(S::zero(), |x| x.prob.clone())
    }

    /// Probability-weighted mean of the atoms.
    pub fn expected(&self) -> RandomAssignment<S> {
        let (n, m) = self
            .atoms
            .first()
            .map_or((0, 0), |a| (a.assignment.n(), a.assignment.m()));
        let mut p = RandomAssignment::zeros(n, m);
        for atom in &self.atoms {
            p.add_scaled(&atom.prob, &atom.assignment);
        }
        p
    }

    /// Same distribution irrespective of atom order.
    pub fn same_distribution(&self, other: &Self) -> bool {
        self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .all(|a| a.prob.approx_eq(&other.prob_of(&a.assignment)))
    }

    pub fn relabeled(&self, perm: &[usize]) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| LotteryAtom {
                    prob: a.prob.clone(),
                    assignment: a.assignment.relabeled(perm),
                })
                .collect(),
        }
    }
}

/// Per-round share matrices whose entrywise sum is the total assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundDecomposition<S> {
    rounds: Vec<RandomAssignment<S>>,
}

impl<S: Scalar> RoundDecomposition<S> {
    /// Checks shapes and that every agent takes at most one unit per round.
    pub fn new(rounds: Vec<RandomAssignment<S>>) -> Result<Self> {
        let Some(first) = rounds.first() else {
            return input("a round decomposition needs at least one round");
        };
        let (n, m) = (first.n(), first.m());
        for (c, p) in rounds.iter().enumerate() {
            if (p.n(), p.m()) != (n, m) {
                return input(format!("round {} has a different shape", c + 1));
            }
            for j in 0..n {
                if p.row_sum(j).approx_gt(&S::one()) {
                    return Err(Error::Invariant(format!(
                        "agent {j} receives more than one unit in round {}",
                        c + 1
                    )));
                }
            }
        }
        Ok(Self { rounds })
    }

    pub fn rounds(&self) -> &[RandomAssignment<S>] {
        &self.rounds
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    pub fn total(&self) -> RandomAssignment<S> {
        let mut total = RandomAssignment::zeros(self.rounds[0].n(), self.rounds[0].m());
        for p in &self.rounds {
            total.add_assign(p);
        }
        total
    }

    pub fn relabeled(&self, perm: &[usize]) -> Self {
        Self {
            rounds: self.rounds.iter().map(|p| p.relabeled(perm)).collect(),
        }
    }
}

/// Items weakly preferred to `item` under `order`.
pub fn upper_contour(order: &Preference, item: usize) -> Result<Vec<usize>> {
    if item >= order.len() {
        return input(format!("item index {item} out of range"));
    }
    Ok(order.upper_contour(item).to_vec())
}

fn check_dims<S>(order: &Preference, p: &[S], q: &[S]) -> Result<()> {
    for v in [p.len(), q.len()] {
        if v != order.len() {
            return Err(Error::Dimension {
                expected: order.len(),
                got: v,
            });
        }
    }
    Ok(())
}

/// Weak stochastic dominance of `p` over `q`: every upper-contour cumulative
/// share of `p` is at least that of `q`.
pub fn sd_dominates<S: Scalar>(order: &Preference, p: &[S], q: &[S]) -> Result<bool> {
    check_dims(order, p, q)?;
    let (mut cp, mut cq) = (S::zero(), S::zero());
    for &o in order.order() {
        cp += p[o].clone();
        cq += q[o].clone();
        if !cp.approx_ge(&cq) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Strict lexicographic dominance: at the most preferred item where the two
/// vectors differ, `p` holds more.
pub fn lex_dominates<S: Scalar>(order: &Preference, p: &[S], q: &[S]) -> Result<bool> {
    check_dims(order, p, q)?;
    for &o in order.order() {
        if !p[o].approx_eq(&q[o]) {
            return Ok(p[o] > q[o]);
        }
    }
    Ok(false)
}

/// Cumulative shares along `order`.
pub fn cumulative<S: Scalar>(order: &Preference, p: &[S]) -> Vec<S> {
    let mut acc = S::zero();
    order
        .order()
        .iter()
        .map(|&o| {
            acc += p[o].clone();
            acc.clone()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn share() -> impl Strategy<Value = Rational> {
        (0i64..=12, 1i64..=12).prop_map(|(n, d)| q(n.min(d), d))
    }

    fn order_and_vectors(
        len: usize,
    ) -> impl Strategy<Value = (Preference, Vec<Rational>, Vec<Rational>)> {
        (
            Just((0..len).collect::<Vec<_>>()).prop_shuffle(),
            proptest::collection::vec(share(), len),
            proptest::collection::vec(share(), len),
        )
            .prop_map(move |(o, p, q)| (Preference::new(o, len).unwrap(), p, q))
    }

    #[test]
    fn preference_accessors() {
        let p = Preference::new(vec![2, 0, 1], 3).unwrap();
        assert_eq!(p.rank(2), 1);
        assert_eq!(p.item_at_rank(3), 1);
        assert!(p.prefers(0, 1));
        assert_eq!(p.top_in(&[1, 0]), Some(0));
        assert_eq!(p.rank_within(1, &[1, 0]).unwrap(), 2);
        assert!(p.rank_within(2, &[1, 0]).is_err());
        assert_eq!(p.upper_contour(0), &[2, 0]);
        assert!(Preference::new(vec![0, 0, 1], 3).is_err());
        assert!(Preference::new(vec![0, 1], 3).is_err());
    }

    #[test]
    fn instance_validation() {
        assert!(
            Instance::new(&["a", "b"], &[("1", vec!["a", "b"]), ("1", vec!["b", "a"])]).is_err()
        );
        assert!(Instance::new(&["a", "a"], &[("1", vec!["a", "a"])]).is_err());
        assert!(Instance::new::<&str>(&[], &[("1", vec![])]).is_err());
        let inst = Instance::new(&["a", "b", "c"], &[("x", vec!["c", "a", "b"])]).unwrap();
        assert_eq!(inst.round_count(), 3);
        assert_eq!(inst.top(0, &[0, 1]).unwrap(), 0);
        let swapped = inst.relabeled(&[1, 0, 2]).unwrap();
        assert_eq!(swapped.pref(0).order(), &[2, 1, 0]);
    }

    #[test]
    fn dominance_examples() {
        let order = Preference::new(vec![3, 0, 1, 2], 4).unwrap();
        let truthful = vec![q(0, 1), q(1, 2), q(1, 2), q(1, 1)];
        let lie = vec![q(1, 2), q(1, 2), q(0, 1), q(1, 1)];
        assert!(sd_dominates(&order, &lie, &truthful).unwrap());
        assert!(!sd_dominates(&order, &truthful, &lie).unwrap());
        assert!(lex_dominates(&order, &lie, &truthful).unwrap());
        assert!(sd_dominates(&order, &lie, &truthful[..3]).is_err());
        assert_eq!(upper_contour(&order, 1).unwrap(), vec![3, 0, 1]);
    }

    #[test]
    fn lottery_merges_and_validates() {
        let a = DeterministicAssignment::from_bundles(2, 2, &[vec![0], vec![1]]).unwrap();
        let b = DeterministicAssignment::from_bundles(2, 2, &[vec![1], vec![0]]).unwrap();
        let l = Lottery::new([(q(1, 4), a.clone()), (q(1, 2), b), (q(1, 4), a.clone())]).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l.prob_of(&a), q(1, 2));
        assert_eq!(l.expected().row(0), &[q(1, 2), q(1, 2)]);
        assert!(Lottery::new([(q(1, 2), a.clone())]).is_err());
        assert!(Lottery::new([(q(0, 1), a.clone()), (q(1, 1), a)]).is_err());
    }

    #[test]
    fn round_decomposition_rejects_overfull_rows() {
        let full = RandomAssignment::from_rows(vec![vec![q(1, 1), q(1, 1)]]).unwrap();
        assert!(RoundDecomposition::new(vec![full]).is_err());
    }

    proptest! {
        #[test]
        fn sd_reflexive_lex_irreflexive((order, p, _) in (1usize..7).prop_flat_map(order_and_vectors)) {
            prop_assert!(sd_dominates(&order, &p, &p).unwrap());
            prop_assert!(!lex_dominates(&order, &p, &p).unwrap());
        }

        #[test]
        fn sd_antisymmetric((order, p, q) in (1usize..7).prop_flat_map(order_and_vectors)) {
            if sd_dominates(&order, &p, &q).unwrap() && sd_dominates(&order, &q, &p).unwrap() {
                prop_assert_eq!(p, q);
            }
        }

        #[test]
        fn strict_sd_implies_lex((order, p, q) in (1usize..7).prop_flat_map(order_and_vectors)) {
            if p != q && sd_dominates(&order, &p, &q).unwrap() {
                prop_assert!(lex_dominates(&order, &p, &q).unwrap());
                prop_assert!(!lex_dominates(&order, &q, &p).unwrap());
            }
        }

        #[test]
        fn lex_is_total_on_distinct((order, p, q) in (1usize..7).prop_flat_map(order_and_vectors)) {
            let forward = lex_dominates(&order, &p, &q).unwrap();
            let backward = lex_dominates(&order, &q, &p).unwrap();
            prop_assert_eq!(forward || backward, p != q);
            prop_assert!(!(forward && backward));
        }
    }
}
