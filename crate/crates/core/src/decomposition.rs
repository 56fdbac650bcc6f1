//! Realizing a round-structured fractional assignment as a lottery.
//!
//! Each agent `j` is split into one subagent per round; subagent `(j, c)`
//! receives row `j` of the round-`c` matrix. Rows of the last round may fall
//! short of one unit, and the gap goes to a `nil` column. The nil column is
//! then split into unit-capacity virtual columns so that the matrix becomes
//! square and doubly stochastic, and a Birkhoff–von Neumann decomposition
//! turns it into a convex combination of subagent matchings.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::mechanisms::{gpbm, GpbmOutcome};
use crate::model::{sum, DeterministicAssignment, Instance, Lottery, RandomAssignment};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

/// `(n·C) × (m + 1)` share matrix over subagents; the last column is `nil`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubagentMatrix<S> {
    n: usize,
    rounds: usize,
    m: usize,
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> SubagentMatrix<S> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn round_count(&self) -> usize {
        self.rounds
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn subagent_count(&self) -> usize {
        self.n * self.rounds
    }

    /// Row index of subagent `(agent, round)`, `round` 0-based.
    pub fn subagent(&self, agent: usize, round: usize) -> usize {
        agent * self.rounds + round
    }

    /// `(agent, round)` of a row index.
    pub fn owner_of(&self, row: usize) -> (usize, usize) {
        (row / self.rounds, row % self.rounds)
    }

    /// Real-item shares followed by the nil share.
    pub fn row(&self, row: usize) -> &[S] {
        &self.rows[row]
    }

    pub fn get(&self, row: usize, item: usize) -> &S {
        &self.rows[row][item]
    }

    pub fn nil(&self, row: usize) -> &S {
        &self.rows[row][self.m]
    }

    pub fn nil_total(&self) -> S {
        sum(self.rows.iter().map(|r| &r[self.m]))
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        (self.n, self.rounds, self.m) == (other.n, other.rounds, other.m)
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.approx_eq(y)))
    }
}

/// Builds the subagent matrix from per-round share matrices.
pub fn expand_subagents<S: Scalar>(per_round: &[RandomAssignment<S>]) -> Result<SubagentMatrix<S>> {
    let Some(first) = per_round.first() else {
        return Err(Error::Input("no rounds to expand".into()));
    };
    let (n, m, rounds) = (first.n(), first.m(), per_round.len());
    if per_round.iter().any(|p| (p.n(), p.m()) != (n, m)) {
        return Err(Error::Input("round matrices have different shapes".into()));
    }
    if n == 0 || rounds != m.div_ceil(n) {
        return Err(Error::Invariant(format!(
            "{rounds} rounds given but {m} items over {n} agents need {}",
            m.div_ceil(n.max(1))
        )));
    }
    let mut rows = Vec::with_capacity(n * rounds);
    for j in 0..n {
        for (c, p) in per_round.iter().enumerate() {
            let s = p.row_sum(j);
            if s.approx_gt(&S::one()) {
                return Err(Error::Invariant(format!(
                    "agent {j} holds {s} > 1 in round {}",
                    c + 1
                )));
            }
            let last = c + 1 == rounds;
            if !last && !s.approx_eq(&S::one()) {
                return Err(Error::Invariant(format!(
                    "agent {j} holds {s} < 1 in round {}; only the last round may leave slack",
                    c + 1
                )));
            }
            let mut row = p.row(j).to_vec();
            row.push(if last { S::one() - s } else { S::zero() });
            rows.push(row);
        }
    }
    for o in 0..m {
        let col = sum(rows.iter().map(|r| &r[o]));
        if !col.approx_eq(&S::one()) {
            return Err(Error::Invariant(format!(
                "item index {o} is allocated {col} times"
            )));
        }
    }
    Ok(SubagentMatrix { n, rounds, m, rows })
}

/// One matching of the decomposition: for every subagent row, its item
/// (`None` when matched to nil).
#[derive(Clone, Debug, PartialEq)]
pub struct SubagentAtom<S> {
    pub coef: S,
    pub matching: Vec<Option<usize>>,
}

/// A deterministic assignment together with the round matchings it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub assignment: DeterministicAssignment,
    /// `A^c`: the items won by round-`c` subagents.
    pub rounds: Vec<DeterministicAssignment>,
    /// `M^c`: items not won in any earlier round.
    pub remaining: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecomposedLottery<S> {
    n: usize,
    rounds: usize,
    m: usize,
    atoms: Vec<SubagentAtom<S>>,
    projected: Lottery<S>,
}

impl<S: Scalar> DecomposedLottery<S> {
    pub fn atoms(&self) -> &[SubagentAtom<S>] {
        &self.atoms
    }

    /// Agent-level lottery obtained by merging each agent's subagents.
    pub fn projected(&self) -> &Lottery<S> {
        &self.projected
    }

    pub fn round_count(&self) -> usize {
        self.rounds
    }

    pub fn realize(&self, atom: &SubagentAtom<S>) -> Realization {
        let (n, m, rounds) = (self.n, self.m, self.rounds);
        let mut per_round = vec![DeterministicAssignment::empty(n, m); rounds];
        for (row, item) in atom.matching.iter().enumerate() {
            if let Some(o) = item {
                per_round[row % rounds].assign(*o, row / rounds);
            }
        }
        let mut assignment = DeterministicAssignment::empty(n, m);
        let mut remaining = Vec::with_capacity(rounds);
        for a in &per_round {
            remaining.push((0..m).filter(|&o| assignment.owner(o).is_none()).collect());
            assignment = assignment.merged(a).expect("each item is matched once");
        }
        Realization {
            assignment,
            rounds: per_round,
            remaining,
        }
    }

    /// Every atom with its coefficient and round structure.
    pub fn realizations(&self) -> Vec<(S, Realization)> {
        self.atoms
            .iter()
            .map(|a| (a.coef.clone(), self.realize(a)))
            .collect()
    }

    /// Coefficient-weighted sum of the matchings, as a subagent matrix.
    pub fn reconstruct(&self) -> SubagentMatrix<S> {
        let rows_n = self.n * self.rounds;
        let mut rows = vec![vec![S::zero(); self.m + 1]; rows_n];
        for atom in &self.atoms {
            for (row, item) in atom.matching.iter().enumerate() {
                let col = item.unwrap_or(self.m);
                rows[row][col] += atom.coef.clone();
            }
        }
        SubagentMatrix {
            n: self.n,
            rounds: self.rounds,
            m: self.m,
            rows,
        }
    }
}

/// Perfect matching on the positive entries of a square matrix by augmenting
/// paths, rows and columns scanned in index order. `match_of_row[r] = c`.
fn perfect_matching<S: Scalar>(mat: &[Vec<S>]) -> Option<Vec<usize>> {
    let size = mat.len();
    let mut row_of_col: Vec<Option<usize>> = vec![None; size];
    fn augment<S: Scalar>(
        r: usize,
        mat: &[Vec<S>],
        seen: &mut [bool],
        row_of_col: &mut [Option<usize>],
    ) -> bool {
        for c in 0..mat.len() {
            if seen[c] || !mat[r][c].is_positive_share() {
                continue;
            }
            seen[c] = true;
            if row_of_col[c].is_none_or(|r2| augment(r2, mat, seen, row_of_col)) {
                row_of_col[c] = Some(r);
                return true;
            }
        }
        false
    }
    for r in 0..size {
        let mut seen = vec![false; size];
        if !augment(r, mat, &mut seen, &mut row_of_col) {
            return None;
        }
    }
    let mut match_of_row = vec![0; size];
    for (c, r) in row_of_col.iter().enumerate() {
        match_of_row[r.expect("perfect")] = c;
    }
    Some(match_of_row)
}

/// Birkhoff–von Neumann decomposition of a subagent matrix.
pub fn birkhoff_decompose<S: Scalar>(matrix: &SubagentMatrix<S>) -> Result<DecomposedLottery<S>> {
    let size = matrix.subagent_count();
    let m = matrix.m;
    if size < m {
        return Err(Error::Invariant(format!(
            "{size} subagents cannot cover {m} items"
        )));
    }
    let mut mat: Vec<Vec<S>> = Vec::with_capacity(size);
    let (mut col, mut capacity) = (m, S::one());
    for row in &matrix.rows {
        let mut square = row[..m].to_vec();
        square.resize(size, S::zero());
        let mut left = row[m].clone();
        while left.is_positive_share() {
            if col >= size {
                return Err(Error::Invariant(
                    "nil share exceeds the virtual columns".into(),
                ));
            }
            let take = if left <= capacity {
                left.clone()
            } else {
                capacity.clone()
            };
            square[col] += take.clone();
            left -= take.clone();
            capacity -= take;
            if capacity.is_negligible() {
                col += 1;
                capacity = S::one();
            }
        }
        mat.push(square);
    }

    let mut atoms: Vec<SubagentAtom<S>> = Vec::new();
    while mat.iter().any(|r| r.iter().any(Scalar::is_positive_share)) {
        let matching = perfect_matching(&mat).ok_or_else(|| {
            Error::Invariant("no perfect matching on the positive entries".into())
        })?;
        let coef = matching
            .iter()
            .enumerate()
            .map(|(r, &c)| mat[r][c].clone())
            .fold(None::<S>, |acc, v| {
                Some(match acc {
                    Some(a) if a <= v => a,
                    _ => v,
                })
            })
            .expect("matrix is nonempty");
        for (r, &c) in matching.iter().enumerate() {
            mat[r][c] -= coef.clone();
            if mat[r][c].is_negligible() {
                mat[r][c] = S::zero();
            }
        }
        let items: Vec<Option<usize>> = matching
            .iter()
            .map(|&c| if c < m { Some(c) } else { None })
            .collect();
        match atoms.iter_mut().find(|a| a.matching == items) {
            Some(existing) => existing.coef += coef,
            None => atoms.push(SubagentAtom {
                coef,
                matching: items,
            }),
        }
    }

    let mut dec = DecomposedLottery {
        n: matrix.n,
        rounds: matrix.rounds,
        m,
        atoms,
        projected: Lottery::certain(DeterministicAssignment::empty(matrix.n, m)),
    };
    let projected: Vec<(S, DeterministicAssignment)> = dec
        .atoms
        .iter()
        .map(|a| (a.coef.clone(), dec.realize(a).assignment))
        .collect();
    dec.projected = Lottery::new(projected)?;
    Ok(dec)
}

/// Draws one atom with probability equal to its coefficient.
pub fn sample_realization<S: Scalar>(dec: &DecomposedLottery<S>, seed: u64) -> Realization {
    let u = S::from_unit_draw(rng_from_seed(seed).next_u64());
    let mut acc = S::zero();
    for atom in &dec.atoms {
        acc += atom.coef.clone();
        if u < acc {
            return dec.realize(atom);
        }
    }
    dec.realize(
        dec.atoms
            .last()
            .expect("a decomposition has at least one atom"),
    )
}

/// GPBM together with its lottery realization.
#[derive(Clone, Debug, PartialEq)]
pub struct GpbmLottery<S> {
    pub outcome: GpbmOutcome<S>,
    pub matrix: SubagentMatrix<S>,
    pub decomposed: DecomposedLottery<S>,
}

impl<S: Scalar> GpbmLottery<S> {
    pub fn lottery(&self) -> &Lottery<S> {
        self.decomposed.projected()
    }
}

pub fn gpbm_lottery<S: Scalar>(inst: &Instance) -> Result<GpbmLottery<S>> {
    let outcome = gpbm::<S>(inst);
    let matrix = expand_subagents(outcome.rounds.rounds())?;
    let decomposed = birkhoff_decompose(&matrix)?;
    Ok(GpbmLottery {
        outcome,
        matrix,
        decomposed,
    })
}

/// Upper bound on the number of atoms, `(n·C)² − 2n·C + 2`.
pub fn atom_bound(subagents: usize) -> usize {
    (subagents * subagents + 2).saturating_sub(2 * subagents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn two_agent_profile() -> Instance {
        Instance::from_orders(&["a", "b", "c", "d"], &[vec![0, 1, 2, 3], vec![0, 2, 1, 3]]).unwrap()
    }

    #[test]
    fn example_rounds_expand_into_four_rows() {
        let out = gpbm::<Rational>(&two_agent_profile());
        let q = expand_subagents(out.rounds.rounds()).unwrap();
        let as_str =
            |row: usize| -> Vec<String> { q.row(row).iter().map(|v| v.to_string()).collect() };
        assert_eq!(as_str(q.subagent(0, 0)), ["1/2", "1/2", "0", "0", "0"]);
        assert_eq!(as_str(q.subagent(0, 1)), ["0", "1/2", "0", "1/2", "0"]);
        assert_eq!(as_str(q.subagent(1, 0)), ["1/2", "0", "1/2", "0", "0"]);
        assert_eq!(as_str(q.subagent(1, 1)), ["0", "0", "1/2", "1/2", "0"]);
        assert_eq!(q.nil_total(), r("0"));
    }

    #[test]
    fn slack_goes_to_nil_in_the_last_round() {
        let inst =
            Instance::from_orders(&["x", "y", "z"], &[vec![0, 1, 2], vec![1, 0, 2]]).unwrap();
        let q = expand_subagents(gpbm::<Rational>(&inst).rounds.rounds()).unwrap();
        assert_eq!(q.nil_total(), r("1"));
        assert_eq!(*q.nil(q.subagent(0, 0)), r("0"));
    }

    #[test]
    fn single_agent_rows_are_unit_vectors() {
        let inst = Instance::from_orders(&["x", "y"], &[vec![1, 0]]).unwrap();
        let q = expand_subagents(gpbm::<Rational>(&inst).rounds.rounds()).unwrap();
        assert_eq!(q.subagent_count(), 2);
        assert_eq!(*q.get(0, 1), r("1"));
        assert_eq!(*q.get(1, 0), r("1"));
    }

    #[test]
    fn overfull_rows_are_rejected() {
        let p = RandomAssignment::from_rows(vec![vec![r("1"), r("1/2")]]).unwrap();
        let q = RandomAssignment::from_rows(vec![vec![r("0"), r("1/2")]]).unwrap();
        assert!(matches!(
            expand_subagents(&[p, q]),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn example_decomposes_into_two_halves() {
        let gl = gpbm_lottery::<Rational>(&two_agent_profile()).unwrap();
        let atoms = gl.decomposed.atoms();
        assert_eq!(atoms.len(), 2);
        assert!(atoms.iter().all(|a| a.coef == r("1/2")));
        // rows: 1^1, 1^2, 2^1, 2^2
        let first = vec![Some(0), Some(1), Some(2), Some(3)];
        let second = vec![Some(1), Some(3), Some(0), Some(2)];
        assert!(atoms.iter().any(|a| a.matching == first));
        assert!(atoms.iter().any(|a| a.matching == second));
        assert!(gl.decomposed.reconstruct().approx_eq(&gl.matrix));
        let ab_cd = DeterministicAssignment::from_bundles(2, 4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let bd_ac = DeterministicAssignment::from_bundles(2, 4, &[vec![1, 3], vec![0, 2]]).unwrap();
        assert_eq!(gl.lottery().prob_of(&ab_cd), r("1/2"));
        assert_eq!(gl.lottery().prob_of(&bd_ac), r("1/2"));
    }

    #[test]
    fn permutation_matrix_is_a_single_atom() {
        let inst =
            Instance::from_orders(&["a", "b", "c", "d"], &[vec![0, 1, 2, 3], vec![3, 0, 1, 2]])
                .unwrap();
        let gl = gpbm_lottery::<Rational>(&inst).unwrap();
        assert_eq!(gl.decomposed.atoms().len(), 1);
        assert_eq!(gl.decomposed.atoms()[0].coef, r("1"));
        let a = &gl.lottery().atoms()[0].assignment;
        assert_eq!(a.bundle(0), vec![0, 1]);
        assert_eq!(a.bundle(1), vec![2, 3]);
    }

    #[test]
    fn realization_rounds_and_remaining_sets() {
        let gl = gpbm_lottery::<Rational>(&two_agent_profile()).unwrap();
        let atom = gl
            .decomposed
            .atoms()
            .iter()
            .find(|a| a.matching == vec![Some(0), Some(1), Some(2), Some(3)])
            .unwrap();
        let real = gl.decomposed.realize(atom);
        assert_eq!(real.rounds[0].item_of(0), Some(0));
        assert_eq!(real.rounds[0].item_of(1), Some(2));
        assert_eq!(real.remaining, vec![vec![0, 1, 2, 3], vec![1, 3]]);
        assert_eq!(real.assignment.bundle(0), vec![0, 1]);
    }

    #[test]
    fn sampling_a_single_atom_is_certain() {
        let inst = Instance::from_orders(&["x"], &[vec![0]]).unwrap();
        let gl = gpbm_lottery::<Rational>(&inst).unwrap();
        for seed in 0..10 {
            assert_eq!(
                sample_realization(&gl.decomposed, seed)
                    .assignment
                    .bundle(0),
                vec![0]
            );
        }
    }

    #[test]
    fn atom_bound_formula() {
        assert_eq!(atom_bound(4), 10);
        assert_eq!(atom_bound(1), 1);
    }
}
