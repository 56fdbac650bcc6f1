//! Brute-force ground truth and adversarial audits.
//!
//! Nothing here reuses the graph-based checkers: Pareto efficiency and
//! first-choice maximality are decided by enumerating every assignment, and
//! manipulation is searched by re-running a mechanism on every misreport.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanisms::{gebm_expected, gebm_lottery, gpbm, permutations, DEFAULT_BRANCH_CAP};
use crate::model::{
    cumulative, default_item_names, lex_dominates, sd_dominates, DeterministicAssignment, Instance,
    Preference, RandomAssignment,
};
use crate::properties::{check_sd_ef, check_sde_acyclic, Property, PropertyReport, Witness};
use crate::scalar::Scalar;
use crate::Rational;

type Checker<S> = fn(&Instance, &RandomAssignment<S>) -> Result<PropertyReport>;

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;
pub const DEFAULT_MISREPORT_ITEMS: usize = 6;

/// Size limits for exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    /// Maximum number of assignments or profiles enumerated.
    pub enumeration_cap: u64,
    /// Maximum number of tie-break branches in exact GEBM runs.
    pub branch_cap: u64,
    /// Largest `m` for which all `m!` misreports are tried.
    pub max_misreport_items: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            branch_cap: DEFAULT_BRANCH_CAP,
            max_misreport_items: DEFAULT_MISREPORT_ITEMS,
        }
    }
}

/// Every map from items to agents, in odometer order (item 0 varies slowest).
pub struct AssignmentIter {
    n: usize,
    digits: Option<Vec<usize>>,
    balanced_only: bool,
}

impl Iterator for AssignmentIter {
    type Item = DeterministicAssignment;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let digits = self.digits.as_mut()?;
            let current = digits.clone();
            // advance
            let mut i = digits.len();
            loop {
                if i == 0 {
                    self.digits = None;
                    break;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < self.n {
                    break;
                }
                digits[i] = 0;
            }
            let owners = current.iter().map(|&j| Some(j)).collect();
            let a = DeterministicAssignment::from_owners(self.n, owners).expect("digits below n");
            if !self.balanced_only || is_balanced(&a) {
                return Some(a);
            }
        }
    }
}

fn is_balanced(a: &DeterministicAssignment) -> bool {
    let (lo, hi) = (a.m() / a.n(), a.m().div_ceil(a.n()));
    a.bundles().iter().all(|b| (lo..=hi).contains(&b.len()))
}

/// All `n^m` complete assignments; with `balanced_only`, only those whose
/// bundles have `⌊m/n⌋` or `⌈m/n⌉` items.
pub fn enumerate_assignments(
    inst: &Instance,
    balanced_only: bool,
    cap: u64,
) -> Result<AssignmentIter> {
    let total = (inst.n() as u64).checked_pow(inst.m() as u32);
    if total.is_none_or(|t| t > cap) {
        return Err(Error::EnumerationCap {
            what: format!("{}^{} assignments", inst.n(), inst.m()),
            cap,
        });
    }
    Ok(AssignmentIter {
        n: inst.n(),
        digits: Some(vec![0; inst.m()]),
        balanced_only,
    })
}

/// `a` is Pareto efficient iff no complete `a'` lexicographically improves a
/// nonempty set of agents while leaving every other bundle unchanged.
pub fn pe_bruteforce(inst: &Instance, a: &DeterministicAssignment, cap: u64) -> Result<bool> {
    let current: Vec<Vec<Rational>> = (0..inst.n()).map(|j| indicator(a, j)).collect();
    for other in enumerate_assignments(inst, false, cap)? {
        let mut improved = false;
        let mut admissible = true;
        for j in 0..inst.n() {
            let theirs = indicator(&other, j);
            if theirs == current[j] {
                continue;
            }
            if lex_dominates(inst.pref(j), &theirs, &current[j])? {
                improved = true;
            } else {
                admissible = false;
                break;
            }
        }
        if admissible && improved {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Maximum number of agents holding their first choice over every assignment.
pub fn fcm_max_bruteforce(inst: &Instance, cap: u64) -> Result<usize> {
    Ok(enumerate_assignments(inst, false, cap)?
        .map(|a| {
            (0..inst.n())
                .filter(|&j| a.holds(j, inst.pref(j).top()))
                .count()
        })
        .max()
        .unwrap_or(0))
}

fn indicator(a: &DeterministicAssignment, j: usize) -> Vec<Rational> {
    a.indicator(j)
}

/// Mechanisms the audits can evaluate exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditedMechanism {
    Gebm,
    Gpbm,
}

impl AuditedMechanism {
    pub fn name(self) -> &'static str {
        match self {
            AuditedMechanism::Gebm => "gebm",
            AuditedMechanism::Gpbm => "gpbm",
        }
    }

    /// Exact expected assignment.
    pub fn expected<S: Scalar>(
        self,
        inst: &Instance,
        branch_cap: u64,
    ) -> Result<RandomAssignment<S>> {
        match self {
            AuditedMechanism::Gebm => gebm_expected(inst, branch_cap),
            AuditedMechanism::Gpbm => Ok(gpbm(inst).total),
        }
    }
}

impl std::str::FromStr for AuditedMechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gebm" => Ok(AuditedMechanism::Gebm),
            "gpbm" => Ok(AuditedMechanism::Gpbm),
            other => Err(Error::Input(format!("cannot audit mechanism `{other}`"))),
        }
    }
}

/// A profitable unilateral misreport.
#[derive(Clone, Debug, PartialEq)]
pub struct SpWitness<S> {
    pub mechanism: AuditedMechanism,
    pub profile: Instance,
    pub agent: usize,
    pub misreport: Preference,
    pub truthful: Vec<S>,
    pub manipulated: Vec<S>,
    /// Cumulative shares along the agent's true order.
    pub truthful_cumulative: Vec<S>,
    pub manipulated_cumulative: Vec<S>,
}

impl<S: Scalar> SpWitness<S> {
    pub fn manipulated_profile(&self) -> Instance {
        self.profile
            .with_preference(self.agent, self.misreport.clone())
            .expect("misreport has the right length")
    }

    /// Recomputes both rows and re-verifies the dominance.
    pub fn replay(&self, branch_cap: u64) -> Result<bool> {
        let truthful = self.mechanism.expected::<S>(&self.profile, branch_cap)?;
        let manipulated = self
            .mechanism
            .expected::<S>(&self.manipulated_profile(), branch_cap)?;
        let same_rows = rows_equal(truthful.row(self.agent), &self.truthful)
            && rows_equal(manipulated.row(self.agent), &self.manipulated);
        let order = self.profile.pref(self.agent);
        Ok(same_rows
            && !rows_equal(&self.truthful, &self.manipulated)
            && sd_dominates(order, &self.manipulated, &self.truthful)?)
    }
}

fn rows_equal<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

/// Checks one misreport of one agent.
pub fn check_misreport<S: Scalar>(
    mechanism: AuditedMechanism,
    inst: &Instance,
    agent: usize,
    misreport: &Preference,
    branch_cap: u64,
) -> Result<Option<SpWitness<S>>> {
    let truthful = mechanism.expected::<S>(inst, branch_cap)?;
    misreport_against(
        mechanism,
        inst,
        agent,
        misreport,
        truthful.row(agent),
        branch_cap,
    )
}

fn misreport_against<S: Scalar>(
    mechanism: AuditedMechanism,
    inst: &Instance,
    agent: usize,
    misreport: &Preference,
    truthful: &[S],
    branch_cap: u64,
) -> Result<Option<SpWitness<S>>> {
    let lie = inst.with_preference(agent, misreport.clone())?;
    let manipulated = mechanism.expected::<S>(&lie, branch_cap)?;
    let row = manipulated.row(agent);
    let order = inst.pref(agent);
    if rows_equal(row, truthful) || !sd_dominates(order, row, truthful)? {
        return Ok(None);
    }
    Ok(Some(SpWitness {
        mechanism,
        profile: inst.clone(),
        agent,
        misreport: misreport.clone(),
        truthful: truthful.to_vec(),
        manipulated: row.to_vec(),
        truthful_cumulative: cumulative(order, truthful),
        manipulated_cumulative: cumulative(order, row),
    }))
}

/// Searches every agent's `m!` reports (agents ascending, orders
/// lexicographic by item index) and returns the first profitable one.
pub fn sd_wsp_audit<S: Scalar>(
    mechanism: AuditedMechanism,
    inst: &Instance,
    limits: &OracleLimits,
) -> Result<Option<SpWitness<S>>> {
    if inst.m() > limits.max_misreport_items {
        return Err(Error::EnumerationCap {
            what: format!("{}! misreports per agent", inst.m()),
            cap: limits.max_misreport_items as u64,
        });
    }
    let truthful = mechanism.expected::<S>(inst, limits.branch_cap)?;
    let orders = permutations(inst.m());
    for agent in 0..inst.n() {
        for order in &orders {
            if order.as_slice() == inst.pref(agent).order() {
                continue;
            }
            let lie = Preference::new(order.clone(), inst.m())?;
            if let Some(w) = misreport_against(
                mechanism,
                inst,
                agent,
                &lie,
                truthful.row(agent),
                limits.branch_cap,
            )? {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// Compares `f(π(R))` with `π(f(R))` exactly: the whole lottery for GEBM,
/// every round matrix for GPBM.
pub fn neutrality_audit<S: Scalar>(
    mechanism: AuditedMechanism,
    inst: &Instance,
    permutation: &[usize],
    branch_cap: u64,
) -> Result<PropertyReport> {
    let relabeled = inst.relabeled(permutation)?;
    let mismatch = match mechanism {
        AuditedMechanism::Gebm => {
            let lhs = gebm_lottery::<S>(&relabeled, branch_cap)?;
            let rhs = gebm_lottery::<S>(inst, branch_cap)?.relabeled(permutation);
            (!lhs.same_distribution(&rhs)).then(|| "lotteries differ".to_string())
        }
        AuditedMechanism::Gpbm => {
            let lhs = gpbm::<S>(&relabeled).rounds;
            let rhs = gpbm::<S>(inst).rounds.relabeled(permutation);
            if lhs.round_count() != rhs.round_count() {
                Some("round counts differ".to_string())
            } else {
                lhs.rounds()
                    .iter()
                    .zip(rhs.rounds())
                    .position(|(a, b)| !a.approx_eq(b))
                    .map(|c| format!("round {} matrices differ", c + 1))
            }
        }
    };
    Ok(match mismatch {
        None => PropertyReport::pass(Property::Neutrality),
        Some(detail) => PropertyReport::fail(
            Property::Neutrality,
            Witness::Relabeling {
                permutation: permutation
                    .iter()
                    .map(|&o| inst.item_name(o).to_string())
                    .collect(),
                detail,
            },
        ),
    })
}

/// Which failure [`remark1_search`] looks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchTarget {
    SdE,
    SdEf,
    Either,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Remark1Witness<S> {
    pub profile: Instance,
    pub expected: RandomAssignment<S>,
    pub report: PropertyReport,
}

/// Enumerates every profile with `1..=max_agents` agents and `1..=max_items`
/// items (sizes ascending, agents outer; profiles lexicographic) and returns
/// the first whose exact GEBM expectation fails the target property.
pub fn remark1_search<S: Scalar>(
    max_agents: usize,
    max_items: usize,
    target: SearchTarget,
    limits: &OracleLimits,
) -> Result<Option<Remark1Witness<S>>> {
    for n in 1..=max_agents {
        for m in 1..=max_items {
            let orders = permutations(m);
            let count = (orders.len() as u64).checked_pow(n as u32);
            if count.is_none_or(|c| c > limits.enumeration_cap) {
                return Err(Error::EnumerationCap {
                    what: format!("({m}!)^{n} profiles"),
                    cap: limits.enumeration_cap,
                });
            }
            let items = default_item_names(m);
            let mut digits = vec![0usize; n];
            loop {
                let profile: Vec<Vec<usize>> = digits.iter().map(|&d| orders[d].clone()).collect();
                let inst = Instance::from_orders(&items, &profile)?;
                let p = gebm_expected::<S>(&inst, limits.branch_cap)?;
                let checks: &[Checker<S>] = match target {
                    SearchTarget::SdE => &[check_sde_acyclic],
                    SearchTarget::SdEf => &[check_sd_ef],
                    SearchTarget::Either => &[check_sde_acyclic, check_sd_ef],
                };
                for check in checks {
                    let report = check(&inst, &p)?;
                    if !report.verdict {
                        return Ok(Some(Remark1Witness {
                            profile: inst,
                            expected: p,
                            report,
                        }));
                    }
                }
                // odometer over profiles, last agent fastest
                let mut i = n;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] < orders.len() {
                        break;
                    }
                    digits[i] = 0;
                }
                if digits.iter().all(|&d| d == 0) {
                    break;
                }
            }
        }
    }
    Ok(None)
}
