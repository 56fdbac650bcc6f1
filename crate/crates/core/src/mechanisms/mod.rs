//! The randomized assignment mechanisms: the eager Boston matching step and
//! its multi-round generalization, the round-based probabilistic Boston
//! mechanism, and block serial dictatorship with quotas.

mod ebm;
mod gebm;
mod gpbm;
mod rsdq;

pub use ebm::{
    applicant_sets, ebm, PriorityTieBreaker, ScriptedTieBreaker, SeededTieBreaker, TieBreaker,
};
pub use gebm::{
    gebm_branches, gebm_expected, gebm_lottery, gebm_sample, gebm_with, GebmBranch, GebmOutcome,
    DEFAULT_BRANCH_CAP,
};
pub use gpbm::{gpbm, ConsumptionEvent, GpbmOutcome};
pub(crate) use rsdq::permutations;
pub use rsdq::{default_quota, rsdq, rsdq_lottery, rsdq_sample};
