//! Randomized Boston-style mechanisms for assigning indivisible items under
//! strict ordinal preferences, with exact arithmetic throughout.
//!
//! * [`mechanisms`]: the generalized eager Boston mechanism (sampled or as an
//!   exact lottery), the generalized probabilistic Boston mechanism, and block
//!   serial dictatorship with quotas.
//! * [`decomposition`]: subagent expansion plus a Birkhoff–von Neumann
//!   decomposition that realizes a fractional outcome as a lottery.
//! * [`properties`]: decision procedures for efficiency and fairness notions.
//! * [`oracle`]: brute-force ground truth and manipulation/neutrality audits.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below fix the
//! exact rational type used by the property checks and the CLI.

#![allow(clippy::needless_range_loop)]

pub mod decomposition;
pub mod error;
pub mod io;
pub mod mechanisms;
pub mod model;
pub mod oracle;
pub mod properties;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{
    cumulative, default_item_names, lex_dominates, sd_dominates, upper_contour, Agent,
    DeterministicAssignment, Instance, Lottery, LotteryAtom, Preference, RandomAssignment,
    RoundDecomposition,
};
pub use scalar::Scalar;

/// Arbitrary-precision rational, always reduced.
pub type Rational = num_rational::BigRational;

pub type ExactRandomAssignment = RandomAssignment<Rational>;
pub type ExactLottery = Lottery<Rational>;
pub type ExactRoundDecomposition = RoundDecomposition<Rational>;
pub type ExactGpbmOutcome = mechanisms::GpbmOutcome<Rational>;
pub type ExactSubagentMatrix = decomposition::SubagentMatrix<Rational>;
pub type ExactDecomposedLottery = decomposition::DecomposedLottery<Rational>;
pub type ExactGpbmLottery = decomposition::GpbmLottery<Rational>;

pub type FloatRandomAssignment = RandomAssignment<f64>;
pub type FloatLottery = Lottery<f64>;
pub type FloatGpbmOutcome = mechanisms::GpbmOutcome<f64>;
