//! Library-wide error type.

use thiserror::Error;

/// Errors raised by the library. Variants split into caller mistakes
/// (validation) and numerical failures so front ends can map them to
/// distinct exit statuses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two revealed bits disagreed under erasure multiplication.
    #[error("contract violation: erasure multiplication of disagreeing bits {0} and {1}")]
    ConflictingBits(u8, u8),
    /// Two words or vectors that must share a length do not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    /// A probability argument fell outside [0, 1].
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    /// A generic out-of-domain argument.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An edge distribution failed validation.
    #[error("invalid edge distribution: {0}")]
    InvalidDistribution(String),
    /// Integer node allocation left a degree class empty.
    #[error("infeasible allocation: degree class {degree} on the {side} side receives no node at n = {n}")]
    InfeasibleAllocation { side: &'static str, degree: u32, n: usize },
    /// An exponential enumeration was requested on too large an input.
    #[error("refusing exhaustive enumeration over {n} variables (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    /// Revealed symbols violate a parity check with no erased slack.
    #[error("inconsistent channel output: parity check {0} cannot be satisfied")]
    Inconsistent(usize),
    /// Failure to parse a serialized object.
    #[error("parse error: {0}")]
    Parse(String),
    /// An iterative solver exhausted its budget.
    #[error("no convergence after {evaluations} evaluations (best value {best})")]
    NonConvergence { evaluations: usize, best: f64 },
    /// Probability mass hit the LLR grid boundary.
    #[error("LLR grid overflow: {mass:.3e} of the mass saturated at the negative edge; increase L_max")]
    GridOverflow { mass: f64 },
    /// A linear program has an unbounded objective.
    #[error("linear program is unbounded")]
    Unbounded,
    /// A linear program has no feasible point.
    #[error("linear program is infeasible")]
    Infeasible,
    /// A constraint is unsatisfiable on the admissible search range.
    #[error("infeasible: {0}")]
    NoFeasiblePoint(String),
    /// An optimizer seed does not meet the admissibility target.
    #[error("seed not admissible: {0}")]
    NotAdmissible(String),
}

impl Error {
    /// True for errors caused by invalid input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::LengthMismatch { .. }
                | Error::InvalidProbability(_)
                | Error::InvalidArgument(_)
                | Error::InvalidDistribution(_)
                | Error::InfeasibleAllocation { .. }
                | Error::TooLarge { .. }
                | Error::Parse(_)
                | Error::NotAdmissible(_)
        )
    }
}

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
