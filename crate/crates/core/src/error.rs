//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid game: {}", violations.join("; "))]
    InvalidGame { violations: Vec<String> },

    #[error("probability {value} outside [0,1]")]
    ProbabilityRange { value: String },

    #[error("f(lambda, j, q) requires 1 <= j <= lambda, got lambda={lambda}, j={j}")]
    FDomain { lambda: u64, j: u64 },

    #[error("player index {player} out of range for population {n}")]
    PlayerRange { player: usize, n: usize },

    #[error("profile length {len} does not match population {n}")]
    ProfileLength { len: usize, n: usize },

    #[error("retract is not an admissible action under the {variant} variant")]
    RetractNotAllowed { variant: String },

    #[error("population {n} exceeds enumeration guard {guard}")]
    GuardExceeded { n: usize, guard: usize },

    #[error("{op} requires {requirement}")]
    Unsupported { op: &'static str, requirement: &'static str },

    #[error("target {target} is infeasible: {reason}")]
    InfeasibleTarget { target: String, reason: String },

    #[error("games are not a matched tracked/universal pair: {reason}")]
    MismatchedPair { reason: String },
}
