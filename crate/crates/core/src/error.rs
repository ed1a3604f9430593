//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A probability table failed validation (negative entry, bad
    /// normalization, wrong length).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A scalar argument is outside its documented domain.
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    /// Behavior and expected settings/outcome counts disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Deterministic-strategy enumeration requested outside 2 <= d <= 8.
    #[error("outcome count d={0} outside enumerable range 2..=8")]
    EnumerationRange(usize),

    /// Rounded subset cardinalities cannot be realized.
    #[error("infeasible cardinalities: {0}")]
    InfeasibleCardinality(String),

    /// A bound denominator degenerates (e.g. R_Q <= R(L)).
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    /// A solver found no root in its admissible bracket.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// The secure-fraction crossing is not unique on the scanned grid.
    #[error("multiple crossings detected: {0}")]
    MultipleCrossings(String),

    /// The noisy-strategy constraint set admits no attack.
    #[error("no admissible attack for the given constraints")]
    NoAdmissibleAttack,

    /// Strategy and protocol configuration cannot be combined.
    #[error("infeasible strategy: {0}")]
    InfeasibleStrategy(String),

    /// CGLMP estimation requires counts in every used setting pair.
    #[error("no counts in setting pair (a={a}, b={b})")]
    ZeroCellCount { a: u8, b: u8 },
}
