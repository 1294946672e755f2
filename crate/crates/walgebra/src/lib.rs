//! Exact arithmetic in enveloping algebras of structure-constant Lie algebras
//! over prime fields, with the combinatorics (pyramids, shift matrices,
//! tableaux) and the special elements (Capelli coefficients, W-algebra
//! generators, p-centre generators, central elements of centralizer algebras)
//! needed to check their identities at desk scale.
//!
//! Everything is computed exactly: coefficients live in `F_p`, in the
//! arbitrary-precision integers, or in univariate polynomial rings over
//! either.  There are no tolerances anywhere.

pub mod arith;
pub mod combin;
pub mod liealg;
pub mod series;
pub mod suite;
pub mod uea;
pub mod verma;
pub mod walg;

use std::fmt;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A modulus that is required to be prime is not.
    NotPrime(u64),
    /// A column-height vector failed validation.
    InvalidPyramid(String),
    /// The level is too small for the shift matrix.
    LevelTooSmall { level: usize, bound: usize },
    /// A shift matrix failed the additivity axioms.
    ShiftMatrix(String),
    /// Operands belong to different enveloping algebras or orderings.
    MixedAlgebra,
    /// A current-algebra operation exceeded the configured degree cap.
    TruncationExceeded(String),
    /// A Laurent-series coefficient below the tracked truncation was read.
    UnknownCoefficient { exponent: i64, trunc: i64 },
    /// The basis ordering does not satisfy a precondition of the operation.
    OrderingViolation(String),
    /// An element acted on a highest-weight vector by more than a scalar.
    NonScalarAction(String),
    /// The degree of the zero element is undefined.
    ZeroDegree,
    /// A textual element, pyramid or tableau failed to parse.
    Parse(String),
    /// Catch-all for violated preconditions.
    InvalidArgument(String),
    /// The operation requires an upper-triangular shift matrix.
    NotLeftJustified(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPrime(p) => write!(f, "{p} is not prime"),
            Error::InvalidPyramid(msg) => write!(f, "invalid pyramid: {msg}"),
            Error::LevelTooSmall { level, bound } => write!(
                f,
                "level {level} too small: the level must exceed s[1,n] + s[n,1] = {bound}"
            ),
            Error::ShiftMatrix(msg) => write!(f, "invalid shift matrix: {msg}"),
            Error::MixedAlgebra => write!(f, "operands from different algebras or orderings"),
            Error::TruncationExceeded(msg) => write!(f, "degree cap exceeded: {msg}"),
            Error::UnknownCoefficient { exponent, trunc } => write!(
                f,
                "coefficient of u^{exponent} is below the truncation (known only down to u^-{trunc})"
            ),
            Error::OrderingViolation(msg) => write!(f, "ordering violation: {msg}"),
            Error::NonScalarAction(msg) => {
                write!(f, "element does not act by a scalar on the highest-weight line: {msg}")
            }
            Error::ZeroDegree => write!(f, "degree of the zero element is undefined"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "{msg}"),
            Error::NotLeftJustified(msg) => write!(
                f,
                "requires a left-justified pyramid (upper-triangular shift matrix): {msg}; \
                 rebuild the pyramid from its partition with all rows flush left"
            ),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
