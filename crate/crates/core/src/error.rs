//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the arithmetic, series, and module-theoretic operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime supported by this build")]
    InvalidPrime(u64),
    #[error("residue {0} is not a unit modulo p")]
    InvalidUnit(i64),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("composition needs a series with zero constant term")]
    CompositionDomain,
    #[error("inexact division: remainder has valuation {0}")]
    InexactDivision(i64),
    #[error("series is not invertible: constant term vanishes")]
    NonUnit,
    #[error("series is not divisible by pi^{0}")]
    NotDivisible(usize),
    #[error("series is not in the kernel of psi")]
    NotPsiZero,
    #[error("series is not in (1+pi)phi(B+), the Gamma_1 component")]
    NotInGamma1Component,
    #[error("series is not in the image of the Mellin transform (residual valuation {0})")]
    NotInImage(i64),
    #[error("eigenvalue in p^Z: {0}")]
    EigenvalueInPZ(String),
    #[error("invalid modular form data: {0}")]
    InvalidForm(String),
    #[error("ordinary case (a_p a p-adic unit) is unsupported")]
    OrdinaryUnsupported,
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("invalid Wach data: {0}")]
    InvalidWachData(String),
    #[error("resonant Sylvester equation at pi-degree {0}")]
    Resonance(usize),
    #[error("duplicate interpolation point at condition {0}")]
    DuplicatePoint(usize),
    #[error("singular matrix")]
    Singular,
    #[error("theorem violation: {0}")]
    TheoremViolation(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("usage: {0}")]
    Usage(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
