//! Exact p-adic computer algebra for Wach modules and Coleman maps.
//!
//! The crate implements, at finite p-adic and series precision, the operator
//! calculus on power series in `π` and in `X = γ − 1`, the Mellin transform,
//! the special distributions `ℓ_i`, `δ_i`, `𝔫_k`, `λ_k`, Wach-module
//! log-matrices with their elementary divisors, and the interpolation modules
//! describing images of Coleman maps for modular forms at supersingular primes.
//!
//! Everything is generic over a [`Scalar`]; [`Padic`] tracks precision and
//! [`Exact`] is an exact rational used for oracles and bookkeeping.

pub mod cli;
pub mod coleman;
pub mod error;
pub mod interpolation;
pub mod matrix;
pub mod mellin;
pub mod padic;
pub mod phi_module;
pub mod profile;
pub mod scalar;
pub mod series;
pub mod suites;
pub mod wach;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use num_traits::{One, Zero};
pub use padic::{is_small_prime, log_one_unit, padic_binom, teichmuller, Padic};
pub use profile::PrecisionProfile;
pub use scalar::{Exact, PadicField, Scalar, INF};
pub use series::{Envelope, PiRing, PiSeries, Ring, Series, Tail, XRing, XSeries};

/// Precision-tracked 3-adic numbers.
pub type Padic3 = Padic<3>;
/// Precision-tracked 5-adic numbers.
pub type Padic5 = Padic<5>;
/// Precision-tracked 7-adic numbers.
pub type Padic7 = Padic<7>;
/// Exact rationals with 3-adic valuation.
pub type Exact3 = Exact<3>;
/// Exact rationals with 5-adic valuation.
pub type Exact5 = Exact<5>;
