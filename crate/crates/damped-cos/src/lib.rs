//! Numerical evaluation of integrals `∫ w(x) g(x) dx` in d dimensions from the
//! characteristic function of `g` via the (damped) Fourier-cosine (COS) method.
//!
//! The density `g` is never touched directly: an exponentially tilted and
//! recentred copy of it (the damped density `f`) is expanded in a finite
//! cosine series on a box, and the series coefficients are paired with cosine
//! coefficients of the function of interest `w`. Both coefficient families
//! come from transforms, so the whole pipeline runs on `ĝ` alone. This yields
//! CDFs, absolute moments and European rainbow-option prices (digital and
//! arithmetic basket puts) for the normal and Variance Gamma families.
//!
//! The truncation box and the number of series terms are chosen automatically
//! from an absolute error tolerance: the box from an explicit moment formula,
//! the term count from a Parseval-style stopping rule that compares the
//! accumulated coefficient mass against `(2π)^{-d} ∫ |f̂|²`.
//!
//! The crate is `no_std`-compatible (`alloc` required); the default `std`
//! feature adds wall-clock timing and thread helpers.

#![cfg_attr(not(feature = "std"), no_std)]
// frozen reference constants keep their full published digits; negated
// comparisons in validations deliberately catch NaN; indexed loops mirror
// the multi-array kernels they implement
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_is_multiple_of)]

extern crate alloc;

pub mod damping;
pub mod engine;
pub mod models;
pub mod oracles;
pub mod payoffs;
pub mod quad;
pub mod solver;
pub mod special;
pub mod tuning;

use alloc::string::String;
use core::fmt;

// downstream crates need the exact types the trait surfaces speak
pub use num_complex;
pub use rand;

pub use damping::{build_damped_density, DampedDensity, DampingFactor};
pub use engine::{ApproxResult, CosPlan, MultiIndex, PlanGeometry};
pub use models::{CharacteristicModel, DecayExponent, MarketSpec, NormalModel, VarianceGammaModel};
pub use payoffs::{Payoff, PayoffBounds};
pub use solver::{Problem, Solution};
pub use tuning::{NTermsOutcome, Tolerance};

/// Maximum supported dimension. Keeps hot-path buffers on the stack; the
/// dense coefficient tensor would be intractable far below this anyway.
pub const MAX_DIM: usize = 8;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum CosError {
    /// The damping factor puts `ĝ` outside its admissible complex strip.
    StripViolation(String),
    /// Model or payoff parameters violate a documented precondition.
    InvalidParameters(String),
    /// No closed form or stable numeric route for the requested moment.
    MomentUnavailable(String),
    /// `|f̂|²` is not integrable, so the Parseval stopping rule cannot run.
    NotSquareIntegrable(String),
    /// The payoff only supports the classical method (`α = 0`).
    DampingNotSupported(String),
    /// A log-space magnitude left the representable floating-point range.
    Overflow(String),
    /// The requested coefficient tensor exceeds the configured entry cap.
    AllocationTooLarge { requested: u128, cap: u128 },
    /// The term-count search hit `n_max` before meeting the tolerance.
    NotConverged {
        n_max: usize,
        best_gap: f64,
        required: f64,
    },
    /// Smoothness order `s` exceeds what the model's density admits.
    SmoothnessExceeded { s: usize, max_s: usize },
    /// Polynomial decay exponent too small for the requested operation.
    DecayTooSlow { p: f64, d: usize },
    /// Closed-form normal CDF requires a diagonal covariance.
    CorrelatedNotSupported,
    /// A computation produced a non-finite value.
    NonFinite(String),
    /// Operation outside the implemented scope (documents its limit).
    Unsupported(String),
}

impl fmt::Display for CosError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CosError::StripViolation(m) => write!(f, "strip violation: {m}"),
            CosError::InvalidParameters(m) => write!(f, "invalid parameters: {m}"),
            CosError::MomentUnavailable(m) => write!(f, "moment unavailable: {m}"),
            CosError::NotSquareIntegrable(m) => write!(f, "not square integrable: {m}"),
            CosError::DampingNotSupported(m) => write!(f, "damping not supported: {m}"),
            CosError::Overflow(m) => write!(f, "overflow: {m}"),
            CosError::AllocationTooLarge { requested, cap } => {
                write!(f, "coefficient tensor of {requested} entries exceeds cap {cap}")
            }
            CosError::NotConverged { n_max, best_gap, required } => write!(
                f,
                "term count search not converged at n_max = {n_max} (gap {best_gap:.3e}, required {required:.3e})"
            ),
            CosError::SmoothnessExceeded { s, max_s } => {
                write!(f, "smoothness order s = {s} exceeds admissible J = {max_s}")
            }
            CosError::DecayTooSlow { p, d } => {
                write!(f, "decay exponent p = {p} must exceed d/2 = {}", *d as f64 / 2.0)
            }
            CosError::CorrelatedNotSupported => {
                write!(f, "closed-form normal CDF requires zero off-diagonal covariance")
            }
            CosError::NonFinite(m) => write!(f, "non-finite value: {m}"),
            CosError::Unsupported(m) => write!(f, "unsupported: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CosError {}

pub type Result<T> = core::result::Result<T, CosError>;
