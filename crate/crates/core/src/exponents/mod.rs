//! Exact exponent calculus: extended exponents, derived exponent formulas,
//! and the rule-based admissibility dispatcher.
//!
//! Everything in this module is exact rational arithmetic; floating point
//! appears only in `PrescribedConstant::value` and in display helpers. The
//! layering is:
//!
//! - [`extended`]: the `ExtendedExponent` scalar (positive rational or
//!   infinity) with reciprocal and conjugate arithmetic,
//! - [`instance`]: domain tuples, index sets, and `(p, q)` instances,
//! - [`formulas`]: closed-form exponent maps (critical tuples, thresholds,
//!   tail corrections, supercritical depth),
//! - [`admissibility`]: the verdict type and the ordered rule table,
//! - [`region`]: grid sweeps of the dispatcher over two exponent axes.

mod admissibility;
mod extended;
mod formulas;
mod instance;
mod region;

use thiserror::Error;

pub use admissibility::{
    admissibility, evaluate_rules, Outcome, PrescribedConstant, Rule, Verdict,
};
pub use extended::{exp, ExtendedExponent};
pub use formulas::{
    ar_exponents, critical_exponents, critical_lower_bounds, criticality_class, dsp_exponent,
    harmonic_sum, pp_exponent, supercritical_k, tail_delta, uniform_supercritical_exponent,
    ArExponents, Criticality,
};
pub use instance::{DomainTuple, IndexSet, InequalityInstance};
pub use region::{region_grid, GridAxis, GridCell, RegionGrid};

/// Errors produced by the exponent layer.
#[derive(Debug, Error)]
pub enum ExponentError {
    /// An exponent literal or constructor received a non-positive value.
    #[error("exponent must be positive, got {0}")]
    NonPositive(String),

    /// A reciprocal that should define an exponent came out negative.
    #[error("reciprocal at position {position} is negative ({value}), no exponent exists")]
    NonPositiveReciprocal { position: usize, value: String },

    /// A textual exponent literal could not be parsed.
    #[error("cannot parse exponent literal {input:?}: {reason}")]
    Literal { input: String, reason: String },

    /// A domain tuple entry was below 1.
    #[error("domain exponents must be at least 1, got {0}")]
    DomainBelowOne(String),

    /// Mismatched tuple lengths.
    #[error("expected {expected} exponents, got {got}")]
    Arity { expected: usize, got: usize },

    /// A formula's hypothesis on its arguments was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
}
