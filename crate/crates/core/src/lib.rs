//! Mixed-norm inequalities for m-linear forms on finite-dimensional `l_p` spaces.
//!
//! The library answers three kinds of questions about inequalities of the shape
//!
//! ```text
//! ( sum_{j1} ( ... ( sum_{jm} |T(e_{j1},...,e_{jm})|^{q_m} )^{q_{m-1}/q_m} ... )^{q_1/q_2} )^{1/q_1}
//!     <= C * ||T||
//! ```
//!
//! over all m-linear forms `T : l_{p_1}^n x ... x l_{p_m}^n -> R` and all n:
//!
//! * **Admissibility** ([`exponents`]): does a known theorem prove the inequality
//!   holds with a constant independent of n (or prove it cannot)? All exponent
//!   arithmetic is exact rational arithmetic with an `infinity` element; floats
//!   never enter this layer.
//! * **Norms** ([`tensor`], [`norm`]): numerically evaluate the left side (the
//!   mixed norm of the coefficient tensor) and bracket the right side (the
//!   operator norm) between a feasible-point lower bound and a certified upper
//!   bound, with an independent brute-force oracle at small sizes.
//! * **Experiments** ([`experiments`]): verify admissible instances against their
//!   prescribed constants, exhibit growth for inadmissible ones, and check
//!   Kahane-Salem-Zygmund scaling of random sign tensors, with reproducible
//!   seeded sampling and least-squares slope fits.
//!
//! Conventions used throughout: exponent position i collapses tensor axis i,
//! axis 1 is outermost and axis m innermost (collapsed first); `1/infinity = 0`;
//! an `infinity` exponent level takes a supremum; scalars are real `f64`.

pub mod experiments;
pub mod exponents;
pub mod norm;
pub mod tensor;

pub use num_rational::Rational64;

pub use experiments::{
    fit_power_law, ksz_scaling_check, refute_instance, sup_sharpness_probe, verify_instance,
    ExperimentError, GrowthFit, KszReport, KszSample, ProbeReport, RatioSample, RefuteReport,
    SamplePlan, TensorSource, VerifyReport,
};
pub use exponents::{
    admissibility, ar_exponents, critical_exponents, critical_lower_bounds, criticality_class,
    dsp_exponent, evaluate_rules, exp, harmonic_sum, pp_exponent, region_grid, supercritical_k,
    tail_delta, uniform_supercritical_exponent, ArExponents, Criticality, DomainTuple,
    ExponentError, ExtendedExponent, GridAxis, GridCell, IndexSet, InequalityInstance, Outcome,
    PrescribedConstant, RegionGrid, Rule, Verdict,
};
pub use norm::{
    ascend, block_dual_maximizer, bracket, brute_force_norm, diagonal_norm, lp_norm,
    upper_certificate, AscentConfig, AscentResult, NormBracket, NormError, OracleNorm,
};
pub use tensor::{
    diagonal_form, lift, lift_into, littlewood_power, mixed_norm, permute_axes, random_gaussian,
    random_unimodular, slice, CoefficientTensor, MixedNormSpec, TensorError,
};
