//! Scripted studies over the admissibility verdicts: verify admissible
//! instances against their prescribed constants, exhibit growth for
//! inadmissible ones, check the random-form scaling law, and probe whether
//! a supremum level can be weakened to a finite exponent.
//!
//! Soundness discipline: verification divides by the bracket's certified
//! lower endpoint (overestimating the ratio), refutation divides by a
//! certified upper estimate or an exact norm (underestimating it), so a
//! passing verification and a positive refutation slope are both
//! conservative conclusions. Every report records which side it used.

use num_rational::Rational64;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::exponents::{
    admissibility, harmonic_sum, ExponentError, ExtendedExponent, IndexSet, InequalityInstance,
    Outcome, Verdict,
};
use crate::norm::{
    bracket, brute_force_norm, diagonal_norm, rat_f64, AscentConfig, NormBracket, NormError,
};
use crate::tensor::{
    diagonal_form, lift, lift_into, littlewood_power, mixed_norm, random_gaussian,
    random_unimodular, CoefficientTensor, MixedNormSpec, TensorError,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("instance is not provably admissible: verdict is {0}")]
    NotAdmissible(Outcome),
    #[error("instance is provably admissible; nothing to refute")]
    NotRefutable,
    #[error("verdict is unknown; pass the exploration flag to probe it anyway")]
    UnknownNeedsOptIn,
    #[error("need at least 3 usable points, got {got}")]
    TooFewPoints { got: usize },
    #[error("points must be finite: {0}")]
    BadPoint(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("norm lower bound vanished on a nonzero tensor (n={n}, source {label})")]
    DegenerateNorm { n: usize, label: String },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
}

/// One measured tensor: the mixed-norm left side against a two-sided norm
/// estimate, with both sound ratio directions precomputed.
#[derive(Clone, Debug, Serialize)]
pub struct RatioSample {
    pub n: usize,
    pub source: String,
    pub lhs: f64,
    pub norm: NormBracket,
    /// `lhs / norm.lower`: at least the true ratio.
    pub ratio_sound_upper: f64,
    /// `lhs / norm.upper`: at most the true ratio.
    pub ratio_sound_lower: f64,
}

impl RatioSample {
    fn new(n: usize, source: String, lhs: f64, norm: NormBracket) -> Result<Self, ExperimentError> {
        if norm.lower <= 0.0 {
            return Err(ExperimentError::DegenerateNorm { n, label: source });
        }
        let sample = RatioSample {
            n,
            source,
            lhs,
            ratio_sound_upper: lhs / norm.lower,
            ratio_sound_lower: lhs / norm.upper,
            norm,
        };
        debug_assert!(sample.ratio_sound_lower <= sample.ratio_sound_upper);
        Ok(sample)
    }
}

/// Least-squares line through `(log n, log ratio)` points.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square vertical residual.
    pub residual: f64,
}

/// Ordinary least squares on the given `(x, y)` pairs; callers pass
/// logarithms. Requires at least 3 finite points.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<GrowthFit, ExperimentError> {
    if points.len() < 3 {
        return Err(ExperimentError::TooFewPoints { got: points.len() });
    }
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() {
            return Err(ExperimentError::BadPoint(format!("({x}, {y})")));
        }
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(ExperimentError::BadPoint(
            "all abscissas coincide".to_string(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = (points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(GrowthFit {
        points: points.to_vec(),
        slope,
        intercept,
        residual,
    })
}

/// Families of coefficient tensors the studies draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TensorSource {
    /// Independent standard normal entries.
    Gaussian,
    /// Independent `{-1, +1}` entries.
    Unimodular,
    /// 1 on the main diagonal, 0 elsewhere (deterministic).
    Diagonal,
    /// Kronecker powers of `[[1, 1], [1, -1]]`; bilinear, n a power of two
    /// (deterministic).
    Littlewood,
    /// A `{-1, +1}` tensor of arity `m - k` embedded with k leading sup
    /// axes.
    Lifted { k: usize },
}

impl TensorSource {
    pub fn is_deterministic(self) -> bool {
        matches!(self, TensorSource::Diagonal | TensorSource::Littlewood)
    }

    pub fn generate(
        self,
        m: usize,
        n: usize,
        seed: u64,
    ) -> Result<CoefficientTensor, ExperimentError> {
        match self {
            TensorSource::Gaussian => Ok(random_gaussian(m, n, seed)?),
            TensorSource::Unimodular => Ok(random_unimodular(m, n, seed)?),
            TensorSource::Diagonal => Ok(diagonal_form(m, n)?),
            TensorSource::Littlewood => {
                if m != 2 {
                    return Err(ExperimentError::Hypothesis(format!(
                        "the Kronecker sign-matrix family is bilinear, got m={m}"
                    )));
                }
                if !n.is_power_of_two() || n < 2 {
                    return Err(ExperimentError::Hypothesis(format!(
                        "the Kronecker sign-matrix family needs n a power of two, got n={n}"
                    )));
                }
                Ok(littlewood_power(2, n.trailing_zeros())?)
            }
            TensorSource::Lifted { k } => {
                if k == 0 || k >= m {
                    return Err(ExperimentError::Hypothesis(format!(
                        "lift depth must satisfy 1 <= k < m, got k={k}, m={m}"
                    )));
                }
                Ok(lift(&random_unimodular(m - k, n, seed)?, k)?)
            }
        }
    }

    fn label(self, seed: u64) -> String {
        match self {
            TensorSource::Gaussian => format!("gaussian(seed={seed})"),
            TensorSource::Unimodular => format!("unimodular(seed={seed})"),
            TensorSource::Diagonal => "diagonal".to_string(),
            TensorSource::Littlewood => "littlewood".to_string(),
            TensorSource::Lifted { k } => format!("lifted(k={k}, seed={seed})"),
        }
    }
}

impl std::fmt::Display for TensorSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TensorSource::Gaussian => write!(f, "gaussian"),
            TensorSource::Unimodular => write!(f, "unimodular"),
            TensorSource::Diagonal => write!(f, "diagonal"),
            TensorSource::Littlewood => write!(f, "littlewood"),
            TensorSource::Lifted { k } => write!(f, "lifted:{k}"),
        }
    }
}

impl std::str::FromStr for TensorSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(TensorSource::Gaussian),
            "unimodular" | "random" => Ok(TensorSource::Unimodular),
            "diagonal" => Ok(TensorSource::Diagonal),
            "littlewood" => Ok(TensorSource::Littlewood),
            other => {
                if let Some(k) = other.strip_prefix("lifted:") {
                    let k: usize = k
                        .parse()
                        .map_err(|_| format!("bad lift depth in {other:?}"))?;
                    return Ok(TensorSource::Lifted { k });
                }
                Err(format!(
                    "unknown tensor source {other:?}; expected gaussian, unimodular, random, \
                     diagonal, littlewood, or lifted:<k>"
                ))
            }
        }
    }
}

/// Shared sampling plan: which n to visit, how many random draws per n,
/// and the base seed. Seeds are assigned deterministically in loop order
/// starting at `seed`, so a stored plan replays exactly.
#[derive(Clone, Debug, Serialize)]
pub struct SamplePlan {
    pub n_list: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
}

impl SamplePlan {
    fn check(&self) -> Result<(), ExperimentError> {
        if self.samples == 0 {
            return Err(ExperimentError::Hypothesis(
                "samples must be at least 1".to_string(),
            ));
        }
        if self.n_list.iter().any(|&n| n == 0) {
            return Err(ExperimentError::Hypothesis(
                "dimensions must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub verdict: Verdict,
    pub samples: Vec<RatioSample>,
    /// Maximum of `ratio_sound_upper` over all samples.
    pub max_ratio: f64,
    /// The rule's constant when it prescribes one.
    pub constant: Option<f64>,
    pub tolerance: f64,
    /// Whether `max_ratio <= constant * (1 + tolerance)`; absent when the
    /// rule prescribes no constant, in which case `max_ratio` is a lower
    /// estimate of the best constant.
    pub within_tolerance: Option<bool>,
    /// Which ratio direction the verdict above is based on.
    pub fit_uses: String,
}

/// Stress-tests a provably admissible instance: for every n and sampled
/// tensor, compares the mixed norm against `C` times the certified norm
/// lower bound. Rejects instances that are not provably admissible.
pub fn verify_instance(
    instance: &InequalityInstance,
    sources: &[TensorSource],
    plan: &SamplePlan,
    ascent: &AscentConfig,
    tolerance: f64,
) -> Result<VerifyReport, ExperimentError> {
    let verdict = admissibility(instance);
    if verdict.outcome != Outcome::ProvablyAdmissible {
        return Err(ExperimentError::NotAdmissible(verdict.outcome));
    }
    plan.check()?;
    if sources.is_empty() {
        return Err(ExperimentError::Hypothesis(
            "need at least one tensor source".to_string(),
        ));
    }
    let spec = MixedNormSpec::from_instance(instance);
    let mut samples = Vec::new();
    let mut counter = plan.seed;
    for &source in sources {
        let draws = if source.is_deterministic() { 1 } else { plan.samples };
        for &n in &plan.n_list {
            for _ in 0..draws {
                let seed = counter;
                if !source.is_deterministic() {
                    counter += 1;
                }
                let t = source.generate(instance.m, n, seed)?;
                let lhs = mixed_norm(&t, &spec)?;
                let norm = bracket(&t, &instance.domain, ascent)?;
                samples.push(RatioSample::new(n, source.label(seed), lhs, norm)?);
            }
        }
    }
    let max_ratio = samples
        .iter()
        .map(|s| s.ratio_sound_upper)
        .fold(0.0_f64, f64::max);
    let constant = verdict.constant.as_ref().map(|c| c.value());
    let within_tolerance = constant.map(|c| max_ratio <= c * (1.0 + tolerance));
    Ok(VerifyReport {
        verdict,
        samples,
        max_ratio,
        constant,
        tolerance,
        within_tolerance,
        fit_uses: "ratio-sound-upper".to_string(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RefuteReport {
    pub verdict: Verdict,
    /// True when the verdict was unknown and the caller opted into probing.
    pub exploratory: bool,
    pub samples: Vec<RatioSample>,
    /// Fit of `log (best ratio_sound_lower per n)` against `log n`.
    pub fit: GrowthFit,
    pub fit_uses: String,
}

/// Exhibits growth of the best constant for a provably inadmissible
/// instance (or an unknown one when `explore_unknown` is set): per n it
/// takes the best sound lower ratio over the witness family and fits its
/// log against log n. A positive slope beyond tolerance certifies that the
/// constant must grow with n.
///
/// Norm route per tensor: the diagonal family uses its closed-form norm;
/// all-sup domains within the enumeration budget use the exact oracle;
/// everything else uses the certified upper endpoint of a bracket.
pub fn refute_instance(
    instance: &InequalityInstance,
    family: TensorSource,
    plan: &SamplePlan,
    ascent: &AscentConfig,
    resolution: usize,
    explore_unknown: bool,
) -> Result<RefuteReport, ExperimentError> {
    let verdict = admissibility(instance);
    match verdict.outcome {
        Outcome::ProvablyAdmissible => return Err(ExperimentError::NotRefutable),
        Outcome::Unknown if !explore_unknown => return Err(ExperimentError::UnknownNeedsOptIn),
        _ => {}
    }
    plan.check()?;
    if plan.n_list.len() < 3 {
        return Err(ExperimentError::TooFewPoints {
            got: plan.n_list.len(),
        });
    }
    let spec = MixedNormSpec::from_instance(instance);
    let all_sup = (1..=instance.m).all(|i| instance.p(i).is_infinite());
    let mut samples = Vec::new();
    let mut points = Vec::new();
    let mut counter = plan.seed;
    for &n in &plan.n_list {
        let draws = if family.is_deterministic() { 1 } else { plan.samples };
        let mut best: Option<f64> = None;
        for _ in 0..draws {
            let seed = counter;
            if !family.is_deterministic() {
                counter += 1;
            }
            let t = family.generate(instance.m, n, seed)?;
            let lhs = mixed_norm(&t, &spec)?;
            let norm = if family == TensorSource::Diagonal {
                let exact = diagonal_norm(n, &instance.domain);
                exact_bracket(exact, 0.0)
            } else if all_sup && (instance.m - 1) * n <= 24 {
                let oracle = brute_force_norm(&t, &instance.domain, resolution)?;
                exact_bracket(oracle.value, oracle.mesh_bound)
            } else {
                bracket(&t, &instance.domain, ascent)?
            };
            let sample = RatioSample::new(n, family.label(seed), lhs, norm)?;
            best = Some(best.map_or(sample.ratio_sound_lower, |b: f64| {
                b.max(sample.ratio_sound_lower)
            }));
            samples.push(sample);
        }
        points.push(((n as f64).ln(), best.expect("draws >= 1").ln()));
    }
    let fit = fit_power_law(&points)?;
    Ok(RefuteReport {
        exploratory: verdict.outcome == Outcome::Unknown,
        verdict,
        samples,
        fit,
        fit_uses: "ratio-sound-lower".to_string(),
    })
}

fn exact_bracket(value: f64, mesh: f64) -> NormBracket {
    NormBracket {
        lower: value,
        upper: value + mesh,
        witness: Vec::new(),
        sweeps: 0,
        restarts: 0,
        converged: true,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KszSample {
    pub n: usize,
    pub seed: u64,
    pub estimate: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KszReport {
    /// `(m + 1)/2 - sum 1/p_i`, the scaling exponent random sign forms
    /// attain.
    pub predicted_slope: f64,
    pub samples: Vec<KszSample>,
    /// Per-n mean of the norm estimates, the quantity the fit runs on.
    pub means: Vec<(usize, f64)>,
    pub fit: GrowthFit,
}

/// Measures how the operator norm of random sign tensors grows with n and
/// compares the fitted exponent with the predicted
/// `(m + 1)/2 - sum 1/p_i`. Requires every `p_i >= 2`, the regime where
/// that prediction applies. All-sup domains within budget use exact norms;
/// otherwise the ascent lower bound stands in (slope check only).
pub fn ksz_scaling_check(
    instance_domain: &crate::exponents::DomainTuple,
    plan: &SamplePlan,
    ascent: &AscentConfig,
    resolution: usize,
) -> Result<KszReport, ExperimentError> {
    let m = instance_domain.arity();
    for i in 1..=m {
        if instance_domain.at(i) < crate::exponents::exp("2") {
            return Err(ExperimentError::Hypothesis(format!(
                "predicted scaling needs every p >= 2, got p_{i} = {}",
                instance_domain.at(i)
            )));
        }
    }
    plan.check()?;
    if plan.n_list.len() < 3 {
        return Err(ExperimentError::TooFewPoints {
            got: plan.n_list.len(),
        });
    }
    let predicted = Rational64::new((m as i64) + 1, 2) - instance_domain.recip_sum();
    let all_sup = (1..=m).all(|i| instance_domain.at(i).is_infinite());
    let mut samples = Vec::new();
    let mut means = Vec::new();
    let mut points = Vec::new();
    let mut counter = plan.seed;
    for &n in &plan.n_list {
        let mut total = 0.0;
        for _ in 0..plan.samples {
            let seed = counter;
            counter += 1;
            let t = random_unimodular(m, n, seed)?;
            let (estimate, exact) = if all_sup && (m - 1) * n <= 24 {
                (brute_force_norm(&t, instance_domain, resolution)?.value, true)
            } else {
                (bracket(&t, instance_domain, ascent)?.lower, false)
            };
            total += estimate;
            samples.push(KszSample {
                n,
                seed,
                estimate,
                exact,
            });
        }
        let mean = total / plan.samples as f64;
        means.push((n, mean));
        points.push(((n as f64).ln(), mean.ln()));
    }
    let fit = fit_power_law(&points)?;
    Ok(KszReport {
        predicted_slope: rat_f64(predicted),
        samples,
        means,
        fit,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    /// The sup position that was tentatively weakened.
    pub probe_position: usize,
    /// The finite exponent tried there (or infinity for the control run).
    pub probe_exponent: ExtendedExponent,
    pub samples: Vec<RatioSample>,
    pub fit: GrowthFit,
}

/// Tests whether the supremum forced at the positions outside `s` can be
/// weakened: it rebuilds the mixed norm with `r` in place of the sup at
/// the first such position and measures ratio growth on the diagonal
/// witness supported on `s` plus that position. Positive slope (`1/r`
/// exactly, by the closed forms involved) demonstrates the sup cannot be
/// improved; `r` infinite reproduces the admissible form as a control.
///
/// Hypotheses checked: `sum_{i in s} 1/p_i < 1`, `sum 1/p_i >= 1` after
/// adjoining any position outside `s`, and the probed position precedes
/// every member of `s` so the diagonal's outermost axis is the probed one.
pub fn sup_sharpness_probe(
    domain: &crate::exponents::DomainTuple,
    s: &IndexSet,
    inner_spec: &[ExtendedExponent],
    r: ExtendedExponent,
    n_list: &[usize],
) -> Result<ProbeReport, ExperimentError> {
    let m = domain.arity();
    if s.m() != m {
        return Err(ExperimentError::Hypothesis(format!(
            "index set is over 1..={}, domain has arity {m}",
            s.m()
        )));
    }
    if s.is_empty() || s.len() == m {
        return Err(ExperimentError::Hypothesis(
            "need a nonempty retained set with a nonempty complement".to_string(),
        ));
    }
    if inner_spec.len() != s.len() {
        return Err(ExperimentError::Hypothesis(format!(
            "inner exponent stack has {} entries for {} retained positions",
            inner_spec.len(),
            s.len()
        )));
    }
    let retained = harmonic_sum(domain, s)?;
    if retained >= Rational64::one() {
        return Err(ExperimentError::Hypothesis(format!(
            "retained positions must stay subcritical: sum 1/p over s is {retained}"
        )));
    }
    let complement = s.complement();
    for j in complement.iter() {
        let with_j = IndexSet::new(m, s.iter().chain([j]))?;
        if harmonic_sum(domain, &with_j)? < Rational64::one() {
            return Err(ExperimentError::Hypothesis(format!(
                "adjoining position {j} keeps sum 1/p below 1; the sup there is not forced"
            )));
        }
    }
    let probe = complement.iter().min().expect("nonempty complement");
    let s_min = s.iter().min().expect("nonempty set");
    if probe > s_min {
        return Err(ExperimentError::Hypothesis(format!(
            "probed position {probe} must precede every retained position (first is {s_min})"
        )));
    }
    if n_list.len() < 3 {
        return Err(ExperimentError::TooFewPoints { got: n_list.len() });
    }

    let mut exponents: Vec<ExtendedExponent> = vec![ExtendedExponent::INFINITY; m];
    for (slot, position) in s.iter().enumerate() {
        exponents[position - 1] = inner_spec[slot];
    }
    exponents[probe - 1] = r;
    let spec = MixedNormSpec::new(exponents)?;

    let witness_axes = IndexSet::new(m, s.iter().chain([probe]))?;
    let witness_domain = crate::exponents::DomainTuple::new(
        witness_axes.iter().map(|i| domain.at(i)).collect(),
    )?;

    let mut samples = Vec::new();
    let mut points = Vec::new();
    for &n in n_list {
        if n == 0 {
            return Err(ExperimentError::Hypothesis(
                "dimensions must be at least 1".to_string(),
            ));
        }
        let core = diagonal_form(witness_axes.len(), n)?;
        let t = lift_into(&core, m, &witness_axes)?;
        let lhs = mixed_norm(&t, &spec)?;
        let exact = diagonal_norm(n, &witness_domain);
        let sample = RatioSample::new(n, "lifted-diagonal".to_string(), lhs, exact_bracket(exact, 0.0))?;
        points.push(((n as f64).ln(), sample.ratio_sound_lower.ln()));
        samples.push(sample);
    }
    let fit = fit_power_law(&points)?;
    Ok(ProbeReport {
        probe_position: probe,
        probe_exponent: r,
        samples,
        fit,
    })
}
