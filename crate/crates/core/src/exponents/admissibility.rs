//! The admissibility oracle: an ordered table of decision rules for mixed-norm
//! inequality instances.
//!
//! Each rule pairs a hypothesis on the domain tuple with an exact description
//! of (part of) the admissible exponent region. A rule is *silent* on
//! instances outside its hypothesis; the dispatcher walks the table in a fixed
//! order, most specific rules first, and the first opinion wins. Any two rules
//! whose hypotheses overlap agree on the overlap, so the order only decides
//! which rule gets credited; the property suite sweeps for disagreement.
//!
//! Table order:
//!
//!  1. `all-sup`
//!  2. `bilinear-littlewood`
//!  3. `bilinear-classical`
//!  4. `bilinear-unified`
//!  5. `bilinear-supercritical`
//!  6. `critical-uniform`
//!  7. `trilinear-critical`
//!  8. `trilinear-supercritical`
//!  9. `subcritical-tails`
//! 10. `subcritical-budget`
//! 11. `flat-threshold`
//! 12. `supercritical-uniform`
//! 13. `supercritical-tails`
//! 14. `anisotropic-formula`
//! 15. `supercritical-budget`
//! 16. `supercritical-shell`
//! 17. `sup-forcing`

use std::f64::consts::SQRT_2;
use std::fmt;

use num_rational::Rational64;
use num_traits::One;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::extended::ExtendedExponent;
use super::formulas::{
    ar_exponents, critical_exponents, critical_lower_bounds, dsp_exponent, pp_exponent,
    supercritical_k, tail_delta, uniform_supercritical_exponent,
};
use super::instance::InequalityInstance;

/// Trichotomous answer for one inequality instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Some sufficiency clause covers the instance.
    ProvablyAdmissible,
    /// Some necessary condition fails.
    ProvablyInadmissible,
    /// No rule in the table speaks about the instance.
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Outcome::ProvablyAdmissible => "provably-admissible",
            Outcome::ProvablyInadmissible => "provably-inadmissible",
            Outcome::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// A multiplicative constant of the form 2^(k/2).
///
/// Every known dimension-free constant in this problem family is a power of
/// the square root of two, so the exponent is stored exactly and the floating
/// value is derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrescribedConstant {
    /// The constant is 2^(sqrt2_power / 2).
    pub sqrt2_power: u32,
}

impl PrescribedConstant {
    pub fn new(sqrt2_power: u32) -> Self {
        PrescribedConstant { sqrt2_power }
    }

    /// The constant as a float: 2^(sqrt2_power / 2).
    pub fn value(&self) -> f64 {
        let whole = 2f64.powi((self.sqrt2_power / 2) as i32);
        if self.sqrt2_power % 2 == 0 {
            whole
        } else {
            whole * SQRT_2
        }
    }
}

impl fmt::Display for PrescribedConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = 1i64 << (self.sqrt2_power / 2);
        match (self.sqrt2_power % 2, whole) {
            (0, w) => write!(f, "{w}"),
            (_, 1) => write!(f, "sqrt(2)"),
            (_, w) => write!(f, "{w}*sqrt(2)"),
        }
    }
}

impl Serialize for PrescribedConstant {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("PrescribedConstant", 2)?;
        s.serialize_field("sqrt2_power", &self.sqrt2_power)?;
        s.serialize_field("value", &self.value())?;
        s.end()
    }
}

/// Identity of the rule that produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Every exponent infinite: the left side is the largest coefficient
    /// magnitude, which basis vectors bound by the norm with constant 1.
    AllSup,
    /// Bilinear forms on two sup-norm spaces, both exponents at least 1:
    /// admissible exactly when 1/q_1 + 1/q_2 <= 3/2, with constant sqrt(2).
    BilinearLittlewood,
    /// Bilinear, p_1 > 2 >= p_2 > 1, subcritical: admissible exactly when
    /// q_1 >= 1/(1 - 1/p_1 - 1/p_2) and q_2 >= p_2', with constant 1.
    BilinearClassical,
    /// Bilinear, p_1 >= 2, p_2 > 1, subcritical: the two thresholds plus the
    /// budget 1/q_1 + 1/q_2 <= 3/2 - 1/p_1 - 1/p_2 cut out the exact region.
    BilinearUnified,
    /// Bilinear, both domain exponents above 1, reciprocal sum at least 1:
    /// admissible exactly when q_1 is infinite and q_2 >= p_2', constant 1.
    BilinearSupercritical,
    /// Uniform domain p_i = m: coordinatewise domination of the critical
    /// tuple suffices with constant 2^((m-2)/2); a finite q_1, q_2 < m, or
    /// q_k < m/(k-1) is fatal; anything else falls through.
    CriticalUniform,
    /// Trilinear uniform domain p_i = 3: admissible exactly when q_1 is
    /// infinite, q_2 >= 3, q_3 >= 3/2, and 1/q_2 + 1/q_3 <= 5/6.
    TrilinearCritical,
    /// Trilinear, p_2 >= 2, finite p_1 and p_3, 1/p_2 + 1/p_3 < 1, reciprocal
    /// sum at least 1: one forced supremum, two thresholds, and a budget.
    TrilinearSupercritical,
    /// All leading domain exponents above 2, the last in (1, 2], subcritical:
    /// admissible exactly when every q_i clears its tail threshold.
    SubcriticalTails,
    /// Reciprocal sum at most 1/2 and every exponent inside the box
    /// [1/(1 - sum), 2]: admissible exactly when
    /// sum 1/q_i <= (m+1)/2 - sum 1/p_i.
    SubcriticalBudget,
    /// All exponents equal and the domain subcritical: the flat threshold is
    /// 2m/(m+1-2s) for reciprocal sum s <= 1/2 and 1/(1-s) above, and it is
    /// sharp.
    FlatThreshold,
    /// Uniform domain, instance shaped as k suprema then one repeated finite
    /// exponent: the repeated exponent must reach p/(p - (m-k)), sharply.
    SupercriticalUniform,
    /// k leading suprema forced, middle domain exponents above 2, last in
    /// (1, 2], tail sum below 1, every leading position satisfying
    /// 1/p_j + tail >= 1: suprema plus tail thresholds, exactly.
    SupercriticalTails,
    /// The anisotropic exponent formula: under its range and supremum
    /// hypotheses the computed tuple is admissible (constant 2^((m-k-1)/2)
    /// when k >= 1), any missing supremum or sub-threshold exponent is fatal,
    /// and the strip between thresholds and formula stays open.
    AnisotropicFormula,
    /// k leading suprema, trailing domain exponents at least 2, tail sum at
    /// most 1/2, leading positions with 1/p_j + tail >= 1, trailing exponents
    /// inside [1/(1-tail), 2]: suprema plus a tail budget, exactly.
    SupercriticalBudget,
    /// Same domain shape with trailing exponents on the exact budget shell
    /// sum 1/q_i = (m-k+1)/2 - tail: admissible exactly when the k leading
    /// exponents are all infinite.
    SupercriticalShell,
    /// A finite q_i whose tail reciprocal sum reaches 1 is fatal: the
    /// diagonal tensor lifted onto positions i..m has norm 1 but mixed norm
    /// n^(1/q_i).
    SupForcing,
}

impl Rule {
    /// Stable kebab-case identifier used in output and CSV columns.
    pub fn tag(&self) -> &'static str {
        match self {
            Rule::AllSup => "all-sup",
            Rule::BilinearLittlewood => "bilinear-littlewood",
            Rule::BilinearClassical => "bilinear-classical",
            Rule::BilinearUnified => "bilinear-unified",
            Rule::BilinearSupercritical => "bilinear-supercritical",
            Rule::CriticalUniform => "critical-uniform",
            Rule::TrilinearCritical => "trilinear-critical",
            Rule::TrilinearSupercritical => "trilinear-supercritical",
            Rule::SubcriticalTails => "subcritical-tails",
            Rule::SubcriticalBudget => "subcritical-budget",
            Rule::FlatThreshold => "flat-threshold",
            Rule::SupercriticalUniform => "supercritical-uniform",
            Rule::SupercriticalTails => "supercritical-tails",
            Rule::AnisotropicFormula => "anisotropic-formula",
            Rule::SupercriticalBudget => "supercritical-budget",
            Rule::SupercriticalShell => "supercritical-shell",
            Rule::SupForcing => "sup-forcing",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.tag())
    }
}

/// Outcome, deciding rule, and prescribed constant for one instance.
///
/// `rule` is absent exactly on [`Outcome::Unknown`]; `constant` is only ever
/// present on [`Outcome::ProvablyAdmissible`] verdicts. An admissible verdict
/// without a constant means a dimension-free constant exists but no explicit
/// value is prescribed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<Rule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<PrescribedConstant>,
}

impl Verdict {
    fn unknown() -> Self {
        Verdict {
            outcome: Outcome::Unknown,
            rule: None,
            constant: None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.outcome)?;
        if let Some(rule) = self.rule {
            write!(f, " rule={rule}")?;
        }
        if let Some(c) = self.constant {
            write!(f, " constant={c}")?;
        }
        Ok(())
    }
}

type Opinion = (Outcome, Option<PrescribedConstant>);
type Evaluator = fn(&InequalityInstance) -> Option<Opinion>;

fn ee(n: i64) -> ExtendedExponent {
    ExtendedExponent::from_int(n).expect("positive integer literal")
}

fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn admit(constant: Option<PrescribedConstant>) -> Option<Opinion> {
    Some((Outcome::ProvablyAdmissible, constant))
}

fn reject() -> Option<Opinion> {
    Some((Outcome::ProvablyInadmissible, None))
}

fn decide(admissible: bool, constant: Option<PrescribedConstant>) -> Option<Opinion> {
    if admissible {
        admit(constant)
    } else {
        reject()
    }
}

fn all_sup(inst: &InequalityInstance) -> Option<Opinion> {
    if inst.exponents.iter().all(|q| q.is_infinite()) {
        admit(Some(PrescribedConstant::new(0)))
    } else {
        None
    }
}

fn bilinear_littlewood(inst: &InequalityInstance) -> Option<Opinion> {
    if inst.m != 2 || !(inst.p(1).is_infinite() && inst.p(2).is_infinite()) {
        return None;
    }
    if inst.q(1) < ee(1) || inst.q(2) < ee(1) {
        return None;
    }
    decide(
        inst.q_recip_sum(1, 2) <= rat(3, 2),
        Some(PrescribedConstant::new(1)),
    )
}

fn bilinear_classical(inst: &InequalityInstance) -> Option<Opinion> {
    if inst.m != 2 {
        return None;
    }
    let (p1, p2) = (inst.p(1), inst.p(2));
    if !(p1 > ee(2) && ee(1) < p2 && p2 <= ee(2)) {
        return None;
    }
    if inst.domain.recip_sum() >= Rational64::one() {
        return None;
    }
    let outer = dsp_exponent(&inst.domain).expect("reciprocal sum below 1");
    let inner = p2.conjugate().expect("p_2 above 1");
    decide(
        inst.q(1) >= outer && inst.q(2) >= inner,
        Some(PrescribedConstant::new(0)),
    )
}

fn bilinear_unified(inst: &InequalityInstance) -> Option<Opinion> {
    if inst.m != 2 {
        return None;
    }
    let (p1, p2) = (inst.p(1), inst.p(2));
    let sum = inst.domain.recip_sum();
    if !(p1 >= ee(2) && p2 > ee(1)) || sum >= Rational64::one() {
        return None;
    }
    let outer = dsp_exponent(&inst.domain).expect("reciprocal sum below 1");
    let inner = p2.conjugate().expect("p_2 above 1");
    let thresholds = inst.q(1) >= outer && inst.q(2) >= inner;
    let budget = inst.q_recip_sum(1, 2) <= rat(3, 2) - sum;
    decide(thresholds && budget, None)
}

fn bilinear_supercritical(inst: &InequalityInstance) -> Option<Opinion> {
    if inst.m != 2 {
        return None;
    }
    let (p1, p2) = (inst.p(1), inst.p(2));
    if !(p1 > ee(1) && p2 > ee(1)) || inst.domain.recip_sum() < Rational64::one() {
        return None;
    }
    let inner = p2.conjugate().expect("p_2 above 1");
    decide(
        inst.q(1).is_infinite() && inst.q(2) >= inner,
        Some(PrescribedConstant::new(0)),
    )
}

fn critical_uniform(inst: &InequalityInstance) -> Option<Opinion> {
    let m = inst.m;
    if m < 2 || !inst.domain.is_uniform(ee(m as i64)) {
        return None;
    }
    let crit = critical_exponents(m).expect("arity at least 2");
    if (1..=m).all(|i| inst.q(i) >= crit[i - 1]) {
        return admit(Some(PrescribedConstant::new(m as u32 - 2)));
    }
    if inst.q(1).is_finite() {
        return reject();
    }
    if inst.q(2) < ee(m as i64) {
        return reject();
    }
    if m >= 3 {
        let bounds = critical_lower_bounds(m).expect("arity at least 3");
        for (offset, bound) in bounds.iter().enumerate() {
            if inst.q(offset + 2) < *bound {
                return reject();
            }
        }
    }
    None
}

fn trilinear_critical(inst: &InequalityInstance) -> Option<Opinion> {
    if inst.m != 3 || !inst.domain.is_uniform(ee(3)) {
        return None;
    }
    let ok = inst.q(1).is_infinite()
        && inst.q(2) >= ee(3)
        && inst.q(3) >= ExtendedExponent::new(3, 2).expect("positive")
        && inst.q_recip_sum(2, 3) <= rat(5, 6);
    decide(ok, None)
}

fn trilinear_supercritical(inst: &InequalityInstance) -> Option<Opinion> {
    if inst.m != 3 {
        return None;
    }
    let (p1, p2, p3) = (inst.p(1), inst.p(2), inst.p(3));
    if !(p1.is_finite() && p1 > ee(1) && p3.is_finite() && p3 > ee(1) && p2 >= ee(2)) {
        return None;
    }
    let pair = p2.recip() + p3.recip();
    if pair >= Rational64::one() || inst.domain.recip_sum() < Rational64::one() {
        return None;
    }
    let mid = ExtendedExponent::from_recip(Rational64::one() - pair).expect("pair below 1");
    let inner = p3.conjugate().expect("p_3 above 1");
    let ok = inst.q(1).is_infinite()
        && inst.q(2) >= mid
        && inst.q(3) >= inner
        && inst.q_recip_sum(2, 3) <= rat(3, 2) - pair;
    decide(ok, None)
}

fn subcritical_tails(inst: &InequalityInstance) -> Option<Opinion> {
    let m = inst.m;
    if m < 2 {
        return None;
    }
    let pm = inst.p(m);
    if !(pm > ee(1) && pm <= ee(2)) || !(1..m).all(|i| inst.p(i) > ee(2)) {
        return None;
    }
    if inst.domain.recip_sum() >= Rational64::one() {
        return None;
    }
    let ok = (1..=m).all(|i| {
        inst.q(i) >= tail_delta(&inst.domain, i).expect("all tails below the full sum")
    });
    decide(ok, None)
}

fn subcritical_budget(inst: &InequalityInstance) -> Option<Opinion> {
    let m = inst.m;
    let sum = inst.domain.recip_sum();
    if sum > rat(1, 2) {
        return None;
    }
    let lo = dsp_exponent(&inst.domain).expect("reciprocal sum at most 1/2");
    let two = ee(2);
    if !(1..=m).all(|i| inst.q(i) >= lo && inst.q(i) <= two) {
        return None;
    }
    decide(
        inst.q_recip_sum(1, m) <= rat(m as i64 + 1, 2) - sum,
        None,
    )
}

fn flat_threshold(inst: &InequalityInstance) -> Option<Opinion> {
    let m = inst.m;
    let sum = inst.domain.recip_sum();
    if sum >= Rational64::one() {
        return None;
    }
    let flat = inst.q(1);
    if !(2..=m).all(|i| inst.q(i) == flat) {
        return None;
    }
    let threshold = if sum <= rat(1, 2) {
        pp_exponent(&inst.domain).expect("reciprocal sum at most 1/2")
    } else {
        dsp_exponent(&inst.domain).expect("reciprocal sum below 1")
    };
    decide(flat >= threshold, None)
}

fn supercritical_uniform(inst: &InequalityInstance) -> Option<Opinion> {
    let m = inst.m;
    let p = inst.p(1);
    if !p.is_finite() || !inst.domain.is_uniform(p) || p <= ee(1) || p > ee(2 * m as i64) {
        return None;
    }
    let k = supercritical_k(m, p).expect("range checked");
    if !(1..=k).all(|i| inst.q(i).is_infinite()) {
        return None;
    }
    let repeated = inst.q(k + 1);
    if !(k + 1..=m).all(|i| inst.q(i) == repeated) {
        return None;
    }
    let threshold = uniform_supercritical_exponent(m, p).expect("range checked");
    decide(repeated >= threshold, None)
}

fn supercritical_tails(inst: &InequalityInstance) -> Option<Opinion> {
    let m = inst.m;
    if m < 2 {
        return None;
    }
    let pm = inst.p(m);
    if !(pm > ee(1) && pm <= ee(2)) {
        return None;
    }
    for k in 1..m {
        if !(k + 1..m).all(|i| inst.p(i) > ee(2)) {
            continue;
        }
        let tail = inst.domain.recip_tail(k + 1);
        if tail >= Rational64::one() {
            continue;
        }
        if !(1..=k).all(|j| inst.p(j).recip() + tail >= Rational64::one()) {
            continue;
        }
        let sups = (1..=k).all(|i| inst.q(i).is_infinite());
        let tails_ok = (k + 1..=m).all(|i| {
            inst.q(i) >= tail_delta(&inst.domain, i).expect("tail sum below 1")
        });
        return decide(sups && tails_ok, None);
    }
    None
}

fn anisotropic_formula(inst: &InequalityInstance) -> Option<Opinion> {
    let m = inst.m;
    for k in 1..m {
        let Ok(ar) = ar_exponents(&inst.domain, k) else {
            continue;
        };
        if !ar.range_violations.is_empty() || !ar.sup_hypothesis_gaps.is_empty() {
            continue;
        }
        let sups = (1..=k).all(|i| inst.q(i).is_infinite());
        if sups && (k + 1..=m).all(|i| inst.q(i) >= ar.exponents[i - 1]) {
            return admit(Some(PrescribedConstant::new((m - k - 1) as u32)));
        }
        if !sups {
            return reject();
        }
        for i in k + 1..=m {
            let delta = tail_delta(&inst.domain, i).expect("tail sum below 1");
            if inst.q(i) < delta {
                return reject();
            }
        }
        return None;
    }
    if inst.domain.recip_sum() < Rational64::one() {
        if let Ok(ar) = ar_exponents(&inst.domain, 0) {
            if ar.range_violations.is_empty()
                && (1..=m).all(|i| inst.q(i) >= ar.exponents[i - 1])
            {
                return admit(None);
            }
        }
    }
    None
}

fn supercritical_budget(inst: &InequalityInstance) -> Option<Opinion> {
    let m = inst.m;
    let two = ee(2);
    for k in 1..m {
        if !(1..=k).all(|j| inst.p(j) <= two) || !(k + 1..=m).all(|i| inst.p(i) >= two) {
            continue;
        }
        let tail = inst.domain.recip_tail(k + 1);
        if tail > rat(1, 2) {
            continue;
        }
        if !(1..=k).all(|j| inst.p(j).recip() + tail >= Rational64::one()) {
            continue;
        }
        let lo = ExtendedExponent::from_recip(Rational64::one() - tail).expect("tail at most 1/2");
        if !(k + 1..=m).all(|i| inst.q(i) >= lo && inst.q(i) <= two) {
            return None;
        }
        let sups = (1..=k).all(|i| inst.q(i).is_infinite());
        let budget = inst.q_recip_sum(k + 1, m) <= rat((m - k + 1) as i64, 2) - tail;
        return decide(sups && budget, None);
    }
    None
}

fn supercritical_shell(inst: &InequalityInstance) -> Option<Opinion> {
    let m = inst.m;
    let two = ee(2);
    for k in 1..m {
        if !(1..=k).all(|j| inst.p(j) <= two) || !(k + 1..=m).all(|i| inst.p(i) >= two) {
            continue;
        }
        let tail = inst.domain.recip_tail(k + 1);
        if tail > rat(1, 2) {
            continue;
        }
        let lo = ExtendedExponent::from_recip(Rational64::one() - tail).expect("tail at most 1/2");
        if !(k + 1..=m).all(|i| inst.q(i) >= lo && inst.q(i) <= two) {
            continue;
        }
        if inst.q_recip_sum(k + 1, m) != rat((m - k + 1) as i64, 2) - tail {
            continue;
        }
        return decide((1..=k).all(|i| inst.q(i).is_infinite()), None);
    }
    None
}

fn sup_forcing(inst: &InequalityInstance) -> Option<Opinion> {
    for i in 1..=inst.m {
        if inst.q(i).is_finite() && inst.domain.recip_tail(i) >= Rational64::one() {
            return reject();
        }
    }
    None
}

const RULE_TABLE: [(Rule, Evaluator); 17] = [
    (Rule::AllSup, all_sup),
    (Rule::BilinearLittlewood, bilinear_littlewood),
    (Rule::BilinearClassical, bilinear_classical),
    (Rule::BilinearUnified, bilinear_unified),
    (Rule::BilinearSupercritical, bilinear_supercritical),
    (Rule::CriticalUniform, critical_uniform),
    (Rule::TrilinearCritical, trilinear_critical),
    (Rule::TrilinearSupercritical, trilinear_supercritical),
    (Rule::SubcriticalTails, subcritical_tails),
    (Rule::SubcriticalBudget, subcritical_budget),
    (Rule::FlatThreshold, flat_threshold),
    (Rule::SupercriticalUniform, supercritical_uniform),
    (Rule::SupercriticalTails, supercritical_tails),
    (Rule::AnisotropicFormula, anisotropic_formula),
    (Rule::SupercriticalBudget, supercritical_budget),
    (Rule::SupercriticalShell, supercritical_shell),
    (Rule::SupForcing, sup_forcing),
];

/// Decides one instance by walking the rule table in order; the first rule
/// with an opinion wins and is credited in the verdict.
pub fn admissibility(instance: &InequalityInstance) -> Verdict {
    for (rule, evaluator) in RULE_TABLE {
        if let Some((outcome, constant)) = evaluator(instance) {
            return Verdict {
                outcome,
                rule: Some(rule),
                constant,
            };
        }
    }
    Verdict::unknown()
}

/// Every rule's opinion on the instance, in table order, silent rules
/// omitted. Used to check that overlapping rules never disagree.
pub fn evaluate_rules(instance: &InequalityInstance) -> Vec<Verdict> {
    RULE_TABLE
        .iter()
        .filter_map(|(rule, evaluator)| {
            evaluator(instance).map(|(outcome, constant)| Verdict {
                outcome,
                rule: Some(*rule),
                constant,
            })
        })
        .collect()
}
