//! Closed-form exponent maps: thresholds, critical tuples, tail corrections,
//! and the supercritical depth count.
//!
//! Every function here is exact rational arithmetic. Positions are 1-based.

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::extended::ExtendedExponent;
use super::instance::{DomainTuple, IndexSet};
use super::ExponentError;

/// Position of the reciprocal sum Σ 1/p_i relative to 1.
///
/// The sum decides how many exponents are forced to infinity: below 1 none
/// are, at 1 exactly the outermost is, above 1 several may be.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criticality {
    /// Σ 1/p_i < 1.
    Subcritical,
    /// Σ 1/p_i = 1.
    Critical,
    /// Σ 1/p_i > 1.
    Supercritical,
}

/// Sum of reciprocals Σ_{i∈S} 1/p_i as an exact rational; infinite entries
/// contribute 0 and the empty set sums to 0.
pub fn harmonic_sum(domain: &DomainTuple, s: &IndexSet) -> Result<Rational64, ExponentError> {
    if s.m() != domain.arity() {
        return Err(ExponentError::Arity {
            expected: domain.arity(),
            got: s.m(),
        });
    }
    Ok(s.iter().map(|i| domain.at(i).recip()).sum())
}

/// Classifies the domain by comparing Σ 1/p_i with 1 exactly.
pub fn criticality_class(domain: &DomainTuple) -> Criticality {
    let sum = domain.recip_sum();
    let one = Rational64::one();
    if sum < one {
        Criticality::Subcritical
    } else if sum == one {
        Criticality::Critical
    } else {
        Criticality::Supercritical
    }
}

/// The single-exponent threshold 1/(1 − Σ 1/p_i) for domains with
/// Σ 1/p_i < 1; the smallest q such that a flat ℓ_q bound holds with a
/// dimension-free constant.
pub fn dsp_exponent(domain: &DomainTuple) -> Result<ExtendedExponent, ExponentError> {
    let sum = domain.recip_sum();
    if sum >= Rational64::one() {
        return Err(ExponentError::Precondition(format!(
            "reciprocal sum {sum} must be below 1"
        )));
    }
    ExtendedExponent::from_recip(Rational64::one() - sum)
}

/// The flat threshold 2m/(m + 1 − 2 Σ 1/p_i) for domains with Σ 1/p_i ≤ 1/2.
pub fn pp_exponent(domain: &DomainTuple) -> Result<ExtendedExponent, ExponentError> {
    let sum = domain.recip_sum();
    if sum > Rational64::new(1, 2) {
        return Err(ExponentError::Precondition(format!(
            "reciprocal sum {sum} must be at most 1/2"
        )));
    }
    let m = domain.arity() as i64;
    let denom = Rational64::from_integer(m + 1) - Rational64::from_integer(2) * sum;
    ExtendedExponent::from_rational(Rational64::from_integer(2 * m) / denom)
}

/// The optimal exponent tuple for the uniform domain p_i = m: q_1 = ∞ and
/// q_k = 2m(m−1)/(mk − 2k + 2) for k = 2..m.
pub fn critical_exponents(m: usize) -> Result<Vec<ExtendedExponent>, ExponentError> {
    if m < 2 {
        return Err(ExponentError::Precondition(format!(
            "critical tuple needs arity at least 2, got {m}"
        )));
    }
    let mi = m as i64;
    let mut out = vec![ExtendedExponent::INFINITY];
    for k in 2..=mi {
        let q = Rational64::new(2 * mi * (mi - 1), mi * k - 2 * k + 2);
        out.push(ExtendedExponent::from_rational(q)?);
    }
    Ok(out)
}

/// Necessary lower bounds (m/(k−1))_{k=2..m} that every admissible exponent
/// tuple for the uniform domain p_i = m must respect, stated for m ≥ 3.
pub fn critical_lower_bounds(m: usize) -> Result<Vec<ExtendedExponent>, ExponentError> {
    if m < 3 {
        return Err(ExponentError::Precondition(format!(
            "lower bounds are stated for arity at least 3, got {m}"
        )));
    }
    let mi = m as i64;
    (2..=mi)
        .map(|k| ExtendedExponent::from_rational(Rational64::new(mi, k - 1)))
        .collect()
}

/// The tail threshold 1/(1 − Σ_{j=i..m} 1/p_j); defined only when the tail
/// sum is below 1.
pub fn tail_delta(domain: &DomainTuple, i: usize) -> Result<ExtendedExponent, ExponentError> {
    if i == 0 || i > domain.arity() {
        return Err(ExponentError::Precondition(format!(
            "position {i} outside 1..={}",
            domain.arity()
        )));
    }
    let tail = domain.recip_tail(i);
    if tail >= Rational64::one() {
        return Err(ExponentError::Precondition(format!(
            "tail reciprocal sum from position {i} is {tail}, must be below 1"
        )));
    }
    ExtendedExponent::from_recip(Rational64::one() - tail)
}

/// Strict ceiling min{n ∈ ℤ : n > x}; in particular strict_ceil(0) = 1.
fn strict_ceil(x: Rational64) -> i64 {
    x.floor().to_integer() + 1
}

/// Number of leading exponents forced to infinity for the uniform domain
/// p_i = p: k = max{0, ⌈m − p⌉} with the strict ceiling, so p = m gives k = 1.
pub fn supercritical_k(m: usize, p: ExtendedExponent) -> Result<usize, ExponentError> {
    let mi = m as i64;
    let one = ExtendedExponent::from_int(1)?;
    let cap = ExtendedExponent::from_int(2 * mi)?;
    if p <= one || p > cap {
        return Err(ExponentError::Precondition(format!(
            "uniform exponent {p} outside (1, {}]",
            2 * mi
        )));
    }
    let p = p.as_rational().expect("bounded above, hence finite");
    let k = strict_ceil(Rational64::from_integer(mi) - p).max(0);
    Ok(k as usize)
}

/// The sharp threshold p/(p − (m − k)) for the single finite exponent that
/// remains after k = supercritical_k(m, p) leading suprema on the uniform
/// domain p_i = p.
pub fn uniform_supercritical_exponent(
    m: usize,
    p: ExtendedExponent,
) -> Result<ExtendedExponent, ExponentError> {
    let k = supercritical_k(m, p)? as i64;
    let p = p.as_rational().expect("checked finite by supercritical_k");
    let denom = p - Rational64::from_integer(m as i64 - k);
    ExtendedExponent::from_rational(p / denom)
}

/// Exponent tuple produced by [`ar_exponents`], together with exact flags for
/// every stated hypothesis or screening condition the input fails.
///
/// The formula is evaluated whenever it is arithmetically defined; violated
/// range hypotheses are reported rather than rejected, because the screening
/// status of anisotropic tuples is itself a question the experiments probe.
#[derive(Clone, Debug, PartialEq)]
pub struct ArExponents {
    /// Number of leading positions pinned to ∞.
    pub k: usize,
    /// The full m-tuple: k infinities, then the computed finite exponents.
    pub exponents: Vec<ExtendedExponent>,
    /// Positions whose domain exponent lies outside the stated range
    /// ([1, 2m] when k = 0; (1, 2(m−k)] for positions above k when k ≥ 1).
    pub range_violations: Vec<usize>,
    /// Leading positions j ≤ k with 1/p_j + Σ_{i>k} 1/p_i < 1, so the
    /// argument pinning q_j = ∞ loses its hypothesis there.
    pub sup_hypothesis_gaps: Vec<usize>,
    /// Positions i > k whose computed q_i falls outside [tail_delta(i), 2].
    pub outside_box: Vec<usize>,
    /// Positive excess of Σ_{i>k} 1/q_i over (m−k+1)/2 − Σ_{i>k} 1/p_i,
    /// when the computed tuple overshoots that budget.
    pub budget_excess: Option<Rational64>,
}

/// Anisotropic exponent tuple: q_1 = … = q_k = ∞ and, for i > k,
/// 1/q_i = 1/2 + (m−i+1)/(2(m−k)) − Σ_{j=i..m} 1/p_j (k = 0 means no suprema
/// and the plain formula with denominator 2m).
///
/// Hard errors: k out of range, tail sum Σ_{i>k} 1/p_i ≥ 1 (the formula's
/// tail corrections collapse), or any computed reciprocal ≤ 0 (no finite
/// exponent exists at that position). Everything else the stated hypotheses
/// ask for is checked exactly and reported in the flag fields.
pub fn ar_exponents(domain: &DomainTuple, k: usize) -> Result<ArExponents, ExponentError> {
    let m = domain.arity();
    if k >= m {
        return Err(ExponentError::Precondition(format!(
            "k = {k} must be below the arity {m}"
        )));
    }
    let tail_after_k = domain.recip_tail(k + 1);
    if tail_after_k >= Rational64::one() {
        return Err(ExponentError::Precondition(format!(
            "reciprocal sum over positions {}..{m} is {tail_after_k}, must be below 1",
            k + 1
        )));
    }

    let mut range_violations = Vec::new();
    if k == 0 {
        let cap = ExtendedExponent::from_int(2 * m as i64)?;
        for i in 1..=m {
            if domain.at(i) > cap {
                range_violations.push(i);
            }
        }
    } else {
        let one = ExtendedExponent::from_int(1)?;
        let cap = ExtendedExponent::from_int(2 * (m - k) as i64)?;
        for i in k + 1..=m {
            let p = domain.at(i);
            if p <= one || p > cap {
                range_violations.push(i);
            }
        }
    }

    let mut sup_hypothesis_gaps = Vec::new();
    for j in 1..=k {
        if domain.at(j).recip() + tail_after_k < Rational64::one() {
            sup_hypothesis_gaps.push(j);
        }
    }

    let half = Rational64::new(1, 2);
    let denom = 2 * (m - k) as i64;
    let mut exponents = vec![ExtendedExponent::INFINITY; k];
    let mut recip_sum = Rational64::zero();
    let mut outside_box = Vec::new();
    let two = ExtendedExponent::from_int(2)?;
    for i in k + 1..=m {
        let recip = half + Rational64::new((m - i + 1) as i64, denom) - domain.recip_tail(i);
        if recip <= Rational64::zero() {
            return Err(ExponentError::NonPositiveReciprocal {
                position: i,
                value: recip.to_string(),
            });
        }
        recip_sum += recip;
        let q = ExtendedExponent::from_recip(recip)?;
        let delta = tail_delta(domain, i).expect("tail below 1 was checked above");
        if q < delta || q > two {
            outside_box.push(i);
        }
        exponents.push(q);
    }

    let budget = Rational64::new((m - k + 1) as i64, 2) - tail_after_k;
    let budget_excess = (recip_sum > budget).then(|| recip_sum - budget);

    Ok(ArExponents {
        k,
        exponents,
        range_violations,
        sup_hypothesis_gaps,
        outside_box,
        budget_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::super::extended::exp;
    use super::*;

    fn dom(list: &str) -> DomainTuple {
        DomainTuple::parse(list).unwrap()
    }

    fn exps(list: &str) -> Vec<ExtendedExponent> {
        list.split(',').map(exp).collect()
    }

    #[test]
    fn harmonic_sum_over_index_sets() {
        let p = dom("3,3,3");
        let full = IndexSet::full(3);
        assert_eq!(harmonic_sum(&p, &full).unwrap(), Rational64::one());
        let p = dom("inf,inf");
        assert_eq!(
            harmonic_sum(&p, &IndexSet::full(2)).unwrap(),
            Rational64::zero()
        );
        let p = dom("2,8,8");
        let s = IndexSet::new(3, [2, 3]).unwrap();
        assert_eq!(harmonic_sum(&p, &s).unwrap(), Rational64::new(1, 4));
        let empty = IndexSet::new(3, []).unwrap();
        assert_eq!(harmonic_sum(&p, &empty).unwrap(), Rational64::zero());
        assert!(harmonic_sum(&p, &IndexSet::full(2)).is_err());
    }

    #[test]
    fn criticality_trichotomy() {
        assert_eq!(criticality_class(&dom("4,4")), Criticality::Subcritical);
        assert_eq!(criticality_class(&dom("3,3,3")), Criticality::Critical);
        assert_eq!(
            criticality_class(&dom("2,2,8,8")),
            Criticality::Supercritical
        );
    }

    #[test]
    fn dsp_threshold_values() {
        assert_eq!(dsp_exponent(&dom("4,4")).unwrap(), exp("2"));
        assert_eq!(dsp_exponent(&dom("2,8,8")).unwrap(), exp("4"));
        assert_eq!(dsp_exponent(&dom("inf,inf,inf")).unwrap(), exp("1"));
        assert!(dsp_exponent(&dom("3,3,3")).is_err());
        assert!(dsp_exponent(&dom("2,2")).is_err());
    }

    #[test]
    fn pp_threshold_values() {
        assert_eq!(pp_exponent(&dom("inf,inf")).unwrap(), exp("4/3"));
        assert_eq!(pp_exponent(&dom("inf,inf,inf")).unwrap(), exp("3/2"));
        assert_eq!(pp_exponent(&dom("4,4")).unwrap(), exp("2"));
        assert!(pp_exponent(&dom("3,3")).is_err());
    }

    #[test]
    fn thresholds_agree_at_the_junction() {
        for list in ["4,4", "2,inf", "8,8/3", "6,3", "8,8,8,8"] {
            let p = dom(list);
            assert_eq!(p.recip_sum(), Rational64::new(1, 2), "sweep domain {list}");
            assert_eq!(dsp_exponent(&p).unwrap(), exp("2"));
            assert_eq!(pp_exponent(&p).unwrap(), exp("2"));
        }
    }

    #[test]
    fn critical_tuples_match_frozen_values() {
        assert_eq!(critical_exponents(3).unwrap(), exps("inf,3,12/5"));
        assert_eq!(critical_exponents(2).unwrap(), exps("inf,2"));
        assert_eq!(critical_exponents(4).unwrap(), exps("inf,4,3,12/5"));
        assert!(critical_exponents(1).is_err());
        for m in 2..=8 {
            let q = critical_exponents(m).unwrap();
            assert_eq!(q[1], ExtendedExponent::from_int(m as i64).unwrap());
        }
    }

    #[test]
    fn critical_tuple_respects_lower_bounds() {
        assert_eq!(critical_lower_bounds(3).unwrap(), exps("3,3/2"));
        assert_eq!(critical_lower_bounds(4).unwrap(), exps("4,2,4/3"));
        assert_eq!(critical_lower_bounds(5).unwrap(), exps("5,5/2,5/3,5/4"));
        assert!(critical_lower_bounds(2).is_err());
        for m in 3..=8 {
            let q = critical_exponents(m).unwrap();
            let bounds = critical_lower_bounds(m).unwrap();
            for (k, bound) in bounds.iter().enumerate() {
                assert!(q[k + 1] >= *bound, "m={m} position {}", k + 2);
            }
        }
    }

    #[test]
    fn tail_delta_values() {
        let p = dom("4,4,4");
        assert_eq!(tail_delta(&p, 3).unwrap(), exp("4/3"));
        assert_eq!(tail_delta(&p, 1).unwrap(), exp("4"));
        let p = dom("3,3,3");
        assert_eq!(tail_delta(&p, 2).unwrap(), exp("3"));
        assert!(tail_delta(&p, 1).is_err());
        assert!(tail_delta(&p, 4).is_err());
    }

    #[test]
    fn supercritical_depth_uses_strict_ceiling() {
        assert_eq!(supercritical_k(3, exp("3")).unwrap(), 1);
        assert_eq!(supercritical_k(2, exp("4")).unwrap(), 0);
        assert_eq!(supercritical_k(3, exp("2")).unwrap(), 2);
        assert_eq!(supercritical_k(3, exp("6")).unwrap(), 0);
        assert_eq!(supercritical_k(4, exp("7/2")).unwrap(), 1);
        assert!(supercritical_k(3, exp("1")).is_err());
        assert!(supercritical_k(3, exp("13/2")).is_err());
        assert!(supercritical_k(3, exp("inf")).is_err());
    }

    #[test]
    fn uniform_supercritical_thresholds() {
        assert_eq!(uniform_supercritical_exponent(3, exp("3")).unwrap(), exp("3"));
        assert_eq!(uniform_supercritical_exponent(2, exp("4")).unwrap(), exp("2"));
        assert_eq!(uniform_supercritical_exponent(3, exp("2")).unwrap(), exp("2"));
        assert_eq!(
            uniform_supercritical_exponent(2, exp("4")).unwrap(),
            dsp_exponent(&dom("4,4")).unwrap()
        );
    }

    #[test]
    fn anisotropic_tuple_without_suprema() {
        let r = ar_exponents(&dom("4,4"), 0).unwrap();
        assert_eq!(r.exponents, exps("2,2"));
        assert!(r.range_violations.is_empty());
        assert!(r.outside_box.is_empty());
        assert_eq!(r.budget_excess, None);
    }

    #[test]
    fn anisotropic_tuple_recovers_critical_case() {
        let r = ar_exponents(&dom("3,3,3"), 1).unwrap();
        assert_eq!(r.exponents, exps("inf,3,12/5"));
        assert!(r.range_violations.is_empty());
        assert!(r.sup_hypothesis_gaps.is_empty());
        assert_eq!(r.outside_box, vec![2, 3], "3 and 12/5 exceed the upper screen 2");
        assert_eq!(r.budget_excess, None);
        for m in 2..=6 {
            let p = DomainTuple::uniform(m, ExtendedExponent::from_int(m as i64).unwrap())
                .unwrap();
            let k = supercritical_k(m, ExtendedExponent::from_int(m as i64).unwrap()).unwrap();
            assert_eq!(k, 1);
            let r = ar_exponents(&p, k).unwrap();
            assert_eq!(r.exponents, critical_exponents(m).unwrap(), "m = {m}");
        }
    }

    #[test]
    fn anisotropic_tuple_flags_violated_hypotheses() {
        let r = ar_exponents(&dom("2,2,8,8"), 2).unwrap();
        assert_eq!(r.exponents, exps("inf,inf,4/3,8/5"));
        assert_eq!(r.range_violations, vec![3, 4]);
        assert_eq!(r.sup_hypothesis_gaps, vec![1, 2]);
        assert!(r.outside_box.is_empty());
        assert_eq!(r.budget_excess, Some(Rational64::new(1, 8)));
    }

    #[test]
    fn anisotropic_tuple_rejects_undefined_inputs() {
        assert!(ar_exponents(&dom("3,3,3"), 0).is_err());
        assert!(ar_exponents(&dom("2,2,2"), 1).is_err());
        assert!(ar_exponents(&dom("3,3,3"), 3).is_err());
        let err = ar_exponents(&dom("8,5/4"), 0).unwrap_err();
        assert!(matches!(
            err,
            ExponentError::NonPositiveReciprocal { position: 2, .. }
        ));
    }
}
