//! Instance plumbing: domain tuples, index sets, and the (p, q) pair every
//! admissibility question quantifies over.
//!
//! Positions are 1-based throughout this module, matching the subscripts
//! j_1, ..., j_m used in the mathematical statements; the tensor layer converts
//! to 0-based storage indices internally.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::extended::ExtendedExponent;
use super::ExponentError;

/// The domain side of an instance: exponents p_1, ..., p_m with every p_i >= 1,
/// describing the spaces `l_{p_1}^n x ... x l_{p_m}^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainTuple {
    entries: Vec<ExtendedExponent>,
}

impl DomainTuple {
    /// Validates that the tuple is nonempty and every entry is at least 1.
    pub fn new(entries: Vec<ExtendedExponent>) -> Result<Self, ExponentError> {
        if entries.is_empty() {
            return Err(ExponentError::Precondition(
                "domain tuple must have at least one entry".into(),
            ));
        }
        let one = ExtendedExponent::from_int(1).expect("1 is positive");
        for (i, p) in entries.iter().enumerate() {
            if *p < one {
                return Err(ExponentError::DomainBelowOne(format!(
                    "p_{} = {p}",
                    i + 1
                )));
            }
        }
        Ok(DomainTuple { entries })
    }

    /// Parses a comma-separated list of exponent literals, e.g. `"3,3,3"`.
    pub fn parse(list: &str) -> Result<Self, ExponentError> {
        let entries = list
            .split(',')
            .map(|s| s.parse())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(entries)
    }

    /// A uniform tuple (p, ..., p) of the given arity.
    pub fn uniform(m: usize, p: ExtendedExponent) -> Result<Self, ExponentError> {
        Self::new(vec![p; m])
    }

    pub fn arity(&self) -> usize {
        self.entries.len()
    }

    /// The exponent at 1-based position `i`.
    pub fn at(&self, i: usize) -> ExtendedExponent {
        self.entries[i - 1]
    }

    pub fn entries(&self) -> &[ExtendedExponent] {
        &self.entries
    }

    /// Exact sum of reciprocals 1/p_i over the whole tuple.
    pub fn recip_sum(&self) -> Rational64 {
        self.entries.iter().map(|p| p.recip()).sum()
    }

    /// Exact sum of reciprocals over positions i..=m (1-based tail).
    pub fn recip_tail(&self, i: usize) -> Rational64 {
        self.entries[i - 1..].iter().map(|p| p.recip()).sum()
    }

    /// Whether all entries equal the given exponent.
    pub fn is_uniform(&self, p: ExtendedExponent) -> bool {
        self.entries.iter().all(|&e| e == p)
    }
}

impl fmt::Display for DomainTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A subset S of the coordinate positions {1, ..., m}; the complement is
/// written S-hat in the sup-extension arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    m: usize,
    members: BTreeSet<usize>,
}

impl IndexSet {
    /// Builds S from 1-based positions; every position must lie in {1..m}.
    pub fn new(m: usize, members: impl IntoIterator<Item = usize>) -> Result<Self, ExponentError> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        for &i in &members {
            if i == 0 || i > m {
                return Err(ExponentError::Precondition(format!(
                    "index {i} outside 1..={m}"
                )));
            }
        }
        Ok(IndexSet { m, members })
    }

    /// The full set {1, ..., m}.
    pub fn full(m: usize) -> Self {
        IndexSet {
            m,
            members: (1..=m).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    /// The complement {1..m} \ S.
    pub fn complement(&self) -> IndexSet {
        IndexSet {
            m: self.m,
            members: (1..=self.m).filter(|i| !self.members.contains(i)).collect(),
        }
    }
}

/// One candidate inequality: arity, domain tuple p, and exponent tuple q.
///
/// The exponent tuple is ordered outermost-first: `exponents[0]` is q_1 (the
/// outermost collapse level), `exponents[m-1]` is q_m (innermost, collapsed
/// first). Entries may be any positive rational or infinity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityInstance {
    pub m: usize,
    pub domain: DomainTuple,
    pub exponents: Vec<ExtendedExponent>,
}

impl InequalityInstance {
    pub fn new(
        domain: DomainTuple,
        exponents: Vec<ExtendedExponent>,
    ) -> Result<Self, ExponentError> {
        if domain.arity() != exponents.len() {
            return Err(ExponentError::Arity {
                expected: domain.arity(),
                got: exponents.len(),
            });
        }
        Ok(InequalityInstance {
            m: domain.arity(),
            domain,
            exponents,
        })
    }

    /// The exponent q_i at 1-based position `i`.
    pub fn q(&self, i: usize) -> ExtendedExponent {
        self.exponents[i - 1]
    }

    /// The domain exponent p_i at 1-based position `i`.
    pub fn p(&self, i: usize) -> ExtendedExponent {
        self.domain.at(i)
    }

    /// Exact sum of exponent reciprocals 1/q_i over positions `from..=to`.
    pub fn q_recip_sum(&self, from: usize, to: usize) -> Rational64 {
        if from > to {
            return Rational64::zero();
        }
        self.exponents[from - 1..=to - 1]
            .iter()
            .map(|q| q.recip())
            .sum()
    }

    /// Positions with finite exponents, in increasing order.
    pub fn finite_positions(&self) -> Vec<usize> {
        (1..=self.m).filter(|&i| self.q(i).is_finite()).collect()
    }
}

impl fmt::Display for InequalityInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.exponents.iter().map(|e| e.to_string()).collect();
        write!(f, "m={} p={} q=({})", self.m, self.domain, qs.join(","))
    }
}
