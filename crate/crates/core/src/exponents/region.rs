//! Rectangular sweeps of the admissibility oracle over two exponent axes.

use num_rational::Rational64;
use num_traits::Zero;
use serde::Serialize;

use super::admissibility::{admissibility, Verdict};
use super::extended::ExtendedExponent;
use super::instance::{DomainTuple, InequalityInstance};
use super::ExponentError;

/// One swept axis: the exponent slot that varies and the inclusive range
/// walked in exact rational steps.
#[derive(Clone, Debug)]
pub struct GridAxis {
    position: usize,
    min: Rational64,
    max: Rational64,
    step: Rational64,
}

impl GridAxis {
    /// `position` is the 1-based exponent slot; the axis takes the values
    /// `min, min + step, ...` up to and including `max` when the step lands
    /// on it exactly.
    pub fn new(
        position: usize,
        min: Rational64,
        max: Rational64,
        step: Rational64,
    ) -> Result<Self, ExponentError> {
        if min <= Rational64::zero() {
            return Err(ExponentError::NonPositive(min.to_string()));
        }
        if step <= Rational64::zero() {
            return Err(ExponentError::Precondition(format!(
                "step {step} must be positive"
            )));
        }
        if min > max {
            return Err(ExponentError::Precondition(format!(
                "empty axis range: {min} > {max}"
            )));
        }
        Ok(GridAxis {
            position,
            min,
            max,
            step,
        })
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn values(&self) -> Vec<Rational64> {
        let mut out = Vec::new();
        let mut v = self.min;
        while v <= self.max {
            out.push(v);
            v += self.step;
        }
        out
    }
}

/// Verdict at one lattice point of a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct GridCell {
    pub q_axis1: ExtendedExponent,
    pub q_axis2: ExtendedExponent,
    pub verdict: Verdict,
}

/// A full two-axis sweep, cells in row-major order: the first axis is the
/// outer loop, the second the inner.
#[derive(Clone, Debug, Serialize)]
pub struct RegionGrid {
    pub positions: (usize, usize),
    pub axis1_values: Vec<ExtendedExponent>,
    pub axis2_values: Vec<ExtendedExponent>,
    pub cells: Vec<GridCell>,
}

impl RegionGrid {
    /// Cell at axis1 index `i` and axis2 index `j`.
    pub fn cell(&self, i: usize, j: usize) -> &GridCell {
        &self.cells[i * self.axis2_values.len() + j]
    }
}

/// Evaluates the admissibility oracle on every lattice point of the two
/// axes, holding the remaining exponents at the values in `template`.
///
/// `template` must have the domain's arity; its entries at the two axis
/// positions are ignored and overwritten per cell. A degenerate axis with
/// `min == max` contributes a single line of cells.
pub fn region_grid(
    domain: &DomainTuple,
    template: &[ExtendedExponent],
    axis1: &GridAxis,
    axis2: &GridAxis,
) -> Result<RegionGrid, ExponentError> {
    let m = domain.arity();
    if template.len() != m {
        return Err(ExponentError::Arity {
            expected: m,
            got: template.len(),
        });
    }
    for axis in [axis1, axis2] {
        if axis.position == 0 || axis.position > m {
            return Err(ExponentError::Precondition(format!(
                "axis position {} outside 1..={m}",
                axis.position
            )));
        }
    }
    if axis1.position == axis2.position {
        return Err(ExponentError::Precondition(format!(
            "axes must use distinct positions, both are {}",
            axis1.position
        )));
    }

    let axis1_values: Vec<ExtendedExponent> = axis1
        .values()
        .into_iter()
        .map(|v| ExtendedExponent::from_rational(v).expect("validated positive"))
        .collect();
    let axis2_values: Vec<ExtendedExponent> = axis2
        .values()
        .into_iter()
        .map(|v| ExtendedExponent::from_rational(v).expect("validated positive"))
        .collect();

    let mut cells = Vec::with_capacity(axis1_values.len() * axis2_values.len());
    for &a in &axis1_values {
        for &b in &axis2_values {
            let mut exponents = template.to_vec();
            exponents[axis1.position - 1] = a;
            exponents[axis2.position - 1] = b;
            let instance = InequalityInstance::new(domain.clone(), exponents)?;
            cells.push(GridCell {
                q_axis1: a,
                q_axis2: b,
                verdict: admissibility(&instance),
            });
        }
    }

    Ok(RegionGrid {
        positions: (axis1.position, axis2.position),
        axis1_values,
        axis2_values,
        cells,
    })
}
