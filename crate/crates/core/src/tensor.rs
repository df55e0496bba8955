//! Dense coefficient tensors for m-linear forms and their nested mixed norms.
//!
//! A tensor `a` with arity `m` and per-axis dimension `n` represents the form
//! `T(x_1, ..., x_m) = sum a[j_1, ..., j_m] x_1[j_1] ... x_m[j_m]`, so the
//! entry at `(j_1, ..., j_m)` is `T(e_{j_1}, ..., e_{j_m})`. Storage is dense
//! row-major with axis 1 slowest. Axis positions are 1-based to match the
//! exponent layer; element coordinates are 0-based like every Rust slice.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::{ExtendedExponent, IndexSet, InequalityInstance};

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("arity mismatch: tensor has {tensor}, spec has {spec}")]
    Arity { tensor: usize, spec: usize },
    #[error("bad dimensions: {0}")]
    Dimension(String),
    #[error("coefficient {index} is not finite")]
    NonFinite { index: usize },
    #[error("index out of range: {0}")]
    Index(String),
    #[error("unreadable tensor file: {0}")]
    Format(String),
}

/// Coefficients of an m-linear form on `R^n x ... x R^n`, stored dense.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTensor {
    m: usize,
    n: usize,
    coeffs: Vec<f64>,
}

fn dense_len(m: usize, n: usize) -> Result<usize, TensorError> {
    n.checked_pow(m as u32)
        .ok_or_else(|| TensorError::Dimension(format!("n^m overflows for n={n}, m={m}")))
}

impl CoefficientTensor {
    /// Wraps a dense coefficient array. `coeffs[j]` holds the entry whose
    /// multi-index digits in base `n` (axis 1 most significant) equal `j`.
    pub fn new(m: usize, n: usize, coeffs: Vec<f64>) -> Result<Self, TensorError> {
        if m == 0 || n == 0 {
            return Err(TensorError::Dimension(format!(
                "arity and dimension must be at least 1, got m={m}, n={n}"
            )));
        }
        let expected = dense_len(m, n)?;
        if coeffs.len() != expected {
            return Err(TensorError::Dimension(format!(
                "expected {expected} coefficients for m={m}, n={n}, got {}",
                coeffs.len()
            )));
        }
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(TensorError::NonFinite { index });
        }
        Ok(CoefficientTensor { m, n, coeffs })
    }

    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Entry at 0-based coordinates, one per axis.
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.coeffs[self.offset(idx)]
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.m);
        let mut off = 0;
        for &j in idx {
            debug_assert!(j < self.n);
            off = off * self.n + j;
        }
        off
    }

    pub fn scale(&self, factor: f64) -> Result<Self, TensorError> {
        CoefficientTensor::new(
            self.m,
            self.n,
            self.coeffs.iter().map(|c| factor * c).collect(),
        )
    }

    /// Applies `T` to the given block vectors (one length-`n` vector per
    /// axis), contracting the innermost axis first.
    pub fn apply(&self, blocks: &[Vec<f64>]) -> Result<f64, TensorError> {
        if blocks.len() != self.m {
            return Err(TensorError::Arity {
                tensor: self.m,
                spec: blocks.len(),
            });
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.len() != self.n {
                return Err(TensorError::Dimension(format!(
                    "block {} has length {}, expected {}",
                    i + 1,
                    b.len(),
                    self.n
                )));
            }
        }
        let mut buffer = self.coeffs.clone();
        for block in blocks.iter().rev() {
            buffer = contract_innermost(&buffer, block, self.n);
        }
        Ok(buffer[0])
    }

    /// Contracts every axis except `free` (1-based) against the given block
    /// vectors; entry `free`'s vector is ignored. Returns the length-`n`
    /// coefficient vector of the resulting linear functional.
    pub fn contract_all_but(&self, blocks: &[Vec<f64>], free: usize) -> Vec<f64> {
        debug_assert_eq!(blocks.len(), self.m);
        debug_assert!((1..=self.m).contains(&free));
        let mut out = vec![0.0; self.n];
        let mut idx = vec![0usize; self.m];
        for (off, &c) in self.coeffs.iter().enumerate() {
            let mut rem = off;
            for i in (0..self.m).rev() {
                idx[i] = rem % self.n;
                rem /= self.n;
            }
            let mut weight = c;
            for i in 0..self.m {
                if i + 1 != free {
                    weight *= blocks[i][idx[i]];
                }
            }
            out[idx[free - 1]] += weight;
        }
        out
    }

    pub fn to_json(&self) -> String {
        let file = TensorFile {
            m: self.m,
            n: self.n,
            ordering: ORDERING_TAG.to_string(),
            scalar: SCALAR_TAG.to_string(),
            coeffs: self.coeffs.clone(),
        };
        serde_json::to_string(&file).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TensorError> {
        let file: TensorFile =
            serde_json::from_str(text).map_err(|e| TensorError::Format(e.to_string()))?;
        if file.ordering != ORDERING_TAG {
            return Err(TensorError::Format(format!(
                "unsupported ordering tag {:?}",
                file.ordering
            )));
        }
        if file.scalar != SCALAR_TAG {
            return Err(TensorError::Format(format!(
                "unsupported scalar tag {:?}",
                file.scalar
            )));
        }
        CoefficientTensor::new(file.m, file.n, file.coeffs)
    }
}

const ORDERING_TAG: &str = "row-major-axis1-slowest";
const SCALAR_TAG: &str = "f64";

#[derive(Serialize, Deserialize)]
struct TensorFile {
    m: usize,
    n: usize,
    ordering: String,
    scalar: String,
    coeffs: Vec<f64>,
}

/// The nested exponent stack `(q_1, ..., q_m)`, outermost first; entry i
/// collapses axis i.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedNormSpec {
    exponents: Vec<ExtendedExponent>,
}

impl MixedNormSpec {
    pub fn new(exponents: Vec<ExtendedExponent>) -> Result<Self, TensorError> {
        if exponents.is_empty() {
            return Err(TensorError::Dimension(
                "spec needs at least one exponent".to_string(),
            ));
        }
        Ok(MixedNormSpec { exponents })
    }

    pub fn from_instance(instance: &InequalityInstance) -> Self {
        MixedNormSpec {
            exponents: instance.exponents.clone(),
        }
    }

    pub fn uniform(m: usize, q: ExtendedExponent) -> Result<Self, TensorError> {
        MixedNormSpec::new(vec![q; m])
    }

    pub fn arity(&self) -> usize {
        self.exponents.len()
    }

    pub fn entries(&self) -> &[ExtendedExponent] {
        &self.exponents
    }
}

pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for v in values {
        let y = v - compensation;
        let t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    }
    sum
}

fn collapse_rows(buffer: &[f64], n: usize, q: ExtendedExponent) -> Vec<f64> {
    buffer
        .chunks_exact(n)
        .map(|row| {
            if q.is_infinite() {
                row.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()))
            } else {
                let qf = q.to_f64();
                let sum = kahan_sum(row.iter().map(|&v| v.abs().powf(qf)));
                sum.powf(1.0 / qf)
            }
        })
        .collect()
}

fn contract_innermost(buffer: &[f64], block: &[f64], n: usize) -> Vec<f64> {
    buffer
        .chunks_exact(n)
        .map(|row| kahan_sum(row.iter().zip(block).map(|(&a, &x)| a * x)))
        .collect()
}

/// The nested mixed norm: collapses axis m via `(sum |.|^{q_m})^{1/q_m}`
/// (maximum when `q_m` is infinite), then axis m-1, and so on out to axis 1.
/// Exponents below 1 are evaluated by the same formula (a quasi-norm), so
/// callers can probe both sides of an admissibility threshold.
pub fn mixed_norm(t: &CoefficientTensor, spec: &MixedNormSpec) -> Result<f64, TensorError> {
    if spec.arity() != t.arity() {
        return Err(TensorError::Arity {
            tensor: t.arity(),
            spec: spec.arity(),
        });
    }
    let mut buffer = t.coeffs.clone();
    for &q in spec.entries().iter().rev() {
        buffer = collapse_rows(&buffer, t.n, q);
    }
    Ok(buffer[0])
}

/// The tensor with 1 on the main diagonal `j_1 = ... = j_m` and 0 elsewhere.
pub fn diagonal_form(m: usize, n: usize) -> Result<CoefficientTensor, TensorError> {
    let len = if m == 0 || n == 0 {
        return Err(TensorError::Dimension(format!(
            "arity and dimension must be at least 1, got m={m}, n={n}"
        )));
    } else {
        dense_len(m, n)?
    };
    let mut coeffs = vec![0.0; len];
    let stride: usize = (0..m).map(|a| n.pow(a as u32)).sum();
    for j in 0..n {
        coeffs[j * stride] = 1.0;
    }
    CoefficientTensor::new(m, n, coeffs)
}

/// The k-fold Kronecker power of `[[1, 1], [1, -1]]`, a 2^k x 2^k matrix
/// whose entries are `(-1)^{popcount(i & j)}`. Only bilinear powers exist,
/// so `m` must be 2.
pub fn littlewood_power(m: usize, k: u32) -> Result<CoefficientTensor, TensorError> {
    if m != 2 {
        return Err(TensorError::Dimension(format!(
            "Kronecker powers of the 2x2 sign matrix are bilinear, got m={m}"
        )));
    }
    if k == 0 {
        return Err(TensorError::Dimension("power k must be at least 1".to_string()));
    }
    let n = 1usize
        .checked_shl(k)
        .filter(|&n| n.checked_pow(2).is_some())
        .ok_or_else(|| TensorError::Dimension(format!("2^{k} is out of range")))?;
    let mut coeffs = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            coeffs.push(sign);
        }
    }
    CoefficientTensor::new(2, n, coeffs)
}

/// Independent `{-1, +1}` entries from a seeded reproducible generator;
/// identical `(m, n, seed)` gives identical tensors on every platform.
pub fn random_unimodular(m: usize, n: usize, seed: u64) -> Result<CoefficientTensor, TensorError> {
    let len = dense_len(m, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..len)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    CoefficientTensor::new(m, n, coeffs)
}

/// Independent standard normal entries from a seeded reproducible generator.
pub fn random_gaussian(m: usize, n: usize, seed: u64) -> Result<CoefficientTensor, TensorError> {
    let len = dense_len(m, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..len)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    CoefficientTensor::new(m, n, coeffs)
}

/// Embeds an arity m-k tensor as the first k axes' `(0, ..., 0)` slice of an
/// arity-m tensor: the result is `s` where the first k coordinates are all 0
/// and vanishes elsewhere. The represented forms satisfy
/// `T(x_1, ..., x_m) = x_1[0] ... x_k[0] S(x_{k+1}, ..., x_m)`, which leaves
/// the operator norm unchanged.
pub fn lift(s: &CoefficientTensor, k: usize) -> Result<CoefficientTensor, TensorError> {
    let m = s.m + k;
    let positions = IndexSet::new(m, k + 1..=m)
        .map_err(|e| TensorError::Dimension(e.to_string()))?;
    lift_into(s, m, &positions)
}

/// General form of [`lift`]: places the axes of `s` at the 1-based
/// `positions` (in order) of an arity-m tensor, pinning every other axis to
/// coordinate 0.
pub fn lift_into(
    s: &CoefficientTensor,
    m: usize,
    positions: &IndexSet,
) -> Result<CoefficientTensor, TensorError> {
    if positions.m() != m {
        return Err(TensorError::Dimension(format!(
            "position set is over 1..={}, expected 1..={m}",
            positions.m()
        )));
    }
    if positions.len() != s.m {
        return Err(TensorError::Arity {
            tensor: s.m,
            spec: positions.len(),
        });
    }
    let n = s.n;
    let len = dense_len(m, n)?;
    let mut coeffs = vec![0.0; len];
    let slots: Vec<usize> = positions.iter().collect();
    let mut src_idx = vec![0usize; s.m];
    for (src_off, &c) in s.coeffs.iter().enumerate() {
        let mut rem = src_off;
        for i in (0..s.m).rev() {
            src_idx[i] = rem % n;
            rem /= n;
        }
        let mut dst_off = 0;
        let mut cursor = 0;
        for axis in 1..=m {
            let coord = if cursor < slots.len() && slots[cursor] == axis {
                cursor += 1;
                src_idx[cursor - 1]
            } else {
                0
            };
            dst_off = dst_off * n + coord;
        }
        coeffs[dst_off] = c;
    }
    CoefficientTensor::new(m, n, coeffs)
}

/// Fixes the listed axes at the given 0-based coordinates and returns the
/// tensor over the remaining axes (in their original order). `fixed` pairs
/// are `(1-based axis position, 0-based coordinate)`.
pub fn slice(
    t: &CoefficientTensor,
    fixed: &[(usize, usize)],
) -> Result<CoefficientTensor, TensorError> {
    let mut pin: Vec<Option<usize>> = vec![None; t.m];
    for &(pos, coord) in fixed {
        if pos == 0 || pos > t.m {
            return Err(TensorError::Index(format!(
                "axis {pos} outside 1..={}",
                t.m
            )));
        }
        if coord >= t.n {
            return Err(TensorError::Index(format!(
                "coordinate {coord} outside 0..{} on axis {pos}",
                t.n
            )));
        }
        if pin[pos - 1].replace(coord).is_some() {
            return Err(TensorError::Index(format!("axis {pos} fixed twice")));
        }
    }
    let free: Vec<usize> = (0..t.m).filter(|i| pin[*i].is_none()).collect();
    if free.is_empty() {
        return Err(TensorError::Dimension(
            "slice must leave at least one free axis".to_string(),
        ));
    }
    let out_m = free.len();
    let len = dense_len(out_m, t.n)?;
    let mut coeffs = Vec::with_capacity(len);
    let mut idx = vec![0usize; t.m];
    for (i, p) in pin.iter().enumerate() {
        if let Some(c) = p {
            idx[i] = *c;
        }
    }
    let mut out_idx = vec![0usize; out_m];
    for out_off in 0..len {
        let mut rem = out_off;
        for i in (0..out_m).rev() {
            out_idx[i] = rem % t.n;
            rem /= t.n;
        }
        for (slot, &axis) in free.iter().enumerate() {
            idx[axis] = out_idx[slot];
        }
        coeffs.push(t.coeffs[t.offset(&idx)]);
    }
    CoefficientTensor::new(out_m, t.n, coeffs)
}

/// Reorders axes: `order` lists 1-based original axis numbers in their new
/// order, so result axis i carries original axis `order[i-1]`. Permuting a
/// tensor together with its domain tuple (`p'_i = p_{order[i-1]}`)
/// represents the same form with the arguments relabeled.
pub fn permute_axes(
    t: &CoefficientTensor,
    order: &[usize],
) -> Result<CoefficientTensor, TensorError> {
    if order.len() != t.m {
        return Err(TensorError::Arity {
            tensor: t.m,
            spec: order.len(),
        });
    }
    let mut seen = vec![false; t.m];
    for &axis in order {
        if axis == 0 || axis > t.m {
            return Err(TensorError::Index(format!(
                "axis {axis} outside 1..={}",
                t.m
            )));
        }
        if seen[axis - 1] {
            return Err(TensorError::Index(format!("axis {axis} listed twice")));
        }
        seen[axis - 1] = true;
    }
    let mut coeffs = Vec::with_capacity(t.coeffs.len());
    let mut new_idx = vec![0usize; t.m];
    let mut old_idx = vec![0usize; t.m];
    for new_off in 0..t.coeffs.len() {
        let mut rem = new_off;
        for i in (0..t.m).rev() {
            new_idx[i] = rem % t.n;
            rem /= t.n;
        }
        for i in 0..t.m {
            old_idx[order[i] - 1] = new_idx[i];
        }
        coeffs.push(t.coeffs[t.offset(&old_idx)]);
    }
    CoefficientTensor::new(t.m, t.n, coeffs)
}
