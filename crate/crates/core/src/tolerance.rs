//! Round-off tolerance for comparing two projections of the same product.
//!
//! The componentwise policy bounds the forward error of the two projections
//! `C·ω` and `A·(B·ω)`:
//!
//! ```text
//! τ_i = θ · n · u · [ (|A|(|B||ω|))_i + (|C||ω|)_i ]
//! ```
//!
//! where `n` is the longest inner-product length involved and `u` the unit
//! roundoff. The slack `θ` (default 4) absorbs the error of computing `C`
//! itself plus second-order terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matvec, vecmat, AccumulationMode};
use crate::matrix::DenseMatrix;

pub const DEFAULT_SLACK: f64 = 4.0;
/// Unit roundoff of binary64, `2^-53`.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceKind {
    Componentwise,
    Absolute,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub kind: ToleranceKind,
    pub slack: f64,
    /// Only read when `kind` is `Absolute`.
    pub absolute_value: f64,
    pub unit_roundoff: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self::componentwise()
    }
}

impl TolerancePolicy {
    pub fn componentwise() -> Self {
        Self {
            kind: ToleranceKind::Componentwise,
            slack: DEFAULT_SLACK,
            absolute_value: 0.0,
            unit_roundoff: UNIT_ROUNDOFF,
        }
    }

    pub fn absolute(value: f64) -> Result<Self> {
        let policy = Self { kind: ToleranceKind::Absolute, absolute_value: value, ..Self::componentwise() };
        policy.validate()?;
        Ok(policy)
    }

    pub fn with_slack(mut self, slack: f64) -> Self {
        self.slack = slack;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slack.is_finite() && self.slack > 0.0) {
            return Err(Error::domain(format!("slack must be positive, got {}", self.slack)));
        }
        if !(self.unit_roundoff.is_finite() && self.unit_roundoff > 0.0) {
            return Err(Error::domain(format!("unit roundoff must be positive, got {}", self.unit_roundoff)));
        }
        if !(self.absolute_value.is_finite() && self.absolute_value >= 0.0) {
            return Err(Error::domain(format!("absolute tolerance must be nonnegative, got {}", self.absolute_value)));
        }
        Ok(())
    }

    pub fn needs_magnitudes(&self) -> bool {
        self.kind == ToleranceKind::Componentwise
    }

    /// Turns the magnitude vectors `|A|(|B||ω|)` and `|C||ω|` into
    /// tolerances. `inner_length` is the `n` of the bound.
    pub fn tolerances(&self, inner_length: usize, product_magnitude: &[f64], claimed_magnitude: &[f64]) -> Vec<f64> {
        match self.kind {
            ToleranceKind::Absolute => vec![self.absolute_value; claimed_magnitude.len()],
            ToleranceKind::Componentwise => {
                let factor = self.slack * inner_length as f64 * self.unit_roundoff;
                product_magnitude.iter().zip(claimed_magnitude).map(|(p, c)| factor * (p + c)).collect()
            }
        }
    }
}

/// Longest inner-product length when projecting `A·B` from the right.
pub(crate) fn right_inner_length(a: &DenseMatrix, b: &DenseMatrix) -> usize {
    a.cols().max(b.cols())
}

/// Longest inner-product length when projecting `A·B` from the left.
pub(crate) fn left_inner_length(a: &DenseMatrix, b: &DenseMatrix) -> usize {
    a.rows().max(b.rows())
}

fn abs_vec(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.abs()).collect()
}

fn check_triple(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> Result<()> {
    if a.cols() != b.rows() || c.shape() != (a.rows(), b.cols()) {
        return Err(Error::dimension(format!(
            "shapes do not compose: A {}x{}, B {}x{}, C {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    Ok(())
}

/// Per-component tolerances for comparing `C·ω` with `A·(B·ω)`.
///
/// Magnitudes are accumulated with separate rounding; the verifiers compute
/// the same quantities in the same order during their projection passes.
pub fn component_tolerances(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    omega: &[f64],
    policy: &TolerancePolicy,
) -> Result<Vec<f64>> {
    component_tolerances_with_mode(a, b, c, omega, policy, AccumulationMode::SeparateRounding)
}

pub fn component_tolerances_with_mode(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    omega: &[f64],
    policy: &TolerancePolicy,
    mode: AccumulationMode,
) -> Result<Vec<f64>> {
    check_triple(a, b, c)?;
    policy.validate()?;
    if omega.len() != b.cols() {
        return Err(Error::dimension(format!("projection vector has length {}, expected {}", omega.len(), b.cols())));
    }
    let w = abs_vec(omega);
    let product = matvec(&a.abs(), &matvec(&b.abs(), &w, mode)?, mode)?;
    let claimed = matvec(&c.abs(), &w, mode)?;
    Ok(policy.tolerances(right_inner_length(a, b), &product, &claimed))
}

/// Tolerances for the left projection `ωᵀ·C` against `(ωᵀ·A)·B`.
pub fn component_tolerances_left(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    omega: &[f64],
    policy: &TolerancePolicy,
    mode: AccumulationMode,
) -> Result<Vec<f64>> {
    check_triple(a, b, c)?;
    policy.validate()?;
    if omega.len() != a.rows() {
        return Err(Error::dimension(format!("projection vector has length {}, expected {}", omega.len(), a.rows())));
    }
    let w = abs_vec(omega);
    let product = vecmat(&vecmat(&w, &a.abs(), mode)?, &b.abs(), mode)?;
    let claimed = vecmat(&w, &c.abs(), mode)?;
    Ok(policy.tolerances(left_inner_length(a, b), &product, &claimed))
}

/// `n` of the bound for a right projection through a chain of factors: the
/// longest inner product times the number of chained products beyond the
/// first. For two factors this is [`right_inner_length`].
pub(crate) fn chain_inner_length(factors: &[&DenseMatrix]) -> usize {
    let longest = factors.iter().map(|m| m.cols()).max().unwrap_or(1);
    longest * factors.len().saturating_sub(1).max(1)
}

/// Largest tolerance component for the all-ones projection. Used as the
/// scalar round-off scale of an instance: fault magnitudes in experiments are
/// expressed as multiples of it, and it is the `ε` fed to the bound.
pub fn tolerance_scale(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, policy: &TolerancePolicy) -> Result<f64> {
    let ones = vec![1.0; b.cols()];
    let tau = component_tolerances(a, b, c, &ones, policy)?;
    Ok(tau.into_iter().fold(0.0, f64::max))
}

/// [`tolerance_scale`] for a product of any number of factors.
pub fn chain_tolerance_scale(factors: &[DenseMatrix], c: &DenseMatrix, policy: &TolerancePolicy) -> Result<f64> {
    policy.validate()?;
    let refs: Vec<&DenseMatrix> = factors.iter().collect();
    crate::verifiers::check_chain(&refs, c)?;
    if !policy.needs_magnitudes() {
        return Ok(policy.absolute_value);
    }
    let mode = AccumulationMode::SeparateRounding;
    let ones = vec![1.0; c.cols()];
    let mut product = ones.clone();
    for m in refs.iter().rev() {
        product = matvec(&m.abs(), &product, mode)?;
    }
    let claimed = matvec(&c.abs(), &ones, mode)?;
    let tau = policy.tolerances(chain_inner_length(&refs), &product, &claimed);
    Ok(tau.into_iter().fold(0.0, f64::max))
}
