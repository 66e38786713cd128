use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

use super::normal::central_probability;

/// Row norms of `Δ`: `g_i = (Δω)_i` has standard deviation `sigma_rows[i]`
/// under a standard Gaussian `ω`, and `sigma` is the largest of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaTilde {
    pub sigma: f64,
    pub sigma_rows: Vec<f64>,
}

pub fn sigma_tilde(delta: &DenseMatrix) -> SigmaTilde {
    let sigma_rows: Vec<f64> =
        (0..delta.rows()).map(|i| delta.row(i).iter().map(|d| d * d).sum::<f64>().sqrt()).collect();
    let sigma = sigma_rows.iter().cloned().fold(0.0, f64::max);
    SigmaTilde { sigma, sigma_rows }
}

/// Upper bounds on the probability that a Gaussian projection accepts a
/// wrong product whose error matrix is `Δ`, for comparison threshold `ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub sigma_tilde: f64,
    pub sigma_rows: Vec<f64>,
    pub epsilon: f64,
    /// `2Φ(ε/σ̃) − 1`, valid for any dependence between the `g_i`.
    pub bound_dependent: f64,
    /// `∏ [2Φ(ε/σ̃_i) − 1]` over nonzero rows, valid when the `g_i` are
    /// independent.
    pub bound_independent: f64,
    /// Small-threshold linearization `ε̃·√(2/π)` with `ε̃ = ε/σ̃`.
    pub bound_approx: f64,
    pub k: usize,
    /// `bound_dependent^k`.
    pub bound_iterated: f64,
    /// Set when `Δ = 0`: there is no fault to detect and every bound is 1.
    pub degenerate: bool,
}

pub fn theorem2_bound(delta: &DenseMatrix, epsilon: f64, k: usize) -> Result<BoundReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::domain(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    if k == 0 {
        return Err(Error::domain("iteration count k must be positive"));
    }
    let SigmaTilde { sigma, sigma_rows } = sigma_tilde(delta);
    if !(sigma > 0.0) {
        return Ok(BoundReport {
            sigma_tilde: sigma,
            sigma_rows,
            epsilon,
            bound_dependent: 1.0,
            bound_independent: 1.0,
            bound_approx: f64::INFINITY,
            k,
            bound_iterated: 1.0,
            degenerate: true,
        });
    }

    let bound_dependent = central_probability(epsilon / sigma);
    // A zero row gives g_i = 0 identically; it never witnesses the fault and
    // contributes a factor of exactly 1.
    let bound_independent = sigma_rows.iter().filter(|s| **s > 0.0).map(|s| central_probability(epsilon / s)).product();
    let bound_approx = epsilon / sigma * (2.0 / PI).sqrt();

    Ok(BoundReport {
        sigma_tilde: sigma,
        sigma_rows,
        epsilon,
        bound_dependent,
        bound_independent,
        bound_approx,
        k,
        bound_iterated: bound_dependent.powi(k as i32),
        degenerate: false,
    })
}
