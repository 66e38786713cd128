//! Standard normal distribution function.
//!
//! Both functions delegate to the `libm` port of the FreeBSD msun `erf` and
//! `erfc`, which are accurate to below one ulp. `Φ` is evaluated through
//! `erfc` so the lower tail keeps full relative accuracy.

use std::f64::consts::FRAC_1_SQRT_2;

/// `Φ(x) = ½·erfc(−x/√2)`.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `P(|Z| ≤ x) = 2Φ(|x|) − 1 = erf(|x|/√2)` for standard normal `Z`.
///
/// Computed directly from `erf` rather than as `2Φ − 1`, which would lose
/// all relative precision for small `x`.
pub fn central_probability(x: f64) -> f64 {
    libm::erf(x.abs() * FRAC_1_SQRT_2)
}
