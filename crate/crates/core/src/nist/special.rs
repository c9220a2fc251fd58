//! Special functions used by the test statistics.

use crate::error::{Error, Result};

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Upper regularized incomplete gamma function `Q(a, x)`.
pub fn igamc(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("igamc: a = {a} must be positive and finite")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("igamc: x = {x} must be >= 0")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    statrs::function::gamma::checked_gamma_ur(a, x)
        .map(|q| q.clamp(0.0, 1.0))
        .map_err(|e| Error::Domain(format!("igamc({a}, {x}): {e}")))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}
