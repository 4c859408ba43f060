//! Special functions: the half-integer Gamma ratio that drives the rate bound
//! and the principal branch of the Lambert W function.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// `sqrt(pi) * Gamma(B + 1/2) / (2 * Gamma(B))`, the mean magnitude of a sum
/// of `B` independent unit-variance cascaded coefficients.
///
/// Evaluated as a difference of log-Gamma values so it stays finite for
/// large `B`.
pub fn half_gamma_ratio(b: usize) -> Result<f64> {
    if b == 0 {
        return Err(Error::invalid("B", "group size must be at least 1"));
    }
    let b = b as f64;
    Ok(0.5 * SQRT_PI * (ln_gamma(b + 0.5) - ln_gamma(b)).exp())
}

const MAX_HALLEY_STEPS: usize = 64;

/// Principal branch `W0(x)` for `x >= 0`: the unique `w >= 0` with `w e^w = x`.
///
/// Starts from a series guess near zero, the `ln(1 + x)` guess in the middle
/// range and the asymptotic `L1 - L2 + L2/L1` expansion above `e`, then runs
/// Halley steps until the update stops moving the iterate.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::invalid(
            "x",
            format!("only the non-negative principal branch is supported, got {x}"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut w = if x < 1e-3 {
        x * (1.0 - x * (1.0 - 1.5 * x))
    } else if x <= std::f64::consts::E {
        // Within a few percent on [1e-3, e]; Halley closes the gap in three steps.
        0.5 * x.ln_1p() + 0.5 * x / (1.0 + x)
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..MAX_HALLEY_STEPS {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs();
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}
