//! Struve functions `H_0`, `H_1` for real arguments.

use std::f64::consts::{FRAC_2_PI, PI};

use super::bessel::bessel_y;
use super::quadrature::gauss_kronrod;
use crate::error::{Error, Result};

/// Ascending series is used below this argument; above it the integral
/// representation of `H_n − Y_n` takes over.
const SERIES_LIMIT: f64 = 12.0;
const MAX_TERMS: usize = 80;

/// Struve function `H_order(x)`, `order` in `{0, 1}`.
pub fn struve_h(order: u32, x: f64) -> Result<f64> {
    if order > 1 {
        return Err(Error::Domain(format!(
            "Struve order {order} not supported (0 or 1)"
        )));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!(
            "struve_h argument must be finite, got {x}"
        )));
    }
    let ax = x.abs();
    let value = if ax < SERIES_LIMIT {
        series(order, ax)
    } else {
        large_argument(order, ax)?
    };
    // H_0 is odd, H_1 even
    Ok(if order == 0 && x < 0.0 { -value } else { value })
}

fn series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let sqrt_pi = PI.sqrt();
    // m = 0 term: (x/2)^{1}/Γ(3/2)² or (x/2)²/(Γ(3/2)Γ(5/2))
    let (mut term, a, b) = match order {
        0 => (half / (0.25 * PI), 1.5, 1.5),
        _ => (q / (0.5 * sqrt_pi * 0.75 * sqrt_pi), 1.5, 2.5),
    };
    let mut sum = term;
    for m in 0..MAX_TERMS {
        let m = m as f64;
        term *= -q / ((m + a) * (m + b));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `H_n(x) = Y_n(x) + (2 (x/2)^n / (√π Γ(n+½))) ∫_0^∞ e^{−xt} (1+t²)^{n−½} dt`.
fn large_argument(order: u32, x: f64) -> Result<f64> {
    let upper = 45.0 / x;
    let tol = 1e-15;
    let y = bessel_y(order, x)?;
    let k = match order {
        0 => {
            FRAC_2_PI
                * gauss_kronrod(
                    |t| (-x * t).exp() / (1.0 + t * t).sqrt(),
                    0.0,
                    upper,
                    tol,
                    0.0,
                )?
                .value
        }
        _ => {
            FRAC_2_PI
                * x
                * gauss_kronrod(
                    |t| (-x * t).exp() * (1.0 + t * t).sqrt(),
                    0.0,
                    upper,
                    tol,
                    0.0,
                )?
                .value
        }
    };
    Ok(y + k)
}
