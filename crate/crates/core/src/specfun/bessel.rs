//! Bessel functions of integer order 0, 1, 2 for real arguments.
//!
//! Three regimes are used:
//!
//! * `|x| < 8`: ascending power series (Neumann-type log series for `Y`).
//! * `8 <= |x| < 20`: Miller backward recurrence for `J_k`, normalized by
//!   `J_0 + 2 Σ J_2k = 1`, with `Y_0`, `Y_1` from the Neumann expansions in
//!   even/odd `J_k`.
//! * `|x| >= 20`: Hankel asymptotic expansion, truncated at its smallest term
//!   (relative error below `e^{-2x}`).
//!
//! `Y_2` is always obtained from the forward recurrence, which is stable for
//! the second kind.

use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 20.0;

/// Below this argument `bessel_y` reports divergence instead of a value.
/// `Y_2(x) ~ -4/(πx²)` would overflow near `1e-154`.
pub const Y_DIVERGENCE_CUTOFF: f64 = 1e-150;

fn check_order(order: u32) -> Result<()> {
    if order > 2 {
        return Err(Error::Domain(format!(
            "Bessel order {order} not supported (0, 1 or 2)"
        )));
    }
    Ok(())
}

/// Bessel function of the first kind `J_order(x)`, `order` in `{0, 1, 2}`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    check_order(order)?;
    if !x.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_j argument must be finite, got {x}"
        )));
    }
    let ax = x.abs();
    let value = if ax < SERIES_LIMIT {
        j_series(order, ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        miller(ax)[order as usize]
    } else {
        hankel(order, ax).0
    };
    // J_n(-x) = (-1)^n J_n(x)
    Ok(if x < 0.0 && order == 1 { -value } else { value })
}

/// Bessel function of the second kind `Y_order(x)` for `x > 0`.
pub fn bessel_y(order: u32, x: f64) -> Result<f64> {
    check_order(order)?;
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "bessel_y requires a finite positive argument, got {x}"
        )));
    }
    if x < Y_DIVERGENCE_CUTOFF {
        return Err(Error::Divergent {
            function: "bessel_y",
            x,
            cutoff: Y_DIVERGENCE_CUTOFF,
        });
    }
    if x >= ASYMPTOTIC_LIMIT {
        return Ok(hankel(order, x).1);
    }
    let (y0, y1) = if x < SERIES_LIMIT {
        (y0_series(x), y1_series(x))
    } else {
        neumann_y01(x)
    };
    Ok(match order {
        0 => y0,
        1 => y1,
        _ => 2.0 * y1 / x - y0,
    })
}

/// `J_n(x)` by its power series, `x >= 0`.
fn j_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    // leading term (x/2)^n / n!
    let mut term = match order {
        0 => 1.0,
        1 => half,
        _ => 0.5 * half * half,
    };
    let n = order as f64;
    let mut sum = term;
    for k in 1..80 {
        let k = k as f64;
        term *= q / (k * (k + n));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn y0_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let log_term = (half.ln() + EULER_GAMMA) * j_series(0, x);
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for k in 1..80 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        let contrib = -term * harmonic;
        sum += contrib;
        if contrib.abs() <= 1e-17 * sum.abs() && k > 2 {
            break;
        }
    }
    FRAC_2_PI * (log_term + sum)
}

fn y1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    // (x/2)^{2k+1} / (k! (k+1)!)
    let mut term = half;
    // psi(k+1) + psi(k+2) = -2γ + H_k + H_{k+1}
    let mut h_k = 0.0;
    let mut h_k1 = 1.0;
    let mut sum = term * (h_k + h_k1 - 2.0 * EULER_GAMMA);
    for k in 1..80 {
        let kf = k as f64;
        term *= -q / (kf * (kf + 1.0));
        h_k += 1.0 / kf;
        h_k1 += 1.0 / (kf + 1.0);
        let contrib = term * (h_k + h_k1 - 2.0 * EULER_GAMMA);
        sum += contrib;
        if contrib.abs() <= 1e-17 * sum.abs() && k > 2 {
            break;
        }
    }
    -FRAC_2_PI / x + FRAC_2_PI * half.ln() * j_series(1, x) - sum / PI
}

/// Normalized `J_0 ... J_{M}` from backward recurrence, `x >= 8`.
fn miller(x: f64) -> Vec<f64> {
    let start = 2 * (((x + 40.0) / 2.0).ceil() as usize);
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-30;
    for k in (1..=start).rev() {
        j[k - 1] = (2.0 * k as f64 / x) * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm: f64 = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    j.iter_mut().for_each(|v| *v /= norm);
    j
}

/// `(Y_0, Y_1)` from the Neumann expansions over the Miller sequence.
fn neumann_y01(x: f64) -> (f64, f64) {
    let j = miller(x);
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut sign = -1.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let kf = k as f64;
        even += sign * j[2 * k] / kf;
        odd += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
        sign = -sign;
        k += 1;
    }
    let y0 = FRAC_2_PI * log_term * j[0] - 2.0 * FRAC_2_PI * even;
    let y1 = -FRAC_2_PI * (j[0] / x - log_term * j[1]) + FRAC_2_PI * odd;
    (y0, y1)
}

/// Hankel asymptotic expansion: returns `(J_n(x), Y_n(x))` for large `x`.
pub(crate) fn hankel(order: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (order * order) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= last || term == 0.0 {
            break;
        }
        last = term.abs();
        // k odd -> Q, k even -> P, signs alternate in pairs
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * order as f64 + 0.25) * PI;
    let (s, c) = chi.sin_cos();
    let amp = (FRAC_2_PI / x).sqrt();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

#[cfg(test)]
mod tests {
    use super::*;

    // x, [J0, J1, J2, Y0, Y1, Y2]; 20-digit reference values.
    const TABLE: &[(f64, [f64; 6])] = &[
        (
            0.1,
            [
                0.997501562066040032,
                0.049937526036242000321,
                0.001248958658799918984,
                -1.5342386513503668083,
                -6.4589510947020266377,
                -127.64478324269015877,
            ],
        ),
        (
            0.5,
            [
                0.93846980724081290423,
                0.24226845767487388638,
                0.030604023458682641307,
                -0.44451873350670655715,
                -1.4714723926702430692,
                -5.4413708371742657196,
            ],
        ),
        (
            1.0,
            [
                0.76519768655796655145,
                0.44005058574493351596,
                0.11490348493190048047,
                0.088256964215676957983,
                -0.78121282130028871655,
                -1.6506826068162543911,
            ],
        ),
        (
            2.5,
            [
                -0.048383776468197996327,
                0.49709410246427403801,
                0.44605905843961722674,
                0.49807035961523188783,
                0.14591813796678579888,
                -0.38133584924180324872,
            ],
        ),
        (
            5.0,
            [
                -0.17759677131433830435,
                -0.32757913759146522204,
                0.046565116277752215532,
                -0.30851762524903378007,
                0.1478631433912268448,
                0.36766288260552451799,
            ],
        ),
        (
            7.9,
            [
                0.19436184484127823969,
                0.21917939992175120327,
                -0.1388733891648855325,
                0.20652094814437576859,
                -0.18172107728057312765,
                -0.25252628416477402668,
            ],
        ),
        (
            8.0,
            [
                0.17165080713755390609,
                0.23463634685391462438,
                -0.11299172042407525,
                0.22352148938756622053,
                -0.15806046173124749426,
                -0.26303660482037809409,
            ],
        ),
        (
            8.1,
            [
                0.1475174540443776703,
                0.24760776698159287663,
                -0.086379733802009056103,
                0.23809132870223480863,
                -0.13314879595249592615,
                -0.27096757461643133505,
            ],
        ),
        (
            12.0,
            [
                0.047689310796833536624,
                -0.22344710449062761237,
                -0.084930494878604805352,
                -0.22523731263436143369,
                -0.05709921826089652105,
                0.21572077625754534685,
            ],
        ),
        (
            19.9,
            [
                0.17287775639261846235,
                0.050117424807379740922,
                -0.16784082927629889004,
                0.045762094159385478714,
                -0.17178303121049256457,
                -0.063026720411696290457,
            ],
        ),
        (
            20.0,
            [
                0.16702466434058315473,
                0.066833124175850045579,
                -0.16034135192299815017,
                0.062640596809383831162,
                -0.16551161436252129586,
                -0.079191758245635960748,
            ],
        ),
        (
            20.1,
            [
                0.15953606793729709074,
                0.082801005760209763489,
                -0.15129716189150507505,
                0.078810592428750292646,
                -0.1576259807478115438,
                -0.094494769617587261069,
            ],
        ),
        (
            33.3,
            [
                0.063338485947521251681,
                0.12386214790148009055,
                -0.055899317905390314677,
                0.12289749913503732589,
                -0.061500722807785735016,
                -0.12659123624061004303,
            ],
        ),
        (
            50.0,
            [
                0.055812327669251815005,
                -0.097511828125175137661,
                -0.059712800794258820511,
                -0.098064995470077079029,
                -0.056795668562014767942,
                0.095793168727596488312,
            ],
        ),
    ];

    #[test]
    fn matches_reference_table() {
        for &(x, refs) in TABLE {
            for n in 0..3 {
                let j = bessel_j(n, x).unwrap();
                assert!((j - refs[n as usize]).abs() <= 1e-12, "J{n}({x}) = {j}");
                let y = bessel_y(n, x).unwrap();
                let tol = 1e-10 * refs[3 + n as usize].abs().max(1.0);
                assert!((y - refs[3 + n as usize]).abs() <= tol, "Y{n}({x}) = {y}");
            }
        }
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn j1_at_one_against_series_oracle() {
        // Σ (-1)^k (1/2)^{2k+1} / (k! (k+1)!) summed independently
        let mut oracle = 0.0;
        let mut fact_k = 1.0;
        for k in 0..30 {
            if k > 0 {
                fact_k *= k as f64;
            }
            let fact_k1 = fact_k * (k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            oracle += sign * 0.5f64.powi(2 * k + 1) / (fact_k * fact_k1);
        }
        assert!((oracle - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(1, 1.0).unwrap() - oracle).abs() < 1e-14);
    }

    #[test]
    fn parity_for_negative_arguments() {
        for &x in &[0.3, 4.0, 11.0, 27.0] {
            assert_eq!(bessel_j(0, -x).unwrap(), bessel_j(0, x).unwrap());
            assert_eq!(bessel_j(1, -x).unwrap(), -bessel_j(1, x).unwrap());
            assert_eq!(bessel_j(2, -x).unwrap(), bessel_j(2, x).unwrap());
        }
    }

    #[test]
    fn y_rejects_non_positive_and_reports_divergence() {
        assert!(matches!(bessel_y(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_y(1, -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_y(0, 1e-200), Err(Error::Divergent { .. })));
        assert!(bessel_y(0, 1e-100).unwrap() < -100.0);
    }

    #[test]
    fn bad_order_and_non_finite() {
        assert!(matches!(bessel_j(3, 1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_j(0, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(bessel_j(0, f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn regimes_agree_at_their_boundaries() {
        let x = SERIES_LIMIT;
        let m = miller(x);
        for n in 0..3u32 {
            assert!((j_series(n, x) - m[n as usize]).abs() < 1e-13);
        }
        let (y0, y1) = neumann_y01(x);
        assert!((y0_series(x) - y0).abs() < 1e-12);
        assert!((y1_series(x) - y1).abs() < 1e-12);

        let x = ASYMPTOTIC_LIMIT;
        let m = miller(x);
        let (y0, y1) = neumann_y01(x);
        for n in 0..3u32 {
            let (j, _) = hankel(n, x);
            assert!((j - m[n as usize]).abs() < 1e-13);
        }
        assert!((hankel(0, x).1 - y0).abs() < 1e-12);
        assert!((hankel(1, x).1 - y1).abs() < 1e-12);
    }
}
