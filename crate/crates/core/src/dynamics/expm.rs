//! Dense complex matrix exponential: degree-13 diagonal Padé approximant with
//! scaling and squaring.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const THETA_13: f64 = 5.371_920_351_148_152;

const B: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled_sum(terms: &[(f64, &DMatrix<Complex64>)], identity: f64, n: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::<Complex64>::identity(n, n) * Complex64::from(identity);
    for &(coef, m) in terms {
        out.zip_apply(m, |o, x| *o += x * coef);
    }
    out
}

/// `exp(a)` for a square complex matrix.
pub fn expm(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Domain("expm requires a square matrix".into()));
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NumericalIntegrity(
            "non-finite entry passed to expm".into(),
        ));
    }
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = one_norm(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * Complex64::from(0.5f64.powi(squarings));

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = scaled_sum(&[(B[13], &a6), (B[11], &a4), (B[9], &a2)], 0.0, n);
    let u = &a * (&a6 * inner_u + scaled_sum(&[(B[7], &a6), (B[5], &a4), (B[3], &a2)], B[1], n));
    let inner_v = scaled_sum(&[(B[12], &a6), (B[10], &a4), (B[8], &a2)], 0.0, n);
    let v = &a6 * inner_v + scaled_sum(&[(B[6], &a6), (B[4], &a4), (B[2], &a2)], B[0], n);

    let denominator = &v - &u;
    let numerator = &v + &u;
    let mut r = denominator
        .lu()
        .solve(&numerator)
        .ok_or_else(|| Error::NumericalIntegrity("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NumericalIntegrity(
            "expm produced non-finite entries".into(),
        ));
    }
    Ok(r)
}
