//! Adaptive Dormand-Prince 5(4) integrator for linear systems `y' = A y`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-14,
            rel: 1e-13,
        }
    }
}

/// Dense-output-free integrator that lands exactly on each requested time.
pub struct Dopri5<'a> {
    a: &'a DMatrix<Complex64>,
    tol: Tolerance,
    t: f64,
    y: Vec<Complex64>,
    k1: Vec<Complex64>,
    h: f64,
    steps: usize,
}

fn matvec(a: &DMatrix<Complex64>, x: &[Complex64], out: &mut [Complex64]) {
    let n = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += a[(i, j)] * x[j];
        }
        *o = acc;
    }
}

impl<'a> Dopri5<'a> {
    pub fn new(a: &'a DMatrix<Complex64>, t0: f64, y0: &[Complex64], tol: Tolerance) -> Self {
        let mut k1 = vec![Complex64::new(0.0, 0.0); y0.len()];
        matvec(a, y0, &mut k1);
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * y0.len() as f64;
        Dopri5 {
            a,
            tol,
            t: t0,
            y: y0.to_vec(),
            k1,
            h: if scale > 0.0 { 0.01 / scale } else { 1.0 },
            steps: 0,
        }
    }

    pub fn state(&self) -> &[Complex64] {
        &self.y
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Advance to `t_target >= time()`, clipping the last step to land on it.
    pub fn advance_to(&mut self, t_target: f64) -> Result<&[Complex64]> {
        let n = self.y.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut k = vec![vec![zero; n]; 7];
        let mut tmp = vec![zero; n];
        let mut y_new = vec![zero; n];
        while self.t < t_target {
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(Error::NonConvergence {
                    estimate: self.t,
                    residual: t_target - self.t,
                    iterations: self.steps,
                });
            }
            let remaining = t_target - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            k[0].copy_from_slice(&self.k1);
            let rows: [&[f64]; 6] = [&A2, &A3, &A4, &A5, &A6, &A7];
            for (s, row) in rows.iter().enumerate() {
                for i in 0..n {
                    let mut acc = self.y[i];
                    for (j, &coef) in row.iter().enumerate() {
                        if coef != 0.0 {
                            acc += k[j][i] * (h * coef);
                        }
                    }
                    tmp[i] = acc;
                }
                if s == 5 {
                    y_new.copy_from_slice(&tmp);
                }
                matvec(self.a, &tmp, &mut k[s + 1]);
            }
            let mut err_sq = 0.0;
            for i in 0..n {
                let mut e = zero;
                for (j, &coef) in E.iter().enumerate() {
                    if coef != 0.0 {
                        e += k[j][i] * (h * coef);
                    }
                }
                let sc = self.tol.abs + self.tol.rel * self.y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::NumericalIntegrity(
                    "Runge-Kutta error estimate is not finite".into(),
                ));
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                self.t = if last { t_target } else { self.t + h };
                self.y.copy_from_slice(&y_new);
                self.k1.copy_from_slice(&k[6]);
                if !last {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor.min(1.0);
            }
            if self.h < 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::NumericalIntegrity(format!(
                    "Runge-Kutta step underflow at t = {}",
                    self.t
                )));
            }
        }
        Ok(&self.y)
    }
}
