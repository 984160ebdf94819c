//! Right eigenvectors of a general complex matrix from its Schur form.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub struct Eigensystem {
    pub values: Vec<Complex64>,
    /// Unit-norm right eigenvectors as columns.
    pub vectors: DMatrix<Complex64>,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

pub fn eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let (_, t) = schur(a)?.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

fn schur(a: &DMatrix<Complex64>) -> Result<Schur<Complex64, nalgebra::Dyn>> {
    Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalIntegrity("Schur iteration did not converge".into()))
}

pub fn eigensystem(a: &DMatrix<Complex64>) -> Result<Eigensystem> {
    let n = a.nrows();
    let (q, t) = schur(a)?.unpack();
    let smin = f64::EPSILON * a.norm().max(f64::MIN_POSITIVE);
    let mut x = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut num = Complex64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                num += t[(i, j)] * x[(j, k)];
            }
            let mut diff = t[(i, i)] - lambda;
            if diff.norm() < smin {
                if num.norm() < smin {
                    x[(i, k)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                diff = Complex64::new(smin, 0.0);
            }
            x[(i, k)] = -num / diff;
        }
    }
    let mut vectors = q * x;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex64::from(norm);
        }
    }
    let sv = vectors.singular_values();
    let smax = sv.max();
    let smin_sv = sv.min();
    let condition = if smin_sv > 0.0 {
        smax / smin_sv
    } else {
        f64::INFINITY
    };
    Ok(Eigensystem {
        values: t.diagonal().iter().copied().collect(),
        vectors,
        condition,
    })
}

impl Eigensystem {
    /// Expansion coefficients of `v` in the eigenbasis (rows of the inverse
    /// eigenvector matrix are the biorthogonal left eigenvectors).
    pub fn coefficients(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        self.vectors
            .clone()
            .lu()
            .solve(v)
            .ok_or_else(|| Error::NumericalIntegrity("singular eigenvector matrix".into()))
    }
}
