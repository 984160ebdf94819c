//! Closed-form reference solutions for short cascaded chains
//! (`γ_L = 0`, `γ_R = γ`) and the `N = 3` reciprocal eigenstructure at
//! `ξ = π`. Times are `γt`.

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    Ok(())
}

/// Cascaded closed form for `N ∈ {1, 2, 3}` with its defining ODE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticSolution {
    pub n_atoms: usize,
    pub xi: f64,
}

impl AnalyticSolution {
    pub fn cascaded(n_atoms: usize, xi: f64) -> Result<Self> {
        if !(1..=3).contains(&n_atoms) {
            return Err(Error::Domain(format!(
                "closed forms exist for 1 to 3 atoms, got {n_atoms}"
            )));
        }
        if !xi.is_finite() {
            return Err(Error::Domain("xi must be finite".into()));
        }
        Ok(AnalyticSolution { n_atoms, xi })
    }

    pub fn amplitudes(&self, t: f64) -> Result<Vec<Complex64>> {
        Ok(match self.n_atoms {
            1 => {
                check_time(t)?;
                vec![Complex64::from((-0.5 * t).exp())]
            }
            2 => {
                let (a, b) = cascaded_n2(self.xi, t)?;
                vec![a, b]
            }
            _ => {
                let (a, b, c) = cascaded_n3(self.xi, t)?;
                vec![a, b, c]
            }
        })
    }

    /// Right-hand side of the cascaded amplitude equations at `c`.
    pub fn derivative(&self, c: &[Complex64]) -> Vec<Complex64> {
        let e = Complex64::from_polar(1.0, -self.xi);
        (0..self.n_atoms)
            .map(|mu| {
                let mut d = -0.5 * c[mu];
                for nu in 0..mu {
                    d -= e.powu((mu - nu) as u32) * c[nu];
                }
                d
            })
            .collect()
    }
}

/// `c₁ = e^{−γt/2}/√2`, `c₂ = e^{−γt/2}(1 − γt e^{−iξ})/√2`.
pub fn cascaded_n2(xi: f64, t: f64) -> Result<(Complex64, Complex64)> {
    check_time(t)?;
    let envelope = (-0.5 * t).exp() / 2f64.sqrt();
    let e = Complex64::from_polar(1.0, -xi);
    Ok((
        Complex64::from(envelope),
        envelope * (Complex64::from(1.0) - t * e),
    ))
}

/// Uniformly excited three-atom cascade.
pub fn cascaded_n3(xi: f64, t: f64) -> Result<(Complex64, Complex64, Complex64)> {
    check_time(t)?;
    let envelope = (-0.5 * t).exp() / 3f64.sqrt();
    let e1 = Complex64::from_polar(1.0, -xi);
    let e2 = Complex64::from_polar(1.0, -2.0 * xi);
    let one = Complex64::from(1.0);
    let c1 = Complex64::from(envelope);
    let c2 = envelope * (one - t * e1);
    let c3 = envelope * 0.5 * (t * t * e2 - 2.0 * t * (e1 + e2) + 2.0);
    Ok((c1, c2, c3))
}

/// Eigenstructure of the reciprocal three-atom chain at `ξ = π`.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkModesN3 {
    /// Two vectors spanning the zero-eigenvalue subspace.
    pub dark: [[f64; 3]; 2],
    pub bright: [f64; 3],
    pub bright_eigenvalue: f64,
}

pub fn dark_modes_n3(gamma: f64) -> Result<DarkModesN3> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    Ok(DarkModesN3 {
        dark: [[-1.0, 0.0, 1.0], [1.0, 1.0, 0.0]],
        bright: [1.0, -1.0, 1.0],
        bright_eigenvalue: -3.0 * gamma,
    })
}

impl DarkModesN3 {
    /// Populations left after the bright component decays from the uniform
    /// state: expand `[1,1,1]/√3` over dark and bright vectors, keep the dark part.
    pub fn uniform_steady_populations(&self) -> [f64; 3] {
        // −a + b + c = 1, b − c = 1, a + c = 1
        let s = 1.0 / 3f64.sqrt();
        let c = 1.0 / 3.0;
        let b = 1.0 + c;
        let a = 1.0 - c;
        let mut out = [0.0; 3];
        for m in 0..3 {
            let amp = s * (a * self.dark[0][m] + b * self.dark[1][m]);
            out[m] = amp * amp;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn n2_initial_and_zero_phase_node() {
        let (a, b) = cascaded_n2(0.7, 0.0).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((a - s).norm() < 1e-16 && (b - s).norm() < 1e-16);
        let (_, b) = cascaded_n2(0.0, 1.0).unwrap();
        assert!(b.norm() < 1e-16);
    }

    #[test]
    fn n2_at_pi_is_delayed() {
        for &t in &[0.5, 2.0, 7.0] {
            let (_, b) = cascaded_n2(PI, t).unwrap();
            let expected = (-t).exp() * (1.0 + t) * (1.0 + t) / 2.0;
            assert!((b.norm_sqr() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn n3_third_atom_outlives_second() {
        let (_, b, c) = cascaded_n3(PI, 30.0).unwrap();
        assert!(c.norm_sqr() > b.norm_sqr());
        let (a, b, c) = cascaded_n3(1.0, 0.0).unwrap();
        for z in [a, b, c] {
            assert!((z - 1.0 / 3f64.sqrt()).norm() < 1e-16);
        }
    }

    #[test]
    fn derivative_at_origin_matches_finite_difference() {
        for n in 1..=3 {
            let sol = AnalyticSolution::cascaded(n, 0.9).unwrap();
            let h = 1e-6;
            let c0 = sol.amplitudes(0.0).unwrap();
            let ch = sol.amplitudes(h).unwrap();
            let rhs = sol.derivative(&c0);
            for m in 0..n {
                let fd = (ch[m] - c0[m]) / h;
                assert!((fd - rhs[m]).norm() < 2e-6, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn steady_populations() {
        let p = dark_modes_n3(1.0).unwrap().uniform_steady_populations();
        let expected = [4.0 / 27.0, 16.0 / 27.0, 4.0 / 27.0];
        for m in 0..3 {
            assert!((p[m] - expected[m]).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(cascaded_n2(0.0, -1.0).is_err());
        assert!(AnalyticSolution::cascaded(4, 0.0).is_err());
        assert!(dark_modes_n3(0.0).is_err());
    }
}
