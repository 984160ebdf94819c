//! Pairwise resonant dipole-dipole couplings `J = (γ + 2iΩ)/2` for 1D, 2D
//! and 3D reservoirs, plus the chiral `F`/`G` decomposition.
//!
//! Every kernel is expressed in units of the intrinsic rate of its own
//! reservoir (`Γ`, `Γ_1D` or `Γ_2D` set to one). Rates of different
//! dimensionality are not comparable.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{bessel_j, bessel_y, principal_value, PvIntegrand, Y_DIVERGENCE_CUTOFF};

/// Complex coupling split into decay (`Re J = γ/2`) and shift (`Im J = Ω`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub decay_part: f64,
    pub shift_part: f64,
    /// Set when the shift diverges (zero separation in 2D/3D); `shift_part`
    /// is then `NaN`.
    pub shift_divergent: bool,
}

impl KernelValue {
    fn finite(decay_part: f64, shift_part: f64) -> Self {
        KernelValue {
            decay_part,
            shift_part,
            shift_divergent: false,
        }
    }

    fn divergent(decay_part: f64) -> Self {
        KernelValue {
            decay_part,
            shift_part: f64::NAN,
            shift_divergent: true,
        }
    }

    /// Collective decay rate `γ_{μν} = 2 Re J`.
    pub fn collective_decay(&self) -> f64 {
        2.0 * self.decay_part
    }

    /// Collective frequency shift `Ω_{μν} = Im J`.
    pub fn frequency_shift(&self) -> f64 {
        self.shift_part
    }

    pub fn coupling(&self) -> Complex64 {
        Complex64::new(self.decay_part, self.shift_part)
    }
}

/// Separation phase `ξ = k_L |r_μ − r_ν|` and dipole alignment `p̂·r̂_{μν}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleGeometry {
    pub xi: f64,
    pub alignment: f64,
}

impl DipoleGeometry {
    pub fn new(xi: f64, alignment: f64) -> Result<Self> {
        if !(xi.is_finite() && xi >= 0.0) {
            return Err(Error::Domain(format!(
                "xi must be finite and >= 0, got {xi}"
            )));
        }
        if !(alignment.is_finite() && alignment.abs() <= 1.0) {
            return Err(Error::Domain(format!(
                "alignment must lie in [-1, 1], got {alignment}"
            )));
        }
        Ok(DipoleGeometry { xi, alignment })
    }
}

/// Chiral decomposition `(F, G)` of the 1D coupling at phase `ξ`.
///
/// Above the diagonal the coupling matrix carries `−F + iG = −γ_L e^{−iξ}`,
/// below it `−F* + iG* = −γ_R e^{−iξ}`.
pub fn chiral_fg(xi: f64, gamma_left: f64, gamma_right: f64) -> Result<(Complex64, Complex64)> {
    if !xi.is_finite() {
        return Err(Error::Domain(format!("xi must be finite, got {xi}")));
    }
    check_rates(gamma_left, gamma_right)?;
    let forward = Complex64::from_polar(gamma_right, xi);
    let backward = Complex64::from_polar(gamma_left, -xi);
    let f = 0.5 * (forward + backward);
    let g = Complex64::new(0.0, -0.5) * (forward - backward);
    Ok((f, g))
}

pub(crate) fn check_rates(gamma_left: f64, gamma_right: f64) -> Result<()> {
    if !(gamma_left.is_finite() && gamma_right.is_finite()) {
        return Err(Error::Domain("decay rates must be finite".into()));
    }
    if gamma_left < 0.0 || gamma_right < 0.0 {
        return Err(Error::Domain(format!(
            "decay rates must be non-negative (gamma_left = {gamma_left}, gamma_right = {gamma_right})"
        )));
    }
    if gamma_left == 0.0 && gamma_right == 0.0 {
        return Err(Error::Domain(
            "gamma_left and gamma_right cannot both vanish".into(),
        ));
    }
    Ok(())
}

/// Reciprocal 1D kernel `J = ½[cos ξ + i sin ξ]` in units of `Γ_1D`.
pub fn kernel_1d_reciprocal(xi: f64) -> Result<KernelValue> {
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(Error::Domain(format!(
            "xi must be finite and >= 0, got {xi}"
        )));
    }
    let (s, c) = xi.sin_cos();
    Ok(KernelValue::finite(0.5 * c, 0.5 * s))
}

/// `cos ξ/ξ² − sin ξ/ξ³`, with its Taylor series near the origin.
fn near_field_decay(xi: f64) -> f64 {
    if xi < 0.1 {
        let x2 = xi * xi;
        -1.0 / 3.0 + x2 * (1.0 / 30.0 - x2 * (1.0 / 840.0 - x2 / 45_360.0))
    } else {
        let (s, c) = xi.sin_cos();
        c / (xi * xi) - s / (xi * xi * xi)
    }
}

fn sinc(xi: f64) -> f64 {
    if xi < 1e-4 {
        1.0 - xi * xi / 6.0
    } else {
        xi.sin() / xi
    }
}

/// Free-space (3D) kernel in units of `Γ`.
pub fn kernel_3d(geom: DipoleGeometry) -> KernelValue {
    let xi = geom.xi;
    let a2 = geom.alignment * geom.alignment;
    let gamma = 1.5 * ((1.0 - a2) * sinc(xi) + (1.0 - 3.0 * a2) * near_field_decay(xi));
    if xi == 0.0 {
        return KernelValue::divergent(0.5 * gamma);
    }
    let (s, c) = xi.sin_cos();
    let omega =
        0.75 * (-(1.0 - a2) * c / xi + (1.0 - 3.0 * a2) * (s / (xi * xi) + c / (xi * xi * xi)));
    KernelValue::finite(0.5 * gamma, omega)
}

/// `f(ξ) = 2[J_0 − J_1/ξ + α² J_2]`, the 2D decay profile.
pub fn f_2d(xi: f64, alignment: f64) -> f64 {
    let a2 = alignment * alignment;
    let j1_over = if xi == 0.0 {
        0.5
    } else {
        bessel_j(1, xi).expect("finite argument") / xi
    };
    let j0 = bessel_j(0, xi).expect("finite argument");
    let j2 = bessel_j(2, xi).expect("finite argument");
    2.0 * (j0 - j1_over + a2 * j2)
}

/// `g(ξ) = 2Y_0 − 2Y_1/ξ + 2α²Y_2 − (4/(πξ²))(1 − 2α²)`, the 2D shift profile.
pub fn g_2d(xi: f64, alignment: f64) -> Result<f64> {
    let a2 = alignment * alignment;
    let y0 = bessel_y(0, xi)?;
    let y1 = bessel_y(1, xi)?;
    let y2 = bessel_y(2, xi)?;
    Ok(2.0 * y0 - 2.0 * y1 / xi + 2.0 * a2 * y2 - 4.0 / (PI * xi * xi) * (1.0 - 2.0 * a2))
}

/// `g(ξ)` rebuilt from the decay profile by the dispersion relation
/// `g(b) = −(1/π) PV∫₀^∞ f(a)[1/(a−b) + 1/(a+b)] da`.
pub fn g_2d_kramers_kronig(xi: f64, alignment: f64, tol: f64) -> Result<f64> {
    DipoleGeometry::new(xi, alignment)?;
    if xi == 0.0 {
        return Err(Error::Divergent {
            function: "g_2d",
            x: xi,
            cutoff: 0.0,
        });
    }
    let integrand = PvIntegrand::new(
        |a: f64| f_2d(a, alignment) * (1.0 / (a - xi) + 1.0 / (a + xi)),
        xi,
        0.0,
        f64::INFINITY,
    );
    Ok(-principal_value(&integrand, tol)? / PI)
}

/// 2D reservoir kernel `J = ½[f(ξ) + i g(ξ)]` in units of `Γ_2D`.
pub fn kernel_2d(geom: DipoleGeometry) -> KernelValue {
    let f = f_2d(geom.xi, geom.alignment);
    if geom.xi < Y_DIVERGENCE_CUTOFF {
        return KernelValue::divergent(0.5 * f);
    }
    match g_2d(geom.xi, geom.alignment) {
        Ok(g) if g.is_finite() => KernelValue::finite(0.5 * f, 0.5 * g),
        _ => KernelValue::divergent(0.5 * f),
    }
}
