//! Chain geometry, positional disorder and the chiral coupling matrix.
//!
//! Positions are carried as phases `φ_m = k x_m`. Displacements and disorder
//! amplitudes are fractions of the nominal spacing phase `ξ`, so a shift of
//! `0.05` moves an atom by 5% of the lattice spacing.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::check_rates;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_atoms: usize,
    /// Nominal spacing phase `k d`.
    pub xi: f64,
    /// Per-atom offsets as fractions of `xi`; empty means all zero.
    #[serde(default)]
    pub displacements: Vec<f64>,
    pub gamma_left: f64,
    pub gamma_right: f64,
}

impl ChainConfig {
    pub fn uniform(n_atoms: usize, xi: f64, gamma_left: f64, gamma_right: f64) -> Self {
        ChainConfig {
            n_atoms,
            xi,
            displacements: Vec::new(),
            gamma_left,
            gamma_right,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::Config("n_atoms must be positive".into()));
        }
        if !(self.xi.is_finite() && self.xi > 0.0) {
            return Err(Error::Config(format!(
                "xi must be positive, got {}",
                self.xi
            )));
        }
        if !self.displacements.is_empty() && self.displacements.len() != self.n_atoms {
            return Err(Error::Config(format!(
                "{} displacements given for {} atoms",
                self.displacements.len(),
                self.n_atoms
            )));
        }
        check_rates(self.gamma_left, self.gamma_right).map_err(|e| Error::Config(e.to_string()))
    }

    /// Time unit `1/γ` with `γ = max(γ_L, γ_R)`.
    pub fn reference_rate(&self) -> f64 {
        self.gamma_left.max(self.gamma_right)
    }

    fn displacement(&self, m: usize) -> f64 {
        self.displacements.get(m).copied().unwrap_or(0.0)
    }
}

/// Shape of the per-atom random deviation in ensemble mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Fluctuation {
    /// Normal deviation with standard deviation `fluctuation_fraction`.
    #[default]
    Gaussian,
    /// Uniform deviation on `[−fluctuation_fraction, +fluctuation_fraction]`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DisorderSpec {
    #[default]
    None,
    SingleSite {
        /// 1-based atom index.
        site: usize,
        /// Signed fraction of `xi`; positive moves the atom to the right.
        shift_fraction: f64,
    },
    Ensemble {
        fluctuation_fraction: f64,
        n_realizations: usize,
        seed: u64,
        #[serde(default)]
        distribution: Fluctuation,
    },
}

impl DisorderSpec {
    pub fn validate(&self, n_atoms: usize) -> Result<()> {
        match *self {
            DisorderSpec::None => Ok(()),
            DisorderSpec::SingleSite {
                site,
                shift_fraction,
            } => {
                if site == 0 || site > n_atoms {
                    return Err(Error::Config(format!(
                        "disorder site {site} outside 1..={n_atoms}"
                    )));
                }
                if !shift_fraction.is_finite() {
                    return Err(Error::Config("shift_fraction must be finite".into()));
                }
                Ok(())
            }
            DisorderSpec::Ensemble {
                fluctuation_fraction,
                n_realizations,
                ..
            } => {
                if !(0.0..0.5).contains(&fluctuation_fraction) {
                    return Err(Error::Config(format!(
                        "fluctuation_fraction must lie in [0, 0.5), got {fluctuation_fraction}"
                    )));
                }
                if n_realizations == 0 {
                    return Err(Error::Config("n_realizations must be positive".into()));
                }
                Ok(())
            }
        }
    }

    pub fn n_realizations(&self) -> usize {
        match self {
            DisorderSpec::Ensemble { n_realizations, .. } => *n_realizations,
            _ => 1,
        }
    }
}

/// Phase positions `φ_m = (m−1)ξ + (d_m + δ_m)ξ` for one disorder realization.
///
/// Ensemble draws depend only on `(seed, realization_index, atom)`: each
/// realization reads its own ChaCha stream.
pub fn build_positions(
    config: &ChainConfig,
    disorder: &DisorderSpec,
    realization_index: usize,
) -> Result<Vec<f64>> {
    config.validate()?;
    disorder.validate(config.n_atoms)?;
    let n = config.n_atoms;
    let mut offsets: Vec<f64> = (0..n).map(|m| config.displacement(m)).collect();
    match *disorder {
        DisorderSpec::None => {}
        DisorderSpec::SingleSite {
            site,
            shift_fraction,
        } => offsets[site - 1] += shift_fraction,
        DisorderSpec::Ensemble {
            fluctuation_fraction,
            n_realizations,
            seed,
            distribution,
        } => {
            if realization_index >= n_realizations {
                return Err(Error::Config(format!(
                    "realization {realization_index} out of range 0..{n_realizations}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(realization_index as u64);
            match distribution {
                Fluctuation::Gaussian => {
                    for o in offsets.iter_mut() {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        *o += fluctuation_fraction * z;
                    }
                }
                Fluctuation::Uniform => {
                    if fluctuation_fraction > 0.0 {
                        let dist =
                            Uniform::new_inclusive(-fluctuation_fraction, fluctuation_fraction);
                        for o in offsets.iter_mut() {
                            *o += dist.sample(&mut rng);
                        }
                    }
                }
            }
        }
    }
    let positions: Vec<f64> = offsets
        .iter()
        .enumerate()
        .map(|(m, d)| (m as f64 + d) * config.xi)
        .collect();
    check_ordering(&positions)?;
    Ok(positions)
}

fn check_ordering(positions: &[f64]) -> Result<()> {
    if let Some(w) = positions.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::Config(format!(
            "atomic ordering violated: phase {} is not below {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Dense single-excitation coupling matrix `V` with `dc/dt = V c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    entries: DMatrix<Complex64>,
    gamma_left: f64,
    gamma_right: f64,
}

impl CouplingMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn gamma_left(&self) -> f64 {
        self.gamma_left
    }

    pub fn gamma_right(&self) -> f64 {
        self.gamma_right
    }

    /// Hermitian part `V + V†`, the dissipator acting on amplitudes.
    pub fn dissipator(&self) -> DMatrix<Complex64> {
        &self.entries + self.entries.adjoint()
    }
}

/// `V_μμ = −(γ_L+γ_R)/2`, `V_μν = −γ_L e^{−i|φ_μ−φ_ν|}` above the diagonal and
/// `−γ_R e^{−i|φ_μ−φ_ν|}` below it.
pub fn build_coupling_matrix(
    positions: &[f64],
    gamma_left: f64,
    gamma_right: f64,
) -> Result<CouplingMatrix> {
    if positions.is_empty() {
        return Err(Error::Config("at least one atom required".into()));
    }
    if positions.iter().any(|p| !p.is_finite()) {
        return Err(Error::Config("positions must be finite".into()));
    }
    check_ordering(positions)?;
    check_rates(gamma_left, gamma_right).map_err(|e| Error::Config(e.to_string()))?;
    let n = positions.len();
    let diagonal = Complex64::new(-0.5 * (gamma_left + gamma_right), 0.0);
    let entries = DMatrix::from_fn(n, n, |mu, nu| {
        if mu == nu {
            return diagonal;
        }
        let phase = Complex64::from_polar(1.0, -(positions[mu] - positions[nu]).abs());
        let rate = if mu < nu { gamma_left } else { gamma_right };
        -rate * phase
    });
    Ok(CouplingMatrix {
        entries,
        gamma_left,
        gamma_right,
    })
}

/// Positions plus matrix for a configuration and one disorder realization.
pub fn coupling_for(
    config: &ChainConfig,
    disorder: &DisorderSpec,
    realization_index: usize,
) -> Result<CouplingMatrix> {
    let positions = build_positions(config, disorder, realization_index)?;
    build_coupling_matrix(&positions, config.gamma_left, config.gamma_right)
}
