//! Ensemble statistics over positional disorder and feature extraction.

mod features;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{build_coupling_matrix, build_positions, ChainConfig, DisorderSpec};
use crate::dynamics::{propagate, propagate_observables, StateVector, TimeGrid, Trajectory};
use crate::error::{Error, Result};

pub use features::{
    detect_bursts, detect_plateaus, Burst, BurstParams, BurstReport, Plateau, PlateauParams,
    PlateauReport, DEFAULT_WINDOW, MIN_POINTS_PER_UNIT,
};

/// Realizations skipped for ordering violations beyond this fraction abort the run.
pub const MAX_SKIPPED_FRACTION: f64 = 0.1;
pub const DEFAULT_REALIZATIONS: usize = 200;

type Curves = (Vec<f64>, Vec<f64>);

/// Grid that covers the default detector window at the required density.
pub fn analysis_grid() -> TimeGrid {
    TimeGrid::with_step(DEFAULT_WINDOW.1, 1.0 / MIN_POINTS_PER_UNIT).expect("static grid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub mean_p_tot: Vec<f64>,
    pub std_p_tot: Vec<f64>,
    pub mean_i_tot: Vec<f64>,
    pub std_i_tot: Vec<f64>,
    /// Realizations that entered the statistics.
    pub n_realizations: usize,
    pub n_skipped: usize,
    pub seed: u64,
}

/// Sample mean and standard deviation (divisor `n − 1`) per time point,
/// accumulated in the order given as offsets from the first sample.
fn mean_std(samples: &[&[f64]], len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len() as f64;
    let pivot = samples[0];
    let mut shift = vec![0.0; len];
    for s in samples {
        for ((acc, x), p) in shift.iter_mut().zip(s.iter()).zip(pivot) {
            *acc += x - p;
        }
    }
    shift.iter_mut().for_each(|d| *d /= n);
    let mut var = vec![0.0; len];
    for s in samples {
        for (((v, x), p), d) in var.iter_mut().zip(s.iter()).zip(pivot).zip(&shift) {
            let dev = (x - p) - d;
            *v += dev * dev;
        }
    }
    let mean = pivot.iter().zip(&shift).map(|(p, d)| p + d).collect();
    let std = var.into_iter().map(|v| (v / (n - 1.0)).sqrt()).collect();
    (mean, std)
}

/// Mean and spread of `P_tot` and `I_tot` over disorder realizations.
///
/// Realizations run in parallel; statistics are reduced in realization
/// order, so results are bitwise reproducible for a given seed.
/// Realization 0 is additionally checked against the Runge-Kutta backend.
pub fn run_ensemble(
    config: &ChainConfig,
    disorder: &DisorderSpec,
    grid: &TimeGrid,
) -> Result<EnsembleResult> {
    config.validate()?;
    disorder.validate(config.n_atoms)?;
    let DisorderSpec::Ensemble {
        n_realizations,
        seed,
        ..
    } = *disorder
    else {
        return Err(Error::Config(
            "run_ensemble needs disorder mode 'ensemble'".into(),
        ));
    };
    if n_realizations < 2 {
        return Err(Error::Config(
            "an ensemble needs at least 2 realizations".into(),
        ));
    }
    let initial = StateVector::uniform(config.n_atoms);
    let outcomes: Vec<Result<Option<Curves>>> = (0..n_realizations)
        .into_par_iter()
        .map(|r| {
            let positions = match build_positions(config, disorder, r) {
                Ok(p) => p,
                Err(Error::Config(msg)) if msg.starts_with("atomic ordering") => return Ok(None),
                Err(e) => return Err(e),
            };
            let v = build_coupling_matrix(&positions, config.gamma_left, config.gamma_right)?;
            if r == 0 {
                let traj = propagate(&v, &initial, grid)?;
                Ok(Some((traj.p_tot, traj.intensity)))
            } else {
                propagate_observables(&v, &initial, grid).map(Some)
            }
        })
        .collect();
    let mut kept = Vec::with_capacity(n_realizations);
    for outcome in outcomes {
        if let Some(curves) = outcome? {
            kept.push(curves);
        }
    }
    let n_skipped = n_realizations - kept.len();
    if n_skipped as f64 > MAX_SKIPPED_FRACTION * n_realizations as f64 || kept.len() < 2 {
        return Err(Error::Config(format!(
            "{n_skipped} of {n_realizations} realizations violated atomic ordering"
        )));
    }
    let len = grid.len();
    let p: Vec<&[f64]> = kept.iter().map(|(p, _)| p.as_slice()).collect();
    let i: Vec<&[f64]> = kept.iter().map(|(_, i)| i.as_slice()).collect();
    let (mean_p_tot, std_p_tot) = mean_std(&p, len);
    let (mean_i_tot, std_i_tot) = mean_std(&i, len);
    Ok(EnsembleResult {
        times: grid.points().to_vec(),
        mean_p_tot,
        std_p_tot,
        mean_i_tot,
        std_i_tot,
        n_realizations: kept.len(),
        n_skipped,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Least-squares slope of `ln P_tot` against time over `window`, returned
/// as a positive decay rate.
pub fn fit_decay_rate(times: &[f64], p_tot: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != p_tot.len() {
        return Err(Error::Fit("times and populations differ in length".into()));
    }
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Fit(format!("degenerate window ({lo}, {hi})")));
    }
    let slack = 1e-12 * hi.abs().max(1.0);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(p_tot)
        .filter(|(&t, _)| t >= lo - slack && t <= hi + slack)
        .map(|(&t, &p)| (t, p))
        .collect();
    if pts.len() < 10 {
        return Err(Error::Fit(format!(
            "{} points in window ({lo}, {hi}); at least 10 required",
            pts.len()
        )));
    }
    if pts.iter().any(|&(_, p)| !(p > 0.0)) {
        return Err(Error::Fit(
            "P_tot must be positive on the fit window".into(),
        ));
    }
    let n = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(t, p) in &pts {
        let dx = t - t_mean;
        let dy = p.ln() - y_mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit {
        rate: -slope,
        r_squared,
        n_points: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    /// `P_tot(t_far) / P_tot(t_ref)`.
    pub retention: f64,
    /// `P_m(t_far)` per site.
    pub site_profile: Vec<f64>,
    pub t_ref: f64,
    pub t_far: f64,
}

impl Localization {
    /// Share of the surviving excitation held by the given 1-based sites.
    pub fn share(&self, sites: &[usize]) -> f64 {
        let total: f64 = self.site_profile.iter().sum();
        let held: f64 = sites.iter().map(|&s| self.site_profile[s - 1]).sum();
        held / total
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> Result<f64> {
    let last = *times
        .last()
        .ok_or_else(|| Error::Config("empty trajectory".into()))?;
    if t < times[0] || t > last * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "time {t} outside the trajectory [{}, {last}]",
            times[0]
        )));
    }
    let k = times.partition_point(|&x| x < t);
    if k < times.len() && times[k] == t {
        return Ok(values[k]);
    }
    if k >= times.len() {
        return Ok(values[times.len() - 1]);
    }
    let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    Ok(values[k - 1] * (1.0 - w) + values[k] * w)
}

/// Retention between `t_ref` and `t_far` and the site profile at `t_far`.
pub fn localization_metric(
    trajectory: &Trajectory,
    t_ref: f64,
    t_far: f64,
) -> Result<Localization> {
    if !(t_ref < t_far) {
        return Err(Error::Config(format!(
            "need t_ref < t_far (got {t_ref}, {t_far})"
        )));
    }
    let p_ref = interpolate(&trajectory.times, &trajectory.p_tot, t_ref)?;
    if p_ref < 1e-12 {
        return Err(Error::UndefinedRetention(p_ref));
    }
    let p_far = interpolate(&trajectory.times, &trajectory.p_tot, t_far)?;
    let site_profile = (0..trajectory.n_atoms())
        .map(|m| interpolate(&trajectory.times, &trajectory.site_population(m), t_far))
        .collect::<Result<Vec<_>>>()?;
    Ok(Localization {
        retention: p_far / p_ref,
        site_profile,
        t_ref,
        t_far,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exponent_and_is_scale_free() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let p: Vec<f64> = t.iter().map(|t| 0.3 * (-2.5 * t).exp()).collect();
        let f = fit_decay_rate(&t, &p, (0.0, 4.9)).unwrap();
        assert!((f.rate - 2.5).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(f.n_points, 50);
    }

    #[test]
    fn fit_errors() {
        let t: Vec<f64> = (0..5).map(|k| k as f64).collect();
        let p = vec![1.0; 5];
        assert!(matches!(
            fit_decay_rate(&t, &p, (0.0, 4.0)),
            Err(Error::Fit(_))
        ));
        assert!(matches!(
            fit_decay_rate(&t, &p, (2.0, 2.0)),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn interpolation() {
        let t = [0.0, 1.0, 3.0];
        let v = [1.0, 0.5, 0.0];
        assert_eq!(interpolate(&t, &v, 1.0).unwrap(), 0.5);
        assert_eq!(interpolate(&t, &v, 2.0).unwrap(), 0.25);
        assert!(interpolate(&t, &v, 4.0).is_err());
    }

    #[test]
    fn sample_std_uses_n_minus_one() {
        let a = [1.0, 2.0];
        let b = [3.0, 2.0];
        let (m, s) = mean_std(&[&a, &b], 2);
        assert_eq!(m, vec![2.0, 2.0]);
        assert!((s[0] - 2f64.sqrt()).abs() < 1e-15 && s[1] == 0.0);
    }
}
