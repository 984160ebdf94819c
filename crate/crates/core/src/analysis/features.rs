//! Plateau and burst detection on `P_tot(t)` and `I_tot(t)` curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default evaluation window `(γt_lo, γt_hi)` for both detectors.
pub const DEFAULT_WINDOW: (f64, f64) = (0.5, 1000.0);
/// Finest spacing the detectors accept is `1 / MIN_POINTS_PER_UNIT`.
pub const MIN_POINTS_PER_UNIT: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauParams {
    /// Plateau points have `λ(t) = I/P` below this fraction of the
    /// window-mean decay rate.
    pub rel_threshold: f64,
    /// Minimum plateau length in `γt`.
    pub min_duration: f64,
    pub window: (f64, f64),
    /// Points with `P_tot` below this are never part of a plateau.
    pub population_floor: f64,
}

impl Default for PlateauParams {
    fn default() -> Self {
        PlateauParams {
            rel_threshold: 0.1,
            min_duration: 5.0,
            window: DEFAULT_WINDOW,
            population_floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub t_start: f64,
    pub t_end: f64,
    pub mean_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauReport {
    pub intervals: Vec<Plateau>,
    /// `ln(P_lo/P_hi)/(t_hi − t_lo)` over the resolved part of the window.
    pub mean_rate: f64,
    pub params: PlateauParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstParams {
    /// Minimum topographic prominence as a fraction of the window maximum.
    pub min_prominence_fraction: f64,
    /// Minimum ratio of prominence to peak height.
    pub min_relative_prominence: f64,
    pub window: (f64, f64),
}

impl Default for BurstParams {
    fn default() -> Self {
        BurstParams {
            min_prominence_fraction: 0.05,
            min_relative_prominence: 0.5,
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    pub t_peak: f64,
    pub i_peak: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstReport {
    pub peaks: Vec<Burst>,
    pub params: BurstParams,
}

impl PlateauReport {
    pub fn count(&self) -> usize {
        self.intervals.len()
    }
}

impl BurstReport {
    pub fn count(&self) -> usize {
        self.peaks.len()
    }
}

/// Index range of `times` inside `window`, after checking coverage and
/// sampling density.
fn window_range(times: &[f64], window: (f64, f64)) -> Result<std::ops::Range<usize>> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Config(format!(
            "invalid detector window ({lo}, {hi})"
        )));
    }
    let slack = 1e-9 * hi.abs().max(1.0);
    match (times.first(), times.last()) {
        (Some(&first), Some(&last)) if first <= lo + slack && last >= hi - slack => {}
        _ => {
            return Err(Error::Resolution(format!(
                "curve does not cover the detector window ({lo}, {hi})"
            )))
        }
    }
    let start = times.partition_point(|&t| t < lo - slack);
    let end = times.partition_point(|&t| t <= hi + slack);
    let max_gap = 1.0 / MIN_POINTS_PER_UNIT;
    if end - start < 3
        || times[start..end]
            .windows(2)
            .any(|w| w[1] - w[0] > max_gap * (1.0 + 1e-9))
    {
        return Err(Error::Resolution(format!(
            "detectors need at least {MIN_POINTS_PER_UNIT} points per unit time in ({lo}, {hi})"
        )));
    }
    Ok(start..end)
}

fn check_lengths(times: &[f64], other: &[f64]) -> Result<()> {
    if times.len() != other.len() {
        return Err(Error::Config(format!(
            "curve length {} does not match {} time points",
            other.len(),
            times.len()
        )));
    }
    Ok(())
}

/// Maximal runs where the instantaneous rate `I_tot/P_tot` drops below
/// `rel_threshold` times the window-mean rate.
pub fn detect_plateaus(
    times: &[f64],
    p_tot: &[f64],
    i_tot: &[f64],
    params: PlateauParams,
) -> Result<PlateauReport> {
    check_lengths(times, p_tot)?;
    check_lengths(times, i_tot)?;
    let range = window_range(times, params.window)?;
    let resolved: Vec<usize> = range
        .clone()
        .filter(|&k| p_tot[k] >= params.population_floor)
        .collect();
    let (Some(&first), Some(&last)) = (resolved.first(), resolved.last()) else {
        return Ok(PlateauReport {
            intervals: Vec::new(),
            mean_rate: f64::NAN,
            params,
        });
    };
    let span = times[last] - times[first];
    let mean_rate = if span > 0.0 {
        (p_tot[first] / p_tot[last]).ln() / span
    } else {
        0.0
    };
    let no_decay = mean_rate <= 1e-12;
    let threshold = params.rel_threshold * mean_rate;

    let mut intervals = Vec::new();
    let mut run: Option<(usize, f64, usize)> = None;
    let mut close = |run: &mut Option<(usize, f64, usize)>, end: usize| {
        if let Some((start, sum, count)) = run.take() {
            if times[end] - times[start] >= params.min_duration {
                intervals.push(Plateau {
                    t_start: times[start],
                    t_end: times[end],
                    mean_level: sum / count as f64,
                });
            }
        }
    };
    let mut prev = range.start;
    for k in range {
        let p = p_tot[k];
        let flat = p >= params.population_floor && (no_decay || i_tot[k] / p < threshold);
        if flat {
            match run.as_mut() {
                Some((_, sum, count)) => {
                    *sum += p;
                    *count += 1;
                }
                None => run = Some((k, p, 1)),
            }
        } else {
            close(&mut run, prev);
        }
        prev = k;
    }
    close(&mut run, prev);
    Ok(PlateauReport {
        intervals,
        mean_rate,
        params,
    })
}

/// Local maxima of `intensity` whose topographic prominence passes both
/// the absolute and the relative threshold.
pub fn detect_bursts(times: &[f64], intensity: &[f64], params: BurstParams) -> Result<BurstReport> {
    check_lengths(times, intensity)?;
    let range = window_range(times, params.window)?;
    let y = &intensity[range.clone()];
    let t = &times[range];
    let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut peaks = Vec::new();
    if !(top > 0.0) {
        return Ok(BurstReport { peaks, params });
    }
    let min_prominence = params.min_prominence_fraction * top;
    let n = y.len();
    let mut k = 1;
    while k + 1 < n {
        if !(y[k] > y[k - 1]) {
            k += 1;
            continue;
        }
        // flat tops: the peak sits at the left edge of the run of equal values
        let mut right = k;
        while right + 1 < n && y[right + 1] == y[k] {
            right += 1;
        }
        if right + 1 >= n || y[right + 1] > y[k] {
            k = right + 1;
            continue;
        }
        let height = y[k];
        let mut left_min = height;
        let mut i = k;
        while i > 0 {
            i -= 1;
            if y[i] > height {
                break;
            }
            left_min = left_min.min(y[i]);
        }
        let mut right_min = height;
        let mut j = right;
        while j + 1 < n {
            j += 1;
            if y[j] > height {
                break;
            }
            right_min = right_min.min(y[j]);
        }
        let prominence = height - left_min.max(right_min);
        if prominence > 0.0
            && prominence >= min_prominence
            && prominence >= params.min_relative_prominence * height
        {
            peaks.push(Burst {
                t_peak: t[k],
                i_peak: height,
                prominence,
            });
        }
        k = right + 1;
    }
    Ok(BurstReport { peaks, params })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t_end: f64, dt: f64) -> Vec<f64> {
        let n = (t_end / dt).round() as usize;
        (0..=n).map(|k| k as f64 * dt).collect()
    }

    fn small_window() -> (f64, f64) {
        (0.5, 20.0)
    }

    #[test]
    fn exponential_has_no_plateau() {
        let t = grid(20.0, 0.01);
        let p: Vec<f64> = t.iter().map(|t| (-0.3 * t).exp()).collect();
        let i: Vec<f64> = p.iter().map(|p| 0.3 * p).collect();
        let params = PlateauParams {
            window: small_window(),
            ..Default::default()
        };
        let r = detect_plateaus(&t, &p, &i, params).unwrap();
        assert!(r.intervals.is_empty());
        assert!((r.mean_rate - 0.3).abs() < 1e-12);
    }

    #[test]
    fn step_profile_has_one_plateau() {
        // decays on [0, 5] and [12, 20], flat in between
        let t = grid(20.0, 0.01);
        let rate = |t: f64| if (5.0..12.0).contains(&t) { 0.0 } else { 0.5 };
        let mut p = Vec::new();
        let mut acc = 0.0f64;
        for (k, &tk) in t.iter().enumerate() {
            if k > 0 {
                acc += rate(tk) * 0.01;
            }
            p.push((-acc).exp());
        }
        let i: Vec<f64> = t.iter().zip(&p).map(|(&t, p)| rate(t) * p).collect();
        let params = PlateauParams {
            window: small_window(),
            ..Default::default()
        };
        let r = detect_plateaus(&t, &p, &i, params).unwrap();
        assert_eq!(r.count(), 1);
        let pl = r.intervals[0];
        assert!((pl.t_start - 5.0).abs() < 0.02 && (pl.t_end - 11.99).abs() < 0.02);
    }

    #[test]
    fn constant_curve_is_one_plateau() {
        let t = grid(20.0, 0.05);
        let p = vec![0.5; t.len()];
        let i = vec![0.0; t.len()];
        let params = PlateauParams {
            window: small_window(),
            ..Default::default()
        };
        assert_eq!(detect_plateaus(&t, &p, &i, params).unwrap().count(), 1);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let t = grid(20.0, 0.1);
        let p = vec![1.0; t.len()];
        let params = PlateauParams {
            window: small_window(),
            ..Default::default()
        };
        assert!(matches!(
            detect_plateaus(&t, &p, &p, params),
            Err(Error::Resolution(_))
        ));
        let short = grid(10.0, 0.01);
        let q = vec![1.0; short.len()];
        assert!(matches!(
            detect_bursts(
                &short,
                &q,
                BurstParams {
                    window: small_window(),
                    ..Default::default()
                }
            ),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn isolated_bump_is_a_burst() {
        let t = grid(20.0, 0.01);
        let i: Vec<f64> = t
            .iter()
            .map(|&t| (-t).exp() + 0.2 * (-(t - 8.0).powi(2)).exp())
            .collect();
        let r = detect_bursts(
            &t,
            &i,
            BurstParams {
                window: small_window(),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.count(), 1);
        assert!((r.peaks[0].t_peak - 8.0).abs() < 0.02);
    }

    #[test]
    fn ripple_on_decay_is_not_a_burst() {
        let t = grid(20.0, 0.01);
        let i: Vec<f64> = t
            .iter()
            .map(|&t| (-0.2 * t).exp() * (1.0 + 0.1 * (3.0 * t).sin()))
            .collect();
        let r = detect_bursts(
            &t,
            &i,
            BurstParams {
                window: small_window(),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.count(), 0);
    }

    #[test]
    fn flat_top_counts_once() {
        let t = grid(20.0, 0.05);
        let i: Vec<f64> = t
            .iter()
            .map(|&t| if (9.0..=10.0).contains(&t) { 1.0 } else { 0.0 })
            .collect();
        let r = detect_bursts(
            &t,
            &i,
            BurstParams {
                window: small_window(),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.count(), 1);
        assert!((r.peaks[0].t_peak - 9.0).abs() < 1e-9);
    }
}
