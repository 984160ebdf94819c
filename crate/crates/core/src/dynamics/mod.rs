//! Single-excitation dynamics `dc/dt = V c`.
//!
//! Times are dimensionless `γt` with `γ = max(γ_L, γ_R)`; intensities are in
//! units of `γ`. The matrix exponential is the primary propagator, an
//! adaptive Dormand-Prince integrator the independent cross-check.

mod eigen;
mod expm;
mod rk;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::CouplingMatrix;
use crate::error::{Error, Result};

pub use eigen::{eigensystem, eigenvalues, Eigensystem};
pub use expm::expm;
pub use rk::{Dopri5, Tolerance};

/// Maximum amplitude discrepancy tolerated between the two backends.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-8;
/// Populations below this are stored as zero and flagged.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;
/// Propagation horizon for the steady-state fallback.
pub const STEADY_STATE_FALLBACK_TIME: f64 = 1e3;
const CONDITION_LIMIT: f64 = 1e12;
const SPOT_CHECKS: usize = 10;
const SPOT_CHECK_SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub time: f64,
    pub amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn new(time: f64, amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm_sq = amplitudes.norm_squared();
        if !norm_sq.is_finite() || norm_sq > 1.0 + 1e-9 {
            return Err(Error::Config(format!("state norm {norm_sq} exceeds one")));
        }
        Ok(StateVector { time, amplitudes })
    }

    /// `c_m = 1/√N` at `t = 0`.
    pub fn uniform(n_atoms: usize) -> Self {
        let c = Complex64::new(1.0 / (n_atoms as f64).sqrt(), 0.0);
        StateVector {
            time: 0.0,
            amplitudes: DVector::from_element(n_atoms, c),
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn total_population(&self) -> f64 {
        self.amplitudes.norm_squared()
    }
}

/// Strictly increasing output times starting at zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.first() != Some(&0.0) {
            return Err(Error::Config("time grid must start at 0".into()));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("time grid must be finite".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "time grid must be strictly increasing".into(),
            ));
        }
        Ok(TimeGrid { points })
    }

    /// `n_points` equally spaced times on `[0, t_end]`.
    pub fn uniform(t_end: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 || !(t_end > 0.0) {
            return Err(Error::Config(format!(
                "uniform grid needs t_end > 0 and at least 2 points (got {t_end}, {n_points})"
            )));
        }
        let dt = t_end / (n_points - 1) as f64;
        let mut points: Vec<f64> = (0..n_points).map(|k| k as f64 * dt).collect();
        points[n_points - 1] = t_end;
        TimeGrid::new(points)
    }

    /// Uniform grid with step close to `dt` that ends exactly at `t_end`.
    pub fn with_step(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let n = (t_end / dt).round().max(1.0) as usize + 1;
        TimeGrid::uniform(t_end, n)
    }

    /// 2000 points on `γt ∈ [0, 20]`.
    pub fn default_linear() -> Self {
        TimeGrid::uniform(20.0, 2000).expect("static grid")
    }

    /// Zero followed by `per_decade` log-spaced points per decade from
    /// `γt = 10⁻²` up to `horizon`, hitting every power of ten exactly.
    pub fn logarithmic(horizon: f64, per_decade: usize) -> Result<Self> {
        if !(horizon > 1e-2 && horizon.is_finite()) || per_decade == 0 {
            return Err(Error::Config(format!(
                "logarithmic grid needs horizon > 1e-2 and per_decade > 0 (got {horizon}, {per_decade})"
            )));
        }
        let lo = -2i32;
        let top = horizon.log10();
        let mut points = vec![0.0];
        let steps = ((top - lo as f64) * per_decade as f64 + 1e-9).floor() as usize;
        for j in 0..=steps {
            let decade = lo + (j / per_decade) as i32;
            let frac = (j % per_decade) as f64 / per_decade as f64;
            let t = if frac == 0.0 {
                10f64.powi(decade)
            } else {
                10f64.powf(decade as f64 + frac)
            };
            if t < horizon * (1.0 - 1e-12) {
                points.push(t);
            }
        }
        points.push(horizon);
        TimeGrid::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn end(&self) -> f64 {
        *self.points.last().expect("non-empty grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<DVector<Complex64>>,
    /// `populations[k][m] = |c_m(t_k)|²`.
    pub populations: Vec<Vec<f64>>,
    pub p_tot: Vec<f64>,
    pub intensity: Vec<f64>,
    pub underflow_clamped: bool,
}

impl Trajectory {
    pub fn n_atoms(&self) -> usize {
        self.amplitudes.first().map_or(0, |a| a.len())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> StateVector {
        StateVector {
            time: self.times[k],
            amplitudes: self.amplitudes[k].clone(),
        }
    }

    /// `C_{nn'}(t_k) = c_n c_{n'}*` with 0-based site indices.
    pub fn coherence(&self, k: usize, n: usize, n_prime: usize) -> Complex64 {
        self.amplitudes[k][n] * self.amplitudes[k][n_prime].conj()
    }

    /// `P_m(t)` for 0-based site `m`.
    pub fn site_population(&self, m: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[m]).collect()
    }

    fn from_amplitudes(
        generator: &DMatrix<Complex64>,
        times: Vec<f64>,
        amplitudes: Vec<DVector<Complex64>>,
    ) -> Self {
        let mut underflow_clamped = false;
        let mut populations = Vec::with_capacity(times.len());
        let mut p_tot = Vec::with_capacity(times.len());
        let mut intensity = Vec::with_capacity(times.len());
        for c in &amplitudes {
            let pops: Vec<f64> = c
                .iter()
                .map(|z| {
                    let p = z.norm_sqr();
                    if p < UNDERFLOW_FLOOR {
                        if p > 0.0 || !z.re.is_finite() {
                            underflow_clamped = true;
                        }
                        0.0
                    } else {
                        p
                    }
                })
                .collect();
            p_tot.push(pops.iter().sum());
            populations.push(pops);
            intensity.push(scaled_intensity(generator, c));
        }
        Trajectory {
            times,
            amplitudes,
            populations,
            p_tot,
            intensity,
            underflow_clamped,
        }
    }
}

/// `V/γ` with `γ = max(γ_L, γ_R)`: the generator in `γt` units.
pub fn generator(matrix: &CouplingMatrix) -> DMatrix<Complex64> {
    let gamma = matrix.gamma_left().max(matrix.gamma_right());
    matrix.entries() / Complex64::from(gamma)
}

fn scaled_intensity(generator: &DMatrix<Complex64>, c: &DVector<Complex64>) -> f64 {
    -2.0 * c.dotc(&(generator * c)).re
}

/// Radiated intensity `I = −c†(V+V†)c` in units of `γ`.
pub fn intensity(matrix: &CouplingMatrix, state: &StateVector) -> Result<f64> {
    check_dims(matrix, state)?;
    Ok(scaled_intensity(&generator(matrix), &state.amplitudes))
}

fn check_dims(matrix: &CouplingMatrix, state: &StateVector) -> Result<()> {
    if matrix.dim() != state.amplitudes.len() {
        return Err(Error::Config(format!(
            "state has {} amplitudes but the chain has {} atoms",
            state.amplitudes.len(),
            matrix.dim()
        )));
    }
    Ok(())
}

fn check_initial(matrix: &CouplingMatrix, initial: &StateVector) -> Result<()> {
    check_dims(matrix, initial)?;
    if initial.time != 0.0 {
        return Err(Error::Config("initial state must sit at t = 0".into()));
    }
    if (initial.total_population() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "initial state must be normalized (norm² = {})",
            initial.total_population()
        )));
    }
    Ok(())
}

fn step_through(
    generator: &DMatrix<Complex64>,
    initial: &DVector<Complex64>,
    grid: &TimeGrid,
    mut visit: impl FnMut(&DVector<Complex64>),
) -> Result<()> {
    let mut c = initial.clone();
    visit(&c);
    let mut cached: Option<(f64, DMatrix<Complex64>)> = None;
    for w in grid.points().windows(2) {
        let dt = w[1] - w[0];
        let step = match &cached {
            Some((h, e)) if (h - dt).abs() <= 1e-12 * dt => e,
            _ => {
                let e = expm(&(generator * Complex64::from(dt)))?;
                &cached.insert((dt, e)).1
            }
        };
        c = step * c;
        visit(&c);
    }
    Ok(())
}

/// Matrix-exponential propagation only; step propagators are reused while
/// the grid spacing is unchanged.
pub fn propagate_unchecked(
    matrix: &CouplingMatrix,
    initial: &StateVector,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    check_initial(matrix, initial)?;
    let a = generator(matrix);
    let mut amplitudes = Vec::with_capacity(grid.len());
    step_through(&a, &initial.amplitudes, grid, |c| {
        amplitudes.push(c.clone())
    })?;
    Ok(Trajectory::from_amplitudes(
        &a,
        grid.points().to_vec(),
        amplitudes,
    ))
}

/// `(P_tot, I_tot)` on the grid without keeping amplitudes.
pub fn propagate_observables(
    matrix: &CouplingMatrix,
    initial: &StateVector,
    grid: &TimeGrid,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_initial(matrix, initial)?;
    let a = generator(matrix);
    let mut p_tot = Vec::with_capacity(grid.len());
    let mut intensity = Vec::with_capacity(grid.len());
    step_through(&a, &initial.amplitudes, grid, |c| {
        p_tot.push(c.norm_squared());
        intensity.push(scaled_intensity(&a, c));
    })?;
    Ok((p_tot, intensity))
}

/// Largest amplitude discrepancy between `trajectory` and an independent
/// Runge-Kutta solution at the selected (sorted) grid indices.
pub fn backend_discrepancy(
    matrix: &CouplingMatrix,
    trajectory: &Trajectory,
    indices: &[usize],
) -> Result<f64> {
    let a = generator(matrix);
    let y0: Vec<Complex64> = trajectory.amplitudes[0].iter().copied().collect();
    let mut rk = Dopri5::new(&a, trajectory.times[0], &y0, Tolerance::default());
    let mut worst = 0.0f64;
    for &k in indices {
        let y = rk.advance_to(trajectory.times[k])?;
        let d = trajectory.amplitudes[k]
            .iter()
            .zip(y)
            .map(|(u, v)| (u - v).norm())
            .fold(0.0, f64::max);
        worst = worst.max(d);
    }
    Ok(worst)
}

fn enforce_agreement(discrepancy: f64) -> Result<()> {
    if discrepancy > CROSS_CHECK_TOLERANCE || discrepancy.is_nan() {
        return Err(Error::NumericalIntegrity(format!(
            "matrix-exponential and Runge-Kutta backends differ by {discrepancy:e} (limit {CROSS_CHECK_TOLERANCE:e})"
        )));
    }
    Ok(())
}

/// `c(t_k) = exp(V t_k) c(0)` on every grid point, verified point by point
/// against the Runge-Kutta backend.
pub fn propagate(
    matrix: &CouplingMatrix,
    initial: &StateVector,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let traj = propagate_unchecked(matrix, initial, grid)?;
    let all: Vec<usize> = (0..traj.len()).collect();
    enforce_agreement(backend_discrepancy(matrix, &traj, &all)?)?;
    Ok(traj)
}

/// Long-horizon run: 400 points per decade on a log grid (or 20 per unit
/// time on a linear one), spot-checked against Runge-Kutta at ten seeded
/// random grid points.
pub fn long_time_populations(
    matrix: &CouplingMatrix,
    initial: &StateVector,
    horizon: f64,
    log_grid: bool,
) -> Result<Trajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let grid = if log_grid && horizon > 1e-2 {
        TimeGrid::logarithmic(horizon, 400)?
    } else {
        TimeGrid::with_step(horizon, 0.05)?
    };
    let traj = propagate_unchecked(matrix, initial, &grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SPOT_CHECK_SEED);
    let mut picks: Vec<usize> = (0..SPOT_CHECKS)
        .map(|_| rng.gen_range(1..traj.len()))
        .collect();
    picks.sort_unstable();
    picks.dedup();
    enforce_agreement(backend_discrepancy(matrix, &traj, &picks)?)?;
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub state: StateVector,
    /// Set when the eigenvector basis was too ill-conditioned and the result
    /// comes from propagation to `γt = 10³`.
    pub approximate: bool,
    pub condition: f64,
}

/// `t → ∞` limit: the component of `initial` in the null space of `V`,
/// split off with the biorthogonal eigenbasis.
pub fn steady_state(matrix: &CouplingMatrix, initial: &StateVector) -> Result<SteadyState> {
    check_initial(matrix, initial)?;
    null_space_limit(&generator(matrix), &initial.amplitudes)
}

/// `lim_{t→∞} exp(A t) c₀` for a generator whose spectrum lies in the closed
/// left half-plane. Falls back to `exp(A·10³) c₀` when the eigenvector basis
/// has condition number above 10¹².
pub fn null_space_limit(a: &DMatrix<Complex64>, c0: &DVector<Complex64>) -> Result<SteadyState> {
    let n = a.nrows();
    let zero_tol = 1e-10 * a.norm().max(1.0);
    let values = eigenvalues(a)?;
    if values.iter().all(|l| l.norm() > zero_tol) {
        return Ok(SteadyState {
            state: StateVector {
                time: f64::INFINITY,
                amplitudes: DVector::zeros(n),
            },
            approximate: false,
            condition: f64::NAN,
        });
    }
    let es = eigensystem(a)?;
    if es.condition > CONDITION_LIMIT {
        let e = expm(&(a * Complex64::from(STEADY_STATE_FALLBACK_TIME)))?;
        return Ok(SteadyState {
            state: StateVector {
                time: STEADY_STATE_FALLBACK_TIME,
                amplitudes: e * c0,
            },
            approximate: true,
            condition: es.condition,
        });
    }
    let coeffs = es.coefficients(c0)?;
    let mut c = DVector::<Complex64>::zeros(n);
    for (k, lambda) in es.values.iter().enumerate() {
        if lambda.norm() <= zero_tol {
            c += es.vectors.column(k) * coeffs[k];
        }
    }
    Ok(SteadyState {
        state: StateVector {
            time: f64::INFINITY,
            amplitudes: c,
        },
        approximate: false,
        condition: es.condition,
    })
}
