//! C ABI over `chiral_chain`.
//!
//! Every function returns a [`CcStatus`]. On failure the message is kept per
//! thread and can be read with [`cc_last_error_message`]. Handles come from
//! `*_new`/producer functions and must be released with the matching
//! `*_free`. Array outputs take a caller buffer and its length in elements;
//! a short buffer yields `CC_STATUS_BUFFER_TOO_SMALL`.
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the stated number of
//! elements. Handles must not be used after they are freed, and a handle
//! must not be shared between threads while it is being freed.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use chiral_chain::analysis::{detect_bursts, detect_plateaus, BurstParams, PlateauParams};
use chiral_chain::chain::{coupling_for, ChainConfig, CouplingMatrix, DisorderSpec};
use chiral_chain::dynamics::{
    long_time_populations, propagate, steady_state, StateVector, TimeGrid, Trajectory,
};
use chiral_chain::kernels::{self, DipoleGeometry, KernelValue};
use chiral_chain::specfun;
use chiral_chain::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Divergent = 3,
    NonConvergence = 4,
    Config = 5,
    NumericalIntegrity = 6,
    Resolution = 7,
    Fit = 8,
    UndefinedRetention = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

impl From<&Error> for CcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => CcStatus::Domain,
            Error::Divergent { .. } => CcStatus::Divergent,
            Error::NonConvergence { .. } => CcStatus::NonConvergence,
            Error::Config(_) => CcStatus::Config,
            Error::NumericalIntegrity(_) => CcStatus::NumericalIntegrity,
            Error::Resolution(_) => CcStatus::Resolution,
            Error::Fit(_) => CcStatus::Fit,
            Error::UndefinedRetention(_) => CcStatus::UndefinedRetention,
            Error::Io(_) | Error::Json(_) => CcStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcComplex {
    pub re: f64,
    pub im: f64,
}

/// `J = decay + i·shift`; `shift` is NaN when `shift_divergent` is set.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcKernel {
    pub decay: f64,
    pub shift: f64,
    pub shift_divergent: bool,
}

impl From<KernelValue> for CcKernel {
    fn from(k: KernelValue) -> Self {
        CcKernel {
            decay: k.decay_part,
            shift: k.shift_part,
            shift_divergent: k.shift_divergent,
        }
    }
}

/// Chain geometry, rates and optional single-site displacement.
pub struct CcChain {
    config: ChainConfig,
    disorder: DisorderSpec,
}

impl CcChain {
    fn matrix(&self) -> Result<CouplingMatrix, Failure> {
        Ok(coupling_for(&self.config, &self.disorder, 0)?)
    }
}

/// Populations, `P_tot` and `I_tot` on a time grid.
pub struct CcTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(CcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(CcStatus::from(&e), e.to_string())
    }
}

fn fail(status: CcStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CcStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (CcStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            (CcStatus::Panic, m)
        }
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(CcStatus::NullPointer, "null output pointer"))
}

unsafe fn input<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(CcStatus::NullPointer, "null handle"))
}

unsafe fn slice_in<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CcStatus::NullPointer, "null input array"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if len < src.len() {
        return Err(fail(
            CcStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(fail(CcStatus::NullPointer, "null output buffer"));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Bytes in the last error message of this thread, excluding the NUL.
#[no_mangle]
pub extern "C" fn cc_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message, NUL-terminated and truncated to `len`.
/// Returns the number of bytes written excluding the NUL.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn cc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let n = msg.len().min(len - 1);
        std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn cc_bessel_j(order: u32, x: f64, value: *mut f64) -> CcStatus {
    guard(|| {
        *out(value)? = specfun::bessel_j(order, x)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_bessel_y(order: u32, x: f64, value: *mut f64) -> CcStatus {
    guard(|| {
        *out(value)? = specfun::bessel_y(order, x)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_struve_h(order: u32, x: f64, value: *mut f64) -> CcStatus {
    guard(|| {
        *out(value)? = specfun::struve_h(order, x)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_chiral_fg(
    xi: f64,
    gamma_left: f64,
    gamma_right: f64,
    f: *mut CcComplex,
    g: *mut CcComplex,
) -> CcStatus {
    guard(|| {
        let (fv, gv) = kernels::chiral_fg(xi, gamma_left, gamma_right)?;
        *out(f)? = CcComplex {
            re: fv.re,
            im: fv.im,
        };
        *out(g)? = CcComplex {
            re: gv.re,
            im: gv.im,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_kernel_1d(xi: f64, value: *mut CcKernel) -> CcStatus {
    guard(|| {
        *out(value)? = kernels::kernel_1d_reciprocal(xi)?.into();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_kernel_2d(xi: f64, alignment: f64, value: *mut CcKernel) -> CcStatus {
    guard(|| {
        *out(value)? = kernels::kernel_2d(DipoleGeometry::new(xi, alignment)?).into();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_kernel_3d(xi: f64, alignment: f64, value: *mut CcKernel) -> CcStatus {
    guard(|| {
        *out(value)? = kernels::kernel_3d(DipoleGeometry::new(xi, alignment)?).into();
        Ok(())
    })
}

/// Uniform chain of `n_atoms` with spacing phase `xi`.
#[no_mangle]
pub unsafe extern "C" fn cc_chain_new(
    n_atoms: usize,
    xi: f64,
    gamma_left: f64,
    gamma_right: f64,
    chain: *mut *mut CcChain,
) -> CcStatus {
    guard(|| {
        let slot = out(chain)?;
        let config = ChainConfig::uniform(n_atoms, xi, gamma_left, gamma_right);
        config.validate()?;
        *slot = Box::into_raw(Box::new(CcChain {
            config,
            disorder: DisorderSpec::None,
        }));
        Ok(())
    })
}

/// Displace the 1-based `site` by `fraction` of the spacing; replaces any
/// earlier displacement.
#[no_mangle]
pub unsafe extern "C" fn cc_chain_displace(
    chain: *mut CcChain,
    site: usize,
    fraction: f64,
) -> CcStatus {
    guard(|| {
        let c = out(chain)?;
        let disorder = DisorderSpec::SingleSite {
            site,
            shift_fraction: fraction,
        };
        disorder.validate(c.config.n_atoms)?;
        c.disorder = disorder;
        c.matrix()?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_chain_free(chain: *mut CcChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Row-major `n × n` coupling matrix in units of the larger rate.
#[no_mangle]
pub unsafe extern "C" fn cc_chain_coupling(
    chain: *const CcChain,
    buf: *mut CcComplex,
    len: usize,
) -> CcStatus {
    guard(|| {
        let v = input(chain)?.matrix()?;
        let n = v.dim();
        let scale = v.gamma_left().max(v.gamma_right());
        let flat: Vec<f64> = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .flat_map(|(r, c)| {
                let z = v.entries()[(r, c)] / scale;
                [z.re, z.im]
            })
            .collect();
        copy_out(&flat, buf.cast::<f64>(), 2 * len)
    })
}

/// Propagate the uniform initial state over `times`, which must start at 0
/// and increase strictly. Every point is cross-checked between backends.
#[no_mangle]
pub unsafe extern "C" fn cc_propagate(
    chain: *const CcChain,
    times: *const f64,
    n_times: usize,
    trajectory: *mut *mut CcTrajectory,
) -> CcStatus {
    guard(|| {
        let c = input(chain)?;
        let slot = out(trajectory)?;
        let grid = TimeGrid::new(slice_in(times, n_times)?.to_vec())?;
        let traj = propagate(&c.matrix()?, &StateVector::uniform(c.config.n_atoms), &grid)?;
        *slot = Box::into_raw(Box::new(CcTrajectory(traj)));
        Ok(())
    })
}

/// Long-horizon run to `horizon` on a logarithmic (`log_grid`) or 0.05-step
/// linear grid, spot-checked between backends.
#[no_mangle]
pub unsafe extern "C" fn cc_propagate_long(
    chain: *const CcChain,
    horizon: f64,
    log_grid: bool,
    trajectory: *mut *mut CcTrajectory,
) -> CcStatus {
    guard(|| {
        let c = input(chain)?;
        let slot = out(trajectory)?;
        let traj = long_time_populations(
            &c.matrix()?,
            &StateVector::uniform(c.config.n_atoms),
            horizon,
            log_grid,
        )?;
        *slot = Box::into_raw(Box::new(CcTrajectory(traj)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_trajectory_free(trajectory: *mut CcTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Number of time points, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn cc_trajectory_len(trajectory: *const CcTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn cc_trajectory_atoms(trajectory: *const CcTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.0.n_atoms())
}

#[no_mangle]
pub unsafe extern "C" fn cc_trajectory_underflow(trajectory: *const CcTrajectory) -> bool {
    trajectory.as_ref().is_some_and(|t| t.0.underflow_clamped)
}

#[no_mangle]
pub unsafe extern "C" fn cc_trajectory_times(
    trajectory: *const CcTrajectory,
    buf: *mut f64,
    len: usize,
) -> CcStatus {
    guard(|| copy_out(&input(trajectory)?.0.times, buf, len))
}

#[no_mangle]
pub unsafe extern "C" fn cc_trajectory_total(
    trajectory: *const CcTrajectory,
    buf: *mut f64,
    len: usize,
) -> CcStatus {
    guard(|| copy_out(&input(trajectory)?.0.p_tot, buf, len))
}

#[no_mangle]
pub unsafe extern "C" fn cc_trajectory_intensity(
    trajectory: *const CcTrajectory,
    buf: *mut f64,
    len: usize,
) -> CcStatus {
    guard(|| copy_out(&input(trajectory)?.0.intensity, buf, len))
}

/// Row-major `len × n_atoms` site populations.
#[no_mangle]
pub unsafe extern "C" fn cc_trajectory_populations(
    trajectory: *const CcTrajectory,
    buf: *mut f64,
    len: usize,
) -> CcStatus {
    guard(|| {
        let flat: Vec<f64> = input(trajectory)?.0.populations.concat();
        copy_out(&flat, buf, len)
    })
}

/// `t → ∞` site populations from the uniform state. `approximate` is set
/// when the eigenbasis was too ill-conditioned and a long propagation was
/// used instead.
#[no_mangle]
pub unsafe extern "C" fn cc_steady_state(
    chain: *const CcChain,
    buf: *mut f64,
    len: usize,
    approximate: *mut bool,
) -> CcStatus {
    guard(|| {
        let c = input(chain)?;
        let flag = out(approximate)?;
        let ss = steady_state(&c.matrix()?, &StateVector::uniform(c.config.n_atoms))?;
        copy_out(&ss.state.populations(), buf, len)?;
        *flag = ss.approximate;
        Ok(())
    })
}

/// Plateau count of `P_tot` with default detector settings.
#[no_mangle]
pub unsafe extern "C" fn cc_count_plateaus(
    times: *const f64,
    p_tot: *const f64,
    intensity: *const f64,
    len: usize,
    count: *mut usize,
) -> CcStatus {
    guard(|| {
        let slot = out(count)?;
        let report = detect_plateaus(
            slice_in(times, len)?,
            slice_in(p_tot, len)?,
            slice_in(intensity, len)?,
            PlateauParams::default(),
        )?;
        *slot = report.count();
        Ok(())
    })
}

/// Burst count of `I_tot` with default detector settings.
#[no_mangle]
pub unsafe extern "C" fn cc_count_bursts(
    times: *const f64,
    intensity: *const f64,
    len: usize,
    count: *mut usize,
) -> CcStatus {
    guard(|| {
        let slot = out(count)?;
        *slot = detect_bursts(
            slice_in(times, len)?,
            slice_in(intensity, len)?,
            BurstParams::default(),
        )?
        .count();
        Ok(())
    })
}
