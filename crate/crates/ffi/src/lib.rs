//! C interface: opaque simulation handles built from TOML configurations,
//! status codes, and a thread-local message for the last failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wbcip::config::ExperimentConfig;
use wbcip::dec::theta_coefficients;
use wbcip::experiment::Case;
use wbcip::physics::{flux, PhysParams, Vec2};
use wbcip::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WbcipStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    InvalidState = 4,
    StepFailure = 5,
    Infeasible = 6,
    NoReference = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// Opaque simulation handle.
pub struct WbcipSimulation {
    case: Case,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: WbcipStatus, msg: impl Into<String>) -> WbcipStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> WbcipStatus {
    match e {
        Error::InputDomain(_) => WbcipStatus::InvalidArgument,
        Error::Config(_) | Error::Parse(_) => WbcipStatus::Config,
        Error::State { .. } => WbcipStatus::InvalidState,
        Error::StepFailure { .. } => WbcipStatus::StepFailure,
        Error::Infeasible { .. } => WbcipStatus::Infeasible,
        Error::Internal(_) | Error::Io(_) => WbcipStatus::Internal,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard<F>(f: F) -> WbcipStatus
where
    F: FnOnce() -> Result<(), WbcipStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WbcipStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(WbcipStatus::Internal, "panic inside the solver"),
    }
}

fn lift<T>(r: wbcip::Result<T>) -> Result<T, WbcipStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn handle<'a>(sim: *const WbcipSimulation) -> Result<&'a WbcipSimulation, WbcipStatus> {
    sim.as_ref().ok_or_else(|| fail(WbcipStatus::NullPointer, "null simulation handle"))
}

unsafe fn handle_mut<'a>(sim: *mut WbcipSimulation) -> Result<&'a mut WbcipSimulation, WbcipStatus> {
    sim.as_mut().ok_or_else(|| fail(WbcipStatus::NullPointer, "null simulation handle"))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), WbcipStatus> {
    if p.is_null() {
        Err(fail(WbcipStatus::NullPointer, format!("null pointer for {name}")))
    } else {
        Ok(())
    }
}

/// Builds a simulation from a TOML configuration on its first mesh,
/// initialized with the frictionless steady state of its test.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` a valid pointer.
/// The handle written to `out` must be released with `wbcip_simulation_free`.
#[no_mangle]
pub unsafe extern "C" fn wbcip_simulation_new(
    config_toml: *const c_char,
    out: *mut *mut WbcipSimulation,
) -> WbcipStatus {
    guard(|| {
        non_null(config_toml, "config_toml")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(config_toml)
            .to_str()
            .map_err(|_| fail(WbcipStatus::InvalidArgument, "configuration is not valid UTF-8"))?;
        let cfg = lift(ExperimentConfig::from_toml_str(text))?;
        let case = lift(Case::new(&cfg, cfg.discretization.elems[0]))?;
        *out = Box::into_raw(Box::new(WbcipSimulation { case }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from `wbcip_simulation_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wbcip_simulation_free(sim: *mut WbcipSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances with CFL steps until `t_end`, the last step shortened to land on it.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wbcip_simulation_advance(sim: *mut WbcipSimulation, t_end: f64) -> WbcipStatus {
    guard(|| {
        let s = handle_mut(sim)?;
        if !t_end.is_finite() {
            return Err(fail(WbcipStatus::InvalidArgument, "final time must be finite"));
        }
        lift(s.case.sim.advance_to(t_end)).map(|_| ())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wbcip_simulation_time(sim: *const WbcipSimulation, out: *mut f64) -> WbcipStatus {
    guard(|| {
        let s = handle(sim)?;
        non_null(out, "out")?;
        *out = s.case.sim.time();
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wbcip_simulation_num_dofs(sim: *const WbcipSimulation, out: *mut usize) -> WbcipStatus {
    guard(|| {
        let s = handle(sim)?;
        non_null(out, "out")?;
        *out = s.case.sim.discretization().n_dofs();
        Ok(())
    })
}

/// Copies DoF abscissae and nodal `H`, `q` into arrays of length `len`,
/// which must be at least the DoF count. Any output pointer may be null.
///
/// # Safety
/// `sim` must be a live handle; non-null outputs must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wbcip_simulation_copy_state(
    sim: *const WbcipSimulation,
    x: *mut f64,
    h: *mut f64,
    q: *mut f64,
    len: usize,
) -> WbcipStatus {
    guard(|| {
        let s = handle(sim)?;
        let disc = s.case.sim.discretization();
        let n = disc.n_dofs();
        if len < n {
            return Err(fail(WbcipStatus::BufferTooSmall, format!("buffer holds {len} values, need {n}")));
        }
        let nodal = disc.nodal_values(s.case.sim.state());
        let xs = disc.mesh().dof_coords();
        for i in 0..n {
            if !x.is_null() {
                *x.add(i) = xs[i];
            }
            if !h.is_null() {
                *h.add(i) = nodal[i][0];
            }
            if !q.is_null() {
                *q.add(i) = nodal[i][1];
            }
        }
        Ok(())
    })
}

/// L¹ errors in `H` and `q` against the steady reference of the test.
///
/// # Safety
/// `sim` must be a live handle; `err_h` and `err_q` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wbcip_simulation_l1_error(
    sim: *const WbcipSimulation,
    err_h: *mut f64,
    err_q: *mut f64,
) -> WbcipStatus {
    guard(|| {
        let s = handle(sim)?;
        non_null(err_h, "err_h")?;
        non_null(err_q, "err_q")?;
        match lift(s.case.errors())? {
            Some([eh, eq]) => {
                *err_h = eh;
                *err_q = eq;
                Ok(())
            }
            None => Err(fail(WbcipStatus::NoReference, "this configuration has no steady reference")),
        }
    })
}

/// DeC integration weights for `m` subintervals, row-major `(m+1)×(m+1)`;
/// row `k`, column `l` is `∫₀^{k/m} ψ_l`.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wbcip_theta_coefficients(m: usize, out: *mut f64, len: usize) -> WbcipStatus {
    guard(|| {
        non_null(out, "out")?;
        let table = lift(theta_coefficients(m))?;
        let need = (m + 1) * (m + 1);
        if len < need {
            return Err(fail(WbcipStatus::BufferTooSmall, format!("buffer holds {len} values, need {need}")));
        }
        for (k, row) in table.theta.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                *out.add(k * (m + 1) + l) = *v;
            }
        }
        Ok(())
    })
}

/// Physical flux `(q, q²/H + gH²/2)`.
///
/// # Safety
/// `out` must hold two doubles.
#[no_mangle]
pub unsafe extern "C" fn wbcip_flux(h: f64, q: f64, g: f64, out: *mut f64) -> WbcipStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = lift(PhysParams::new(g, 0.0))?;
        let f = lift(flux(&Vec2::new(h, q), &p))?;
        *out = f[0];
        *out.add(1) = f[1];
        Ok(())
    })
}

/// Copies the message of the last failure on this thread into `buf`,
/// NUL-terminated and truncated to `len` bytes. Returns the full message
/// length without the terminator.
///
/// # Safety
/// `buf` must be null or hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn wbcip_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}
