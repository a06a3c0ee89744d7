//! C interface to `paritybound`.
//!
//! Every fallible call returns a [`PbStatus`] and writes results through out
//! pointers. On failure the message can be read with [`pb_last_error`], which
//! stays valid until the next failing call on the same thread.
//!
//! Handles are opaque. Free each one exactly once with its `_free` function.
//! Term and site indices are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use clap::Parser;
use paritybound::cli::{run, Cli, CliError};
use paritybound::correlation::{
    itot_lower_bound, observable_expectation, total_correlation, trace_distance_lower_bound,
};
use paritybound::dynamics::{decay_excess_bound, integrated_excess_bound, survival_time, DecayParams};
use paritybound::io::{fixture, parse_spec, ProblemSpec};
use paritybound::linalg::DEFAULT_MAX_DIM;
use paritybound::threshold::{
    explicit_threshold_bound, l2_site_constant_bounds, l2_site_constants, seesaw_threshold, SeesawOptions,
};
use paritybound::{DensityState, Error, ObservableFamily};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbStatus {
    PbOk = 0,
    PbNullPointer = 1,
    PbInvalidUtf8 = 2,
    PbValidation = 3,
    PbCapacity = 4,
    PbNoConvergence = 5,
    PbNumeric = 6,
    PbSupport = 7,
    PbParse = 8,
    PbUsage = 9,
    PbBufferTooSmall = 10,
    PbMissingState = 11,
    PbPanic = 12,
}

/// Observable family handle.
pub struct PbFamily(ObservableFamily);

/// Density state handle.
pub struct PbState(DensityState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> PbStatus {
    match e {
        Error::Validation(_) => PbStatus::PbValidation,
        Error::Capacity { .. } => PbStatus::PbCapacity,
        Error::NoConvergence { .. } => PbStatus::PbNoConvergence,
        Error::Numeric(_) => PbStatus::PbNumeric,
        Error::Support { .. } => PbStatus::PbSupport,
        Error::Parse { .. } => PbStatus::PbParse,
    }
}

fn fail(status: PbStatus, msg: impl Into<String>) -> PbStatus {
    set_error(msg);
    status
}

fn from_core(e: Error) -> PbStatus {
    let status = status_of(&e);
    fail(status, e.to_string())
}

/// Runs `f`, turning panics and errors into status codes.
fn guard<F: FnOnce() -> Result<(), PbStatus>>(f: F) -> PbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PbStatus::PbOk,
        Ok(Err(s)) => s,
        Err(_) => fail(PbStatus::PbPanic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, PbStatus> {
    if p.is_null() {
        return Err(fail(PbStatus::PbNullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(PbStatus::PbInvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, PbStatus> {
    p.as_mut()
        .ok_or_else(|| fail(PbStatus::PbNullPointer, format!("{what} is null")))
}

unsafe fn family_arg<'a>(p: *const PbFamily) -> Result<&'a ObservableFamily, PbStatus> {
    p.as_ref()
        .map(|f| &f.0)
        .ok_or_else(|| fail(PbStatus::PbNullPointer, "family handle is null"))
}

unsafe fn state_arg<'a>(p: *const PbState) -> Result<&'a DensityState, PbStatus> {
    p.as_ref()
        .map(|s| &s.0)
        .ok_or_else(|| fail(PbStatus::PbNullPointer, "state handle is null"))
}

fn cap(max_dim: usize) -> usize {
    if max_dim == 0 {
        DEFAULT_MAX_DIM
    } else {
        max_dim
    }
}

unsafe fn load_spec(json: *const c_char) -> Result<ProblemSpec, PbStatus> {
    let text = str_arg(json, "json")?;
    let spec = parse_spec(text).map_err(from_core)?;
    Ok(spec)
}

unsafe fn load_fixture(name: *const c_char) -> Result<ProblemSpec, PbStatus> {
    let name = str_arg(name, "fixture name")?;
    Ok(fixture(name).map_err(from_core)?.spec)
}

fn family_of(spec: &ProblemSpec) -> Result<*mut PbFamily, PbStatus> {
    let fam = spec.family().map_err(from_core)?;
    Ok(Box::into_raw(Box::new(PbFamily(fam))))
}

fn state_of(spec: &ProblemSpec) -> Result<*mut PbState, PbStatus> {
    match spec.density_state().map_err(from_core)? {
        Some(rho) => Ok(Box::into_raw(Box::new(PbState(rho)))),
        None => Err(fail(PbStatus::PbMissingState, "specification has no state")),
    }
}

/// Message of the last failure on this thread, or NULL. Owned by the library.
#[no_mangle]
pub extern "C" fn pb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_family_from_json(json: *const c_char, out: *mut *mut PbFamily) -> PbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = family_of(&load_spec(json)?)?;
        Ok(())
    })
}

/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_family_from_fixture(name: *const c_char, out: *mut *mut PbFamily) -> PbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = family_of(&load_fixture(name)?)?;
        Ok(())
    })
}

/// # Safety
/// `fam` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn pb_family_free(fam: *mut PbFamily) {
    if !fam.is_null() {
        drop(Box::from_raw(fam));
    }
}

/// # Safety
/// `fam` must be a live family handle.
#[no_mangle]
pub unsafe extern "C" fn pb_family_sites(fam: *const PbFamily) -> usize {
    fam.as_ref().map_or(0, |f| f.0.sites())
}

/// # Safety
/// `fam` must be a live family handle.
#[no_mangle]
pub unsafe extern "C" fn pb_family_terms(fam: *const PbFamily) -> usize {
    fam.as_ref().map_or(0, |f| f.0.terms())
}

/// Defect weight of terms `i < j`.
///
/// # Safety
/// `fam` must be a live family handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_defect_weight(fam: *const PbFamily, i: usize, j: usize, out: *mut f64) -> PbStatus {
    guard(|| {
        let fam = family_arg(fam)?;
        let out = out_arg(out, "out")?;
        *out = fam.defect_weight(i, j).map_err(from_core)?;
        Ok(())
    })
}

/// Denominator `m + sum of defect weights`.
///
/// # Safety
/// `fam` must be a live family handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_denominator(fam: *const PbFamily, out: *mut f64) -> PbStatus {
    guard(|| {
        let fam = family_arg(fam)?;
        let out = out_arg(out, "out")?;
        *out = fam
            .defect_report(false, DEFAULT_MAX_DIM)
            .map_err(from_core)?
            .denominator;
        Ok(())
    })
}

/// Dense `||B||^2`. `max_dim = 0` selects the default cap.
///
/// # Safety
/// `fam` must be a live family handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_exact_norm_sq(fam: *const PbFamily, max_dim: usize, out: *mut f64) -> PbStatus {
    guard(|| {
        let fam = family_arg(fam)?;
        let out = out_arg(out, "out")?;
        let rep = fam.defect_report(true, cap(max_dim)).map_err(from_core)?;
        *out = rep.exact_norm_sq.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// See-saw estimate of the product threshold.
///
/// # Safety
/// `fam` must be a live family handle. `gamma` must be valid; `converged` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn pb_seesaw_threshold(
    fam: *const PbFamily,
    restarts: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
    gamma: *mut f64,
    converged: *mut bool,
) -> PbStatus {
    guard(|| {
        let fam = family_arg(fam)?;
        let gamma = out_arg(gamma, "gamma")?;
        let opts = SeesawOptions {
            restarts,
            max_iters,
            tol,
            seed,
        };
        let r = seesaw_threshold(fam, &opts).map_err(from_core)?;
        *gamma = r.gamma;
        if let Some(c) = converged.as_mut() {
            *c = r.converged;
        }
        Ok(())
    })
}

/// Site constants attained by local ascent, one per site, written to
/// `out[0..len]`. These are lower estimates. `len` must be at least the
/// number of sites.
///
/// # Safety
/// `fam` must be a live family handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pb_site_constants(
    fam: *const PbFamily,
    restarts: usize,
    seed: u64,
    out: *mut f64,
    len: usize,
) -> PbStatus {
    guard(|| {
        let fam = family_arg(fam)?;
        if out.is_null() {
            return Err(fail(PbStatus::PbNullPointer, "out is null"));
        }
        if len < fam.sites() {
            return Err(fail(
                PbStatus::PbBufferTooSmall,
                format!("buffer holds {len} values, need {}", fam.sites()),
            ));
        }
        let c = l2_site_constants(fam, restarts, seed).map_err(from_core)?;
        std::slice::from_raw_parts_mut(out, c.len()).copy_from_slice(&c);
        Ok(())
    })
}

/// Certified upper bounds on the site constants, written to `out[0..len]`.
/// Exact for traceless qubit operators.
///
/// # Safety
/// `fam` must be a live family handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pb_site_constant_bounds(fam: *const PbFamily, out: *mut f64, len: usize) -> PbStatus {
    guard(|| {
        let fam = family_arg(fam)?;
        if out.is_null() {
            return Err(fail(PbStatus::PbNullPointer, "out is null"));
        }
        if len < fam.sites() {
            return Err(fail(
                PbStatus::PbBufferTooSmall,
                format!("buffer holds {len} values, need {}", fam.sites()),
            ));
        }
        let c = l2_site_constant_bounds(fam).map_err(from_core)?;
        std::slice::from_raw_parts_mut(out, c.len()).copy_from_slice(&c);
        Ok(())
    })
}

/// Product of square roots of the site constants.
///
/// # Safety
/// `constants` must hold `len` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pb_explicit_threshold_bound(constants: *const f64, len: usize, out: *mut f64) -> PbStatus {
    guard(|| {
        if constants.is_null() && len > 0 {
            return Err(fail(PbStatus::PbNullPointer, "constants is null"));
        }
        let out = out_arg(out, "out")?;
        let c: &[f64] = if len == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(constants, len)
        };
        *out = explicit_threshold_bound(c).map_err(from_core)?;
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_state_from_json(json: *const c_char, out: *mut *mut PbState) -> PbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = state_of(&load_spec(json)?)?;
        Ok(())
    })
}

/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_state_from_fixture(name: *const c_char, out: *mut *mut PbState) -> PbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = state_of(&load_fixture(name)?)?;
        Ok(())
    })
}

/// # Safety
/// `state` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn pb_state_free(state: *mut PbState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// `Tr(rho B)`.
///
/// # Safety
/// Both handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pb_expectation(fam: *const PbFamily, state: *const PbState, out: *mut f64) -> PbStatus {
    guard(|| {
        let fam = family_arg(fam)?;
        let rho = state_arg(state)?;
        let out = out_arg(out, "out")?;
        *out = observable_expectation(fam, rho, DEFAULT_MAX_DIM).map_err(from_core)?;
        Ok(())
    })
}

/// Total correlation in nats.
///
/// # Safety
/// `state` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pb_total_correlation(state: *const PbState, out: *mut f64) -> PbStatus {
    guard(|| {
        let rho = state_arg(state)?;
        let out = out_arg(out, "out")?;
        *out = total_correlation(rho).map_err(from_core)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pb_trace_distance_lower_bound(excess: f64, denominator: f64, out: *mut f64) -> PbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = trace_distance_lower_bound(excess, denominator).map_err(from_core)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pb_itot_lower_bound(excess: f64, denominator: f64, out: *mut f64) -> PbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = itot_lower_bound(excess, denominator).map_err(from_core)?;
        Ok(())
    })
}

/// Excess bound at time `t` under entropy decay at rate `lambda`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pb_decay_excess_bound(
    lambda: f64,
    itot0: f64,
    denominator: f64,
    t: f64,
    out: *mut f64,
) -> PbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = DecayParams::new(lambda, itot0, denominator).map_err(from_core)?;
        *out = decay_excess_bound(&p, t).map_err(from_core)?;
        Ok(())
    })
}

/// Time after which the excess bound stays below `epsilon`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pb_survival_time(
    lambda: f64,
    itot0: f64,
    denominator: f64,
    epsilon: f64,
    out: *mut f64,
) -> PbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = DecayParams::new(lambda, itot0, denominator).map_err(from_core)?;
        *out = survival_time(&p, epsilon).map_err(from_core)?;
        Ok(())
    })
}

/// Bound on the time integral of the squared excess.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pb_integrated_excess_bound(
    lambda: f64,
    itot0: f64,
    denominator: f64,
    out: *mut f64,
) -> PbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = DecayParams::new(lambda, itot0, denominator).map_err(from_core)?;
        *out = integrated_excess_bound(&p);
        Ok(())
    })
}

/// Runs a CLI invocation in-process. `argv` excludes the program name, e.g.
/// `{"verify"}` or `{"defects", "--fixture", "chsh"}`. On success `*out`
/// receives the report (free with [`pb_string_free`]) and `*exit_code` the
/// status the binary would exit with.
///
/// # Safety
/// `argv` must hold `argc` NUL-terminated strings; `out` and `exit_code` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pb_run(
    argv: *const *const c_char,
    argc: usize,
    out: *mut *mut c_char,
    exit_code: *mut i32,
) -> PbStatus {
    guard(|| {
        if argv.is_null() && argc > 0 {
            return Err(fail(PbStatus::PbNullPointer, "argv is null"));
        }
        let out = out_arg(out, "out")?;
        let exit_code = out_arg(exit_code, "exit_code")?;
        *out = ptr::null_mut();
        let mut args = vec!["paritybound".to_string()];
        for k in 0..argc {
            args.push(str_arg(*argv.add(k), "argv entry")?.to_string());
        }
        let cli = Cli::try_parse_from(&args).map_err(|e| {
            *exit_code = 2;
            fail(PbStatus::PbUsage, e.to_string())
        })?;
        let outcome = run(&cli).map_err(|e| {
            *exit_code = e.exit_code();
            match e {
                CliError::Usage(m) => fail(PbStatus::PbUsage, m),
                CliError::Run(e) => from_core(e),
                CliError::Io(e) => fail(PbStatus::PbValidation, e.to_string()),
            }
        })?;
        *exit_code = if outcome.success { 0 } else { 1 };
        let text = CString::new(outcome.text.replace('\0', " ")).expect("no interior NUL");
        *out = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn pb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
