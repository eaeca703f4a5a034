//! C ABI over `kahlerlab`.
//!
//! Every function returns a [`KlStatus`]. On failure the message is kept in a
//! thread-local slot readable through [`kl_last_error`]. Objects cross the
//! boundary as opaque handles that the caller releases with the matching
//! `*_free` function. Hermitian matrices are passed row-major as interleaved
//! `(re, im)` pairs, `2·n·n` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use kahlerlab::config::RunConfigFile;
use kahlerlab::dhym::lagrangian_phase;
use kahlerlab::flows::{self, FlowConfig, RunRecord, RunStatus};
use kahlerlab::gma::{gamma_bar_membership, gma_p, gma_q, GmaCoefficients, C0};
use kahlerlab::props::{run_suite, PropOptions, Suite};
use kahlerlab::spectra::{relative_eigenvalues, symmetric_functions, HermitianMatrix, Spectrum};
use kahlerlab::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Pencil = 4,
    DegenerateSpectrum = 5,
    PhaseSingularity = 6,
    DegenerateField = 7,
    Resolution = 8,
    GridMismatch = 9,
    Schedule = 10,
    Config = 11,
    Io = 12,
    Panic = 13,
}

/// Terminal state of a flow run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlRunStatus {
    Converged = 0,
    TMaxReached = 1,
    Diverged = 2,
}

/// Number of doubles in one row of a run record.
pub const KL_ROW_FIELDS: usize = 10;

pub struct KlCoefficients(GmaCoefficients);

pub struct KlFlowConfig(FlowConfig);

pub struct KlRunRecord(RunRecord);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> KlStatus {
    match e {
        Error::Domain(_) => KlStatus::Domain,
        Error::Pencil(_) => KlStatus::Pencil,
        Error::DegenerateSpectrum(_) => KlStatus::DegenerateSpectrum,
        Error::PhaseSingularity { .. } => KlStatus::PhaseSingularity,
        Error::DegenerateField { .. } => KlStatus::DegenerateField,
        Error::Resolution(_) => KlStatus::Resolution,
        Error::GridMismatch(_) => KlStatus::GridMismatch,
        Error::Schedule { .. } => KlStatus::Schedule,
        Error::Config(_) => KlStatus::Config,
        Error::Io(_) => KlStatus::Io,
    }
}

struct Fail(KlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(KlStatus::NullPointer, format!("{name} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(KlStatus::InvalidArgument, msg.into())
}

/// Runs `f`, recording failures and panics in the error slot.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            KlStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn spectrum(lambda: *const f64, n: usize) -> Result<Spectrum, Fail> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    Ok(Spectrum::new(slice(lambda, n, "lambda")?.to_vec())?)
}

unsafe fn matrix(p: *const f64, n: usize, name: &str) -> Result<HermitianMatrix, Fail> {
    let raw = slice(p, 2 * n * n, name)?;
    let entries = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
    Ok(HermitianMatrix::from_entries(n, entries)?)
}

unsafe fn target<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not UTF-8")))
}

/// Message of the last failure on this thread, or null after a success. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn kl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Writes `S_0..S_n` of `lambda[0..n]` into `out[0..=n]`.
///
/// # Safety
/// `lambda` must point to `n` doubles and `out` to `n + 1`.
#[no_mangle]
pub unsafe extern "C" fn kl_symmetric_functions(lambda: *const f64, n: usize, out: *mut f64) -> KlStatus {
    guard(|| {
        let values = slice(lambda, n, "lambda")?;
        let s = symmetric_functions(values);
        slice_mut(out, n + 1, "out")?.copy_from_slice(&s);
        Ok(())
    })
}

/// Eigenvalues of `ω⁻¹χ`, ascending, into `out[0..n]`.
///
/// # Safety
/// `chi` and `omega` must point to `2·n·n` doubles, `out` to `n`.
#[no_mangle]
pub unsafe extern "C" fn kl_relative_eigenvalues(
    chi: *const f64,
    omega: *const f64,
    n: usize,
    out: *mut f64,
) -> KlStatus {
    guard(|| {
        if n == 0 {
            return Err(invalid("n must be positive"));
        }
        let l = relative_eigenvalues(&matrix(chi, n, "chi")?, &matrix(omega, n, "omega")?)?;
        slice_mut(out, n, "out")?.copy_from_slice(l.values());
        Ok(())
    })
}

/// Creates gMA coefficients from `c_1..c_{n−1}` (`c_len = n − 1`) and a
/// constant `c0`.
///
/// # Safety
/// `c` must point to `c_len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kl_gma_coefficients_new(
    n: usize,
    c: *const f64,
    c_len: usize,
    c0: f64,
    c0_floor: f64,
    out: *mut *mut KlCoefficients,
) -> KlStatus {
    guard(|| {
        let slot = target(out, "out")?;
        *slot = ptr::null_mut();
        let c = slice(c, c_len, "c")?.to_vec();
        let coeffs = GmaCoefficients::new(n, c, C0::Constant(c0), c0_floor)?;
        *slot = Box::into_raw(Box::new(KlCoefficients(coeffs)));
        Ok(())
    })
}

/// # Safety
/// `coeffs` must come from [`kl_gma_coefficients_new`] and not be used after.
#[no_mangle]
pub unsafe extern "C" fn kl_gma_coefficients_free(coeffs: *mut KlCoefficients) {
    if !coeffs.is_null() {
        drop(Box::from_raw(coeffs));
    }
}

/// `P^ℓ(λ)`; `+∞` when a tuple has a vanishing denominator.
///
/// # Safety
/// `lambda` must point to `n` doubles; `coeffs` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kl_gma_p(
    coeffs: *const KlCoefficients,
    lambda: *const f64,
    n: usize,
    ell: usize,
    out: *mut f64,
) -> KlStatus {
    guard(|| {
        let coeffs = coeffs.as_ref().ok_or_else(|| null("coeffs"))?;
        let v = gma_p(&spectrum(lambda, n)?, &coeffs.0, ell)?;
        *target(out, "out")? = v;
        Ok(())
    })
}

/// `Q_{c0}(λ)` at the given pointwise `c0`.
///
/// # Safety
/// As for [`kl_gma_p`].
#[no_mangle]
pub unsafe extern "C" fn kl_gma_q(
    coeffs: *const KlCoefficients,
    lambda: *const f64,
    n: usize,
    c0: f64,
    out: *mut f64,
) -> KlStatus {
    guard(|| {
        let coeffs = coeffs.as_ref().ok_or_else(|| null("coeffs"))?;
        let v = gma_q(&spectrum(lambda, n)?, &coeffs.0, c0)?;
        *target(out, "out")? = v;
        Ok(())
    })
}

/// Membership in the closed gMA cone; `margin` is negative outside.
///
/// # Safety
/// As for [`kl_gma_p`]; `is_member` and `margin` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kl_gamma_bar_membership(
    coeffs: *const KlCoefficients,
    lambda: *const f64,
    n: usize,
    is_member: *mut bool,
    margin: *mut f64,
) -> KlStatus {
    guard(|| {
        let coeffs = coeffs.as_ref().ok_or_else(|| null("coeffs"))?;
        let r = gamma_bar_membership(&spectrum(lambda, n)?, &coeffs.0);
        *target(is_member, "is_member")? = r.is_member;
        *target(margin, "margin")? = r.margin;
        Ok(())
    })
}

/// `Σ arccot λ_i`.
///
/// # Safety
/// `lambda` must point to `n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kl_lagrangian_phase(lambda: *const f64, n: usize, out: *mut f64) -> KlStatus {
    guard(|| {
        let v = lagrangian_phase(&spectrum(lambda, n)?);
        *target(out, "out")? = v;
        Ok(())
    })
}

/// Parses a run configuration (the CLI's JSON schema). Relative paths in it
/// resolve against `base_dir`, which may be null for the working directory.
///
/// # Safety
/// `json` must be a NUL-terminated string; `base_dir` null or one; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn kl_flow_config_from_json(
    json: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut KlFlowConfig,
) -> KlStatus {
    guard(|| {
        let slot = target(out, "out")?;
        *slot = ptr::null_mut();
        let text = c_str(json, "json")?;
        let dir = if base_dir.is_null() { "." } else { c_str(base_dir, "base_dir")? };
        let cfg = RunConfigFile::from_json(text, Path::new(dir))?.flow_config()?;
        *slot = Box::into_raw(Box::new(KlFlowConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from [`kl_flow_config_from_json`] and not be used after.
#[no_mangle]
pub unsafe extern "C" fn kl_flow_config_free(cfg: *mut KlFlowConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the flow to convergence, `t_max` or divergence.
///
/// # Safety
/// `cfg` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kl_flow_run(cfg: *const KlFlowConfig, out: *mut *mut KlRunRecord) -> KlStatus {
    guard(|| {
        let slot = target(out, "out")?;
        *slot = ptr::null_mut();
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let rec = flows::run(cfg.0.clone())?;
        *slot = Box::into_raw(Box::new(KlRunRecord(rec)));
        Ok(())
    })
}

/// # Safety
/// `rec` must come from [`kl_flow_run`] and not be used after.
#[no_mangle]
pub unsafe extern "C" fn kl_run_record_free(rec: *mut KlRunRecord) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}

/// # Safety
/// `rec` must be valid; `status` and `rows` writable.
#[no_mangle]
pub unsafe extern "C" fn kl_run_record_info(
    rec: *const KlRunRecord,
    status: *mut KlRunStatus,
    rows: *mut usize,
) -> KlStatus {
    guard(|| {
        let rec = &rec.as_ref().ok_or_else(|| null("rec"))?.0;
        *target(status, "status")? = match rec.status {
            RunStatus::Converged => KlRunStatus::Converged,
            RunStatus::TMaxReached => KlRunStatus::TMaxReached,
            RunStatus::Diverged => KlRunStatus::Diverged,
        };
        *target(rows, "rows")? = rec.rows.len();
        Ok(())
    })
}

/// Row `index` in CSV column order: t, res_l2, res_inf, sup_abs_phidot,
/// energy_I, energy_J, min_eig, theta_min, theta_max, dt.
///
/// # Safety
/// `rec` must be valid and `out` must point to [`KL_ROW_FIELDS`] doubles.
#[no_mangle]
pub unsafe extern "C" fn kl_run_record_row(rec: *const KlRunRecord, index: usize, out: *mut f64) -> KlStatus {
    guard(|| {
        let rec = &rec.as_ref().ok_or_else(|| null("rec"))?.0;
        let r = rec
            .rows
            .get(index)
            .ok_or_else(|| invalid(format!("row {index} out of range ({} rows)", rec.rows.len())))?;
        let cells = [
            r.t, r.res_l2, r.res_inf, r.sup_abs_phidot, r.energy_i, r.energy_j, r.min_eig, r.theta_min, r.theta_max, r.dt,
        ];
        slice_mut(out, KL_ROW_FIELDS, "out")?.copy_from_slice(&cells);
        Ok(())
    })
}

/// Copies the final potential into `out[0..len]`; `len` must equal the
/// number of grid points, which is written to `points` when `out` is null.
///
/// # Safety
/// `rec` must be valid; `out` null or pointing to `len` doubles; `points`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn kl_run_record_final_phi(
    rec: *const KlRunRecord,
    out: *mut f64,
    len: usize,
    points: *mut usize,
) -> KlStatus {
    guard(|| {
        let phi = &rec.as_ref().ok_or_else(|| null("rec"))?.0.final_phi;
        *target(points, "points")? = phi.values().len();
        if out.is_null() {
            return Ok(());
        }
        if len != phi.values().len() {
            return Err(invalid(format!("buffer holds {len} values, field has {}", phi.values().len())));
        }
        slice_mut(out, len, "out")?.copy_from_slice(phi.values());
        Ok(())
    })
}

/// The record as CSV text; release with [`kl_string_free`].
///
/// # Safety
/// `rec` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kl_run_record_csv(rec: *const KlRunRecord, out: *mut *mut c_char) -> KlStatus {
    guard(|| {
        let slot = target(out, "out")?;
        *slot = ptr::null_mut();
        let rec = &rec.as_ref().ok_or_else(|| null("rec"))?.0;
        let text = CString::new(rec.to_csv()).map_err(|_| invalid("CSV contains NUL"))?;
        *slot = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used after.
#[no_mangle]
pub unsafe extern "C" fn kl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs a property suite by id. `samples = 0` selects the suite default.
///
/// # Safety
/// `suite` must be a NUL-terminated string and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn kl_props_run(suite: *const c_char, seed: u64, samples: usize, passed: *mut bool) -> KlStatus {
    guard(|| {
        let suite: Suite = c_str(suite, "suite")?.parse()?;
        let opts = PropOptions {
            seed,
            samples: (samples > 0).then_some(samples),
            coefficients: None,
        };
        let report = run_suite(suite, &opts)?;
        *target(passed, "passed")? = report.passed;
        Ok(())
    })
}
