//! C interface to `transtorsion`.
//!
//! Matrices and reports are opaque heap handles owned by the caller and
//! released with the matching `_free` function. Every entry point returns a
//! [`TtStatus`]; on failure the message of the last error on the calling
//! thread is available through [`tt_last_error`]. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use transtorsion::asymptotics::special_case_matrix;
use transtorsion::homoclinic::transversality_delta;
use transtorsion::spectrum::full_report;
use transtorsion::{Classification, Error, HomoclinicMatrix, LinearModelParams, Mat4, PrecisionMode, RunConfig, SpectrumReport};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonSymplectic = 3,
    ConditioningExceeded = 4,
    OracleMismatch = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TtClassification {
    HyperbolicReal = 0,
    HyperbolicComplex = 1,
    NonHyperbolicElliptic = 2,
    NonHyperbolicParabolic = 3,
    Mixed = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TtPrecision {
    Standard = 0,
    Extended = 1,
    Exact = 2,
}

/// A validated symplectic homoclinic matrix.
pub struct TtHomoclinic(HomoclinicMatrix);

/// The spectral report of one transition matrix.
pub struct TtReport(SpectrumReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TtStatus {
    match e {
        Error::NonSymplectic { .. } => TtStatus::NonSymplectic,
        Error::ConditioningExceeded { .. } => TtStatus::ConditioningExceeded,
        Error::OracleMismatch { .. } | Error::NotPalindromic { .. } | Error::FactorizationMismatch { .. } => {
            TtStatus::OracleMismatch
        }
        _ => TtStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), TtStatus>) -> TtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_last_error("internal panic".into());
            TtStatus::Panic
        }
    }
}

fn fail(e: Error) -> TtStatus {
    let s = status_of(&e);
    set_last_error(e.to_string());
    s
}

fn null(what: &str) -> TtStatus {
    set_last_error(format!("{what} is null"));
    TtStatus::NullPointer
}

/// Copies the last error message of this thread into `buf` (nul-terminated,
/// truncated to `len`). Returns the full message length without the nul, or 0
/// when no error has occurred.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn tt_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: the caller guarantees `buf` holds `len` bytes and n < len
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn tt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a homoclinic matrix from 16 row-major entries in `(phi, s, rho, u)` order.
///
/// # Safety
/// `entries` must point to 16 doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tt_homoclinic_new(entries: *const f64, out: *mut *mut TtHomoclinic) -> TtStatus {
    if entries.is_null() {
        return null("entries");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        // SAFETY: checked non-null; the caller guarantees 16 readable doubles
        let slice = unsafe { std::slice::from_raw_parts(entries, 16) };
        let h = Mat4::from_row_major(slice).and_then(HomoclinicMatrix::new).map_err(fail)?;
        // SAFETY: `out` checked non-null
        unsafe { *out = Box::into_raw(Box::new(TtHomoclinic(h))) };
        Ok(())
    })
}

/// The shear matrix: identity with `delta` in the `(rho, phi)` entry.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tt_homoclinic_shear(delta: f64, out: *mut *mut TtHomoclinic) -> TtStatus {
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        if !delta.is_finite() {
            return Err(fail(Error::NonFinite));
        }
        // SAFETY: `out` checked non-null
        unsafe { *out = Box::into_raw(Box::new(TtHomoclinic(special_case_matrix(delta)))) };
        Ok(())
    })
}

/// Releases a matrix; null is ignored.
///
/// # Safety
/// `h` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tt_homoclinic_free(h: *mut TtHomoclinic) {
    if !h.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(h) });
    }
}

/// The transversality determinant and the `d22` entry.
///
/// # Safety
/// `h` must be a valid handle; `delta` and `d22` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn tt_homoclinic_transversality(
    h: *const TtHomoclinic,
    delta: *mut f64,
    d22: *mut f64,
) -> TtStatus {
    if h.is_null() || delta.is_null() || d22.is_null() {
        return null("argument");
    }
    guard(|| {
        // SAFETY: all pointers checked non-null and valid per the contract
        unsafe {
            *delta = transversality_delta(&(*h).0);
            *d22 = (*h).0.d22();
        }
        Ok(())
    })
}

/// Spectral report of `Π·Df^n` for the linear model `(omega, nu, lambda)`.
///
/// # Safety
/// `h` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tt_analyze(
    h: *const TtHomoclinic,
    omega: f64,
    nu: f64,
    lambda: f64,
    n: u32,
    precision: TtPrecision,
    out: *mut *mut TtReport,
) -> TtStatus {
    if h.is_null() {
        return null("h");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let p = LinearModelParams::new(omega, nu, lambda).map_err(fail)?;
        let mode = match precision {
            TtPrecision::Standard => PrecisionMode::Standard,
            TtPrecision::Extended => PrecisionMode::Extended,
            TtPrecision::Exact => PrecisionMode::ExactRational,
        };
        let cfg = RunConfig::default().with_precision(mode);
        // SAFETY: `h` checked non-null and valid per the contract
        let report = full_report(unsafe { &(*h).0 }, &p, n, &cfg).map_err(fail)?;
        // SAFETY: `out` checked non-null
        unsafe { *out = Box::into_raw(Box::new(TtReport(report))) };
        Ok(())
    })
}

/// Releases a report; null is ignored.
///
/// # Safety
/// `r` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tt_report_free(r: *mut TtReport) {
    if !r.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(r) });
    }
}

/// `A` and `B` of `x^4 + A x^3 + B x^2 + A x + 1`.
///
/// # Safety
/// `r` must be a valid handle; `a` and `b` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn tt_report_coefficients(r: *const TtReport, a: *mut f64, b: *mut f64) -> TtStatus {
    if r.is_null() || a.is_null() || b.is_null() {
        return null("argument");
    }
    // SAFETY: all pointers checked non-null and valid per the contract
    unsafe {
        *a = (*r).0.a_n;
        *b = (*r).0.b_n;
    }
    TtStatus::Ok
}

/// The four eigenvalues as real and imaginary parts.
///
/// # Safety
/// `r` must be a valid handle; `re` and `im` must each hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn tt_report_eigenvalues(r: *const TtReport, re: *mut f64, im: *mut f64) -> TtStatus {
    if r.is_null() || re.is_null() || im.is_null() {
        return null("argument");
    }
    // SAFETY: pointers checked non-null; the caller guarantees 4 slots each
    unsafe {
        for (k, z) in (*r).0.eigenvalues.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
    }
    TtStatus::Ok
}

/// Classification and distance of the spectrum to the unit circle.
///
/// # Safety
/// `r` must be a valid handle; `class` and `distance` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn tt_report_classification(
    r: *const TtReport,
    class: *mut TtClassification,
    distance: *mut f64,
) -> TtStatus {
    if r.is_null() || class.is_null() || distance.is_null() {
        return null("argument");
    }
    // SAFETY: all pointers checked non-null and valid per the contract
    unsafe {
        *class = match (*r).0.classification {
            Classification::HyperbolicReal => TtClassification::HyperbolicReal,
            Classification::HyperbolicComplex => TtClassification::HyperbolicComplex,
            Classification::NonHyperbolicElliptic => TtClassification::NonHyperbolicElliptic,
            Classification::NonHyperbolicParabolic => TtClassification::NonHyperbolicParabolic,
            Classification::Mixed => TtClassification::Mixed,
        };
        *distance = (*r).0.min_unit_circle_distance;
    }
    TtStatus::Ok
}
