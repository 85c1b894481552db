//! C interface to epforge.
//!
//! Results live behind opaque handles that must be released with the matching
//! `*_free` function. Every fallible call returns an [`EpfStatus`]; on failure
//! a description is available from [`epf_last_error`]. Strings returned by the
//! library are freed with [`epf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use epforge::eplocate::{
    default_seeds, ep2_one_param, ep4_asymptotic, ep4_even, ep5_odd, ep_multi_newton, EPCandidate, EpError,
};
use epforge::lattice::{HamiltonianSpec, LatticeError};
use epforge::secular::{secular_symbolic, SecularError};
use epforge::spectra::{eigen_solve, EigenOptions, SpectraError, SpectrumReport};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    OutOfRange = 4,
    Panic = 5,
}

/// Eigenvalues of one Hamiltonian.
pub struct EpfSpectrum {
    report: SpectrumReport,
}

/// A list of located exceptional points.
pub struct EpfCandidates {
    items: Vec<EPCandidate>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

trait Classify {
    fn status(&self) -> EpfStatus;
}

impl Classify for LatticeError {
    fn status(&self) -> EpfStatus {
        EpfStatus::InvalidArgument
    }
}

impl Classify for SecularError {
    fn status(&self) -> EpfStatus {
        match self {
            SecularError::DimensionRange(_)
            | SecularError::TooManyParams { .. }
            | SecularError::SmallK(_)
            | SecularError::UnsupportedAppendix { .. } => EpfStatus::InvalidArgument,
            _ => EpfStatus::Numerical,
        }
    }
}

impl Classify for EpError {
    fn status(&self) -> EpfStatus {
        match self {
            EpError::Secular(s) => s.status(),
            EpError::Lattice(_)
            | EpError::Parity(_)
            | EpError::SmallK(_)
            | EpError::Order(_)
            | EpError::ParamCount(_) => EpfStatus::InvalidArgument,
            _ => EpfStatus::Numerical,
        }
    }
}

impl Classify for SpectraError {
    fn status(&self) -> EpfStatus {
        match self {
            SpectraError::Lattice(_) | SpectraError::TooLarge(_) => EpfStatus::InvalidArgument,
            _ => EpfStatus::Numerical,
        }
    }
}

/// Runs `f`, recording errors and converting panics into [`EpfStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (EpfStatus, String)>) -> EpfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EpfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EpfStatus::Panic
        }
    }
}

fn fail<E: Classify + std::fmt::Display>(e: E) -> (EpfStatus, String) {
    (e.status(), e.to_string())
}

fn null(name: &str) -> (EpfStatus, String) {
    (EpfStatus::NullPointer, format!("{name} is null"))
}

fn into_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message of the last failed call on this thread, or null. Free with
/// [`epf_string_free`].
#[no_mangle]
pub extern "C" fn epf_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn epf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn epf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Solves the spectrum of the `n`-site chain with `p` parameters.
///
/// # Safety
/// `params` must point to `p` doubles (or be null when `p == 0`); `out` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epf_spectrum_new(
    n: usize,
    params: *const f64,
    p: usize,
    center: f64,
    kinetic_shift: bool,
    out: *mut *mut EpfSpectrum,
) -> EpfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if params.is_null() && p > 0 {
            return Err(null("params"));
        }
        let values = if p == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(params, p).to_vec()
        };
        let spec = HamiltonianSpec::new(n, values)
            .and_then(|s| s.with_kinetic_shift(kinetic_shift).with_center(center))
            .map_err(fail)?;
        let report = eigen_solve(&spec, &EigenOptions::default()).map_err(fail)?;
        *out = Box::into_raw(Box::new(EpfSpectrum { report }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from [`epf_spectrum_new`].
#[no_mangle]
pub unsafe extern "C" fn epf_spectrum_len(s: *const EpfSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.report.eigenvalues.len())
}

/// # Safety
/// `s` must be a handle from [`epf_spectrum_new`]; `re` and `im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn epf_spectrum_eigenvalue(
    s: *const EpfSpectrum,
    index: usize,
    re: *mut f64,
    im: *mut f64,
) -> EpfStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("spectrum"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let z = s
            .report
            .eigenvalues
            .get(index)
            .ok_or((EpfStatus::OutOfRange, format!("index {index} out of range")))?;
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// True when all eigenvalues are real and non-degenerate.
///
/// # Safety
/// `s` must be null or a handle from [`epf_spectrum_new`].
#[no_mangle]
pub unsafe extern "C" fn epf_spectrum_is_physical(s: *const EpfSpectrum) -> bool {
    s.as_ref().is_some_and(|s| s.report.is_physical)
}

/// # Safety
/// `s` must be null or a handle from [`epf_spectrum_new`], freed at most once.
#[no_mangle]
pub unsafe extern "C" fn epf_spectrum_free(s: *mut EpfSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

unsafe fn store(out: *mut *mut EpfCandidates, items: Vec<EPCandidate>) -> Result<(), (EpfStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(EpfCandidates { items }));
    Ok(())
}

/// Fourth-order EPs of the two-parameter chain at N = 2K.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epf_ep4_even(k: usize, out: *mut *mut EpfCandidates) -> EpfStatus {
    guard(|| store(out, ep4_even(k).map_err(fail)?.candidates))
}

/// Fifth-order EPs of the two-parameter chain at N = 2K + 1.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epf_ep5_odd(k: usize, out: *mut *mut EpfCandidates) -> EpfStatus {
    guard(|| store(out, ep5_odd(k).map_err(fail)?.candidates))
}

/// Second-order EPs of the one-parameter chain at even N.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epf_ep2_one_param(n: usize, out: *mut *mut EpfCandidates) -> EpfStatus {
    guard(|| store(out, ep2_one_param(n).map_err(fail)?))
}

/// Newton search with `grid^p` seeds on `[-2, 2]^p`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epf_ep_newton(n: usize, p: usize, grid: usize, out: *mut *mut EpfCandidates) -> EpfStatus {
    guard(|| {
        if !(2..=25).contains(&grid) {
            return Err((EpfStatus::InvalidArgument, "grid must be in 2..=25".into()));
        }
        let rep = ep_multi_newton(n, p, Some(default_seeds(p, grid))).map_err(fail)?;
        store(out, rep.candidates)
    })
}

/// # Safety
/// `c` must be null or a candidate handle.
#[no_mangle]
pub unsafe extern "C" fn epf_candidates_len(c: *const EpfCandidates) -> usize {
    c.as_ref().map_or(0, |c| c.items.len())
}

/// Order, verification flag, largest residual and parameter count of one
/// candidate. Any output pointer may be null.
///
/// # Safety
/// `c` must be a candidate handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn epf_candidate_info(
    c: *const EpfCandidates,
    index: usize,
    order: *mut usize,
    verified: *mut bool,
    max_residual: *mut f64,
    param_count: *mut usize,
) -> EpfStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(|| null("candidates"))?;
        let item = c
            .items
            .get(index)
            .ok_or((EpfStatus::OutOfRange, format!("index {index} out of range")))?;
        if let Some(o) = order.as_mut() {
            *o = item.order;
        }
        if let Some(v) = verified.as_mut() {
            *v = item.verified;
        }
        if let Some(r) = max_residual.as_mut() {
            *r = item.max_residual();
        }
        if let Some(p) = param_count.as_mut() {
            *p = item.params.len();
        }
        Ok(())
    })
}

/// Copies the parameters of one candidate into `buf` (`buf_len` doubles).
///
/// # Safety
/// `c` must be a candidate handle; `buf` must hold `buf_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn epf_candidate_params(
    c: *const EpfCandidates,
    index: usize,
    buf: *mut f64,
    buf_len: usize,
) -> EpfStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(|| null("candidates"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let item = c
            .items
            .get(index)
            .ok_or((EpfStatus::OutOfRange, format!("index {index} out of range")))?;
        if buf_len < item.params.len() {
            return Err((
                EpfStatus::OutOfRange,
                format!("buffer holds {buf_len}, need {}", item.params.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, item.params.len()).copy_from_slice(&item.params);
        Ok(())
    })
}

/// All candidates as a JSON array. Free with [`epf_string_free`].
///
/// # Safety
/// `c` must be a candidate handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epf_candidates_json(c: *const EpfCandidates, out: *mut *mut c_char) -> EpfStatus {
    guard(|| {
        let c = c.as_ref().ok_or_else(|| null("candidates"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = serde_json::to_string(&c.items).map_err(|e| (EpfStatus::Numerical, e.to_string()))?;
        *out = into_string(s);
        Ok(())
    })
}

/// # Safety
/// `c` must be null or a candidate handle, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn epf_candidates_free(c: *mut EpfCandidates) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Secular polynomial `det(E - H)` as text. Free with [`epf_string_free`].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epf_secular_text(n: usize, p: usize, out: *mut *mut c_char) -> EpfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let form = secular_symbolic(n, p).map_err(fail)?;
        *out = into_string(form.to_text());
        Ok(())
    })
}

/// Large-K approximant of the most negative EP4 coordinate with `terms`
/// correction terms.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epf_ep4_asymptotic(k: usize, terms: usize, out: *mut f64) -> EpfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ep4_asymptotic(k, terms).map_err(fail)?.value;
        Ok(())
    })
}
