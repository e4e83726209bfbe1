//! C interface to `osinfluence`.
//!
//! Functions and profiles are opaque handles created and released by this library.
//! Every fallible call returns an [`OsiStatus`]; on failure the message is available
//! from [`osi_last_error_message`] on the same thread until the next failing call.
//! Strings returned through out-parameters are released with [`osi_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use osinfluence::cli::spec_file::FunctionSpecFile;
use osinfluence::closed_forms::influence_power_product;
use osinfluence::projection::{influence_profile, project, InfluenceProfile, Method, MethodTag};
use osinfluence::rational::format_rational;
use osinfluence::{Error, FunctionSpec};

/// Status codes, numbered like the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OsiStatus {
    Ok = 0,
    Internal = 1,
    InvalidInput = 2,
    IncompatibleMethod = 3,
    TaintedSample = 4,
    Numerical = 6,
    NullArgument = 7,
}

/// How to compute an influence profile.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OsiMethod {
    /// Exact, else closed form, else Monte Carlo.
    Auto = 0,
    Exact = 1,
    ClosedForm = 2,
    MonteCarlo = 3,
}

/// A function on `[0, 1]^n`.
pub struct OsiFunction {
    spec: FunctionSpec,
}

/// `I(f, 1..n)` with the mean and formal tail of the projection.
pub struct OsiProfile {
    profile: InfluenceProfile,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> OsiStatus {
    match e {
        Error::Domain(_) => OsiStatus::InvalidInput,
        Error::Configuration(_) => OsiStatus::IncompatibleMethod,
        Error::TaintedSample { .. } => OsiStatus::TaintedSample,
        Error::DegenerateVariance(_) | Error::Quadrature { .. } | Error::BranchAmbiguity(_) => OsiStatus::Numerical,
    }
}

fn fail(e: &Error) -> OsiStatus {
    set_error(&e.to_string());
    status_of(e)
}

fn null_argument(name: &str) -> OsiStatus {
    set_error(&format!("{name} is null"));
    OsiStatus::NullArgument
}

/// Runs `body`, turning a panic into [`OsiStatus::Internal`].
fn guarded(body: impl FnOnce() -> OsiStatus) -> OsiStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|_| {
        set_error("internal error");
        OsiStatus::Internal
    })
}

fn to_method(method: OsiMethod, samples: u64, seed: u64) -> Method {
    match method {
        OsiMethod::Auto => Method::Auto { samples, seed },
        OsiMethod::Exact => Method::Exact,
        OsiMethod::ClosedForm => Method::ClosedForm,
        OsiMethod::MonteCarlo => Method::MonteCarlo { samples, seed },
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failure on this thread; empty if none. Owned by the library.
#[no_mangle]
pub extern "C" fn osi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn osi_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Parses a JSON function description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn osi_function_from_json(json: *const c_char, out: *mut *mut OsiFunction) -> OsiStatus {
    guarded(|| {
        if json.is_null() {
            return null_argument("json");
        }
        if out.is_null() {
            return null_argument("out");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            set_error("function description is not valid UTF-8");
            return OsiStatus::InvalidInput;
        };
        let spec = match FunctionSpecFile::parse(text).and_then(|f| f.build()) {
            Ok(s) => s,
            // every spec problem is an input problem, including unknown builtins
            Err(e) => {
                set_error(&e.to_string());
                return OsiStatus::InvalidInput;
            }
        };
        *out = Box::into_raw(Box::new(OsiFunction { spec }));
        OsiStatus::Ok
    })
}

/// Releases a function; null is ignored.
///
/// # Safety
/// `f` must come from [`osi_function_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn osi_function_free(f: *mut OsiFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of variables, or 0 for null.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn osi_function_arity(f: *const OsiFunction) -> usize {
    f.as_ref().map_or(0, |f| f.spec.arity())
}

/// Computes `I(f, 1..n)`. `samples` and `seed` are used by the Monte-Carlo method only.
///
/// # Safety
/// `f` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn osi_influence(
    f: *const OsiFunction,
    method: OsiMethod,
    samples: u64,
    seed: u64,
    out: *mut *mut OsiProfile,
) -> OsiStatus {
    guarded(|| {
        let Some(f) = f.as_ref() else { return null_argument("f") };
        if out.is_null() {
            return null_argument("out");
        }
        *out = ptr::null_mut();
        match influence_profile(&f.spec, to_method(method, samples, seed)) {
            Ok(profile) => {
                *out = Box::into_raw(Box::new(OsiProfile { profile }));
                OsiStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Coefficient of determination of the best shifted L-statistic; `std_error` may be null
/// and receives NaN for exact methods.
///
/// # Safety
/// `f` must be a live handle, `value` a valid pointer, `std_error` null or valid.
#[no_mangle]
pub unsafe extern "C" fn osi_r_squared(
    f: *const OsiFunction,
    method: OsiMethod,
    samples: u64,
    seed: u64,
    value: *mut f64,
    std_error: *mut f64,
) -> OsiStatus {
    guarded(|| {
        let Some(f) = f.as_ref() else { return null_argument("f") };
        if value.is_null() {
            return null_argument("value");
        }
        match project(&f.spec, to_method(method, samples, seed)).and_then(|p| p.r_squared()) {
            Ok(q) => {
                *value = q.value;
                if !std_error.is_null() {
                    *std_error = q.std_error.unwrap_or(f64::NAN);
                }
                OsiStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a profile; null is ignored.
///
/// # Safety
/// `p` must come from [`osi_influence`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn osi_profile_free(p: *mut OsiProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of indices `n`, or 0 for null.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn osi_profile_len(p: *const OsiProfile) -> usize {
    p.as_ref().map_or(0, |p| p.profile.indices.len())
}

/// Method that produced the profile.
///
/// # Safety
/// `p` must be null or a live handle; null reports `Auto`.
#[no_mangle]
pub unsafe extern "C" fn osi_profile_method(p: *const OsiProfile) -> OsiMethod {
    match p.as_ref().map(|p| p.profile.method) {
        Some(MethodTag::Exact) => OsiMethod::Exact,
        Some(MethodTag::ClosedForm) => OsiMethod::ClosedForm,
        Some(MethodTag::MonteCarlo) => OsiMethod::MonteCarlo,
        None => OsiMethod::Auto,
    }
}

/// `I(f, k)` for `k` in `1..=n`; `std_error` may be null and receives NaN when exact.
///
/// # Safety
/// `p` must be a live handle, `value` a valid pointer, `std_error` null or valid.
#[no_mangle]
pub unsafe extern "C" fn osi_profile_index(
    p: *const OsiProfile,
    k: usize,
    value: *mut f64,
    std_error: *mut f64,
) -> OsiStatus {
    guarded(|| {
        let Some(p) = p.as_ref() else { return null_argument("p") };
        if value.is_null() {
            return null_argument("value");
        }
        let n = p.profile.indices.len();
        if k == 0 || k > n {
            set_error(&format!("k = {k} outside [1, {n}]"));
            return OsiStatus::InvalidInput;
        }
        let q = &p.profile.indices[k - 1];
        *value = q.value;
        if !std_error.is_null() {
            *std_error = q.std_error.unwrap_or(f64::NAN);
        }
        OsiStatus::Ok
    })
}

/// `<f, 1>`.
///
/// # Safety
/// `p` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn osi_profile_mean(p: *const OsiProfile, value: *mut f64) -> OsiStatus {
    guarded(|| {
        let Some(p) = p.as_ref() else { return null_argument("p") };
        if value.is_null() {
            return null_argument("value");
        }
        *value = p.profile.mean.value;
        OsiStatus::Ok
    })
}

/// `I(f, k)` as a rational string such as `"-1/5"`; fails with `IncompatibleMethod`
/// when the profile is not exact. Release the string with [`osi_string_free`].
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn osi_profile_exact_string(p: *const OsiProfile, k: usize, out: *mut *mut c_char) -> OsiStatus {
    guarded(|| {
        let Some(p) = p.as_ref() else { return null_argument("p") };
        if out.is_null() {
            return null_argument("out");
        }
        *out = ptr::null_mut();
        let n = p.profile.indices.len();
        if k == 0 || k > n {
            set_error(&format!("k = {k} outside [1, {n}]"));
            return OsiStatus::InvalidInput;
        }
        match &p.profile.indices[k - 1].exact {
            Some(r) => {
                *out = into_c_string(format_rational(r));
                OsiStatus::Ok
            }
            None => {
                set_error("profile has no exact values");
                OsiStatus::IncompatibleMethod
            }
        }
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn osi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `I(f, k)` for `f = (x_1 ... x_n)^c` by the Gamma-function closed form, `c > -1/2`.
///
/// # Safety
/// `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn osi_power_product_influence(c: f64, n: usize, k: usize, value: *mut f64) -> OsiStatus {
    guarded(|| {
        if value.is_null() {
            return null_argument("value");
        }
        match influence_power_product(c, n, k) {
            Ok(r) => {
                *value = r.value;
                OsiStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
