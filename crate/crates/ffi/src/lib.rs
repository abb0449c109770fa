//! C interface to the semiclab spectral laboratory.
//!
//! Every function returns a [`SemiclabStatus`]. On failure the message is
//! available from [`semiclab_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use semiclab::classical::{mu_average, LiouvilleOptions};
use semiclab::experiments::{solve_window, SolvedWindow, SolverOptions};
use semiclab::microlocal::{Observable, Quantization, WindowMeasures};
use semiclab::model::{catalog_entry, model_from_spec, SymbolModel};
use semiclab::Error;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemiclabStatus {
    Ok = 0,
    Hypothesis = 2,
    Numerical = 3,
    Config = 4,
    NullPointer = 10,
    Index = 11,
    Panic = 12,
}

/// Observable quantization selector.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemiclabQuantization {
    Weyl = 0,
    AntiWick = 1,
}

/// A symbol: Schrödinger, radial or phase polynomial.
pub struct SemiclabModel(SymbolModel);

/// A parsed phase-space observable.
pub struct SemiclabObservable(Observable);

/// Eigenpairs in one energy window.
pub struct SemiclabWindow(SolvedWindow);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(err: &Error) -> SemiclabStatus {
    match err {
        Error::Hypothesis(_) => SemiclabStatus::Hypothesis,
        Error::Numerical(_) => SemiclabStatus::Numerical,
        _ => SemiclabStatus::Config,
    }
}

struct Failure(SemiclabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SemiclabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            SemiclabStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SemiclabStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure(SemiclabStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(SemiclabStatus::Config, format!("{what} is not valid UTF-8")))
}

unsafe fn get<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| Failure(SemiclabStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(SemiclabStatus::NullPointer, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn semiclab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn semiclab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a model from a catalog name or an inline `poly1d:`, `radial:` or `phase:` spec.
///
/// # Safety
/// `spec` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiclab_model_new(spec: *const c_char, out: *mut *mut SemiclabModel) -> SemiclabStatus {
    guard(|| {
        let model = model_from_spec(text(spec, "spec")?)?;
        put(out, Box::into_raw(Box::new(SemiclabModel(model))), "out")
    })
}

/// # Safety
/// `model` must come from [`semiclab_model_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn semiclab_model_free(model: *mut SemiclabModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Phase-space dimension `n` (1 for line models, 2 for radial ones).
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiclab_model_dimension(model: *const SemiclabModel, out: *mut u32) -> SemiclabStatus {
    guard(|| {
        let m = get(model, "model")?;
        put(out, m.0.dimension() as u32, "out")
    })
}

/// Critical energy a catalog model is meant to be probed at.
///
/// # Safety
/// `name` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiclab_catalog_critical_energy(name: *const c_char, out: *mut f64) -> SemiclabStatus {
    guard(|| {
        let name = text(name, "name")?;
        let entry = catalog_entry(name).ok_or_else(|| Failure(SemiclabStatus::Config, format!("unknown catalog model '{name}'")))?;
        put(out, entry.critical_energy, "out")
    })
}

/// Parse an observable such as `exp(-x^2-xi^2)`.
///
/// # Safety
/// `expr` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiclab_observable_parse(expr: *const c_char, out: *mut *mut SemiclabObservable) -> SemiclabStatus {
    guard(|| {
        let obs = Observable::parse(text(expr, "expr")?)?;
        put(out, Box::into_raw(Box::new(SemiclabObservable(obs))), "out")
    })
}

/// # Safety
/// `obs` must come from [`semiclab_observable_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn semiclab_observable_free(obs: *mut SemiclabObservable) {
    if !obs.is_null() {
        drop(Box::from_raw(obs));
    }
}

/// Eigenpairs with eigenvalues in `[center - d h, center + d h]`, default solver settings.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiclab_window_solve(
    model: *const SemiclabModel,
    center: f64,
    d: f64,
    h: f64,
    out: *mut *mut SemiclabWindow,
) -> SemiclabStatus {
    guard(|| {
        let m = get(model, "model")?;
        let solved = solve_window(&m.0, center, d, h, &SolverOptions::default())?;
        put(out, Box::into_raw(Box::new(SemiclabWindow(solved))), "out")
    })
}

/// # Safety
/// `window` must come from [`semiclab_window_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn semiclab_window_free(window: *mut SemiclabWindow) {
    if !window.is_null() {
        drop(Box::from_raw(window));
    }
}

/// Number of eigenpairs stored in the window.
///
/// # Safety
/// `window` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiclab_window_len(window: *const SemiclabWindow, out: *mut usize) -> SemiclabStatus {
    guard(|| put(out, get(window, "window")?.0.window.len(), "out"))
}

/// Multiplicity-weighted eigenvalue count.
///
/// # Safety
/// `window` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiclab_window_count(window: *const SemiclabWindow, out: *mut u64) -> SemiclabStatus {
    guard(|| put(out, get(window, "window")?.0.window.weighted_count(), "out"))
}

/// Eigenvalue and multiplicity weight of pair `index`.
///
/// # Safety
/// `window` must be a live handle; `value` and `weight` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiclab_window_eigenvalue(
    window: *const SemiclabWindow,
    index: usize,
    value: *mut f64,
    weight: *mut u32,
) -> SemiclabStatus {
    guard(|| {
        let w = &get(window, "window")?.0.window;
        let pair = w
            .pairs
            .get(index)
            .ok_or_else(|| Failure(SemiclabStatus::Index, format!("index {index} out of range (len {})", w.len())))?;
        put(value, pair.value, "value")?;
        put(weight, pair.weight, "weight")
    })
}

/// `nu_j(a)` for every pair, written to `values[0..len]`; NaN where the
/// quantization has no value. `capacity` must be at least the window length.
///
/// # Safety
/// Handles must be live; `values` must hold `capacity` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiclab_window_measure(
    window: *const SemiclabWindow,
    obs: *const SemiclabObservable,
    quantization: SemiclabQuantization,
    values: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> SemiclabStatus {
    guard(|| {
        let solved = &get(window, "window")?.0;
        let a = &get(obs, "obs")?.0;
        let len = solved.window.len();
        if capacity < len {
            return Err(Failure(SemiclabStatus::Index, format!("capacity {capacity} below window length {len}")));
        }
        if values.is_null() && len > 0 {
            return Err(Failure(SemiclabStatus::NullPointer, "values is null".into()));
        }
        let q = match quantization {
            SemiclabQuantization::Weyl => Quantization::Weyl,
            SemiclabQuantization::AntiWick => Quantization::AntiWick,
        };
        let records = WindowMeasures::new(&solved.window, Some(solved.phase_box), q)?.records(a)?;
        for (j, r) in records.iter().enumerate() {
            let v = match quantization {
                SemiclabQuantization::Weyl => r.nu_weyl,
                SemiclabQuantization::AntiWick => r.nu_antiwick,
            };
            values.add(j).write(v.unwrap_or(f64::NAN));
        }
        put(written, records.len(), "written")
    })
}

/// Normalized Liouville average of `obs` on the level `energy`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn semiclab_liouville_average(
    model: *const SemiclabModel,
    obs: *const SemiclabObservable,
    energy: f64,
    out: *mut f64,
) -> SemiclabStatus {
    guard(|| {
        let m = get(model, "model")?;
        let a = get(obs, "obs")?;
        let avg = mu_average(&m.0, &a.0, energy, &LiouvilleOptions::default())?;
        put(out, avg, "out")
    })
}
