//! C ABI over `penreflect`.
//!
//! Every fallible call returns a [`PrStatus`]; on failure the message is
//! kept per thread and readable through [`pr_last_error_message`]. Models and
//! simulated paths are opaque heap handles released with their `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use penreflect::error::Error;
use penreflect::estimators::{neumann_heat_mc, McSettings, ScalarField};
use penreflect::geometry::ManifoldModel;
use penreflect::penalized::{integrate_penalized, DriverPath, TimeGrid};
use penreflect::reflected::{integrate_reflected, ReflectOptions};
use penreflect::skorohod1d::{skorohod_map, RealPath};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrStatus {
    Ok = 0,
    InvalidArgument = 1,
    Domain = 2,
    Integration = 3,
    Numeric = 4,
    Unsupported = 5,
    Io = 6,
    NullPointer = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque manifold model.
pub struct PrModel(ManifoldModel);

/// Opaque simulated path: node coordinates, boundary distance, local time.
pub struct PrPath {
    ambient: usize,
    times: Vec<f64>,
    points: Vec<f64>,
    r: Vec<f64>,
    l: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(PrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let s = match e {
            Error::Argument(_) => PrStatus::InvalidArgument,
            Error::Domain(_) | Error::Range { .. } => PrStatus::Domain,
            Error::Integration { .. } => PrStatus::Integration,
            Error::Numeric(_) => PrStatus::Numeric,
            Error::Unsupported(_) => PrStatus::Unsupported,
            Error::Io { .. } => PrStatus::Io,
        };
        Fail(s, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(PrStatus::NullPointer, format!("{what} is null"))
}

fn run(f: impl FnOnce() -> Result<(), Fail>) -> PrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PrStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            PrStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn model<'a>(m: *const PrModel) -> Result<&'a ManifoldModel, Fail> {
    m.as_ref().map(|m| &m.0).ok_or_else(|| null("model"))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn pr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parse a model spec such as `"cap:theta0=1"` into a new handle.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_model_parse(spec: *const c_char, out: *mut *mut PrModel) -> PrStatus {
    run(|| {
        if spec.is_null() {
            return Err(null("spec"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| Fail(PrStatus::InvalidArgument, "spec is not UTF-8".into()))?;
        let m: ManifoldModel = s.parse()?;
        *out = Box::into_raw(Box::new(PrModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`pr_model_parse`] (or be NULL) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pr_model_free(model: *mut PrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Intrinsic and ambient dimension.
///
/// # Safety
/// `model` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_model_dims(model: *const PrModel, dim: *mut usize, ambient: *mut usize) -> PrStatus {
    run(|| {
        let m = self::model(model)?;
        if dim.is_null() || ambient.is_null() {
            return Err(null("output"));
        }
        *dim = m.dim();
        *ambient = m.ambient_dim();
        Ok(())
    })
}

/// R(x), the distance to the boundary.
///
/// # Safety
/// `x` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_boundary_distance(model: *const PrModel, x: *const f64, len: usize, out: *mut f64) -> PrStatus {
    run(|| {
        let m = self::model(model)?;
        let x = slice(x, len, "x")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.boundary_distance(x)?;
        Ok(())
    })
}

/// Skorohod map of a piecewise-linear driver on the half-line. The driver
/// has `n` nodes; both outputs receive `n` values.
///
/// # Safety
/// `times` and `values` must point to `n` doubles; the outputs must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn pr_skorohod_map(
    x: f64,
    times: *const f64,
    values: *const f64,
    n: usize,
    reflected: *mut f64,
    local_time: *mut f64,
) -> PrStatus {
    run(|| {
        let t = slice(times, n, "times")?.to_vec();
        let v = slice(values, n, "values")?.to_vec();
        if reflected.is_null() || local_time.is_null() {
            return Err(null("output"));
        }
        let sol = skorohod_map(x, &RealPath::new(t, v)?)?;
        ptr::copy_nonoverlapping(sol.reflected.values().as_ptr(), reflected, n);
        ptr::copy_nonoverlapping(sol.local_time.values().as_ptr(), local_time, n);
        Ok(())
    })
}

/// Simulate one path from `x0` on `steps` uniform steps up to `horizon`.
/// `a > 0` gives the penalized path (local time L^a); `a <= 0` the
/// reflected one. The driver is fixed by `seed`.
///
/// # Safety
/// `x0` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_simulate(
    model: *const PrModel,
    x0: *const f64,
    len: usize,
    horizon: f64,
    steps: usize,
    seed: u64,
    a: f64,
    out: *mut *mut PrPath,
) -> PrStatus {
    run(|| {
        let m = self::model(model)?;
        let x0 = slice(x0, len, "x0")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = TimeGrid::new(horizon, steps)?;
        let drv = DriverPath::generate(seed, grid, m.frame_count());
        let path = if a > 0.0 {
            let p = integrate_penalized(m, a, x0, &drv, grid)?;
            PrPath { ambient: p.ambient, times: grid.times(), points: p.points, r: p.r_values, l: p.l_a }
        } else {
            let p = integrate_reflected(m, x0, &drv, grid, ReflectOptions::default())?;
            PrPath { ambient: p.ambient, times: grid.times(), points: p.points, r: p.r_values, l: p.l }
        };
        *out = Box::into_raw(Box::new(path));
        Ok(())
    })
}

/// Number of nodes (steps + 1); 0 for NULL.
///
/// # Safety
/// `path` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn pr_path_len(path: *const PrPath) -> usize {
    path.as_ref().map_or(0, |p| p.r.len())
}

/// Ambient coordinates per node; 0 for NULL.
///
/// # Safety
/// `path` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn pr_path_ambient(path: *const PrPath) -> usize {
    path.as_ref().map_or(0, |p| p.ambient)
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrSeries {
    Times = 0,
    /// Row-major node coordinates, len × ambient values.
    Points = 1,
    BoundaryDistance = 2,
    LocalTime = 3,
}

/// Copy one series of the path into `buf` (capacity `cap` doubles).
///
/// # Safety
/// `path` must be a live handle; `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn pr_path_copy(path: *const PrPath, series: PrSeries, buf: *mut f64, cap: usize) -> PrStatus {
    run(|| {
        let p = path.as_ref().ok_or_else(|| null("path"))?;
        let src = match series {
            PrSeries::Times => &p.times,
            PrSeries::Points => &p.points,
            PrSeries::BoundaryDistance => &p.r,
            PrSeries::LocalTime => &p.l,
        };
        if cap < src.len() {
            return Err(Fail(PrStatus::BufferTooSmall, format!("need {} doubles, got {cap}", src.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// # Safety
/// `path` must come from [`pr_simulate`] (or be NULL) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pr_path_free(path: *mut PrPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Monte Carlo estimate of E f(Y_T) for the reflected motion from `x`, with
/// `field` one of the built-in profiles ("gauss", "cos-neumann", "const").
///
/// # Safety
/// `field` must be NUL-terminated, `x` must point to `len` doubles, the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn pr_neumann_heat_mc(
    model: *const PrModel,
    field: *const c_char,
    x: *const f64,
    len: usize,
    horizon: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
    mean: *mut f64,
    stderr: *mut f64,
) -> PrStatus {
    run(|| {
        let m = self::model(model)?;
        if field.is_null() {
            return Err(null("field"));
        }
        if mean.is_null() || stderr.is_null() {
            return Err(null("output"));
        }
        let name = CStr::from_ptr(field)
            .to_str()
            .map_err(|_| Fail(PrStatus::InvalidArgument, "field is not UTF-8".into()))?;
        let f = ScalarField::named(m, name)?;
        let x = slice(x, len, "x")?;
        let est = neumann_heat_mc(m, &f, &McSettings::new(horizon, dt, n_paths, seed)?, x)?;
        *mean = est.mean[0];
        *stderr = est.stderr[0];
        Ok(())
    })
}
