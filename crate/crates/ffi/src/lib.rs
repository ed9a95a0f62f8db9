//! C interface to `coneiso`.
//!
//! Objects are opaque heap handles created by `coneiso_*_new`-style
//! constructors and released by the matching `_free`. Every fallible call
//! returns a [`ConeisoStatus`]; on failure the message is kept per thread
//! and can be copied out with [`coneiso_last_error`]. Panics are caught at
//! the boundary and reported as [`ConeisoStatus::Internal`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use coneiso::cli::{self, Scenario};
use coneiso::isoperimetry::quotient;
use coneiso::measure::{per_vol_identity_check, QuadratureSpec, RegionRep};
use coneiso::wirtinger::{wirtinger_eigenvalue, SectorDensity};
use coneiso::{ConvexCone, Error, Gauge, Weight, WeightSpec};

/// Result of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeisoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidCone = 3,
    DomainError = 4,
    ToleranceNotMet = 5,
    EmptyIntersection = 6,
    Unsupported = 7,
    Config = 8,
    Io = 9,
    Internal = 10,
}

/// Convex cone handle.
pub struct ConeisoCone(ConvexCone);
/// Weight handle.
pub struct ConeisoWeight(Weight);
/// Gauge handle.
pub struct ConeisoGauge(Gauge);
/// Region handle.
pub struct ConeisoRegion(RegionRep);

/// Quotient of a region and the sharp constant of the setting.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct ConeisoQuotient {
    pub perimeter: f64,
    pub volume: f64,
    pub quotient: f64,
    pub quotient_error: f64,
    pub sharp_constant: f64,
    pub sharp_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ConeisoStatus {
    match e {
        Error::InvalidCone(_) => ConeisoStatus::InvalidCone,
        Error::InvalidParameters(_) | Error::DegenerateGauge(_) => ConeisoStatus::InvalidArgument,
        Error::DomainError(_) => ConeisoStatus::DomainError,
        Error::ToleranceNotMet { .. } => ConeisoStatus::ToleranceNotMet,
        Error::EmptyIntersection(_) => ConeisoStatus::EmptyIntersection,
        Error::Unsupported(_) => ConeisoStatus::Unsupported,
        Error::Config { .. } => ConeisoStatus::Config,
        Error::Io(_) | Error::Csv(_) => ConeisoStatus::Io,
        _ => ConeisoStatus::Internal,
    }
}

/// Run `f`, record its error and convert panics.
fn guard<F: FnOnce() -> Result<(), (ConeisoStatus, String)>>(f: F) -> ConeisoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ConeisoStatus::Ok
        }
        Ok(Err((s, m))) => {
            set_error(&m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            ConeisoStatus::Internal
        }
    }
}

type Fallible<T> = Result<T, (ConeisoStatus, String)>;

fn lib<T>(r: coneiso::Result<T>) -> Fallible<T> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (ConeisoStatus, String) {
    (ConeisoStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Fallible<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Fallible<&'a [f64]> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn string(p: *const c_char, what: &str) -> Fallible<String> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map(str::to_owned).map_err(|_| {
        (
            ConeisoStatus::InvalidArgument,
            format!("{what} is not UTF-8"),
        )
    })
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Fallible<()> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn write<T>(out: *mut T, v: T) -> Fallible<()> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = v;
    Ok(())
}

/// Copy the last error of this thread into `buf` (NUL-terminated, truncated
/// to `len`). Returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn coneiso_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn coneiso_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// `(0, ∞)^dim`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn coneiso_cone_orthant(
    dim: usize,
    out: *mut *mut ConeisoCone,
) -> ConeisoStatus {
    guard(|| put(out, ConeisoCone(lib(ConvexCone::orthant(dim))?)))
}

/// `R^dim`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn coneiso_cone_full_space(
    dim: usize,
    out: *mut *mut ConeisoCone,
) -> ConeisoStatus {
    guard(|| put(out, ConeisoCone(lib(ConvexCone::full_space(dim))?)))
}

/// `{x : a·x > 0}`.
///
/// # Safety
/// `normal` must point to `dim` doubles and `out` to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn coneiso_cone_half_space(
    normal: *const f64,
    dim: usize,
    out: *mut *mut ConeisoCone,
) -> ConeisoStatus {
    guard(|| {
        let a = slice(normal, dim, "normal")?;
        put(out, ConeisoCone(lib(ConvexCone::half_space(a))?))
    })
}

/// Planar sector of the given opening around the ray at angle `axis`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn coneiso_cone_sector(
    opening: f64,
    axis: f64,
    out: *mut *mut ConeisoCone,
) -> ConeisoStatus {
    guard(|| put(out, ConeisoCone(lib(ConvexCone::sector(opening, axis))?)))
}

/// # Safety
/// `cone` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coneiso_cone_free(cone: *mut ConeisoCone) {
    if !cone.is_null() {
        drop(Box::from_raw(cone));
    }
}

/// Reference weight by catalog tag, on its reference cone.
///
/// # Safety
/// `tag` must be a NUL-terminated string and `out` a handle slot.
#[no_mangle]
pub unsafe extern "C" fn coneiso_weight_catalog(
    tag: *const c_char,
    out: *mut *mut ConeisoWeight,
) -> ConeisoStatus {
    guard(|| {
        let t = string(tag, "tag")?;
        put(
            out,
            ConeisoWeight(lib(coneiso::weights::lookup(&t))?.weight),
        )
    })
}

/// Weight from an inline TOML table such as `tag = "monomial"\nexponents = [1, 1]`.
///
/// # Safety
/// `cone` must be a live handle, `spec` a NUL-terminated string and `out`
/// a handle slot.
#[no_mangle]
pub unsafe extern "C" fn coneiso_weight_from_toml(
    cone: *const ConeisoCone,
    spec: *const c_char,
    out: *mut *mut ConeisoWeight,
) -> ConeisoStatus {
    guard(|| {
        let c = deref(cone, "cone")?;
        let text = string(spec, "spec")?;
        let parsed: WeightSpec = toml::from_str(&text)
            .map_err(|e| (ConeisoStatus::Config, format!("weight spec: {e}")))?;
        put(out, ConeisoWeight(lib(parsed.build(&c.0))?))
    })
}

/// # Safety
/// `w` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn coneiso_weight_degree(
    w: *const ConeisoWeight,
    out: *mut f64,
) -> ConeisoStatus {
    guard(|| write(out, deref(w, "weight")?.0.alpha()))
}

/// `w(x)`.
///
/// # Safety
/// `w` must be a live handle, `x` must point to `n` doubles and `out` to a double.
#[no_mangle]
pub unsafe extern "C" fn coneiso_weight_eval(
    w: *const ConeisoWeight,
    x: *const f64,
    n: usize,
    out: *mut f64,
) -> ConeisoStatus {
    guard(|| {
        let w = &deref(w, "weight")?.0;
        let x = slice(x, n, "x")?;
        if n != w.dim() {
            return Err((
                ConeisoStatus::InvalidArgument,
                format!("x has {n} entries, weight needs {}", w.dim()),
            ));
        }
        if !w.cone().contains(x) {
            return Err((
                ConeisoStatus::DomainError,
                "x is not in the open cone".into(),
            ));
        }
        write(out, w.eval(x))
    })
}

/// # Safety
/// `w` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coneiso_weight_free(w: *mut ConeisoWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Euclidean norm on `R^dim`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn coneiso_gauge_euclidean(
    dim: usize,
    out: *mut *mut ConeisoGauge,
) -> ConeisoStatus {
    guard(|| put(out, ConeisoGauge(Gauge::euclidean(dim))))
}

/// `ℓ^p` norm on `R^dim`, `p ≥ 1`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn coneiso_gauge_p_norm(
    dim: usize,
    p: f64,
    out: *mut *mut ConeisoGauge,
) -> ConeisoStatus {
    guard(|| put(out, ConeisoGauge(lib(Gauge::p_norm(dim, p))?)))
}

/// `H(x)` when `dual == 0`, `H°(x)` otherwise.
///
/// # Safety
/// `h` must be a live handle, `x` must point to `n` doubles and `out` to a double.
#[no_mangle]
pub unsafe extern "C" fn coneiso_gauge_eval(
    h: *const ConeisoGauge,
    x: *const f64,
    n: usize,
    dual: i32,
    out: *mut f64,
) -> ConeisoStatus {
    guard(|| {
        let h = &deref(h, "gauge")?.0;
        let x = slice(x, n, "x")?;
        if n != h.dim() {
            return Err((
                ConeisoStatus::InvalidArgument,
                format!("x has {n} entries, gauge needs {}", h.dim()),
            ));
        }
        write(out, if dual == 0 { h.eval(x) } else { h.polar(x) })
    })
}

/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coneiso_gauge_free(h: *mut ConeisoGauge) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Euclidean ball.
///
/// # Safety
/// `center` must point to `n` doubles and `out` to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn coneiso_region_ball(
    center: *const f64,
    n: usize,
    radius: f64,
    out: *mut *mut ConeisoRegion,
) -> ConeisoStatus {
    guard(|| {
        let c = slice(center, n, "center")?;
        put(
            out,
            ConeisoRegion(lib(RegionRep::ball(c.to_vec(), radius))?),
        )
    })
}

/// `r W` for the Wulff shape `W` of `h`.
///
/// # Safety
/// `h` must be a live handle and `out` a handle slot.
#[no_mangle]
pub unsafe extern "C" fn coneiso_region_wulff(
    h: *const ConeisoGauge,
    scale: f64,
    out: *mut *mut ConeisoRegion,
) -> ConeisoStatus {
    guard(|| {
        let h = &deref(h, "gauge")?.0;
        put(out, ConeisoRegion(lib(RegionRep::wulff(h.clone(), scale))?))
    })
}

/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coneiso_region_free(e: *mut ConeisoRegion) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Both sides of the perimeter–volume identity of the Wulff sector.
///
/// # Safety
/// Handles must be live; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn coneiso_identity_check(
    w: *const ConeisoWeight,
    h: *const ConeisoGauge,
    cone: *const ConeisoCone,
    rel_tol: f64,
    perimeter: *mut f64,
    d_volume: *mut f64,
    relative_gap: *mut f64,
) -> ConeisoStatus {
    guard(|| {
        let r = lib(per_vol_identity_check(
            &deref(w, "weight")?.0,
            &deref(h, "gauge")?.0,
            &deref(cone, "cone")?.0,
            &QuadratureSpec::deterministic(rel_tol),
        ))?;
        write(perimeter, r.lhs.value)?;
        write(d_volume, r.rhs.value)?;
        write(relative_gap, r.relative_gap)
    })
}

/// Isoperimetric quotient of `e` and the sharp constant.
///
/// # Safety
/// Handles must be live; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coneiso_quotient(
    e: *const ConeisoRegion,
    w: *const ConeisoWeight,
    h: *const ConeisoGauge,
    cone: *const ConeisoCone,
    rel_tol: f64,
    out: *mut ConeisoQuotient,
) -> ConeisoStatus {
    guard(|| {
        let r = lib(quotient(
            &deref(e, "region")?.0,
            &deref(w, "weight")?.0,
            &deref(h, "gauge")?.0,
            &deref(cone, "cone")?.0,
            &QuadratureSpec::deterministic(rel_tol),
        ))?;
        write(
            out,
            ConeisoQuotient {
                perimeter: r.perimeter.value,
                volume: r.volume.value,
                quotient: r.quotient,
                quotient_error: r.quotient_error,
                sharp_constant: r.sharp_constant,
                sharp_error: r.sharp_error,
            },
        )
    })
}

/// First constrained eigenvalue for the density `sin^α θ` on `(0, π)`
/// (`alpha = 0` gives `B ≡ 1` on an arc of length `beta`).
///
/// # Safety
/// `lambda1` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn coneiso_wirtinger(
    alpha: f64,
    beta: f64,
    nodes: usize,
    lambda1: *mut f64,
) -> ConeisoStatus {
    guard(|| {
        let s = if alpha == 0.0 {
            SectorDensity::constant(beta, nodes)
        } else {
            SectorDensity::sin_power(alpha, nodes)
        };
        write(lambda1, lib(wirtinger_eigenvalue(&lib(s)?))?.lambda1)
    })
}

/// Run a CLI scenario. `seed < 0` keeps the seed of the file, `config` may be
/// null for `catalog`. `exit_code` receives 0 (checks passed) or 1 (a check
/// failed); configuration and numerical errors are returned as a status.
///
/// # Safety
/// String arguments must be NUL-terminated; `exit_code` must be valid.
#[no_mangle]
pub unsafe extern "C" fn coneiso_run_scenario(
    scenario: *const c_char,
    config: *const c_char,
    seed: i64,
    out_dir: *const c_char,
    exit_code: *mut i32,
) -> ConeisoStatus {
    guard(|| {
        let s: Scenario = lib(string(scenario, "scenario")?.parse())?;
        let cfg = if config.is_null() {
            None
        } else {
            Some(string(config, "config")?)
        };
        let dir = string(out_dir, "out_dir")?;
        let seed = u64::try_from(seed).ok();
        let w = lib(cli::run(
            s,
            cfg.as_deref().map(Path::new),
            seed,
            Path::new(&dir),
        ))?;
        write(exit_code, w.report.failed as i32)
    })
}
