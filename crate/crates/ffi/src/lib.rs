//! C ABI over the `decnorm` library.
//!
//! Objects cross the boundary as opaque heap handles created by a `*_new`
//! (or `*_read`) call and released with the matching `*_free`. Every
//! fallible function returns a [`DecnormStatus`]; on failure the message is
//! available from [`decnorm_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use decnorm::aniso::{aniso_norm, Direction};
use decnorm::experiments::{run_selftest, SelftestConfig, Verdict};
use decnorm::frames::{build_caps, AngularProfile, DirectionalFamily, DEFAULT_BAND};
use decnorm::grid::{read_field, Space, TorusField, TorusGrid};
use decnorm::norms::{
    dec_norm_continuous, dec_norm_discrete, exponent_alpha, exponent_d, exponent_s, exponent_sigma, NormSpec,
};
use decnorm::{Complex64, Error};

/// Result code of every fallible call.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecnormStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GridMismatch = 3,
    BandViolation = 4,
    SupportViolation = 5,
    InsufficientDirections = 6,
    Format = 7,
    Io = 8,
    Numerical = 9,
    Panic = 10,
}

/// A periodic grid `(ℝ/LZ)^n` with `M` points per axis.
pub struct DecnormGrid {
    inner: TorusGrid,
}

/// A complex field on a grid.
pub struct DecnormField {
    inner: TorusField,
}

/// A directional family sized for a grid.
pub struct DecnormFamily {
    inner: DirectionalFamily,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> DecnormStatus {
    match err {
        Error::InvalidParameter(_) | Error::Config(_) => DecnormStatus::InvalidArgument,
        Error::GridMismatch(_) => DecnormStatus::GridMismatch,
        Error::BandViolation { .. } => DecnormStatus::BandViolation,
        Error::SupportViolation { .. } => DecnormStatus::SupportViolation,
        Error::InsufficientDirections { .. } => DecnormStatus::InsufficientDirections,
        Error::Format(_) => DecnormStatus::Format,
        Error::Io(_) => DecnormStatus::Io,
        Error::UndefinedSymbol(_) | Error::DomainExit(_) | Error::Bracket(_) => DecnormStatus::Numerical,
    }
}

struct Failure(DecnormStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DecnormStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, records any failure and maps it to a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DecnormStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DecnormStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            DecnormStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn decnorm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn decnorm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a grid of dimension `dim` with `points` per axis and side `side`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_grid_new(
    dim: usize,
    points: usize,
    side: f64,
    out: *mut *mut DecnormGrid,
) -> DecnormStatus {
    guard(|| {
        let inner = TorusGrid::new(dim, points, side)?;
        write(out, Box::into_raw(Box::new(DecnormGrid { inner })), "out")
    })
}

/// # Safety
/// `grid` must be null or a handle from `decnorm_grid_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn decnorm_grid_free(grid: *mut DecnormGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of lattice points `M^n`.
///
/// # Safety
/// `grid` must be a live grid handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_grid_len(grid: *const DecnormGrid, out: *mut usize) -> DecnormStatus {
    guard(|| write(out, deref(grid, "grid")?.inner.len(), "out"))
}

/// Largest resolved frequency `π M / L`.
///
/// # Safety
/// `grid` must be a live grid handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_grid_xi_max(grid: *const DecnormGrid, out: *mut f64) -> DecnormStatus {
    guard(|| write(out, deref(grid, "grid")?.inner.xi_max(), "out"))
}

/// Builds a physical-space field from `len` real and imaginary parts in
/// row-major order. `im` may be null for a real field.
///
/// # Safety
/// `re` (and `im` if non-null) must point to `len` doubles; `grid` must be
/// live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_field_new(
    grid: *const DecnormGrid,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut DecnormField,
) -> DecnormStatus {
    guard(|| {
        let g = deref(grid, "grid")?.inner;
        let re = slice(re, len, "re")?;
        let values: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = slice(im, len, "im")?;
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        let inner = TorusField::new(g, values, Space::Physical)?;
        write(out, Box::into_raw(Box::new(DecnormField { inner })), "out")
    })
}

/// Reads a field in the binary field format.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_field_read(path: *const c_char, out: *mut *mut DecnormField) -> DecnormStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(DecnormStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let inner = read_field(path)?;
        write(out, Box::into_raw(Box::new(DecnormField { inner })), "out")
    })
}

/// # Safety
/// `field` must be null or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn decnorm_field_free(field: *mut DecnormField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Copies the physical-space values into `re` and `im` (either may be
/// null), each of capacity `len` which must equal the grid size.
///
/// # Safety
/// Non-null buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn decnorm_field_values(
    field: *const DecnormField,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> DecnormStatus {
    guard(|| {
        let f = &deref(field, "field")?.inner;
        if len != f.grid().len() {
            return Err(Failure(
                DecnormStatus::InvalidArgument,
                format!("buffer holds {len} values, field has {}", f.grid().len()),
            ));
        }
        let phys = f.to_physical();
        for (i, v) in phys.values().iter().enumerate() {
            if !re.is_null() {
                *re.add(i) = v.re;
            }
            if !im.is_null() {
                *im.add(i) = v.im;
            }
        }
        Ok(())
    })
}

/// Creates the default directional family for `grid`.
///
/// # Safety
/// `grid` must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_family_new(grid: *const DecnormGrid, out: *mut *mut DecnormFamily) -> DecnormStatus {
    guard(|| {
        let g = deref(grid, "grid")?.inner;
        let inner = DirectionalFamily::for_grid(&g, DEFAULT_BAND, AngularProfile::Standard)?;
        write(out, Box::into_raw(Box::new(DecnormFamily { inner })), "out")
    })
}

/// # Safety
/// `family` must be null or a live family handle.
#[no_mangle]
pub unsafe extern "C" fn decnorm_family_free(family: *mut DecnormFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Upper end of the frequency band the family resolves.
///
/// # Safety
/// `family` must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_family_band_top(family: *const DecnormFamily, out: *mut f64) -> DecnormStatus {
    guard(|| write(out, deref(family, "family")?.inner.band_top(), "out"))
}

/// Continuous norm `‖f‖_{D^s_{p,q}}`.
///
/// # Safety
/// Handles must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_dec_norm(
    field: *const DecnormField,
    family: *const DecnormFamily,
    p: f64,
    q: f64,
    s: f64,
    out: *mut f64,
) -> DecnormStatus {
    guard(|| {
        let f = &deref(field, "field")?.inner;
        let fam = &deref(family, "family")?.inner;
        let v = dec_norm_continuous(f, NormSpec::new(p, q, s)?, fam)?;
        write(out, v, "out")
    })
}

/// Discrete norm at frequency scale `r` over the cap partition of the
/// field's dimension. The spectrum must lie in `r/2 <= |ξ| <= 2r`.
///
/// # Safety
/// `field` must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_dec_norm_discrete(
    field: *const DecnormField,
    r: f64,
    p: f64,
    q: f64,
    s: f64,
    out: *mut f64,
) -> DecnormStatus {
    guard(|| {
        let f = &deref(field, "field")?.inner;
        let caps = build_caps(r, f.grid().dim())?;
        let v = dec_norm_discrete(f, NormSpec::new(p, q, s)?, &caps, r)?;
        write(out, v, "out")
    })
}

/// Anisotropic norm `|x|_ω` for a direction and point of dimension `dim`.
/// The direction need not be normalised.
///
/// # Safety
/// `omega` and `x` must point to `dim` doubles; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_aniso_norm(
    dim: usize,
    omega: *const f64,
    x: *const f64,
    out: *mut f64,
) -> DecnormStatus {
    guard(|| {
        let d = Direction::new(slice(omega, dim, "omega")?)?;
        let v = aniso_norm(&d, slice(x, dim, "x")?);
        write(out, v, "out")
    })
}

/// Which critical exponent [`decnorm_exponent`] evaluates.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecnormExponent {
    S = 0,
    D = 1,
    Alpha = 2,
    Sigma = 3,
}

/// Critical exponent `kind` at `(p, q)` in dimension `n`; `q` is used by
/// `D` only.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_exponent(
    kind: DecnormExponent,
    p: f64,
    q: f64,
    n: usize,
    out: *mut f64,
) -> DecnormStatus {
    guard(|| {
        let v = match kind {
            DecnormExponent::S => exponent_s(p, n)?,
            DecnormExponent::D => exponent_d(p, q, n)?,
            DecnormExponent::Alpha => exponent_alpha(p, n)?,
            DecnormExponent::Sigma => exponent_sigma(p, n)?,
        };
        write(out, v, "out")
    })
}

/// Runs the internal self-test battery. `*passed` is 1 on a pass, else 0.
/// A nonzero `fault` perturbs the frame so that the battery should fail.
///
/// # Safety
/// `passed` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn decnorm_selftest(seed: u64, fault: f64, passed: *mut i32) -> DecnormStatus {
    guard(|| {
        let cfg = SelftestConfig {
            seed,
            fault: (fault != 0.0).then_some(fault),
        };
        let report = run_selftest(&cfg)?;
        write(passed, i32::from(report.verdict == Verdict::Pass), "passed")
    })
}
