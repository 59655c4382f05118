//! C ABI over `modspace`.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every fallible call returns an [`MsStatus`]; on failure the message is
//! retrievable with [`ms_last_error_message`] on the same thread. Strings
//! returned through out-parameters are owned by the caller and released
//! with [`ms_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use modspace::embedding::{analyze_embedding, EmbeddingOptions};
use modspace::format::{read_grid_function, write_grid_function, write_stft_field};
use modspace::grid::GridFunction;
use modspace::hermite::hermite_function;
use modspace::lattice::{Exponent, MixedNormSpec};
use modspace::num_complex::Complex64;
use modspace::stft::{gaussian_window, modulation_norm, stft, PhaseGrid, StftField};
use modspace::weights::WeightDescriptor;
use modspace::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Numerical = 3,
    Io = 4,
    Assertion = 5,
    Panic = 6,
}

/// Opaque weight handle.
pub struct MsWeight(WeightDescriptor);

/// Opaque sampled function on a uniform grid.
pub struct MsGridFunction(GridFunction);

/// Opaque phase-space field produced by [`ms_stft`].
pub struct MsField(StftField);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MsStatus {
    match e {
        Error::Io(_) => MsStatus::Io,
        Error::Assertion(_) => MsStatus::Assertion,
        Error::NonFinite(_) | Error::SingularBasis(_) | Error::Degenerate(_) | Error::BoundaryTail(_) => {
            MsStatus::Numerical
        }
        _ => MsStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MsStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("{name} is null"));
            MsStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            MsStatus::Panic
        }
    }
}

unsafe fn nonnull<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn c_str<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::Lib(Error::Format(format!("{name}: {e}"))))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn parse_json(text: &str) -> Result<serde_json::Value, Error> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no interior nul").into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ms_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a weight from its JSON descriptor.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_weight_from_json(json: *const c_char, out: *mut *mut MsWeight) -> MsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let w = WeightDescriptor::from_json(&parse_json(c_str(json, "json")?)?)?;
        *out = Box::into_raw(Box::new(MsWeight(w)));
        Ok(())
    })
}

/// Phase-space dimension `2d` of the weight.
///
/// # Safety
/// `w` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ms_weight_dim(w: *const MsWeight, out: *mut usize) -> MsStatus {
    guard(|| {
        *out_ptr(out, "out")? = nonnull(w, "weight")?.0.dim();
        Ok(())
    })
}

/// Evaluates the weight at the point `x[0..len]`.
///
/// # Safety
/// `x` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_weight_eval(w: *const MsWeight, x: *const f64, len: usize, out: *mut f64) -> MsStatus {
    guard(|| {
        let w = nonnull(w, "weight")?;
        *out_ptr(out, "out")? = w.0.eval(slice(x, len, "x")?)?;
        Ok(())
    })
}

/// Descriptor JSON of the weight.
///
/// # Safety
/// `w` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_weight_to_json(w: *const MsWeight, out: *mut *mut c_char) -> MsStatus {
    guard(|| {
        let w = nonnull(w, "weight")?;
        *out_ptr(out, "out")? = owned_string(w.0.to_json().to_string());
        Ok(())
    })
}

/// # Safety
/// `w` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ms_weight_free(w: *mut MsWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

fn cube(dim: usize, step: f64, extent: f64) -> Result<Vec<modspace::grid::Axis>, Error> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dim must be positive".into()));
    }
    GridFunction::cube_axes(dim, step, extent)
}

fn boxed(f: GridFunction) -> *mut MsGridFunction {
    Box::into_raw(Box::new(MsGridFunction(f)))
}

/// The normalized Gaussian on the cube `[-extent, extent]^dim`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_grid_function_gaussian(
    dim: usize,
    step: f64,
    extent: f64,
    out: *mut *mut MsGridFunction,
) -> MsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(gaussian_window(&cube(dim, step, extent)?)?);
        Ok(())
    })
}

/// The Hermite function `h_alpha`, `alpha` of length `dim`.
///
/// # Safety
/// `alpha` must point to `dim` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_grid_function_hermite(
    alpha: *const usize,
    dim: usize,
    step: f64,
    extent: f64,
    out: *mut *mut MsGridFunction,
) -> MsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let a = slice(alpha, dim, "alpha")?;
        *out = boxed(hermite_function(a, &cube(dim, step, extent)?)?);
        Ok(())
    })
}

/// A function from interleaved `(re, im)` samples in row-major order;
/// `len` counts doubles.
///
/// # Safety
/// `samples` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ms_grid_function_from_samples(
    dim: usize,
    step: f64,
    extent: f64,
    samples: *const f64,
    len: usize,
    out: *mut *mut MsGridFunction,
) -> MsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let axes = cube(dim, step, extent)?;
        let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
        let n: usize = shape.iter().product();
        let data = slice(samples, len, "samples")?;
        if data.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: data.len() }.into());
        }
        let vals: Vec<Complex64> = data.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let arr = modspace::ndarray::ArrayD::from_shape_vec(shape, vals).map_err(|e| Error::Format(e.to_string()))?;
        *out = boxed(GridFunction::new(axes, arr)?);
        Ok(())
    })
}

/// Number of grid points.
///
/// # Safety
/// `f` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_grid_function_len(f: *const MsGridFunction, out: *mut usize) -> MsStatus {
    guard(|| {
        *out_ptr(out, "out")? = nonnull(f, "function")?.0.samples().len();
        Ok(())
    })
}

/// Copies interleaved `(re, im)` samples into `buf`, which holds `cap`
/// doubles and must fit `2 * len`.
///
/// # Safety
/// `buf` must be writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_grid_function_samples(f: *const MsGridFunction, buf: *mut f64, cap: usize) -> MsStatus {
    guard(|| {
        let f = nonnull(f, "function")?;
        let need = 2 * f.0.samples().len();
        if cap < need {
            return Err(Error::InvalidParameter(format!("buffer holds {cap} doubles, {need} needed")).into());
        }
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (pair, z) in out.chunks_exact_mut(2).zip(f.0.samples().iter()) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

/// `L²` norm of the sampled function.
///
/// # Safety
/// `f` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_grid_function_l2_norm(f: *const MsGridFunction, out: *mut f64) -> MsStatus {
    guard(|| {
        *out_ptr(out, "out")? = nonnull(f, "function")?.0.l2_norm();
        Ok(())
    })
}

/// Reads a function from the binary grid format.
///
/// # Safety
/// `path` must be nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_grid_function_read(path: *const c_char, out: *mut *mut MsGridFunction) -> MsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let file = std::fs::File::open(c_str(path, "path")?).map_err(Error::from)?;
        *out = boxed(read_grid_function(&mut std::io::BufReader::new(file))?);
        Ok(())
    })
}

/// Writes a function in the binary grid format.
///
/// # Safety
/// `f` must be a live handle; `path` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn ms_grid_function_write(f: *const MsGridFunction, path: *const c_char) -> MsStatus {
    guard(|| {
        let f = nonnull(f, "function")?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(c_str(path, "path")?).map_err(Error::from)?);
        write_grid_function(&mut w, &f.0)?;
        std::io::Write::flush(&mut w).map_err(Error::from)?;
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ms_grid_function_free(f: *mut MsGridFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

unsafe fn window_or_gaussian(f: &GridFunction, window: *const MsGridFunction) -> Result<GridFunction, Failure> {
    match window.as_ref() {
        Some(w) => Ok(w.0.clone()),
        None => Ok(gaussian_window(f.axes())?),
    }
}

/// STFT of `f` on the FFT-dual phase grid with x-stride `x_stride` and
/// frequency extent `xi_extent`. A null `window` selects the Gaussian.
///
/// # Safety
/// Handles must be live or null as documented; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_stft(
    f: *const MsGridFunction,
    window: *const MsGridFunction,
    x_stride: usize,
    xi_extent: f64,
    out: *mut *mut MsField,
) -> MsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let f = &nonnull(f, "function")?.0;
        let phi = window_or_gaussian(f, window)?;
        let grid = PhaseGrid::fft_dual(f.axes(), x_stride, xi_extent)?;
        *out = Box::into_raw(Box::new(MsField(stft(f, &phi, &grid)?)));
        Ok(())
    })
}

/// Number of phase-space samples.
///
/// # Safety
/// `v` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_field_len(v: *const MsField, out: *mut usize) -> MsStatus {
    guard(|| {
        *out_ptr(out, "out")? = nonnull(v, "field")?.0.samples().len();
        Ok(())
    })
}

/// Copies interleaved `(re, im)` samples, row-major with x axes first.
///
/// # Safety
/// `buf` must be writable for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_field_samples(v: *const MsField, buf: *mut f64, cap: usize) -> MsStatus {
    guard(|| {
        let v = nonnull(v, "field")?;
        let need = 2 * v.0.samples().len();
        if cap < need {
            return Err(Error::InvalidParameter(format!("buffer holds {cap} doubles, {need} needed")).into());
        }
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (pair, z) in out.chunks_exact_mut(2).zip(v.0.samples().iter()) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

/// Sampled sup norm of the field.
///
/// # Safety
/// `v` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_field_sup_norm(v: *const MsField, out: *mut f64) -> MsStatus {
    guard(|| {
        *out_ptr(out, "out")? = nonnull(v, "field")?.0.field.sup_norm();
        Ok(())
    })
}

/// Writes the field in the binary phase-field format.
///
/// # Safety
/// `v` must be a live handle; `path` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn ms_field_write(v: *const MsField, path: *const c_char) -> MsStatus {
    guard(|| {
        let v = nonnull(v, "field")?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(c_str(path, "path")?).map_err(Error::from)?);
        write_stft_field(&mut w, &v.0)?;
        std::io::Write::flush(&mut w).map_err(Error::from)?;
        Ok(())
    })
}

/// # Safety
/// `v` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ms_field_free(v: *mut MsField) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Weighted `L^{p,q}` modulation norm (x innermost). Infinite exponents
/// are passed as `INFINITY`; a null `window` selects the Gaussian.
///
/// # Safety
/// Handles must be live or null as documented; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ms_modulation_norm(
    f: *const MsGridFunction,
    window: *const MsGridFunction,
    weight: *const MsWeight,
    p: f64,
    q: f64,
    x_stride: usize,
    xi_extent: f64,
    out: *mut f64,
) -> MsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let f = &nonnull(f, "function")?.0;
        let w = &nonnull(weight, "weight")?.0;
        let phi = window_or_gaussian(f, window)?;
        let grid = PhaseGrid::fft_dual(f.axes(), x_stride, xi_extent)?;
        let spec = MixedNormSpec::lpq1(f.dim(), Exponent::new(p)?, Exponent::new(q)?)?;
        *out = modulation_norm(f, w, &spec, &phi, &grid)?;
        Ok(())
    })
}

/// Full embedding analysis of `M(omega1) -> M(omega2)`; the report is
/// returned as JSON. `options_json` may be null for defaults.
///
/// # Safety
/// Handles must be live; `options_json` nul-terminated or null; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ms_embedding_analyze(
    omega1: *const MsWeight,
    omega2: *const MsWeight,
    options_json: *const c_char,
    out: *mut *mut c_char,
) -> MsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let w1 = &nonnull(omega1, "omega1")?.0;
        let w2 = &nonnull(omega2, "omega2")?.0;
        let opts: EmbeddingOptions = if options_json.is_null() {
            EmbeddingOptions::default()
        } else {
            serde_json::from_value(parse_json(c_str(options_json, "options_json")?)?)
                .map_err(|e| Error::Format(format!("options: {e}")))?
        };
        let report = analyze_embedding(w1, w2, &opts)?;
        let text = serde_json::to_string(&report).map_err(|e| Error::Format(e.to_string()))?;
        *out = owned_string(text);
        Ok(())
    })
}
