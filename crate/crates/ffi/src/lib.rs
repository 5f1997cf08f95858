//! C ABI over `kernelforge`.
//!
//! Every function returns a [`KfStatus`]. Results come back through out
//! pointers. On failure the thread's last error holds the error JSON
//! (`{"error_kind", "detail", ...}`), readable with [`kf_last_error`].
//! Handles are opaque and must be released with their `_free` function;
//! strings returned by the library must be released with [`kf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kernelforge::cli::{error_bound_document, error_json, solve_inverse_document};
use kernelforge::spec::{parse_document, parse_kernel, parse_measure, BuiltKernel};
use kernelforge::{gram, psd_check, Error, ErrorKind, GramMatrix, ParamMeasure};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KfStatus {
    Ok = 0,
    Argument = 1,
    Domain = 2,
    Evaluation = 3,
    InvariantViolation = 4,
    Conditioning = 5,
    NumericalFailure = 6,
    Parse = 7,
    UnknownFamily = 8,
    Io = 9,
    NullPointer = 10,
    Panic = 11,
}

impl From<ErrorKind> for KfStatus {
    fn from(k: ErrorKind) -> Self {
        match k {
            ErrorKind::Argument => KfStatus::Argument,
            ErrorKind::Domain => KfStatus::Domain,
            ErrorKind::Evaluation => KfStatus::Evaluation,
            ErrorKind::InvariantViolation => KfStatus::InvariantViolation,
            ErrorKind::Conditioning => KfStatus::Conditioning,
            ErrorKind::NumericalFailure => KfStatus::NumericalFailure,
            ErrorKind::Parse => KfStatus::Parse,
            ErrorKind::UnknownFamily => KfStatus::UnknownFamily,
            ErrorKind::Io => KfStatus::Io,
        }
    }
}

/// A parameter measure.
pub struct KfMeasure(ParamMeasure);

/// A kernel built from a JSON spec.
pub struct KfKernel(BuiltKernel);

/// A Gram matrix with its points.
pub struct KfGram(GramMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(text: String) {
    let c = CString::new(text.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard<F>(f: F) -> KfStatus
where
    F: FnOnce() -> FfiResult<()>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KfStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(error_json(&e).to_string());
            e.kind().into()
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!(r#"{{"error_kind":"null_pointer","detail":"{what} is null"}}"#));
            KfStatus::NullPointer
        }
        Err(_) => {
            set_last_error(r#"{"error_kind":"panic","detail":"internal panic"}"#.into());
            KfStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &'static str) -> FfiResult<&'a str> {
    if s.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Error::Argument(format!("{what} is not UTF-8: {e}")).into())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> FfiResult<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Error JSON of the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn kf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `n`-node Gauss–Legendre rule on `[a, b]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_measure_gauss_legendre(a: f64, b: f64, n: usize, out: *mut *mut KfMeasure) -> KfStatus {
    guard(|| {
        let m = ParamMeasure::gauss_legendre(a, b, n)?;
        write_out(out, boxed(KfMeasure(m)), "out")
    })
}

/// Atoms given row-major: `nodes` holds `n_atoms * dim` values.
///
/// # Safety
/// `nodes` must hold `n_atoms * dim` values, `weights` `n_atoms` values, and
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_measure_from_atoms(
    nodes: *const f64,
    weights: *const f64,
    n_atoms: usize,
    dim: usize,
    out: *mut *mut KfMeasure,
) -> KfStatus {
    guard(|| {
        let len = n_atoms
            .checked_mul(dim)
            .ok_or_else(|| Error::Argument("n_atoms * dim overflows".into()))?;
        if dim == 0 {
            return Err(Error::Argument("atom dimension must be positive".into()).into());
        }
        let flat = slice(nodes, len, "nodes")?;
        let w = slice(weights, n_atoms, "weights")?;
        let rows: Vec<Vec<f64>> = flat.chunks(dim).map(<[f64]>::to_vec).collect();
        let m = ParamMeasure::from_atoms(&rows, w)?;
        write_out(out, boxed(KfMeasure(m)), "out")
    })
}

/// Accepts the spec form (`{"gauss_legendre": {...}}`, ...) or the
/// serialized form produced by [`kf_measure_to_json`].
///
/// # Safety
/// `json` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_measure_from_json(json: *const c_char, out: *mut *mut KfMeasure) -> KfStatus {
    guard(|| {
        let doc = parse_document(read_str(json, "json")?)?;
        let m = parse_measure(&doc)?;
        write_out(out, boxed(KfMeasure(m)), "out")
    })
}

/// # Safety
/// `m` must be a live measure handle and `out` valid for writes. Free the
/// result with [`kf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kf_measure_to_json(m: *const KfMeasure, out: *mut *mut c_char) -> KfStatus {
    guard(|| {
        let m = deref(m, "measure")?;
        let s = serde_json::to_string(&m.0).map_err(Error::from)?;
        write_out(out, c_string(s), "out")
    })
}

/// # Safety
/// `m` must be a live measure handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_measure_total_mass(m: *const KfMeasure, out: *mut f64) -> KfStatus {
    guard(|| write_out(out, deref(m, "measure")?.0.total_mass(), "out"))
}

/// # Safety
/// `m` must be a live measure handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_measure_len(m: *const KfMeasure, out: *mut usize) -> KfStatus {
    guard(|| write_out(out, deref(m, "measure")?.0.len(), "out"))
}

/// # Safety
/// `m` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kf_measure_free(m: *mut KfMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Builds a kernel from a kernel spec such as
/// `{"type": "paley_wiener", "half_bandwidth": 0.5}`.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_kernel_from_json(json: *const c_char, out: *mut *mut KfKernel) -> KfStatus {
    guard(|| {
        let doc = parse_document(read_str(json, "json")?)?;
        let k = parse_kernel(&doc)?;
        write_out(out, boxed(KfKernel(k)), "out")
    })
}

/// # Safety
/// `k` must be a live kernel handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_kernel_domain_dim(k: *const KfKernel, out: *mut usize) -> KfStatus {
    guard(|| write_out(out, deref(k, "kernel")?.0.kernel.domain_dim(), "out"))
}

/// `K(x, y)`; `x` and `y` hold `dim` values each.
///
/// # Safety
/// `k` must be a live kernel handle, `x` and `y` must hold `dim` values, and
/// `re`, `im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_kernel_evaluate(
    k: *const KfKernel,
    x: *const f64,
    y: *const f64,
    dim: usize,
    re: *mut f64,
    im: *mut f64,
) -> KfStatus {
    guard(|| {
        let k = deref(k, "kernel")?;
        let v = k.0.kernel.evaluate(slice(x, dim, "x")?, slice(y, dim, "y")?)?;
        write_out(re, v.re, "re")?;
        write_out(im, v.im, "im")
    })
}

/// # Safety
/// `k` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kf_kernel_free(k: *mut KfKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Gram matrix over `n_points` points given row-major with the kernel's
/// domain dimension.
///
/// # Safety
/// `k` must be a live kernel handle, `points` must hold
/// `n_points * domain_dim` values, and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_gram_new(
    k: *const KfKernel,
    points: *const f64,
    n_points: usize,
    out: *mut *mut KfGram,
) -> KfStatus {
    guard(|| {
        let k = &deref(k, "kernel")?.0.kernel;
        let dim = k.domain_dim();
        let len = n_points
            .checked_mul(dim)
            .ok_or_else(|| Error::Argument("n_points * dim overflows".into()))?;
        let flat = slice(points, len, "points")?;
        let pts: Vec<Vec<f64>> = flat.chunks(dim).map(<[f64]>::to_vec).collect();
        let g = gram(k, &pts)?;
        write_out(out, boxed(KfGram(g)), "out")
    })
}

/// # Safety
/// `g` must be a live Gram handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_gram_size(g: *const KfGram, out: *mut usize) -> KfStatus {
    guard(|| write_out(out, deref(g, "gram")?.0.size(), "out"))
}

/// # Safety
/// `g` must be a live Gram handle and `re`, `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kf_gram_entry(g: *const KfGram, i: usize, j: usize, re: *mut f64, im: *mut f64) -> KfStatus {
    guard(|| {
        let g = &deref(g, "gram")?.0;
        let n = g.size();
        if i >= n || j >= n {
            return Err(Error::Argument(format!("entry ({i}, {j}) outside a {n}x{n} matrix")).into());
        }
        let v = g.entries()[(i, j)];
        write_out(re, v.re, "re")?;
        write_out(im, v.im, "im")
    })
}

/// Writes the PSD verdict and the smallest eigenvalue. A failed check is
/// reported through `passed`, not the status.
///
/// # Safety
/// `g` must be a live Gram handle and `passed`, `min_eigenvalue` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn kf_gram_psd_check(g: *const KfGram, passed: *mut bool, min_eigenvalue: *mut f64) -> KfStatus {
    guard(|| {
        let rep = psd_check(&deref(g, "gram")?.0);
        write_out(passed, rep.passed, "passed")?;
        write_out(min_eigenvalue, rep.min_eigenvalue, "min_eigenvalue")
    })
}

/// # Safety
/// `g` must be a live Gram handle and `out` valid for writes. Free the
/// result with [`kf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kf_gram_to_csv(g: *const KfGram, out: *mut *mut c_char) -> KfStatus {
    guard(|| {
        let csv = deref(g, "gram")?.0.to_csv();
        write_out(out, c_string(csv), "out")
    })
}

/// # Safety
/// `g` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kf_gram_free(g: *mut KfGram) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Runs a `solve-inverse` document and returns the solution JSON.
///
/// # Safety
/// `spec` must be a nul-terminated string and `out` valid for writes. Free
/// the result with [`kf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kf_solve_inverse_json(spec: *const c_char, out: *mut *mut c_char) -> KfStatus {
    guard(|| {
        let doc = parse_document(read_str(spec, "spec")?)?;
        let sol = solve_inverse_document(&doc)?;
        let s = serde_json::to_string(&sol.to_json()).map_err(Error::from)?;
        write_out(out, c_string(s), "out")
    })
}

/// Runs an `error-bound` document and returns the report JSON. A violated
/// bound gives `KfStatus::InvariantViolation` with the report in the last
/// error.
///
/// # Safety
/// `spec` must be a nul-terminated string and `out` valid for writes. Free
/// the result with [`kf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn kf_error_bound_json(spec: *const c_char, out: *mut *mut c_char) -> KfStatus {
    guard(|| {
        let doc = parse_document(read_str(spec, "spec")?)?;
        let report = error_bound_document(&doc)?;
        let s = serde_json::to_string(&report).map_err(Error::from)?;
        write_out(out, c_string(s), "out")
    })
}
