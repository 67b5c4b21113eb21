//! C ABI over `kquant`.
//!
//! Every function returns a [`KqStatus`]; results go through out-pointers.
//! On failure the message is available from [`kq_last_error`] on the same
//! thread. Objects are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kquant::asymptotics::{fit_decay, FitOutcome};
use kquant::functionals::{k_energy, l_difference, PathSpec};
use kquant::harness::{run, ExperimentConfig};
use kquant::quantization::{bergman_kernel, hilb, GramMatrix, MetricLevelK};
use kquant::{build_model, Error, ManifoldModel, Potential};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownModel = 3,
    Capability = 4,
    MemoryBudget = 5,
    Positivity = 6,
    NotPositiveDefinite = 7,
    Unsupported = 8,
    BufferSize = 9,
    Config = 10,
    CheckFailed = 11,
    Io = 12,
    Internal = 13,
}

impl From<&Error> for KqStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::UnknownModel(_) => KqStatus::UnknownModel,
            Error::Capability { .. } => KqStatus::Capability,
            Error::MemoryBudget { .. } => KqStatus::MemoryBudget,
            Error::Positivity { .. } => KqStatus::Positivity,
            Error::NotPositiveDefinite(_) | Error::IterationFailure { .. } => KqStatus::NotPositiveDefinite,
            Error::Unsupported(_) => KqStatus::Unsupported,
            Error::Config(_) | Error::Json(_) => KqStatus::Config,
            Error::CheckFailed(_) => KqStatus::CheckFailed,
            Error::Io(_) | Error::Cache(_) => KqStatus::Io,
            _ => KqStatus::InvalidArgument,
        }
    }
}

/// A model variety with its quadrature grid.
pub struct KqModel {
    inner: ManifoldModel,
}

/// A Kähler potential.
pub struct KqPotential {
    inner: Potential,
}

/// A Hermitian positive definite Gram matrix on sections of L^k.
pub struct KqGram {
    inner: GramMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: KqStatus, msg: impl Into<String>) -> KqStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), KqStatus>) -> KqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KqStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(KqStatus::Internal, "internal panic"),
    }
}

fn lift<T>(r: kquant::Result<T>) -> Result<T, KqStatus> {
    r.map_err(|e| fail(KqStatus::from(&e), e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, KqStatus> {
    p.as_ref().ok_or_else(|| fail(KqStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, KqStatus> {
    p.as_mut().ok_or_else(|| fail(KqStatus::NullPointer, format!("{what} is null")))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, KqStatus> {
    if p.is_null() {
        return Err(fail(KqStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(KqStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn kq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds `name` ("CP1" or "CP2_toric") supporting levels up to `resolution`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kq_model_new(name: *const c_char, resolution: usize, out_model: *mut *mut KqModel) -> KqStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        *slot = ptr::null_mut();
        let model = lift(build_model(string(name, "name")?, resolution))?;
        *slot = Box::into_raw(Box::new(KqModel { inner: model }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`kq_model_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kq_model_free(model: *mut KqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kq_model_node_count(model: *const KqModel, out_count: *mut usize) -> KqStatus {
    guard(|| {
        *out(out_count, "out_count")? = deref(model, "model")?.inner.node_count();
        Ok(())
    })
}

/// dim H⁰(X, L^k).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kq_model_section_count(model: *const KqModel, k: usize, out_count: *mut usize) -> KqStatus {
    guard(|| {
        *out(out_count, "out_count")? = deref(model, "model")?.inner.kind().section_count(k);
        Ok(())
    })
}

fn new_potential(p: kquant::Result<Potential>, slot: &mut *mut KqPotential) -> Result<(), KqStatus> {
    *slot = ptr::null_mut();
    let p = lift(p)?;
    *slot = Box::into_raw(Box::new(KqPotential { inner: p }));
    Ok(())
}

/// Parses a potential from JSON, e.g. `{"family":"legendre","l":2,"eps":0.05}`.
///
/// # Safety
/// `json` must be NUL-terminated and `out_potential` valid.
#[no_mangle]
pub unsafe extern "C" fn kq_potential_from_json(json: *const c_char, out_potential: *mut *mut KqPotential) -> KqStatus {
    guard(|| {
        let slot = out(out_potential, "out_potential")?;
        let text = string(json, "json")?;
        let p = serde_json::from_str::<Potential>(text)
            .map_err(|e| Error::Config(e.to_string()))
            .and_then(|p| p.validate().map(|_| p));
        new_potential(p, slot)
    })
}

/// # Safety
/// `out_potential` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kq_potential_constant(value: f64, out_potential: *mut *mut KqPotential) -> KqStatus {
    guard(|| {
        let p = Potential::constant(value);
        new_potential(p.validate().map(|_| p), out(out_potential, "out_potential")?)
    })
}

/// φ = eps · P_l(cos θ) on CP1.
///
/// # Safety
/// `out_potential` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kq_potential_legendre(l: usize, eps: f64, out_potential: *mut *mut KqPotential) -> KqStatus {
    guard(|| new_potential(Potential::legendre(l, eps), out(out_potential, "out_potential")?))
}

/// Pullback of ω_FS by z ↦ λz on CP1.
///
/// # Safety
/// `out_potential` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kq_potential_mobius(lambda: f64, out_potential: *mut *mut KqPotential) -> KqStatus {
    guard(|| new_potential(Potential::mobius(lambda), out(out_potential, "out_potential")?))
}

/// # Safety
/// `potential` must come from a `kq_potential_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn kq_potential_free(potential: *mut KqPotential) {
    if !potential.is_null() {
        drop(Box::from_raw(potential));
    }
}

/// Writes ρ_k(ω_φ) at every node; `len` must equal the node count.
///
/// # Safety
/// Handles must be valid and `values` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn kq_bergman_kernel(
    model: *const KqModel,
    potential: *const KqPotential,
    k: usize,
    values: *mut f64,
    len: usize,
) -> KqStatus {
    guard(|| {
        let m = &deref(model, "model")?.inner;
        let p = &deref(potential, "potential")?.inner;
        if values.is_null() {
            return Err(fail(KqStatus::NullPointer, "values is null"));
        }
        if len != m.node_count() {
            return Err(fail(KqStatus::BufferSize, format!("buffer holds {len} values, model has {} nodes", m.node_count())));
        }
        let rho = lift(bergman_kernel(m, p, k))?;
        std::slice::from_raw_parts_mut(values, len).copy_from_slice(&rho.values);
        Ok(())
    })
}

/// Hilb(h_ref^k e^{-kφ}).
///
/// # Safety
/// Handles and `out_gram` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kq_hilb(
    model: *const KqModel,
    potential: *const KqPotential,
    k: usize,
    out_gram: *mut *mut KqGram,
) -> KqStatus {
    guard(|| {
        let slot = out(out_gram, "out_gram")?;
        *slot = ptr::null_mut();
        let m = &deref(model, "model")?.inner;
        let p = &deref(potential, "potential")?.inner;
        let g = lift(MetricLevelK::from_potential(m, p, k).and_then(|h| hilb(m, &h)))?;
        *slot = Box::into_raw(Box::new(KqGram { inner: g }));
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kq_gram_dim(gram: *const KqGram, out_dim: *mut usize) -> KqStatus {
    guard(|| {
        *out(out_dim, "out_dim")? = deref(gram, "gram")?.inner.dim();
        Ok(())
    })
}

/// log det in the monomial basis.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kq_gram_log_det(gram: *const KqGram, out_value: *mut f64) -> KqStatus {
    guard(|| {
        *out(out_value, "out_value")? = deref(gram, "gram")?.inner.log_det();
        Ok(())
    })
}

/// Copies the matrix row-major into `re` and `im`, each of length dim².
///
/// # Safety
/// `re` and `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn kq_gram_entries(gram: *const KqGram, re: *mut f64, im: *mut f64, len: usize) -> KqStatus {
    guard(|| {
        let g = &deref(gram, "gram")?.inner;
        let n = g.dim();
        if re.is_null() || im.is_null() {
            return Err(fail(KqStatus::NullPointer, "output buffer is null"));
        }
        if len != n * n {
            return Err(fail(KqStatus::BufferSize, format!("buffers hold {len} entries, need {}", n * n)));
        }
        let (re, im) = (std::slice::from_raw_parts_mut(re, len), std::slice::from_raw_parts_mut(im, len));
        let m = g.matrix();
        for i in 0..n {
            for j in 0..n {
                re[i * n + j] = m[(i, j)].re;
                im[i * n + j] = m[(i, j)].im;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `gram` must come from [`kq_hilb`].
#[no_mangle]
pub unsafe extern "C" fn kq_gram_free(gram: *mut KqGram) {
    if !gram.is_null() {
        drop(Box::from_raw(gram));
    }
}

/// Mabuchi K-energy of ω_φ along the linear path (CP1).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kq_k_energy(model: *const KqModel, potential: *const KqPotential, out_value: *mut f64) -> KqStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let m = &deref(model, "model")?.inner;
        let p = &deref(potential, "potential")?.inner;
        *slot = lift(k_energy(m, p, &PathSpec::linear()))?;
        Ok(())
    })
}

/// ℒ_k(ω_φ) - ℒ_k(ω_ref).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kq_l_difference(
    model: *const KqModel,
    potential: *const KqPotential,
    k: usize,
    out_value: *mut f64,
) -> KqStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let m = &deref(model, "model")?.inner;
        let p = &deref(potential, "potential")?.inner;
        *slot = lift(l_difference(m, p, k))?;
        Ok(())
    })
}

/// Fits values ≈ c · k^p. If every value is below the noise floor, p is
/// -inf, c is 0 and r2 is 1.
///
/// # Safety
/// `ks` and `values` must hold `n` entries; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn kq_fit_decay(
    ks: *const usize,
    values: *const f64,
    n: usize,
    out_c: *mut f64,
    out_p: *mut f64,
    out_r2: *mut f64,
) -> KqStatus {
    guard(|| {
        let (c, p, r2) = (out(out_c, "out_c")?, out(out_p, "out_p")?, out(out_r2, "out_r2")?);
        if ks.is_null() || values.is_null() {
            return Err(fail(KqStatus::NullPointer, "input buffer is null"));
        }
        let ks = std::slice::from_raw_parts(ks, n);
        let vs = std::slice::from_raw_parts(values, n);
        let pts: Vec<(usize, f64)> = ks.iter().copied().zip(vs.iter().copied()).collect();
        match lift(fit_decay(&pts))? {
            FitOutcome::Fit(f) => (*c, *p, *r2) = (f.c, f.p, f.r2),
            FitOutcome::BelowNoiseFloor => (*c, *p, *r2) = (0.0, f64::NEG_INFINITY, 1.0),
        }
        Ok(())
    })
}

/// Runs an experiment config given as JSON text; `out_passed` is set to 1
/// if every check passed, else 0.
///
/// # Safety
/// `json` must be NUL-terminated and `out_passed` valid.
#[no_mangle]
pub unsafe extern "C" fn kq_run_config(json: *const c_char, out_passed: *mut c_int) -> KqStatus {
    guard(|| {
        let slot = out(out_passed, "out_passed")?;
        let config = lift(ExperimentConfig::from_json(string(json, "json")?))?;
        let report = lift(run(&config))?;
        *slot = c_int::from(report.passed());
        Ok(())
    })
}
