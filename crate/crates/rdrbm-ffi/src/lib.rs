//! C ABI over the rdrbm toolkit: load trained RBMs, parse target energy
//! models, score configurations, run the block Gibbs sampler, and compute
//! the residual-variance score.
//!
//! Conventions shared by every function:
//! - Handles (`RdrbmTarget`, `RdrbmRbm`, `RdrbmSampler`) are opaque and
//!   must be released with the matching `_free` function exactly once.
//! - Configurations are byte arrays of 0/1 values, one byte per unit.
//! - Fallible functions return `RdrbmStatus`; on failure the thread-local
//!   message retrieved by `rdrbm_last_error_message` describes the cause.
//! - Output pointers are written only on `RDRBM_STATUS_OK`.
//! - Passing a pointer that violates a documented requirement (dangling,
//!   wrong length, aliased while mutated) is undefined behavior.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rdrbm::rbm::{BitConfig, RbmParams};
use rdrbm::rng::{stream, Stream};
use rdrbm::target::TargetModel;
use rdrbm::Error;

/// Result of a fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RdrbmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An argument violated its documented domain.
    InvalidArgument = 3,
    /// Array lengths or model widths disagree.
    DimensionMismatch = 4,
    /// The underlying file operation failed.
    IoError = 5,
    /// A text or binary payload failed to parse.
    ParseError = 6,
    /// An unexpected internal failure; the library state is still valid.
    InternalError = 7,
}

/// A discrete target energy model.
pub struct RdrbmTarget(TargetModel);

/// Trained RBM parameters.
pub struct RdrbmRbm(RbmParams);

/// A persistent block Gibbs chain over a fixed RBM.
pub struct RdrbmSampler {
    params: RbmParams,
    state: BitConfig,
    rng: Stream,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let text = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> RdrbmStatus {
    match err {
        Error::DimensionMismatch(_) => RdrbmStatus::DimensionMismatch,
        Error::Parse { .. } | Error::Format(_) => RdrbmStatus::ParseError,
        Error::Io(_) => RdrbmStatus::IoError,
        _ => RdrbmStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> RdrbmStatus {
    let status = status_of(&err);
    set_error(err);
    status
}

/// Runs a body that may touch caller pointers, converting panics into
/// `InternalError` instead of unwinding across the C boundary.
fn guarded(body: impl FnOnce() -> RdrbmStatus) -> RdrbmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            RdrbmStatus::InternalError
        }
    }
}

/// # Safety
/// `ptr` must be null or a nul-terminated C string valid for reads.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, RdrbmStatus> {
    if ptr.is_null() {
        set_error(format!("{} must not be null", what));
        return Err(RdrbmStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{} is not valid UTF-8", what));
        RdrbmStatus::InvalidUtf8
    })
}

/// # Safety
/// `bits` must be null or valid for `len` bytes of reads.
unsafe fn required_config(
    bits: *const u8,
    len: usize,
    expected: usize,
) -> Result<BitConfig, RdrbmStatus> {
    if bits.is_null() {
        set_error("configuration pointer must not be null");
        return Err(RdrbmStatus::NullPointer);
    }
    if len != expected {
        set_error(format!("configuration has {} units, expected {}", len, expected));
        return Err(RdrbmStatus::DimensionMismatch);
    }
    let slice = std::slice::from_raw_parts(bits, len);
    BitConfig::new(slice.to_vec()).map_err(fail)
}

fn require_out<T>(out: *mut T, what: &str) -> Result<(), RdrbmStatus> {
    if out.is_null() {
        set_error(format!("{} must not be null", what));
        return Err(RdrbmStatus::NullPointer);
    }
    Ok(())
}

/// Returns the library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn rdrbm_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Copies the message for the most recent failure on this thread into
/// `buf` (truncated to `cap - 1` bytes, always nul-terminated when
/// `cap > 0`) and returns the full message length excluding the nul.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parses a target model from its canonical text form.
///
/// # Safety
/// `text` must be a readable nul-terminated string and `out` a valid
/// destination pointer.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_target_parse(
    text: *const c_char,
    out: *mut *mut RdrbmTarget,
) -> RdrbmStatus {
    guarded(|| {
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        let text = match required_str(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match TargetModel::parse_text(text) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(RdrbmTarget(model)));
                RdrbmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Loads a target model from a canonical text file.
///
/// # Safety
/// `path` must be a readable nul-terminated string and `out` a valid
/// destination pointer.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_target_load(
    path: *const c_char,
    out: *mut *mut RdrbmTarget,
) -> RdrbmStatus {
    guarded(|| {
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        let path = match required_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match TargetModel::load(Path::new(path)) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(RdrbmTarget(model)));
                RdrbmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a target model handle. Null is ignored.
///
/// # Safety
/// `target` must be null or a pointer returned by a target constructor
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_target_free(target: *mut RdrbmTarget) {
    if !target.is_null() {
        drop(Box::from_raw(target));
    }
}

/// Number of binary units of the target, or 0 for a null handle.
///
/// # Safety
/// `target` must be null or a live target handle.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_target_nx(target: *const RdrbmTarget) -> usize {
    if target.is_null() {
        return 0;
    }
    (*target).0.nx()
}

/// Effective (inverse-temperature scaled) energy of one configuration.
///
/// # Safety
/// `target` must be a live handle, `bits` readable for `len` bytes, and
/// `out` a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_target_energy(
    target: *const RdrbmTarget,
    bits: *const u8,
    len: usize,
    out: *mut f64,
) -> RdrbmStatus {
    guarded(|| {
        if target.is_null() {
            set_error("target must not be null");
            return RdrbmStatus::NullPointer;
        }
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        let model = &(*target).0;
        let config = match required_config(bits, len, model.nx()) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match model.effective_energy(&config) {
            Ok(e) => {
                *out = e;
                RdrbmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Loads trained RBM parameters from their binary file format.
///
/// # Safety
/// `path` must be a readable nul-terminated string and `out` a valid
/// destination pointer.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_rbm_load(
    path: *const c_char,
    out: *mut *mut RdrbmRbm,
) -> RdrbmStatus {
    guarded(|| {
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        let path = match required_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match RbmParams::load(Path::new(path)) {
            Ok(params) => {
                *out = Box::into_raw(Box::new(RdrbmRbm(params)));
                RdrbmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases an RBM handle. Null is ignored.
///
/// # Safety
/// `rbm` must be null or a pointer returned by `rdrbm_rbm_load` that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_rbm_free(rbm: *mut RdrbmRbm) {
    if !rbm.is_null() {
        drop(Box::from_raw(rbm));
    }
}

/// Number of visible units, or 0 for a null handle.
///
/// # Safety
/// `rbm` must be null or a live RBM handle.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_rbm_nx(rbm: *const RdrbmRbm) -> usize {
    if rbm.is_null() {
        return 0;
    }
    (*rbm).0.nx()
}

/// Number of hidden units, or 0 for a null handle.
///
/// # Safety
/// `rbm` must be null or a live RBM handle.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_rbm_nh(rbm: *const RdrbmRbm) -> usize {
    if rbm.is_null() {
        return 0;
    }
    (*rbm).0.nh()
}

/// Free energy of one visible configuration (hidden units summed out).
///
/// # Safety
/// `rbm` must be a live handle, `bits` readable for `len` bytes, and
/// `out` a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_rbm_free_energy(
    rbm: *const RdrbmRbm,
    bits: *const u8,
    len: usize,
    out: *mut f64,
) -> RdrbmStatus {
    guarded(|| {
        if rbm.is_null() {
            set_error("rbm must not be null");
            return RdrbmStatus::NullPointer;
        }
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        let params = &(*rbm).0;
        let config = match required_config(bits, len, params.nx()) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match params.free_energy(&config) {
            Ok(f) => {
                *out = f;
                RdrbmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Residual-variance score of the RBM against the target over a sample
/// set: twice the population variance of free energy minus effective
/// target energy. `samples` is row-major, `n_samples` rows of `nx` bytes.
///
/// # Safety
/// `rbm` and `target` must be live handles, `samples` readable for
/// `n_samples * nx` bytes, and `out` a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_r_theta(
    rbm: *const RdrbmRbm,
    target: *const RdrbmTarget,
    samples: *const u8,
    n_samples: usize,
    nx: usize,
    out: *mut f64,
) -> RdrbmStatus {
    guarded(|| {
        if rbm.is_null() || target.is_null() {
            set_error("rbm and target must not be null");
            return RdrbmStatus::NullPointer;
        }
        if samples.is_null() {
            set_error("samples must not be null");
            return RdrbmStatus::NullPointer;
        }
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        let params = &(*rbm).0;
        let model = &(*target).0;
        if nx != model.nx() {
            set_error(format!("sample width {} does not match target width {}", nx, model.nx()));
            return RdrbmStatus::DimensionMismatch;
        }
        if n_samples == 0 {
            set_error("n_samples must be positive");
            return RdrbmStatus::InvalidArgument;
        }
        let raw = std::slice::from_raw_parts(samples, n_samples * nx);
        let mut configs = Vec::with_capacity(n_samples);
        for row in raw.chunks_exact(nx) {
            match BitConfig::new(row.to_vec()) {
                Ok(c) => configs.push(c),
                Err(e) => return fail(e),
            }
        }
        match rdrbm::eval::r_theta(params, model, &configs) {
            Ok(r) => {
                *out = r;
                RdrbmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Creates a persistent block Gibbs sampler seeded deterministically from
/// `seed`, starting at the given visible configuration.
///
/// # Safety
/// `rbm` must be a live handle, `init_bits` readable for `len` bytes, and
/// `out` a valid destination pointer. The sampler borrows nothing: the
/// RBM handle may be freed independently afterwards.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_sampler_new(
    rbm: *const RdrbmRbm,
    seed: u64,
    init_bits: *const u8,
    len: usize,
    out: *mut *mut RdrbmSampler,
) -> RdrbmStatus {
    guarded(|| {
        if rbm.is_null() {
            set_error("rbm must not be null");
            return RdrbmStatus::NullPointer;
        }
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        let params = &(*rbm).0;
        let state = match required_config(init_bits, len, params.nx()) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let sampler = RdrbmSampler {
            params: params.clone(),
            state,
            rng: stream(seed, "ffi/sampler"),
        };
        *out = Box::into_raw(Box::new(sampler));
        RdrbmStatus::Ok
    })
}

/// Releases a sampler handle. Null is ignored.
///
/// # Safety
/// `sampler` must be null or a pointer returned by `rdrbm_sampler_new`
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_sampler_free(sampler: *mut RdrbmSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Advances the chain by `steps` block Gibbs steps and copies the current
/// visible configuration into `out_bits`. Zero steps reads the state
/// without advancing.
///
/// # Safety
/// `sampler` must be a live handle and `out_bits` writable for `len`
/// bytes. The sampler must not be used concurrently from other threads.
#[no_mangle]
pub unsafe extern "C" fn rdrbm_sampler_step(
    sampler: *mut RdrbmSampler,
    steps: usize,
    out_bits: *mut u8,
    len: usize,
) -> RdrbmStatus {
    guarded(|| {
        if sampler.is_null() {
            set_error("sampler must not be null");
            return RdrbmStatus::NullPointer;
        }
        if out_bits.is_null() {
            set_error("out_bits must not be null");
            return RdrbmStatus::NullPointer;
        }
        let s = &mut *sampler;
        if len != s.params.nx() {
            set_error(format!("output length {} for a chain of {} units", len, s.params.nx()));
            return RdrbmStatus::DimensionMismatch;
        }
        if let Err(e) = s.params.block_gibbs_steps(&mut s.state, steps, &mut s.rng) {
            return fail(e);
        }
        std::ptr::copy_nonoverlapping(s.state.bits().as_ptr(), out_bits, len);
        RdrbmStatus::Ok
    })
}
