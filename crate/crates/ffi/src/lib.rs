//! C ABI over the cybersick model loader, per-frame predictor and streaming
//! scorer.
//!
//! Conventions:
//! - Every fallible function returns a [`CsStatus`]; outputs go through
//!   pointer arguments and are written only on `CS_STATUS_OK`.
//! - On failure, [`cs_last_error`] describes the most recent error on the
//!   calling thread.
//! - Handles are opaque. Each `*_new`/`*_load` has a matching `*_free`
//!   that accepts NULL.
//! - Strings returned as `char *` are owned by the caller and released
//!   with [`cs_string_free`].
//! - Panics never cross the boundary; they surface as `CS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::{Arc, OnceLock};

use cybersick::learners::{load_model, ModelFile};
use cybersick::model::{ATTRIBUTES, ATTRIBUTE_COUNT};
use cybersick::serve::{Scorer, ServeConfig};
use cybersick::Error;

/// Result codes shared by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Reading a file failed.
    Io = 3,
    /// The model text is malformed or built for a different attribute registry.
    ModelFormat = 4,
    /// An argument had the wrong length or an out-of-range value.
    InvalidArgument = 5,
    /// An output buffer is too small.
    BufferTooSmall = 6,
    /// An internal panic was caught.
    Panic = 7,
}

/// A loaded model. Thread-safe for concurrent prediction.
pub struct CsModel {
    inner: Arc<ModelFile>,
}

/// Streaming protocol state for one client. Not thread-safe: use one
/// scorer per thread, or serialize calls.
pub struct CsScorer {
    inner: Scorer,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: CsStatus, message: impl Into<String>) -> CsStatus {
    set_error(message);
    status
}

fn status_of(e: &Error) -> CsStatus {
    match e {
        Error::Io(_) => CsStatus::Io,
        Error::ModelFormat { .. } | Error::ChecksumMismatch { .. } => CsStatus::ModelFormat,
        _ => CsStatus::InvalidArgument,
    }
}

/// Runs `f`, converting panics to `CS_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> CsStatus) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
            fail(CsStatus::Panic, format!("internal panic: {}", msg.unwrap_or_else(|| "unknown".into())))
        }
    }
}

/// # Safety
/// `s` is NULL or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, CsStatus> {
    if s.is_null() {
        return Err(fail(CsStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(s).to_str().map_err(|e| fail(CsStatus::InvalidUtf8, format!("{what} is not UTF-8: {e}")))
}

fn load(text: &str, out: *mut *mut CsModel) -> CsStatus {
    match load_model(text).and_then(|m| m.model.check_registry().map(|()| m)) {
        Ok(m) => {
            let handle = Box::new(CsModel { inner: Arc::new(m) });
            // SAFETY: callers checked `out` for NULL.
            unsafe { *out = Box::into_raw(handle) };
            CsStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// Loads a model file from `path`.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cs_model_load_file(path: *const c_char, out: *mut *mut CsModel) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return fail(CsStatus::NullArgument, "out is NULL");
        }
        let path = match read_str(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match std::fs::read_to_string(path) {
            Ok(text) => load(&text, out),
            Err(e) => fail(CsStatus::Io, format!("{path}: {e}")),
        }
    })
}

/// Loads a model from its text form.
///
/// # Safety
/// `text` is a NUL-terminated string; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cs_model_load_str(text: *const c_char, out: *mut *mut CsModel) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return fail(CsStatus::NullArgument, "out is NULL");
        }
        match read_str(text, "text") {
            Ok(t) => load(t, out),
            Err(s) => s,
        }
    })
}

/// Releases a model. Scorers created from it stay valid.
///
/// # Safety
/// `model` is NULL or a handle from `cs_model_load_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_model_free(model: *mut CsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of classes the model predicts: 2 (binary) or 4 (quarterly).
///
/// # Safety
/// `model` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_model_class_count(model: *const CsModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.model.scheme().class_count())
}

/// Predicts one frame. `values` holds `cs_attribute_count()` encoded
/// attributes in registry order. Writes the class distribution into
/// `distribution` (capacity `distribution_len`, at least the class count)
/// and the most probable class into `label`. Either output may be NULL.
///
/// # Safety
/// `model` is a live handle; `values` points to `values_len` doubles;
/// non-NULL outputs point to writable storage of the stated size.
#[no_mangle]
pub unsafe extern "C" fn cs_model_predict(
    model: *const CsModel,
    values: *const f64,
    values_len: usize,
    distribution: *mut f64,
    distribution_len: usize,
    label: *mut usize,
) -> CsStatus {
    guard(|| {
        let Some(m) = model.as_ref() else { return fail(CsStatus::NullArgument, "model is NULL") };
        if values.is_null() {
            return fail(CsStatus::NullArgument, "values is NULL");
        }
        let k = m.inner.model.scheme().class_count();
        if !distribution.is_null() && distribution_len < k {
            return fail(CsStatus::BufferTooSmall, format!("distribution buffer holds {distribution_len} values, model has {k} classes"));
        }
        let values = std::slice::from_raw_parts(values, values_len);
        let dist = match m.inner.model.distribution_for(values) {
            Ok(d) => d,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        if !distribution.is_null() {
            std::slice::from_raw_parts_mut(distribution, k).copy_from_slice(&dist);
        }
        if !label.is_null() {
            match m.inner.model.label_for(values) {
                Ok(l) => *label = l,
                Err(e) => return fail(status_of(&e), e.to_string()),
            }
        }
        CsStatus::Ok
    })
}

/// Number of attributes in a feature vector.
#[no_mangle]
pub extern "C" fn cs_attribute_count() -> usize {
    ATTRIBUTE_COUNT
}

/// Name of attribute `index` as a static string, or NULL when out of range.
#[no_mangle]
pub extern "C" fn cs_attribute_name(index: usize) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names = NAMES.get_or_init(|| ATTRIBUTES.iter().map(|a| CString::new(a.name).expect("names have no NUL")).collect());
    names.get(index).map_or(ptr::null(), |n| n.as_ptr())
}

/// Creates a scorer over `model`. `threshold` is the discomfort
/// probability above which suggestions are attached; `top_n` is how many
/// ranked attributes feed cause inference. Pass a negative threshold or
/// zero `top_n` for the defaults (0.5 and 5).
///
/// # Safety
/// `model` is a live handle; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cs_scorer_new(model: *const CsModel, threshold: f64, top_n: usize, out: *mut *mut CsScorer) -> CsStatus {
    guard(|| {
        let Some(m) = model.as_ref() else { return fail(CsStatus::NullArgument, "model is NULL") };
        if out.is_null() {
            return fail(CsStatus::NullArgument, "out is NULL");
        }
        let mut config = ServeConfig::default();
        if threshold >= 0.0 {
            if threshold > 1.0 {
                return fail(CsStatus::InvalidArgument, format!("threshold {threshold} outside [0, 1]"));
            }
            config.threshold = threshold;
        } else if threshold.is_nan() {
            return fail(CsStatus::InvalidArgument, "threshold is NaN");
        }
        if top_n > 0 {
            config.top_n = top_n;
        }
        match Scorer::new(Arc::clone(&m.inner), Arc::new(config)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(CsScorer { inner: s }));
                CsStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Handles one protocol message (a JSON object, no trailing newline) and
/// writes the JSON reply into `reply`. Protocol-level problems such as
/// malformed JSON still return `CS_STATUS_OK` with an error reply, matching the
/// TCP server.
///
/// # Safety
/// `scorer` is a live handle; `line` is a NUL-terminated string; `reply`
/// points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cs_scorer_handle_line(scorer: *mut CsScorer, line: *const c_char, reply: *mut *mut c_char) -> CsStatus {
    guard(|| {
        let Some(s) = scorer.as_mut() else { return fail(CsStatus::NullArgument, "scorer is NULL") };
        if reply.is_null() {
            return fail(CsStatus::NullArgument, "reply is NULL");
        }
        let line = match read_str(line, "line") {
            Ok(l) => l,
            Err(st) => return st,
        };
        let text = s.inner.handle_line(line.trim_end_matches(['\r', '\n']));
        match CString::new(text) {
            Ok(c) => {
                *reply = c.into_raw();
                CsStatus::Ok
            }
            Err(e) => fail(CsStatus::Panic, format!("reply contained NUL: {e}")),
        }
    })
}

/// Number of sessions the scorer has open.
///
/// # Safety
/// `scorer` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scorer_open_sessions(scorer: *const CsScorer) -> usize {
    scorer.as_ref().map_or(0, |s| s.inner.open_sessions())
}

/// Releases a scorer.
///
/// # Safety
/// `scorer` is NULL or a handle from `cs_scorer_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_scorer_free(scorer: *mut CsScorer) {
    if !scorer.is_null() {
        drop(Box::from_raw(scorer));
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` is NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failure on this thread, or NULL if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
