//! C ABI over `mst-core`.
//!
//! Every fallible function returns an [`MstStatus`]; on failure a message is
//! kept per thread and can be read with [`mst_last_error_message`]. Strings
//! returned through `char **` are owned by the caller and released with
//! [`mst_string_free`]. Handles are opaque and released with their `_free`
//! function; passing NULL to a free function is a no-op.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use mst_core::measure_text::{annotate, rule_convert_text, ScaleIndexedText};
use mst_core::model::{checkpoint, predict_text, Encoder, Vocab};
use mst_core::numerics::{convert_notation, Notation};
use mst_core::units::{compare_measurements, quantities_equal, Measurement};

pub const MST_NOTATION_DECIMAL: i32 = 0;
pub const MST_NOTATION_SCIENTIFIC: i32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MstStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ParseError = 4,
    Incompatible = 5,
    IoError = 6,
    ModelError = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// Tokens, numeric flags and scale indices of one annotated text.
pub struct MstAnnotation {
    inner: ScaleIndexedText,
    tokens: Vec<CString>,
}

/// A loaded checkpoint with its vocabulary.
pub struct MstModel {
    model: Encoder<f32>,
    vocab: Vocab,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

struct Fail(MstStatus, String);

type FfiResult<T> = Result<T, Fail>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> MstStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MstStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MstStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Fail(MstStatus::NullPointer, format!("{name} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(MstStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn out_arg<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    // SAFETY: callers pass either NULL or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| Fail(MstStatus::NullPointer, format!("{name} is NULL")))
}

fn write_string(out: *mut *mut c_char, s: String) -> FfiResult<()> {
    let slot = out_arg(out, "out")?;
    let c = CString::new(s).map_err(|_| Fail(MstStatus::InvalidArgument, "result holds a NUL byte".into()))?;
    *slot = c.into_raw();
    Ok(())
}

fn parse_measurement(text: &str) -> FfiResult<Measurement> {
    Measurement::parse(text).map_err(|e| Fail(MstStatus::ParseError, e.to_string()))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn mst_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn mst_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Rewrites every measurement in `text` to its family head unit.
#[no_mangle]
pub unsafe extern "C" fn mst_rule_convert_text(text: *const c_char, out: *mut *mut c_char) -> MstStatus {
    guard(|| {
        let t = str_arg(text, "text")?;
        write_string(out, rule_convert_text(t))
    })
}

/// Renders `number` in `notation` (`MST_NOTATION_DECIMAL` or
/// `MST_NOTATION_SCIENTIFIC`).
#[no_mangle]
pub unsafe extern "C" fn mst_convert_notation(number: *const c_char, notation: i32, out: *mut *mut c_char) -> MstStatus {
    guard(|| {
        let n = str_arg(number, "number")?;
        let target = match notation {
            MST_NOTATION_DECIMAL => Notation::Decimal,
            MST_NOTATION_SCIENTIFIC => Notation::Scientific,
            other => return Err(Fail(MstStatus::InvalidArgument, format!("unknown notation {other}"))),
        };
        let s = convert_notation(n, target).map_err(|e| Fail(MstStatus::ParseError, e.to_string()))?;
        write_string(out, s)
    })
}

/// Writes -1, 0 or 1 as `a` is less than, equal to or greater than `b`.
#[no_mangle]
pub unsafe extern "C" fn mst_compare_measurements(a: *const c_char, b: *const c_char, out: *mut i32) -> MstStatus {
    guard(|| {
        let (a, b) = (parse_measurement(str_arg(a, "a")?)?, parse_measurement(str_arg(b, "b")?)?);
        let ord = compare_measurements(&a, &b).map_err(|e| Fail(MstStatus::Incompatible, e.to_string()))?;
        *out_arg(out, "out")? = ord as i32;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mst_quantities_equal(a: *const c_char, b: *const c_char, out: *mut bool) -> MstStatus {
    guard(|| {
        let (a, b) = (parse_measurement(str_arg(a, "a")?)?, parse_measurement(str_arg(b, "b")?)?);
        *out_arg(out, "out")? = quantities_equal(&a, &b).map_err(|e| Fail(MstStatus::Incompatible, e.to_string()))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mst_annotate(text: *const c_char, cap: usize, out: *mut *mut MstAnnotation) -> MstStatus {
    guard(|| {
        let t = str_arg(text, "text")?;
        let slot = out_arg(out, "out")?;
        let inner = annotate(t, cap);
        let tokens = inner
            .tokens
            .iter()
            .map(|s| CString::new(s.as_str()).map_err(|_| Fail(MstStatus::InvalidArgument, "token holds a NUL byte".into())))
            .collect::<FfiResult<_>>()?;
        *slot = Box::into_raw(Box::new(MstAnnotation { inner, tokens }));
        Ok(())
    })
}

/// Number of tokens; 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn mst_annotation_len(a: *const MstAnnotation) -> usize {
    a.as_ref().map_or(0, |a| a.tokens.len())
}

/// Token `i`. `token` stays valid while the handle lives.
#[no_mangle]
pub unsafe extern "C" fn mst_annotation_token(
    a: *const MstAnnotation,
    i: usize,
    token: *mut *const c_char,
    numeric: *mut bool,
    scale_index: *mut usize,
) -> MstStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(|| Fail(MstStatus::NullPointer, "annotation is NULL".into()))?;
        if i >= a.tokens.len() {
            return Err(Fail(MstStatus::OutOfRange, format!("token {i} of {}", a.tokens.len())));
        }
        *out_arg(token, "token")? = a.tokens[i].as_ptr();
        *out_arg(numeric, "numeric")? = a.inner.numeric_flags[i];
        *out_arg(scale_index, "scale_index")? = a.inner.scale_indices[i];
        Ok(())
    })
}

/// Tab-separated `token flag index` lines.
#[no_mangle]
pub unsafe extern "C" fn mst_annotation_dump(a: *const MstAnnotation, out: *mut *mut c_char) -> MstStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(|| Fail(MstStatus::NullPointer, "annotation is NULL".into()))?;
        write_string(out, a.inner.to_dump())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mst_annotation_free(a: *mut MstAnnotation) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

#[no_mangle]
pub unsafe extern "C" fn mst_model_load(path: *const c_char, out: *mut *mut MstModel) -> MstStatus {
    guard(|| {
        let p = str_arg(path, "path")?;
        let slot = out_arg(out, "out")?;
        let (model, vocab) = checkpoint::load(Path::new(p)).map_err(|e| {
            let status = if matches!(e, mst_core::model::ModelError::Io { .. }) { MstStatus::IoError } else { MstStatus::ModelError };
            Fail(status, e.to_string())
        })?;
        *slot = Box::into_raw(Box::new(MstModel { model, vocab }));
        Ok(())
    })
}

/// Index of the best of `n` candidate words at the single `[MASK]` in `text`.
#[no_mangle]
pub unsafe extern "C" fn mst_model_predict(
    m: *const MstModel,
    text: *const c_char,
    candidates: *const *const c_char,
    n: usize,
    out: *mut usize,
) -> MstStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| Fail(MstStatus::NullPointer, "model is NULL".into()))?;
        let t = str_arg(text, "text")?;
        if candidates.is_null() {
            return Err(Fail(MstStatus::NullPointer, "candidates is NULL".into()));
        }
        let words = (0..n).map(|i| str_arg(*candidates.add(i), "candidate")).collect::<FfiResult<Vec<_>>>()?;
        let k = predict_text(&m.model, &m.vocab, t, &words).map_err(|e| Fail(MstStatus::ModelError, e.to_string()))?;
        *out_arg(out, "out")? = k;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mst_model_free(m: *mut MstModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}
