//! C ABI over the magicarpet engine and scoring pipeline.
//!
//! Conventions:
//! - every fallible function returns [`MgErrorCode`] and writes results
//!   through out-pointers; on failure `mg_last_error_message` explains why
//! - strings returned to the caller are owned by the caller and must be
//!   released with [`mg_string_free`]
//! - sessions are opaque handles created by `mg_session_new*` and released
//!   with `mg_session_free`
//! - tiles cross the boundary as canonical indices: Parent 0..5 then Child
//!   6..11, row-major

use std::ffi::{c_char, CStr, CString};

mod error;
mod scoring;
mod session;

pub use error::{mg_last_error_message, MgErrorCode};
pub use scoring::*;
pub use session::*;

use error::FfiError;

pub(crate) fn into_c_string(s: String) -> *mut c_char {
    let s = CString::new(s).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|&b| b != 0);
        CString::new(bytes).expect("interior nul removed")
    });
    s.into_raw()
}

/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
pub(crate) unsafe fn read_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, FfiError> {
    if ptr.is_null() {
        return Err(FfiError::null(name));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| FfiError::new(MgErrorCode::InvalidUtf8, format!("`{name}`: {e}")))
}

/// # Safety
/// `ptr` must be null or valid for a write of `T`.
pub(crate) unsafe fn write_out<T>(ptr: *mut T, name: &str, value: T) -> Result<(), FfiError> {
    if ptr.is_null() {
        return Err(FfiError::null(name));
    }
    ptr.write(value);
    Ok(())
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer previously returned by this library and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string. Do not free.
#[no_mangle]
pub extern "C" fn mg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
