use std::cell::RefCell;
use std::panic::{catch_unwind, AssertUnwindSafe};

use magicarpet::Error;

/// Status returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgErrorCode {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidTile = 3,
    InvalidConfig = 4,
    TimeRegression = 5,
    SessionEnded = 6,
    Malformed = 7,
    UndefinedDenominator = 8,
    WrongMode = 9,
    Corrupt = 10,
    Io = 11,
    BufferTooSmall = 12,
    Panic = 99,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

pub(crate) struct FfiError {
    pub code: MgErrorCode,
    pub msg: String,
}

impl FfiError {
    pub fn new(code: MgErrorCode, msg: impl Into<String>) -> Self {
        FfiError {
            code,
            msg: msg.into(),
        }
    }

    pub fn null(what: &str) -> Self {
        FfiError::new(MgErrorCode::NullPointer, format!("`{what}` is null"))
    }
}

impl From<Error> for FfiError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidTile(_) => MgErrorCode::InvalidTile,
            Error::InvalidConfig(_) => MgErrorCode::InvalidConfig,
            Error::TimeRegression { .. } => MgErrorCode::TimeRegression,
            Error::SessionEnded => MgErrorCode::SessionEnded,
            Error::UndefinedDenominator(_) => MgErrorCode::UndefinedDenominator,
            Error::WrongMode(_) => MgErrorCode::WrongMode,
            Error::MissingMeta | Error::Corrupt { .. } => MgErrorCode::Corrupt,
            Error::Io(_) => MgErrorCode::Io,
            Error::Malformed(_) | Error::Empty(_) | Error::Script { .. } | Error::Json(_) => {
                MgErrorCode::Malformed
            }
        };
        FfiError::new(code, e.to_string())
    }
}

impl From<serde_json::Error> for FfiError {
    fn from(e: serde_json::Error) -> Self {
        FfiError::new(MgErrorCode::Malformed, e.to_string())
    }
}

/// Run `f`, record any failure for `mg_last_error_message`, and never let
/// a panic cross the boundary. A handle touched by a panicking call should
/// only be freed afterwards.
pub(crate) fn guard<F>(f: F) -> MgErrorCode
where
    F: FnOnce() -> Result<(), FfiError>,
{
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(FfiError::new(MgErrorCode::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            set_last_error(None);
            MgErrorCode::Ok
        }
        Err(e) => {
            set_last_error(Some(e.msg));
            e.code
        }
    }
}

fn set_last_error(msg: Option<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

/// Message for the most recent failure on this thread, or null. Free with
/// `mg_string_free`.
#[no_mangle]
pub extern "C" fn mg_last_error_message() -> *mut std::os::raw::c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_deref() {
        Some(msg) => crate::into_c_string(msg.to_owned()),
        None => std::ptr::null_mut(),
    })
}
