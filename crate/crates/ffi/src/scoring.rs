use std::ffi::c_char;
use std::path::Path;

use magicarpet::coding::{classify, Band, BehaviorItem, CodingScheme, ItemCode, MovementId};
use magicarpet::replay::score_log;

use crate::error::{guard, FfiError, MgErrorCode};
use crate::{into_c_string, read_str, write_out};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgBand {
    Poorer = 0,
    Normal = 1,
    Better = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgItemCode {
    Completed = 0,
    NotCompleted = 1,
    NotPerformedReverseOrOverRepeated = 2,
    ReverseSidePerformed = 3,
    CorrectButOverRepeated = 4,
}

impl From<MgItemCode> for ItemCode {
    fn from(c: MgItemCode) -> Self {
        match c {
            MgItemCode::Completed => ItemCode::Completed,
            MgItemCode::NotCompleted => ItemCode::NotCompleted,
            MgItemCode::NotPerformedReverseOrOverRepeated => ItemCode::NotPerformedReverseOrOverRepeated,
            MgItemCode::ReverseSidePerformed => ItemCode::ReverseSidePerformed,
            MgItemCode::CorrectButOverRepeated => ItemCode::CorrectButOverRepeated,
        }
    }
}

/// Band for a HOC value. Fails on NaN.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mg_classify(hoc_c: f64, out: *mut MgBand) -> MgErrorCode {
    guard(|| {
        if hoc_c.is_nan() {
            return Err(FfiError::new(MgErrorCode::Malformed, "HOC value is NaN"));
        }
        let band = match classify(hoc_c) {
            Band::Poorer => MgBand::Poorer,
            Band::Normal => MgBand::Normal,
            Band::Better => MgBand::Better,
        };
        write_out(out, "out", band)
    })
}

/// Signed value of one item code under the default scheme.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mg_item_score(code: MgItemCode, out: *mut f64) -> MgErrorCode {
    guard(|| {
        write_out(out, "out", CodingScheme::default().value(code.into()).score)
    })
}

/// `S_cm` for one movement type's item list under the default scheme.
/// `repetition` may be null, meaning no item is a repetition.
///
/// # Safety
/// `codes` must be valid for `len` reads, and `repetition` too when non-null;
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mg_score_items(
    codes: *const MgItemCode,
    repetition: *const bool,
    len: usize,
    out: *mut f64,
) -> MgErrorCode {
    guard(|| {
        if codes.is_null() {
            return Err(FfiError::null("codes"));
        }
        let codes = std::slice::from_raw_parts(codes, len);
        let reps = if repetition.is_null() {
            None
        } else {
            Some(std::slice::from_raw_parts(repetition, len))
        };
        let items: Vec<BehaviorItem> = codes
            .iter()
            .enumerate()
            .map(|(i, &c)| BehaviorItem {
                is_repetition: reps.is_some_and(|r| r[i]),
                ..BehaviorItem::new(MovementId::hand_hit(), c.into())
            })
            .collect();
        let score = CodingScheme::default().movement_type_score(&items)?;
        write_out(out, "out", score.s_cm)
    })
}

/// Score a session log file and return the report as a JSON object.
/// `scheme_json` may be null for the default scheme.
///
/// # Safety
/// `path` and non-null `scheme_json` must be NUL-terminated strings; `out`
/// must be valid for writing a string pointer, which the caller frees with
/// `mg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn mg_score_log(
    path: *const c_char,
    scheme_json: *const c_char,
    out: *mut *mut c_char,
) -> MgErrorCode {
    guard(|| {
        let path = read_str(path, "path")?;
        let scheme = if scheme_json.is_null() {
            CodingScheme::default()
        } else {
            CodingScheme::from_json(read_str(scheme_json, "scheme_json")?)?
        };
        let report = score_log(Path::new(path), &scheme)?;
        if out.is_null() {
            return Err(FfiError::null("out"));
        }
        out.write(into_c_string(serde_json::to_string(&report)?));
        Ok(())
    })
}
