use std::ffi::c_char;

use magicarpet::protocol::StartRequest;
use magicarpet::{GameEvent, SensorEvent, Session, SessionConfig, Step, TileId, WireMessage};

use crate::error::{guard, FfiError, MgErrorCode};
use crate::{into_c_string, read_str, write_out};

pub const MG_TILE_COUNT: usize = 12;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgMode {
    Imitation = 0,
    Collaboration = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MgTileVisual {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub lit: bool,
    pub flashing: bool,
}

/// Opaque session handle.
pub struct MgSession {
    inner: Session,
    pending: Vec<GameEvent>,
}

impl MgSession {
    fn absorb(&mut self, step: Step) {
        self.pending.extend(step.events);
    }
}

fn tile(index: u32) -> Result<TileId, FfiError> {
    TileId::from_index(index as usize)
        .ok_or_else(|| FfiError::new(MgErrorCode::InvalidTile, format!("tile index {index} out of range")))
}

fn create(config: SessionConfig, out: *mut *mut MgSession) -> Result<(), FfiError> {
    if out.is_null() {
        return Err(FfiError::null("out"));
    }
    let (inner, _, events) = Session::new(config)?;
    let handle = Box::new(MgSession {
        inner,
        pending: events,
    });
    unsafe { out.write(Box::into_raw(handle)) };
    Ok(())
}

unsafe fn handle<'a>(s: *mut MgSession) -> Result<&'a mut MgSession, FfiError> {
    s.as_mut().ok_or_else(|| FfiError::null("session"))
}

/// Create a session with default timers and light count.
///
/// # Safety
/// `out` must be valid for writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_session_new(mode: MgMode, seed: u64, out: *mut *mut MgSession) -> MgErrorCode {
    guard(|| {
        let config = match mode {
            MgMode::Imitation => SessionConfig::imitation(seed),
            MgMode::Collaboration => SessionConfig::collaboration(seed),
        };
        create(config, out)
    })
}

/// Create a session from a JSON object with `start` fields
/// (`mode`, `seed`, `collab_lights_n`, `idle_flash_ms`, ...). A leading
/// `"t":"start"` tag is accepted.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be valid for
/// writing a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_session_new_json(config_json: *const c_char, out: *mut *mut MgSession) -> MgErrorCode {
    guard(|| {
        let text = read_str(config_json, "config_json")?;
        let req = match WireMessage::parse(text) {
            Ok(WireMessage::Start(req)) => req,
            _ => serde_json::from_str::<StartRequest>(text)?,
        };
        create(req.resolve(&SessionConfig::default()), out)
    })
}

/// # Safety
/// `session` must be null or a live handle from `mg_session_new*`.
#[no_mangle]
pub unsafe extern "C" fn mg_session_press(session: *mut MgSession, tile_index: u32, t_ms: u64) -> MgErrorCode {
    guard(|| {
        let s = handle(session)?;
        let step = s.inner.handle_event(SensorEvent::press(tile(tile_index)?, t_ms))?;
        s.absorb(step);
        Ok(())
    })
}

/// # Safety
/// `session` must be null or a live handle from `mg_session_new*`.
#[no_mangle]
pub unsafe extern "C" fn mg_session_release(session: *mut MgSession, tile_index: u32, t_ms: u64) -> MgErrorCode {
    guard(|| {
        let s = handle(session)?;
        let step = s.inner.handle_event(SensorEvent::release(tile(tile_index)?, t_ms))?;
        s.absorb(step);
        Ok(())
    })
}

/// Advance the session clock, driving idle flash prompts.
///
/// # Safety
/// `session` must be null or a live handle from `mg_session_new*`.
#[no_mangle]
pub unsafe extern "C" fn mg_session_tick(session: *mut MgSession, now_ms: u64) -> MgErrorCode {
    guard(|| {
        let s = handle(session)?;
        let step = s.inner.tick(now_ms)?;
        s.absorb(step);
        Ok(())
    })
}

/// Fill `out` (at least 12 entries) with the tile visuals at the session's
/// current clock, in canonical order.
///
/// # Safety
/// `session` must be a live handle; `out` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mg_session_frame(session: *mut MgSession, out: *mut MgTileVisual, len: usize) -> MgErrorCode {
    guard(|| {
        let s = handle(session)?;
        if out.is_null() {
            return Err(FfiError::null("out"));
        }
        if len < MG_TILE_COUNT {
            return Err(FfiError::new(
                MgErrorCode::BufferTooSmall,
                format!("need {MG_TILE_COUNT} tiles, got room for {len}"),
            ));
        }
        let frame = s.inner.frame(s.inner.clock_ms());
        let out = std::slice::from_raw_parts_mut(out, MG_TILE_COUNT);
        for (slot, v) in out.iter_mut().zip(frame.tiles.iter()) {
            *slot = MgTileVisual {
                r: v.rgb[0],
                g: v.rgb[1],
                b: v.rgb[2],
                lit: v.lit,
                flashing: v.flashing,
            };
        }
        Ok(())
    })
}

/// Drain events produced since the previous call as a JSON array of wire
/// `event` objects.
///
/// # Safety
/// `session` must be a live handle; `out` must be valid for writing a
/// string pointer, which the caller frees with `mg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn mg_session_take_events_json(session: *mut MgSession, out: *mut *mut c_char) -> MgErrorCode {
    guard(|| {
        let s = handle(session)?;
        if out.is_null() {
            return Err(FfiError::null("out"));
        }
        let msgs: Vec<WireMessage> = s.pending.drain(..).map(|e| WireMessage::event(&e)).collect();
        out.write(into_c_string(serde_json::to_string(&msgs)?));
        Ok(())
    })
}

/// # Safety
/// `session` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mg_session_completion_degree(session: *mut MgSession, out: *mut u32) -> MgErrorCode {
    guard(|| {
        let s = handle(session)?;
        write_out(out, "out", s.inner.completion_degree())
    })
}

/// Current round number (1-based; 0 before the first round).
///
/// # Safety
/// `session` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mg_session_round(session: *mut MgSession, out: *mut u32) -> MgErrorCode {
    guard(|| {
        let s = handle(session)?;
        write_out(out, "out", s.inner.round())
    })
}

/// End the session and return its summary as a JSON object. Further input
/// fails with `SessionEnded`.
///
/// # Safety
/// `session` must be a live handle; `out` must be valid for writing a
/// string pointer, which the caller frees with `mg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn mg_session_end(session: *mut MgSession, now_ms: u64, out: *mut *mut c_char) -> MgErrorCode {
    guard(|| {
        let s = handle(session)?;
        if out.is_null() {
            return Err(FfiError::null("out"));
        }
        let summary = s.inner.end(now_ms);
        out.write(into_c_string(serde_json::to_string(&summary)?));
        Ok(())
    })
}

/// Release a session handle. Null is ignored.
///
/// # Safety
/// `session` must be null or a live handle not used again afterwards.
#[no_mangle]
pub unsafe extern "C" fn mg_session_free(session: *mut MgSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Canonical index of the mirrored tile (same position, other side).
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mg_tile_mirror(tile_index: u32, out: *mut u32) -> MgErrorCode {
    guard(|| write_out(out, "out", tile(tile_index)?.mirror().canonical_index() as u32))
}

/// Parse `"P-r-c"` / `"C-r-c"` into a canonical index.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mg_tile_parse(text: *const c_char, out: *mut u32) -> MgErrorCode {
    guard(|| {
        let t: TileId = read_str(text, "text")?.parse()?;
        write_out(out, "out", t.canonical_index() as u32)
    })
}

