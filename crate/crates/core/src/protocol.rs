//! Line protocol shared by the socket service, session logs and scripts.
//!
//! Every message is one JSON object on one line, tagged by `t`. Unknown
//! fields are ignored; unknown `t` values are rejected.

use serde::{Deserialize, Serialize};

use crate::coding::MovementId;
use crate::engine::{GameEvent, GameEventKind, Mode, SessionConfig, SessionSummary};
use crate::error::{Error, Result};
use crate::grid::{Frame, Palette, Rgb, TileId, TileVisual, TILE_COUNT};

/// Session parameters carried by a `start` message. Absent fields fall back
/// to the receiver's defaults. A fully populated `start` is the leading
/// meta record of every session log.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StartRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collab_lights_n: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idle_flash_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flash_period_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_limit: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub movement_type: Option<MovementId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tile_colors: Option<Palette>,
    /// Provenance of a meta record (`serve`, `script`). Not part of the
    /// session configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl StartRequest {
    pub fn resolve(&self, defaults: &SessionConfig) -> SessionConfig {
        let d = defaults.clone();
        SessionConfig {
            mode: self.mode.unwrap_or(d.mode),
            seed: self.seed.unwrap_or(d.seed),
            collab_lights_n: self.collab_lights_n.unwrap_or(d.collab_lights_n),
            idle_flash_ms: self.idle_flash_ms.unwrap_or(d.idle_flash_ms),
            flash_period_ms: self.flash_period_ms.unwrap_or(d.flash_period_ms),
            round_limit: self.round_limit.or(d.round_limit),
            movement_type: self.movement_type.clone().unwrap_or(d.movement_type),
            tile_colors: self.tile_colors.unwrap_or(d.tile_colors),
        }
    }

    pub fn meta(config: &SessionConfig, source: &str) -> Self {
        StartRequest {
            mode: Some(config.mode),
            seed: Some(config.seed),
            collab_lights_n: Some(config.collab_lights_n),
            idle_flash_ms: Some(config.idle_flash_ms),
            flash_period_ms: Some(config.flash_period_ms),
            round_limit: config.round_limit,
            movement_type: Some(config.movement_type.clone()),
            tile_colors: Some(config.tile_colors),
            source: Some(source.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileState {
    pub id: TileId,
    pub rgb: Rgb,
    pub lit: bool,
    pub flash: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameMessage {
    pub ms: u64,
    pub tiles: Vec<TileState>,
}

impl From<&Frame> for FrameMessage {
    fn from(frame: &Frame) -> Self {
        FrameMessage {
            ms: frame.t_ms,
            tiles: TileId::all()
                .map(|id| {
                    let v = frame.tile(id);
                    TileState {
                        id,
                        rgb: v.rgb,
                        lit: v.lit,
                        flash: v.flashing,
                    }
                })
                .collect(),
        }
    }
}

impl TryFrom<&FrameMessage> for Frame {
    type Error = Error;

    fn try_from(msg: &FrameMessage) -> Result<Frame> {
        if msg.tiles.len() != TILE_COUNT {
            return Err(Error::Malformed(format!(
                "frame has {} tiles, expected {TILE_COUNT}",
                msg.tiles.len()
            )));
        }
        let mut frame = Frame::dark(msg.ms);
        for (expected, tile) in TileId::all().zip(&msg.tiles) {
            if tile.id != expected {
                return Err(Error::Malformed(format!(
                    "frame tile {} out of canonical order (expected {expected})",
                    tile.id
                )));
            }
            if tile.flash && !tile.lit {
                return Err(Error::Malformed(format!("tile {} flashing while unlit", tile.id)));
            }
            frame.tiles[expected.canonical_index()] = TileVisual {
                rgb: tile.rgb,
                lit: tile.lit,
                flashing: tile.flash,
            };
        }
        Ok(frame)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventMessage {
    pub ms: u64,
    #[serde(flatten)]
    pub event: GameEventKind,
}

impl From<&GameEvent> for EventMessage {
    fn from(ev: &GameEvent) -> Self {
        EventMessage {
            ms: ev.t_ms,
            event: ev.kind.clone(),
        }
    }
}

impl From<&EventMessage> for GameEvent {
    fn from(msg: &EventMessage) -> Self {
        GameEvent {
            t_ms: msg.ms,
            kind: msg.event.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "snake_case")]
pub enum WireMessage {
    Start(StartRequest),
    Press {
        tile: TileId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ms: Option<u64>,
    },
    Release {
        tile: TileId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ms: Option<u64>,
    },
    Tick {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ms: Option<u64>,
    },
    Stop {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ms: Option<u64>,
    },
    Frame(FrameMessage),
    Event(EventMessage),
    Summary(SessionSummary),
    Error {
        msg: String,
    },
}

/// Coarse record classes of a session log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Meta,
    Sensor,
    Tick,
    Stop,
    Frame,
    Game,
    Summary,
    Error,
}

impl WireMessage {
    pub fn parse(line: &str) -> Result<WireMessage> {
        serde_json::from_str(line.trim_end_matches(['\r', '\n']))
            .map_err(|e| Error::Malformed(e.to_string()))
    }

    /// Serialize to a single line without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("wire messages always serialize")
    }

    pub fn frame(frame: &Frame) -> Self {
        WireMessage::Frame(frame.into())
    }

    pub fn event(ev: &GameEvent) -> Self {
        WireMessage::Event(ev.into())
    }

    pub fn error(msg: impl ToString) -> Self {
        WireMessage::Error {
            msg: msg.to_string(),
        }
    }

    pub fn kind(&self) -> RecordKind {
        match self {
            WireMessage::Start(_) => RecordKind::Meta,
            WireMessage::Press { .. } | WireMessage::Release { .. } => RecordKind::Sensor,
            WireMessage::Tick { .. } => RecordKind::Tick,
            WireMessage::Stop { .. } => RecordKind::Stop,
            WireMessage::Frame(_) => RecordKind::Frame,
            WireMessage::Event(_) => RecordKind::Game,
            WireMessage::Summary(_) => RecordKind::Summary,
            WireMessage::Error { .. } => RecordKind::Error,
        }
    }

    /// Messages a client may send to the service.
    pub fn is_inbound(&self) -> bool {
        matches!(
            self.kind(),
            RecordKind::Meta | RecordKind::Sensor | RecordKind::Tick | RecordKind::Stop
        )
    }

    pub fn ms(&self) -> Option<u64> {
        match self {
            WireMessage::Start(_) => Some(0),
            WireMessage::Press { ms, .. }
            | WireMessage::Release { ms, .. }
            | WireMessage::Tick { ms }
            | WireMessage::Stop { ms } => *ms,
            WireMessage::Frame(f) => Some(f.ms),
            WireMessage::Event(e) => Some(e.ms),
            WireMessage::Summary(s) => Some(s.ms),
            WireMessage::Error { .. } => None,
        }
    }

    pub fn with_ms(&self, t: u64) -> WireMessage {
        let mut m = self.clone();
        match &mut m {
            WireMessage::Press { ms, .. }
            | WireMessage::Release { ms, .. }
            | WireMessage::Tick { ms }
            | WireMessage::Stop { ms } => *ms = Some(t),
            _ => {}
        }
        m
    }
}

/// One line of a session log: a wire message plus its position in the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    #[serde(flatten)]
    pub msg: WireMessage,
    pub seq: u64,
}

impl LogRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log records always serialize")
    }

    pub fn parse(line: &str) -> Result<LogRecord> {
        serde_json::from_str(line).map_err(|e| Error::Malformed(e.to_string()))
    }
}
