//! Software model of a 12-tile pressure/LED play mat for parent-child
//! imitation and collaboration games.
//!
//! - [`grid`]: tile geometry, visuals, sensor events and frames
//! - [`debounce`]: contact-level to press/release conversion
//! - [`engine`]: the deterministic game state machine
//! - [`coding`]: behavior-item scoring, bands and the automatic coder
//! - [`protocol`], [`session_log`], [`replay`], [`service`]: the line
//!   protocol, event-sourced logs, bit-exact replay and the TCP service
//! - [`script`]: headless scripted sessions

pub mod coding;
pub mod debounce;
pub mod engine;
pub mod error;
pub mod grid;
pub mod protocol;
pub mod replay;
pub mod script;
pub mod service;
pub mod session_log;

pub use coding::{
    auto_code, classify, cohort_report, hoc_total, item_score, movement_type_score, Band,
    BehaviorItem, CodingScheme, CohortAggregate, HocReport, ItemCode, MovementId,
    MovementTypeScore, Polarity,
};
pub use engine::{GameEvent, GameEventKind, Mode, Phase, Session, SessionConfig, SessionSummary, Step};
pub use error::{Error, Result};
pub use grid::{canonical_index, mirror, Edge, Frame, SensorEvent, Side, TileId, TileVisual};
pub use protocol::WireMessage;
pub use replay::{replay, score_log, Divergence, ReplayOutcome};
pub use script::{run_script, Script, ScriptAction};
pub use service::{serve, RunningService, ServiceConfig};
