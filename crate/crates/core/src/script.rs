//! Headless scripted sessions.
//!
//! Scripts use the inbound wire grammar, one message per line. A line may
//! give an absolute `ms` or a `delay` relative to the previous line; with
//! neither it happens at the previous line's time. An optional final `stop`
//! line sets the end time.

use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::engine::{SessionConfig, SessionSummary};
use crate::error::{Error, Result};
use crate::grid::{TileId, TILE_COUNT};
use crate::protocol::WireMessage;
use crate::session_log::{create_log, Recorder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptAction {
    Press(TileId),
    Release(TileId),
    Tick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScriptStep {
    pub at_ms: u64,
    pub action: ScriptAction,
}

impl ScriptStep {
    fn message(&self) -> WireMessage {
        let ms = Some(self.at_ms);
        match self.action {
            ScriptAction::Press(tile) => WireMessage::Press { tile, ms },
            ScriptAction::Release(tile) => WireMessage::Release { tile, ms },
            ScriptAction::Tick => WireMessage::Tick { ms },
        }
    }
}

/// A validated, time-ordered input sequence with per-tile press/release
/// alternation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Script {
    steps: Vec<ScriptStep>,
    stop_ms: Option<u64>,
    held: [bool; TILE_COUNT],
}

#[derive(Deserialize)]
struct Delay {
    #[serde(default)]
    delay: Option<u64>,
}

impl Script {
    pub fn new() -> Self {
        Script::default()
    }

    pub fn steps(&self) -> &[ScriptStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last_ms(&self) -> u64 {
        self.steps.last().map_or(0, |s| s.at_ms)
    }

    pub fn stop_ms(&self) -> u64 {
        self.stop_ms.unwrap_or_else(|| self.last_ms())
    }

    /// Append a step `delay_ms` after the previous one.
    pub fn push(&mut self, delay_ms: u64, action: ScriptAction) -> Result<()> {
        let at_ms = self.last_ms() + delay_ms;
        self.push_at(at_ms, action)
    }

    pub fn push_at(&mut self, at_ms: u64, action: ScriptAction) -> Result<()> {
        let index = self.steps.len();
        let err = |msg: String| Error::Script { index, msg };
        if self.stop_ms.is_some() {
            return Err(err("step after stop".into()));
        }
        if at_ms < self.last_ms() {
            return Err(err(format!("time {at_ms}ms precedes {}ms", self.last_ms())));
        }
        match action {
            ScriptAction::Press(tile) | ScriptAction::Release(tile) => {
                let press = matches!(action, ScriptAction::Press(_));
                let held = &mut self.held[tile.canonical_index()];
                if *held == press {
                    return Err(err(format!(
                        "{} on {tile} breaks press/release alternation",
                        if press { "press" } else { "release" }
                    )));
                }
                *held = press;
            }
            ScriptAction::Tick => {}
        }
        self.steps.push(ScriptStep { at_ms, action });
        Ok(())
    }

    /// Press and release `tile`, the press `delay_ms` after the previous
    /// step and the release `hold_ms` later.
    pub fn tap(&mut self, delay_ms: u64, tile: TileId, hold_ms: u64) -> Result<()> {
        self.push(delay_ms, ScriptAction::Press(tile))?;
        self.push(hold_ms, ScriptAction::Release(tile))
    }

    pub fn stop_at(&mut self, ms: u64) -> Result<()> {
        if ms < self.last_ms() {
            return Err(Error::Script {
                index: self.steps.len(),
                msg: format!("stop at {ms}ms precedes {}ms", self.last_ms()),
            });
        }
        self.stop_ms = Some(ms);
        Ok(())
    }

    /// Parse the line grammar. Errors carry the 1-based line number.
    pub fn parse(text: &str) -> Result<Script> {
        let mut script = Script::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let index = i + 1;
            let err = |msg: String| Error::Script { index, msg };
            let msg = WireMessage::parse(line).map_err(|e| err(e.to_string()))?;
            let delay = serde_json::from_str::<Delay>(line)
                .map_err(|e| err(e.to_string()))?
                .delay;
            let at = match (msg.ms(), delay) {
                (Some(_), Some(_)) => return Err(err("both ms and delay given".into())),
                (Some(ms), None) => ms,
                (None, Some(d)) => script.last_ms() + d,
                (None, None) => script.last_ms(),
            };
            let action = match msg {
                WireMessage::Press { tile, .. } => ScriptAction::Press(tile),
                WireMessage::Release { tile, .. } => ScriptAction::Release(tile),
                WireMessage::Tick { .. } => ScriptAction::Tick,
                WireMessage::Stop { .. } => {
                    script.stop_at(at).map_err(|e| err(e.to_string()))?;
                    continue;
                }
                other => {
                    return Err(err(format!("`{}` is not allowed in a script", other.to_line())))
                }
            };
            script.push_at(at, action).map_err(|e| match e {
                Error::Script { msg, .. } => err(msg),
                other => other,
            })?;
        }
        Ok(script)
    }

    /// Absolute-time lines, ending with `stop` if one was set.
    pub fn to_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.steps.iter().map(|s| s.message().to_line()).collect();
        if let Some(ms) = self.stop_ms {
            lines.push(WireMessage::Stop { ms: Some(ms) }.to_line());
        }
        lines
    }
}

/// Drive an engine session through `script`, logging to `sink` if given.
pub fn run_script_with(
    config: SessionConfig,
    script: &Script,
    sink: Option<Box<dyn Write + Send>>,
) -> Result<SessionSummary> {
    let (mut recorder, _) = Recorder::start(config, "script", sink)?;
    for (index, step) in script.steps.iter().enumerate() {
        recorder
            .apply(&step.message(), step.at_ms)
            .map_err(|e| Error::Script {
                index,
                msg: e.to_string(),
            })?;
    }
    let out = recorder.apply(&WireMessage::Stop { ms: Some(script.stop_ms()) }, 0)?;
    match out.into_iter().next() {
        Some(WireMessage::Summary(mut summary)) => {
            summary.events = recorder.session().events().to_vec();
            Ok(summary)
        }
        _ => unreachable!("stop always yields a summary"),
    }
}

/// Run `script` and write a standard session log to `out`.
pub fn run_script(config: SessionConfig, script: &Script, out: &Path) -> Result<SessionSummary> {
    run_script_with(config, script, Some(create_log(out)?))
}
