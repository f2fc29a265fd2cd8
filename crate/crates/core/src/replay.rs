//! Bit-exact replay of session logs and scoring of recorded sessions.

use std::path::Path;

use serde::Serialize;

use crate::coding::{auto_code, CodingScheme, HocReport};
use crate::engine::{GameEvent, GameEventKind, Mode, SessionConfig};
use crate::error::{Error, Result};
use crate::protocol::{RecordKind, WireMessage};
use crate::session_log::{read_log_file, NumberedRecord, Recorder};

/// One point where the regenerated stream disagrees with the log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divergence {
    /// Line of the logged record, or of the inbound record whose output is
    /// missing from the log.
    pub line: usize,
    pub t_ms: Option<u64>,
    pub logged: Option<String>,
    pub replayed: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub config: SessionConfig,
    /// Regenerated frames, events and summary, in order.
    pub regenerated: Vec<WireMessage>,
    pub divergences: Vec<Divergence>,
}

impl ReplayOutcome {
    pub fn is_faithful(&self) -> bool {
        self.divergences.is_empty()
    }

    pub fn regenerated_lines(&self) -> Vec<String> {
        self.regenerated.iter().map(WireMessage::to_line).collect()
    }
}

fn config_from_meta(records: &[NumberedRecord]) -> Result<SessionConfig> {
    match records.first().map(|r| &r.record.msg) {
        Some(WireMessage::Start(req)) => {
            let cfg = req.resolve(&SessionConfig::default());
            cfg.validate().map_err(|e| Error::Corrupt {
                line: records[0].line,
                msg: e.to_string(),
            })?;
            Ok(cfg)
        }
        _ => Err(Error::MissingMeta),
    }
}

fn compare(
    line_of_input: usize,
    logged: &[&NumberedRecord],
    replayed: &[WireMessage],
    out: &mut Vec<Divergence>,
) {
    for i in 0..logged.len().max(replayed.len()) {
        let l = logged.get(i);
        let r = replayed.get(i);
        let l_line = l.map(|n| n.record.msg.to_line());
        let r_line = r.map(WireMessage::to_line);
        if l_line != r_line {
            out.push(Divergence {
                line: l.map_or(line_of_input, |n| n.line),
                t_ms: l.and_then(|n| n.record.msg.ms()).or_else(|| r.and_then(WireMessage::ms)),
                logged: l_line,
                replayed: r_line,
            });
        }
    }
}

/// Re-run the inbound records of a log through a fresh engine and compare
/// the regenerated frames, events and summary against the logged ones.
pub fn replay_records(records: &[NumberedRecord]) -> Result<ReplayOutcome> {
    let config = config_from_meta(records)?;
    let (mut recorder, opening) = Recorder::start(config.clone(), "replay", None)?;
    let mut regenerated = opening.clone();
    let mut divergences = Vec::new();

    // Split the log into segments: an inbound record followed by the
    // outbound records it produced.
    let mut i = 1;
    let mut pending_input_line = records[0].line;
    let mut expected = opening;
    loop {
        let start = i;
        while i < records.len() && !records[i].record.msg.is_inbound() {
            i += 1;
        }
        let logged: Vec<&NumberedRecord> = records[start..i]
            .iter()
            .filter(|r| r.record.msg.kind() != RecordKind::Error)
            .collect();
        compare(pending_input_line, &logged, &expected, &mut divergences);

        let Some(input) = records.get(i) else { break };
        i += 1;
        pending_input_line = input.line;
        if input.record.msg.ms().is_none() {
            return Err(Error::Corrupt {
                line: input.line,
                msg: "inbound record without ms".into(),
            });
        }
        expected = recorder
            .apply(&input.record.msg, 0)
            .map_err(|e| Error::Corrupt {
                line: input.line,
                msg: e.to_string(),
            })?;
        regenerated.extend(expected.iter().cloned());
    }

    Ok(ReplayOutcome {
        config,
        regenerated,
        divergences,
    })
}

pub fn replay(log_path: &Path) -> Result<ReplayOutcome> {
    replay_records(&read_log_file(log_path)?)
}

/// Game events as recorded in a log.
pub fn logged_events(records: &[NumberedRecord]) -> Vec<GameEvent> {
    records
        .iter()
        .filter_map(|r| match &r.record.msg {
            WireMessage::Event(e) => Some(GameEvent::from(e)),
            _ => None,
        })
        .collect()
}

/// Score a recorded session: imitation logs are auto-coded and scored,
/// collaboration logs report their completion degree.
pub fn score_records(records: &[NumberedRecord], scheme: &CodingScheme) -> Result<HocReport> {
    let config = config_from_meta(records)?;
    let events = logged_events(records);
    match config.mode {
        Mode::Imitation => {
            let items = auto_code(&events, &config.movement_type, scheme)?;
            scheme.report(&items)
        }
        Mode::Collaboration => {
            let completed = events
                .iter()
                .filter(|e| matches!(e.kind, GameEventKind::RoundCompleted { .. }))
                .count();
            Ok(HocReport::completion_only(completed as u32))
        }
    }
}

pub fn score_log(log_path: &Path, scheme: &CodingScheme) -> Result<HocReport> {
    score_records(&read_log_file(log_path)?, scheme)
}
