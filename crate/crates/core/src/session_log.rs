//! Event-sourced session recording.
//!
//! A [`Recorder`] owns one engine session and appends every accepted inbound
//! message, followed by the frames and events it produced, to a log sink.
//! Each record is written as one complete line and flushed, so a log cut
//! short by a crash is still a parseable prefix.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::engine::{Session, SessionConfig, SessionSummary, Step};
use crate::error::{Error, Result};
use crate::grid::{Frame, SensorEvent};
use crate::protocol::{LogRecord, StartRequest, WireMessage};

pub struct Recorder {
    session: Session,
    sink: Option<Box<dyn Write + Send>>,
    seq: u64,
    summary: Option<SessionSummary>,
}

impl std::fmt::Debug for Recorder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Recorder")
            .field("session", &self.session)
            .field("seq", &self.seq)
            .field("logging", &self.sink.is_some())
            .finish()
    }
}

impl Recorder {
    /// Start a session, writing the meta record and the opening frame and
    /// events. Returns the outbound messages for the opening state.
    pub fn start(
        config: SessionConfig,
        source: &str,
        sink: Option<Box<dyn Write + Send>>,
    ) -> Result<(Recorder, Vec<WireMessage>)> {
        let (session, frame, events) = Session::new(config)?;
        let mut rec = Recorder {
            session,
            sink,
            seq: 0,
            summary: None,
        };
        let meta = WireMessage::Start(StartRequest::meta(rec.session.config(), source));
        rec.write(&meta)?;
        let out = outbound(Step {
            frame: Some(frame),
            events,
        });
        for m in &out {
            rec.write(m)?;
        }
        Ok((rec, out))
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn current_frame(&self) -> Frame {
        self.session.frame(self.session.clock_ms())
    }

    pub fn summary(&self) -> Option<&SessionSummary> {
        self.summary.as_ref()
    }

    pub fn is_stopped(&self) -> bool {
        self.summary.is_some()
    }

    /// Apply one inbound message. `fallback_ms` stamps messages that carry
    /// no `ms`. Rejected messages leave the session and the log untouched.
    pub fn apply(&mut self, msg: &WireMessage, fallback_ms: u64) -> Result<Vec<WireMessage>> {
        let t = msg.ms().unwrap_or(fallback_ms);
        let stamped = msg.with_ms(t);
        let out = match &stamped {
            WireMessage::Press { tile, .. } => {
                outbound(self.session.handle_event(SensorEvent::press(*tile, t))?)
            }
            WireMessage::Release { tile, .. } => {
                outbound(self.session.handle_event(SensorEvent::release(*tile, t))?)
            }
            WireMessage::Tick { .. } => outbound(self.session.tick(t)?),
            WireMessage::Stop { .. } => {
                if self.session.is_ended() {
                    return Err(Error::SessionEnded);
                }
                if t < self.session.clock_ms() {
                    return Err(Error::TimeRegression {
                        last: self.session.clock_ms(),
                        got: t,
                    });
                }
                let summary = self.session.end(t);
                self.summary = Some(summary.clone());
                vec![WireMessage::Summary(summary)]
            }
            WireMessage::Start(_) => {
                return Err(Error::Malformed("session already started".into()));
            }
            other => {
                return Err(Error::Malformed(format!(
                    "`{}` is not an inbound message",
                    other.to_line()
                )));
            }
        };
        self.write(&stamped)?;
        for m in &out {
            self.write(m)?;
        }
        Ok(out)
    }

    /// Like [`Recorder::apply`] for a tick, but the tick is only logged if
    /// it produced output.
    pub fn quiet_tick(&mut self, now_ms: u64) -> Result<Vec<WireMessage>> {
        let out = outbound(self.session.tick(now_ms)?);
        if !out.is_empty() {
            self.write(&WireMessage::Tick { ms: Some(now_ms) })?;
            for m in &out {
                self.write(m)?;
            }
        }
        Ok(out)
    }

    fn write(&mut self, msg: &WireMessage) -> Result<()> {
        if let Some(sink) = &mut self.sink {
            let mut line = LogRecord {
                msg: msg.clone(),
                seq: self.seq,
            }
            .to_line();
            line.push('\n');
            sink.write_all(line.as_bytes())?;
            sink.flush()?;
        }
        self.seq += 1;
        Ok(())
    }
}

/// Frame first, then events in emission order.
pub fn outbound(step: Step) -> Vec<WireMessage> {
    step.frame
        .iter()
        .map(WireMessage::frame)
        .chain(step.events.iter().map(WireMessage::event))
        .collect()
}

pub fn create_log(path: &Path) -> Result<Box<dyn Write + Send>> {
    Ok(Box::new(BufWriter::new(File::create(path)?)))
}

/// A parsed log line and its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberedRecord {
    pub line: usize,
    pub record: LogRecord,
}

pub fn read_log<R: BufRead>(reader: R) -> Result<Vec<NumberedRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = LogRecord::parse(&line).map_err(|e| Error::Corrupt {
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(NumberedRecord { line: i + 1, record });
    }
    Ok(out)
}

pub fn read_log_file(path: &Path) -> Result<Vec<NumberedRecord>> {
    read_log(BufReader::new(File::open(path)?))
}
