//! Line-protocol session service over TCP.
//!
//! One controlling client is served at a time; further connections wait in
//! the listen backlog until it disconnects. Inbound lines are applied to the
//! engine strictly in arrival order and every accepted message is logged
//! before the next one is read. The session outlives a client disconnect.

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crate::engine::SessionConfig;
use crate::error::{Error, Result};
use crate::protocol::WireMessage;
use crate::session_log::{create_log, Recorder};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    /// Defaults for fields a `start` message leaves out.
    pub defaults: SessionConfig,
    /// Session log path. The n-th session after the first goes to
    /// `<stem>.<n>.<ext>`.
    pub log_path: Option<PathBuf>,
    /// Wall-clock tick interval driving idle flashing; 0 disables it.
    pub tick_interval_ms: u64,
}

impl ServiceConfig {
    pub fn localhost(port: u16) -> Self {
        ServiceConfig {
            addr: SocketAddr::from(([127, 0, 0, 1], port)),
            defaults: SessionConfig::default(),
            log_path: None,
            tick_interval_ms: 100,
        }
    }
}

pub struct RunningService {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<Result<()>>>,
}

impl RunningService {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Block until the accept loop exits.
    pub fn join(mut self) -> Result<()> {
        self.handle
            .take()
            .expect("joined once")
            .join()
            .unwrap_or_else(|_| Err(Error::Malformed("service thread panicked".into())))
    }

    pub fn stop(mut self) -> Result<()> {
        self.shutdown.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let _ = TcpStream::connect(self.addr);
        match self.handle.take() {
            Some(h) => h
                .join()
                .unwrap_or_else(|_| Err(Error::Malformed("service thread panicked".into()))),
            None => Ok(()),
        }
    }
}

impl Drop for RunningService {
    fn drop(&mut self) {
        if self.handle.is_some() {
            self.shutdown.store(true, Ordering::SeqCst);
            let _ = TcpStream::connect(self.addr);
        }
    }
}

pub fn serve(config: ServiceConfig) -> Result<RunningService> {
    let listener = TcpListener::bind(config.addr)?;
    let addr = listener.local_addr()?;
    let shutdown = Arc::new(AtomicBool::new(false));
    let flag = shutdown.clone();
    let handle = thread::spawn(move || {
        let mut state = ServiceState::new(config);
        for stream in listener.incoming() {
            if flag.load(Ordering::SeqCst) {
                break;
            }
            match stream {
                Ok(stream) => {
                    if let Err(e) = state.handle_client(stream, &flag) {
                        eprintln!("client error: {e}");
                    }
                }
                Err(e) => eprintln!("accept failed: {e}"),
            }
        }
        Ok(())
    });
    Ok(RunningService {
        addr,
        shutdown,
        handle: Some(handle),
    })
}

struct Active {
    recorder: Recorder,
    started: Instant,
}

impl Active {
    fn wall_ms(&self) -> u64 {
        let elapsed = self.started.elapsed().as_millis() as u64;
        elapsed.max(self.recorder.session().clock_ms())
    }
}

struct ServiceState {
    config: ServiceConfig,
    active: Option<Active>,
    sessions: u32,
}

enum Inbox {
    Line(String),
    Closed,
}

impl ServiceState {
    fn new(config: ServiceConfig) -> Self {
        ServiceState {
            config,
            active: None,
            sessions: 0,
        }
    }

    fn handle_client(&mut self, stream: TcpStream, shutdown: &AtomicBool) -> Result<()> {
        stream.set_nodelay(true)?;
        let mut writer = stream.try_clone()?;
        let reader_stream = stream.try_clone()?;
        let (tx, rx) = mpsc::channel();
        let reader = thread::spawn(move || {
            for line in BufReader::new(reader_stream).lines() {
                match line {
                    Ok(l) => {
                        if tx.send(Inbox::Line(l)).is_err() {
                            return;
                        }
                    }
                    Err(_) => break,
                }
            }
            let _ = tx.send(Inbox::Closed);
        });

        if let Some(active) = &self.active {
            send(&mut writer, &[WireMessage::frame(&active.recorder.current_frame())])?;
        }

        let poll = match self.config.tick_interval_ms {
            0 => Duration::from_millis(50),
            ms => Duration::from_millis(ms.min(50)),
        };
        let tick_every = Duration::from_millis(self.config.tick_interval_ms);
        let mut last_tick = Instant::now();
        let result = loop {
            if shutdown.load(Ordering::SeqCst) {
                break Ok(());
            }
            match rx.recv_timeout(poll) {
                Ok(Inbox::Line(line)) => {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let out = self.handle_line(&line);
                    if let Err(e) = send(&mut writer, &out) {
                        break Err(e);
                    }
                }
                Ok(Inbox::Closed) | Err(RecvTimeoutError::Disconnected) => break Ok(()),
                Err(RecvTimeoutError::Timeout) => {}
            }
            if self.config.tick_interval_ms > 0 && last_tick.elapsed() >= tick_every {
                last_tick = Instant::now();
                let out = self.auto_tick();
                if let Err(e) = send(&mut writer, &out) {
                    break Err(e);
                }
            }
        };
        let _ = stream.shutdown(std::net::Shutdown::Both);
        let _ = reader.join();
        result
    }

    fn auto_tick(&mut self) -> Vec<WireMessage> {
        match &mut self.active {
            Some(a) if !a.recorder.is_stopped() => {
                let now = a.wall_ms();
                a.recorder
                    .quiet_tick(now)
                    .unwrap_or_else(|e| vec![WireMessage::error(e)])
            }
            _ => Vec::new(),
        }
    }

    fn handle_line(&mut self, line: &str) -> Vec<WireMessage> {
        let msg = match WireMessage::parse(line) {
            Ok(m) => m,
            Err(e) => return vec![WireMessage::error(e)],
        };
        match &msg {
            WireMessage::Start(req) => {
                if self.active.as_ref().is_some_and(|a| !a.recorder.is_stopped()) {
                    return vec![WireMessage::error("a session is already active; send stop first")];
                }
                let config = req.resolve(&self.config.defaults);
                match self.start_session(config) {
                    Ok(out) => out,
                    Err(e) => vec![WireMessage::error(e)],
                }
            }
            m if m.is_inbound() => match &mut self.active {
                Some(a) => {
                    let fallback = a.wall_ms();
                    a.recorder
                        .apply(&msg, fallback)
                        .unwrap_or_else(|e| vec![WireMessage::error(e)])
                }
                None => vec![WireMessage::error("no active session; send start first")],
            },
            other => vec![WireMessage::error(format!(
                "{:?} messages are outbound only",
                other.kind()
            ))],
        }
    }

    fn start_session(&mut self, config: SessionConfig) -> Result<Vec<WireMessage>> {
        config.validate()?;
        let sink = match &self.config.log_path {
            Some(path) => Some(create_log(&rotated_path(path, self.sessions + 1))?),
            None => None,
        };
        let (recorder, out) = Recorder::start(config, "serve", sink)?;
        self.sessions += 1;
        self.active = Some(Active {
            recorder,
            started: Instant::now(),
        });
        Ok(out)
    }
}

fn send(writer: &mut TcpStream, messages: &[WireMessage]) -> Result<()> {
    if messages.is_empty() {
        return Ok(());
    }
    let mut buf = String::new();
    for m in messages {
        buf.push_str(&m.to_line());
        buf.push('\n');
    }
    writer.write_all(buf.as_bytes())?;
    writer.flush()?;
    Ok(())
}

/// `session.jsonl` for the first session, `session.2.jsonl` for the second.
pub fn rotated_path(path: &Path, n: u32) -> PathBuf {
    if n <= 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{n}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{n}"),
    };
    path.with_file_name(name)
}
