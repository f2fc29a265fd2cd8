use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::Path;
use std::time::{Duration, Instant};

use magicarpet::engine::{GameEventKind, SessionConfig};
use magicarpet::protocol::{RecordKind, WireMessage};
use magicarpet::replay::replay;
use magicarpet::script::{run_script, Script};
use magicarpet::service::{rotated_path, serve, RunningService, ServiceConfig};
use magicarpet::session_log::read_log_file;
use magicarpet::{Frame, TileId};

struct Client {
    writer: TcpStream,
    reader: BufReader<TcpStream>,
}

impl Client {
    fn connect(service: &RunningService) -> Client {
        let stream = TcpStream::connect(service.local_addr()).unwrap();
        stream.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
        Client {
            writer: stream.try_clone().unwrap(),
            reader: BufReader::new(stream),
        }
    }

    fn send(&mut self, line: &str) {
        self.writer.write_all(line.as_bytes()).unwrap();
        self.writer.write_all(b"\n").unwrap();
    }

    fn recv(&mut self) -> WireMessage {
        let mut line = String::new();
        self.reader.read_line(&mut line).expect("server reply");
        WireMessage::parse(&line).unwrap_or_else(|e| panic!("{e}: {line:?}"))
    }

    /// Read `n` messages.
    fn recv_n(&mut self, n: usize) -> Vec<WireMessage> {
        (0..n).map(|_| self.recv()).collect()
    }
}

fn lit(msg: &WireMessage) -> Vec<String> {
    let WireMessage::Frame(f) = msg else {
        panic!("expected frame, got {msg:?}")
    };
    Frame::try_from(f)
        .unwrap()
        .lit_tiles()
        .iter()
        .map(TileId::to_string)
        .collect()
}

fn event_name(msg: &WireMessage) -> &'static str {
    match msg {
        WireMessage::Event(e) => e.event.name(),
        other => panic!("expected event, got {other:?}"),
    }
}

fn quiet_service(log: Option<&Path>) -> RunningService {
    serve(ServiceConfig {
        log_path: log.map(Path::to_path_buf),
        tick_interval_ms: 0,
        ..ServiceConfig::localhost(0)
    })
    .unwrap()
}

#[test]
fn imitation_session_over_the_wire() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("serve.jsonl");
    let service = quiet_service(Some(&log));
    let mut c = Client::connect(&service);

    c.send(r#"{"t":"start","mode":"imitation","seed":42}"#);
    let opening = c.recv_n(2);
    assert_eq!(lit(&opening[0]), ["P-0-1"]);
    assert_eq!(event_name(&opening[1]), "round_started");

    c.send(r#"{"t":"press","tile":"P-0-1","ms":500}"#);
    let reply = c.recv_n(2);
    assert_eq!(lit(&reply[0]), ["P-0-1", "C-0-1"]);
    assert_eq!(event_name(&reply[1]), "demo_pressed");

    // Malformed input is answered and changes nothing.
    c.send("xyz");
    assert!(matches!(c.recv(), WireMessage::Error { .. }));
    c.send(r#"{"t":"frame","ms":1,"tiles":[]}"#);
    assert!(matches!(c.recv(), WireMessage::Error { .. }));
    c.send(r#"{"t":"press","tile":"C-0-1","ms":400}"#);
    assert!(matches!(c.recv(), WireMessage::Error { .. }));

    c.send(r#"{"t":"release","tile":"P-0-1","ms":600}"#);
    c.send(r#"{"t":"press","tile":"C-0-1","ms":900}"#);
    let reply = c.recv_n(3);
    assert_eq!(lit(&reply[0]), ["P-2-0"]);
    assert_eq!(event_name(&reply[1]), "imitation_completed");
    assert_eq!(event_name(&reply[2]), "round_started");

    c.send(r#"{"t":"start"}"#);
    assert!(matches!(c.recv(), WireMessage::Error { .. }));
    c.send(r#"{"t":"stop","ms":1000}"#);
    match c.recv() {
        WireMessage::Summary(s) => assert_eq!(s.rounds_completed, 1),
        other => panic!("{other:?}"),
    }
    drop(c);
    service.stop().unwrap();

    let outcome = replay(&log).unwrap();
    assert!(outcome.is_faithful(), "{:?}", outcome.divergences);
}

#[test]
fn inbound_order_is_preserved_in_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("order.jsonl");
    let service = quiet_service(Some(&log));
    let mut c = Client::connect(&service);
    c.send(r#"{"t":"start","mode":"collab","seed":3,"collab_lights_n":12}"#);
    let sent: Vec<TileId> = TileId::all().collect::<Vec<_>>().into_iter().rev().collect();
    let mut burst = String::new();
    for (i, tile) in sent.iter().enumerate() {
        burst.push_str(&format!("{{\"t\":\"press\",\"tile\":\"{tile}\",\"ms\":{}}}\n", 10 + i));
    }
    c.writer.write_all(burst.as_bytes()).unwrap();
    c.send(r#"{"t":"stop","ms":100}"#);
    loop {
        if let WireMessage::Summary(s) = c.recv() {
            assert_eq!(s.completion_degree, 1);
            break;
        }
    }
    drop(c);
    service.stop().unwrap();

    let records = read_log_file(&log).unwrap();
    let pressed: Vec<(u64, TileId)> = records
        .iter()
        .filter_map(|r| match r.record.msg {
            WireMessage::Press { tile, .. } => Some((r.record.seq, tile)),
            _ => None,
        })
        .collect();
    assert_eq!(pressed.iter().map(|p| p.1).collect::<Vec<_>>(), sent);
    assert!(pressed.windows(2).all(|w| w[0].0 < w[1].0));
}

#[test]
fn served_log_matches_scripted_log() {
    let dir = tempfile::tempdir().unwrap();
    let served = dir.path().join("served.jsonl");
    let scripted = dir.path().join("scripted.jsonl");
    let script_text = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/two-rounds.script.jsonl"),
    )
    .unwrap();

    let service = quiet_service(Some(&served));
    let mut c = Client::connect(&service);
    c.send(r#"{"t":"start","mode":"imitation","seed":42,"round_limit":2}"#);
    let script = Script::parse(&script_text).unwrap();
    for line in script.to_lines() {
        c.send(&line);
    }
    loop {
        if matches!(c.recv(), WireMessage::Summary(_)) {
            break;
        }
    }
    drop(c);
    service.stop().unwrap();

    let config = SessionConfig {
        round_limit: Some(2),
        ..SessionConfig::imitation(42)
    };
    run_script(config, &script, &scripted).unwrap();

    let strip = |path: &Path| -> Vec<String> {
        read_log_file(path)
            .unwrap()
            .into_iter()
            .map(|r| match r.record.msg {
                WireMessage::Start(mut req) => {
                    req.source = None;
                    WireMessage::Start(req).to_line()
                }
                other => other.to_line(),
            })
            .collect()
    };
    assert_eq!(strip(&served), strip(&scripted));
}

#[test]
fn missing_timestamps_are_stamped_on_arrival() {
    let service = quiet_service(None);
    let mut c = Client::connect(&service);
    c.send(r#"{"t":"press","tile":"P-0-0"}"#);
    assert!(matches!(c.recv(), WireMessage::Error { .. }));
    c.send(r#"{"t":"start","mode":"collab","seed":1,"collab_lights_n":1}"#);
    let opening = c.recv_n(2);
    let only = lit(&opening[0]).remove(0);
    std::thread::sleep(Duration::from_millis(30));
    c.send(&format!("{{\"t\":\"press\",\"tile\":\"{only}\"}}"));
    let reply = c.recv_n(4);
    let ms = reply[1].ms().unwrap();
    assert!(ms >= 30, "stamped at {ms}");
    assert_eq!(event_name(&reply[2]), "round_complete");
    service.stop().unwrap();
}

#[test]
fn session_survives_reconnect_and_rotates_logs() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("s.jsonl");
    let service = quiet_service(Some(&log));
    let mut c = Client::connect(&service);
    c.send(r#"{"t":"start","mode":"imitation","seed":42}"#);
    c.recv_n(2);
    c.send(r#"{"t":"press","tile":"P-0-1","ms":100}"#);
    c.recv_n(2);
    drop(c);

    let mut c = Client::connect(&service);
    assert_eq!(lit(&c.recv()), ["P-0-1", "C-0-1"]);
    c.send(r#"{"t":"stop","ms":200}"#);
    assert!(matches!(c.recv(), WireMessage::Summary(_)));
    c.send(r#"{"t":"start","mode":"collab","seed":5}"#);
    assert_eq!(lit(&c.recv()).len(), 3);
    drop(c);
    service.stop().unwrap();

    assert!(replay(&log).unwrap().is_faithful());
    let second = rotated_path(&log, 2);
    let records = read_log_file(&second).unwrap();
    assert_eq!(records[0].record.msg.kind(), RecordKind::Meta);
}

#[test]
fn wall_clock_ticks_drive_flash_prompts() {
    let service = serve(ServiceConfig {
        tick_interval_ms: 10,
        ..ServiceConfig::localhost(0)
    })
    .unwrap();
    let mut c = Client::connect(&service);
    c.send(r#"{"t":"start","mode":"imitation","seed":1,"idle_flash_ms":150,"flash_period_ms":100}"#);
    c.recv_n(2);
    let deadline = Instant::now() + Duration::from_secs(3);
    let mut saw_flash = false;
    while Instant::now() < deadline && !saw_flash {
        if let WireMessage::Event(e) = c.recv() {
            saw_flash = matches!(e.event, GameEventKind::FlashPromptOn { .. });
        }
    }
    assert!(saw_flash);
    service.stop().unwrap();
}

#[test]
fn port_in_use_is_an_error() {
    let service = quiet_service(None);
    let mut cfg = ServiceConfig::localhost(0);
    cfg.addr = service.local_addr();
    assert!(serve(cfg).is_err());
    service.stop().unwrap();
}
