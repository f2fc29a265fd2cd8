#![allow(dead_code)]

use std::collections::BTreeSet;

use magicarpet::engine::{GameEvent, GameEventKind, Mode, Phase, Session, SessionConfig};
use magicarpet::grid::{SensorEvent, TileId};
use magicarpet::script::{Script, ScriptAction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn tile(s: &str) -> TileId {
    s.parse().unwrap()
}

/// Random but purposeful input: a shadow engine tells the generator which
/// tiles are currently worth pressing, so sessions actually progress.
pub fn random_session(case_seed: u64, mode: Mode, events: usize) -> (SessionConfig, Script) {
    let mut rng = ChaCha8Rng::seed_from_u64(case_seed);
    let config = SessionConfig {
        mode,
        seed: rng.random(),
        collab_lights_n: rng.random_range(1..=5),
        ..SessionConfig::default()
    };
    let (mut shadow, _, _) = Session::new(config.clone()).unwrap();
    let mut script = Script::new();
    while script.len() < events {
        if rng.random_bool(0.1) {
            let delay = rng.random_range(0..8000);
            script.push(delay, ScriptAction::Tick).unwrap();
            shadow.tick(script.last_ms()).unwrap();
            continue;
        }
        let delay = if rng.random_bool(0.05) {
            rng.random_range(4000..7000)
        } else {
            rng.random_range(0..1500)
        };
        let target = if rng.random_bool(0.65) {
            useful_tile(&shadow, &mut rng)
        } else {
            None
        };
        let tile = target.unwrap_or_else(|| TileId::from_index(rng.random_range(0..12)).unwrap());
        script.push(delay, ScriptAction::Press(tile)).unwrap();
        shadow
            .handle_event(SensorEvent::press(tile, script.last_ms()))
            .unwrap();
        script
            .push(rng.random_range(20..300), ScriptAction::Release(tile))
            .unwrap();
    }
    let stop = script.last_ms() + rng.random_range(0..100);
    script.stop_at(stop).unwrap();
    (config, script)
}

fn useful_tile(s: &Session, rng: &mut ChaCha8Rng) -> Option<TileId> {
    match s.phase() {
        Phase::AwaitDemo { target } => Some(*target),
        Phase::AwaitImitation {
            demo_tile,
            expected,
            ..
        } => Some(if rng.random_bool(0.7) { *expected } else { *demo_tile }),
        Phase::Clearing { lit } => {
            let v: Vec<_> = lit.iter().copied().collect();
            Some(v[rng.random_range(0..v.len())])
        }
        Phase::Finished => None,
    }
}

/// A collaboration session whose script presses the first lit tile until
/// `rounds` rounds have been cleared.
pub fn collab_clearing(seed: u64, rounds: u32) -> (SessionConfig, Script) {
    let config = SessionConfig::collaboration(seed);
    let (mut shadow, _, _) = Session::new(config.clone()).unwrap();
    let mut script = Script::new();
    while shadow.completion_degree() < rounds {
        let tile = shadow.lit_tiles()[0];
        script.tap(300, tile, 50).unwrap();
        shadow
            .handle_event(SensorEvent::press(tile, script.last_ms() - 50))
            .unwrap();
    }
    (config, script)
}

/// Count rounds in which the collaboration lit set is observed to reach
/// empty, tracking the set only from `round_started` and
/// `tile_extinguished` events.
pub fn scan_cleared_rounds(events: &[GameEvent]) -> u32 {
    let mut lit: BTreeSet<TileId> = BTreeSet::new();
    let mut cleared = 0;
    for ev in events {
        match &ev.kind {
            GameEventKind::RoundStarted { lit: tiles, .. } => {
                lit = tiles.iter().copied().collect();
            }
            GameEventKind::TileExtinguished { tile, .. } => {
                assert!(lit.remove(tile), "extinguished a tile that was not lit");
                if lit.is_empty() {
                    cleared += 1;
                }
            }
            _ => {}
        }
    }
    cleared
}
