//! Imitation and collaboration game modes as a deterministic state machine.
//!
//! A [`Session`] is driven by exactly one caller feeding sensor events and
//! ticks with non-decreasing timestamps. Every call returns the game events
//! it produced and, when any tile's appearance changed, a new [`Frame`].
//!
//! Random draws come from ChaCha8 seeded with `SessionConfig::seed` via
//! `SeedableRng::seed_from_u64`, so a seed fully determines a session for a
//! given input sequence.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coding::MovementId;
use crate::error::{Error, Result};
use crate::grid::{
    Edge, Frame, Palette, SensorEvent, Side, TileId, TileVisual, BLACK, TILE_COUNT,
};

pub const DEFAULT_COLLAB_LIGHTS: u8 = 3;
pub const DEFAULT_IDLE_FLASH_MS: u64 = 5000;
pub const DEFAULT_FLASH_PERIOD_MS: u64 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Mode {
    #[default]
    #[serde(rename = "imitation")]
    Imitation,
    #[serde(rename = "collab")]
    Collaboration,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imitation" => Ok(Mode::Imitation),
            "collab" | "collaboration" => Ok(Mode::Collaboration),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub mode: Mode,
    pub seed: u64,
    pub collab_lights_n: u8,
    pub idle_flash_ms: u64,
    pub flash_period_ms: u64,
    pub round_limit: Option<u32>,
    pub movement_type: MovementId,
    pub tile_colors: Palette,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            mode: Mode::Imitation,
            seed: 0,
            collab_lights_n: DEFAULT_COLLAB_LIGHTS,
            idle_flash_ms: DEFAULT_IDLE_FLASH_MS,
            flash_period_ms: DEFAULT_FLASH_PERIOD_MS,
            round_limit: None,
            movement_type: MovementId::hand_hit(),
            tile_colors: Palette::default(),
        }
    }
}

impl SessionConfig {
    pub fn imitation(seed: u64) -> Self {
        SessionConfig {
            mode: Mode::Imitation,
            seed,
            ..Default::default()
        }
    }

    pub fn collaboration(seed: u64) -> Self {
        SessionConfig {
            mode: Mode::Collaboration,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.collab_lights_n == 0 || self.collab_lights_n as usize > TILE_COUNT {
            return Err(Error::InvalidConfig(format!(
                "collab_lights_n must be in 1..=12, got {}",
                self.collab_lights_n
            )));
        }
        if self.idle_flash_ms == 0 {
            return Err(Error::InvalidConfig("idle_flash_ms must be positive".into()));
        }
        if self.flash_period_ms == 0 {
            return Err(Error::InvalidConfig("flash_period_ms must be positive".into()));
        }
        if self.round_limit == Some(0) {
            return Err(Error::InvalidConfig("round_limit must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phase {
    AwaitDemo {
        target: TileId,
    },
    AwaitImitation {
        demo_tile: TileId,
        expected: TileId,
        demo_press_count: u32,
    },
    Clearing {
        lit: BTreeSet<TileId>,
    },
    /// Round limit reached; presses are still recorded.
    Finished,
}

/// Event payloads. Serialized with a `kind` tag so they can be flattened
/// into wire and log records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameEventKind {
    RoundStarted {
        round: u32,
        lit: Vec<TileId>,
    },
    DemoPressed {
        round: u32,
        tile: TileId,
        demo_presses: u32,
    },
    ImitationCompleted {
        round: u32,
        tile: TileId,
        demo_presses: u32,
        child_presses: u32,
    },
    ImitationWrongTile {
        round: u32,
        tile: TileId,
        expected: TileId,
    },
    TileExtinguished {
        round: u32,
        tile: TileId,
        remaining: u32,
    },
    #[serde(rename = "round_complete")]
    RoundCompleted {
        round: u32,
        completion_degree: u32,
    },
    FlashPromptOn {
        tiles: Vec<TileId>,
    },
    FlashPromptOff,
    /// A press outside the current objective. When it lands on the tile the
    /// child just imitated, before the next demonstration, it is counted as
    /// a repetition of that round (`repeat_of` / `child_presses`).
    ExtraPress {
        round: u32,
        tile: TileId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        repeat_of: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        child_presses: Option<u32>,
    },
}

impl GameEventKind {
    pub fn name(&self) -> &'static str {
        match self {
            GameEventKind::RoundStarted { .. } => "round_started",
            GameEventKind::DemoPressed { .. } => "demo_pressed",
            GameEventKind::ImitationCompleted { .. } => "imitation_completed",
            GameEventKind::ImitationWrongTile { .. } => "imitation_wrong_tile",
            GameEventKind::TileExtinguished { .. } => "tile_extinguished",
            GameEventKind::RoundCompleted { .. } => "round_complete",
            GameEventKind::FlashPromptOn { .. } => "flash_prompt_on",
            GameEventKind::FlashPromptOff => "flash_prompt_off",
            GameEventKind::ExtraPress { .. } => "extra_press",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameEvent {
    pub t_ms: u64,
    pub kind: GameEventKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Step {
    pub frame: Option<Frame>,
    pub events: Vec<GameEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoundTally {
    pub round: u32,
    pub parent_presses: u32,
    pub child_presses: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub ms: u64,
    pub mode: Mode,
    pub rounds_started: u32,
    pub rounds_completed: u32,
    pub completion_degree: u32,
    pub tallies: Vec<RoundTally>,
    #[serde(skip)]
    pub events: Vec<GameEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Flash {
    start_ms: u64,
    phase_index: u64,
}

/// Child-side follow-up presses on the tile of the last completed
/// imitation, open until the parent's next demonstration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Trailing {
    round: u32,
    tile: TileId,
    child_presses: u32,
}

#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    round: u32,
    phase: Phase,
    clock_ms: u64,
    last_activity_ms: u64,
    rng: ChaCha8Rng,
    completion_degree: u32,
    rounds_completed: u32,
    flash: Option<Flash>,
    trailing: Option<Trailing>,
    tallies: Vec<RoundTally>,
    log: Vec<GameEvent>,
    ended: bool,
}

impl Session {
    /// Start round 1. Returns the session, its first frame and the
    /// `round_started` event, all stamped at t = 0.
    pub fn new(config: SessionConfig) -> Result<(Session, Frame, Vec<GameEvent>)> {
        config.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut session = Session {
            config,
            round: 0,
            phase: Phase::Finished,
            clock_ms: 0,
            last_activity_ms: 0,
            rng,
            completion_degree: 0,
            rounds_completed: 0,
            flash: None,
            trailing: None,
            tallies: Vec::new(),
            log: Vec::new(),
            ended: false,
        };
        let mut events = Vec::new();
        session.start_round(0, &mut events);
        session.log.extend(events.iter().cloned());
        let frame = session.frame(0);
        Ok((session, frame, events))
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn completion_degree(&self) -> u32 {
        self.completion_degree
    }

    pub fn last_activity_ms(&self) -> u64 {
        self.last_activity_ms
    }

    /// Timestamp of the most recent event or tick.
    pub fn clock_ms(&self) -> u64 {
        self.clock_ms
    }

    pub fn is_flashing(&self) -> bool {
        self.flash.is_some()
    }

    pub fn is_ended(&self) -> bool {
        self.ended
    }

    pub fn events(&self) -> &[GameEvent] {
        &self.log
    }

    pub fn lit_tiles(&self) -> Vec<TileId> {
        match &self.phase {
            Phase::AwaitDemo { target } => vec![*target],
            Phase::AwaitImitation {
                demo_tile,
                expected,
                ..
            } => {
                let mut v = vec![*demo_tile, *expected];
                v.sort();
                v
            }
            Phase::Clearing { lit } => lit.iter().copied().collect(),
            Phase::Finished => Vec::new(),
        }
    }

    /// Render the current visual state.
    pub fn frame(&self, t_ms: u64) -> Frame {
        let mut frame = Frame::dark(t_ms);
        let flash_off_phase = self.flash.is_some_and(|f| f.phase_index % 2 == 1);
        for tile in self.lit_tiles() {
            frame.tiles[tile.canonical_index()] = TileVisual {
                rgb: if flash_off_phase {
                    BLACK
                } else {
                    self.config.tile_colors.color(tile)
                },
                lit: true,
                flashing: self.flash.is_some(),
            };
        }
        frame
    }

    pub fn handle_event(&mut self, ev: SensorEvent) -> Result<Step> {
        self.advance_clock(ev.t_ms)?;
        if ev.edge == Edge::Release {
            return Ok(Step::default());
        }

        let before = self.frame(ev.t_ms);
        let t = ev.t_ms;
        let mut events = Vec::new();
        self.last_activity_ms = t;
        if self.flash.take().is_some() {
            events.push(GameEvent {
                t_ms: t,
                kind: GameEventKind::FlashPromptOff,
            });
        }
        self.tally(ev.tile);

        match self.config.mode {
            Mode::Imitation => self.imitation_press(ev.tile, t, &mut events),
            Mode::Collaboration => self.collaboration_press(ev.tile, t, &mut events),
        }
        Ok(self.finish_step(before, t, events))
    }

    pub fn tick(&mut self, now_ms: u64) -> Result<Step> {
        self.advance_clock(now_ms)?;
        let before = self.frame(now_ms);
        let mut events = Vec::new();
        let has_lit = !self.lit_tiles().is_empty();
        let idle_since = now_ms - self.last_activity_ms.min(now_ms);
        if self.flash.is_none() && has_lit && idle_since >= self.config.idle_flash_ms {
            self.flash = Some(Flash {
                start_ms: self.last_activity_ms + self.config.idle_flash_ms,
                phase_index: 0,
            });
            events.push(GameEvent {
                t_ms: now_ms,
                kind: GameEventKind::FlashPromptOn {
                    tiles: self.lit_tiles(),
                },
            });
        }
        let half_period = (self.config.flash_period_ms / 2).max(1);
        if let Some(flash) = &mut self.flash {
            flash.phase_index = (now_ms - flash.start_ms) / half_period;
        }
        Ok(self.finish_step(before, now_ms, events))
    }

    /// Close the session. Further events and ticks are rejected.
    pub fn end(&mut self, now_ms: u64) -> SessionSummary {
        self.ended = true;
        SessionSummary {
            ms: now_ms.max(self.clock_ms),
            mode: self.config.mode,
            rounds_started: self.round,
            rounds_completed: self.rounds_completed,
            completion_degree: self.completion_degree,
            tallies: self.tallies.clone(),
            events: self.log.clone(),
        }
    }

    fn advance_clock(&mut self, t_ms: u64) -> Result<()> {
        if self.ended {
            return Err(Error::SessionEnded);
        }
        if t_ms < self.clock_ms {
            return Err(Error::TimeRegression {
                last: self.clock_ms,
                got: t_ms,
            });
        }
        self.clock_ms = t_ms;
        Ok(())
    }

    fn finish_step(&mut self, before: Frame, t_ms: u64, events: Vec<GameEvent>) -> Step {
        let after = self.frame(t_ms);
        self.log.extend(events.iter().cloned());
        Step {
            frame: (after.tiles != before.tiles).then_some(after),
            events,
        }
    }

    fn tally(&mut self, tile: TileId) {
        let round = self.round;
        let entry = match self.tallies.last_mut() {
            Some(t) if t.round == round => t,
            _ => {
                self.tallies.push(RoundTally {
                    round,
                    ..Default::default()
                });
                self.tallies.last_mut().expect("just pushed")
            }
        };
        match tile.side() {
            Side::Parent => entry.parent_presses += 1,
            Side::Child => entry.child_presses += 1,
        }
    }

    fn limit_reached(&self) -> bool {
        self.config.round_limit.is_some_and(|limit| self.round >= limit)
    }

    fn start_round(&mut self, t_ms: u64, events: &mut Vec<GameEvent>) {
        if self.limit_reached() {
            self.phase = Phase::Finished;
            return;
        }
        self.round += 1;
        self.phase = match self.config.mode {
            Mode::Imitation => {
                let parent: Vec<TileId> = TileId::side_tiles(Side::Parent).collect();
                let target = parent[self.rng.random_range(0..parent.len())];
                Phase::AwaitDemo { target }
            }
            Mode::Collaboration => Phase::Clearing {
                lit: self.draw_distinct(self.config.collab_lights_n as usize),
            },
        };
        events.push(GameEvent {
            t_ms,
            kind: GameEventKind::RoundStarted {
                round: self.round,
                lit: self.lit_tiles(),
            },
        });
    }

    /// Partial Fisher-Yates over the canonical tile order.
    fn draw_distinct(&mut self, n: usize) -> BTreeSet<TileId> {
        let mut pool: Vec<TileId> = TileId::all().collect();
        for i in 0..n {
            let j = self.rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        pool.into_iter().take(n).collect()
    }

    fn extra_press(&mut self, tile: TileId, t_ms: u64, events: &mut Vec<GameEvent>) {
        let (repeat_of, child_presses) = match &mut self.trailing {
            Some(tr) if tr.tile == tile => {
                tr.child_presses += 1;
                (Some(tr.round), Some(tr.child_presses))
            }
            _ => (None, None),
        };
        events.push(GameEvent {
            t_ms,
            kind: GameEventKind::ExtraPress {
                round: self.round,
                tile,
                repeat_of,
                child_presses,
            },
        });
    }

    fn imitation_press(&mut self, tile: TileId, t: u64, events: &mut Vec<GameEvent>) {
        let round = self.round;
        match self.phase.clone() {
            Phase::AwaitDemo { target } if tile == target => {
                self.trailing = None;
                self.phase = Phase::AwaitImitation {
                    demo_tile: target,
                    expected: target.mirror(),
                    demo_press_count: 1,
                };
                events.push(GameEvent {
                    t_ms: t,
                    kind: GameEventKind::DemoPressed {
                        round,
                        tile,
                        demo_presses: 1,
                    },
                });
            }
            Phase::AwaitImitation {
                demo_tile,
                expected,
                demo_press_count,
            } => {
                if tile == demo_tile {
                    let count = demo_press_count + 1;
                    self.phase = Phase::AwaitImitation {
                        demo_tile,
                        expected,
                        demo_press_count: count,
                    };
                    events.push(GameEvent {
                        t_ms: t,
                        kind: GameEventKind::DemoPressed {
                            round,
                            tile,
                            demo_presses: count,
                        },
                    });
                } else if tile == expected {
                    events.push(GameEvent {
                        t_ms: t,
                        kind: GameEventKind::ImitationCompleted {
                            round,
                            tile,
                            demo_presses: demo_press_count,
                            child_presses: 1,
                        },
                    });
                    self.rounds_completed += 1;
                    self.trailing = Some(Trailing {
                        round,
                        tile,
                        child_presses: 1,
                    });
                    self.start_round(t, events);
                } else if tile.side() == Side::Child {
                    events.push(GameEvent {
                        t_ms: t,
                        kind: GameEventKind::ImitationWrongTile {
                            round,
                            tile,
                            expected,
                        },
                    });
                } else {
                    self.extra_press(tile, t, events);
                }
            }
            _ => self.extra_press(tile, t, events),
        }
    }

    fn collaboration_press(&mut self, tile: TileId, t: u64, events: &mut Vec<GameEvent>) {
        let round = self.round;
        let Phase::Clearing { lit } = &mut self.phase else {
            self.extra_press(tile, t, events);
            return;
        };
        if !lit.remove(&tile) {
            self.extra_press(tile, t, events);
            return;
        }
        let remaining = lit.len() as u32;
        events.push(GameEvent {
            t_ms: t,
            kind: GameEventKind::TileExtinguished {
                round,
                tile,
                remaining,
            },
        });
        if remaining == 0 {
            self.completion_degree += 1;
            self.rounds_completed += 1;
            events.push(GameEvent {
                t_ms: t,
                kind: GameEventKind::RoundCompleted {
                    round,
                    completion_degree: self.completion_degree,
                },
            });
            self.start_round(t, events);
        }
    }
}

pub fn new_session(config: SessionConfig) -> Result<(Session, Frame, Vec<GameEvent>)> {
    Session::new(config)
}
