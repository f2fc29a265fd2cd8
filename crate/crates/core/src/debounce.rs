//! Contact-level debouncing for the sensor switch layer.
//!
//! Raw samples are change points of a piecewise-constant signal: a tile's
//! level holds from one sample until the next sample for that tile. A tile
//! is debounced to "pressed" once its level has stayed at or above the
//! threshold for `stable_ms`, and back to "released" symmetrically. Events
//! are stamped at the instant the stability window is satisfied, which may
//! fall between samples.

use crate::error::{Error, Result};
use crate::grid::{Edge, SensorEvent, TileId, TILE_COUNT};

pub const DEFAULT_STABLE_MS: u64 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawSample {
    pub tile: TileId,
    pub level: u16,
    pub t_ms: u64,
}

impl RawSample {
    pub fn new(tile: TileId, level: u16, t_ms: u64) -> Self {
        RawSample { tile, level, t_ms }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Channel {
    /// Debounced state as last reported.
    pressed: bool,
    /// Raw state (level >= threshold) and when it last changed.
    raw_on: bool,
    since: u64,
}

impl Channel {
    fn deadline(&self, stable_ms: u64) -> Option<u64> {
        (self.raw_on != self.pressed).then(|| self.since + stable_ms)
    }
}

/// Stateful per-tile debouncer. Feed samples in timestamp order.
#[derive(Debug, Clone)]
pub struct Debouncer {
    threshold: u16,
    stable_ms: u64,
    channels: [Channel; TILE_COUNT],
    last_t: Option<u64>,
}

impl Debouncer {
    pub fn new(threshold: u16, stable_ms: u64) -> Self {
        Debouncer {
            threshold,
            stable_ms,
            channels: [Channel::default(); TILE_COUNT],
            last_t: None,
        }
    }

    pub fn is_pressed(&self, tile: TileId) -> bool {
        self.channels[tile.canonical_index()].pressed
    }

    pub fn push(&mut self, sample: RawSample) -> Result<Vec<SensorEvent>> {
        let mut out = self.advance(sample.t_ms)?;
        let stable_ms = self.stable_ms;
        let ch = &mut self.channels[sample.tile.canonical_index()];
        let on = sample.level >= self.threshold;
        if on != ch.raw_on {
            ch.raw_on = on;
            ch.since = sample.t_ms;
            if ch.deadline(stable_ms) == Some(sample.t_ms) {
                out.push(Self::flip(ch, sample.tile, sample.t_ms));
            }
        }
        Ok(out)
    }

    /// Emit every transition whose stability window closes at or before
    /// `t_ms`, assuming each tile's level has held since its last sample.
    pub fn advance(&mut self, t_ms: u64) -> Result<Vec<SensorEvent>> {
        if let Some(last) = self.last_t {
            if t_ms < last {
                return Err(Error::TimeRegression { last, got: t_ms });
            }
        }
        self.last_t = Some(t_ms);

        let mut due: Vec<(u64, usize)> = self
            .channels
            .iter()
            .enumerate()
            .filter_map(|(i, ch)| ch.deadline(self.stable_ms).map(|d| (d, i)))
            .filter(|&(d, _)| d <= t_ms)
            .collect();
        due.sort_unstable();
        Ok(due
            .into_iter()
            .map(|(d, i)| {
                let tile = TileId::from_index(i).expect("channel index");
                Self::flip(&mut self.channels[i], tile, d)
            })
            .collect())
    }

    fn flip(ch: &mut Channel, tile: TileId, t_ms: u64) -> SensorEvent {
        ch.pressed = !ch.pressed;
        SensorEvent {
            tile,
            edge: if ch.pressed { Edge::Press } else { Edge::Release },
            t_ms,
        }
    }
}

/// Debounce a whole raw trace. Transitions still pending after the last
/// sample are not reported.
pub fn debounce<I>(raw: I, threshold: u16, stable_ms: u64) -> Result<Vec<SensorEvent>>
where
    I: IntoIterator<Item = RawSample>,
{
    let mut debouncer = Debouncer::new(threshold, stable_ms);
    let mut out = Vec::new();
    for (i, sample) in raw.into_iter().enumerate() {
        let events = debouncer.push(sample).map_err(|e| match e {
            Error::TimeRegression { last, got } => {
                Error::Malformed(format!("sample {i} at {got}ms precedes {last}ms"))
            }
            other => other,
        })?;
        out.extend(events);
    }
    Ok(out)
}
