//! Grid geometry and the visual/event vocabulary shared by the engine,
//! the session log and the wire protocol.
//!
//! The mat is two mirrored 3x2 halves. The parent half occupies canonical
//! indices 0..6 (row-major), the child half 6..12.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub const ROWS: u8 = 3;
pub const COLS: u8 = 2;
pub const TILES_PER_SIDE: usize = (ROWS * COLS) as usize;
pub const TILE_COUNT: usize = 2 * TILES_PER_SIDE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Parent,
    Child,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Parent => Side::Child,
            Side::Child => Side::Parent,
        }
    }

    fn letter(self) -> char {
        match self {
            Side::Parent => 'P',
            Side::Child => 'C',
        }
    }
}

/// One of the 12 addressable tile positions.
///
/// Ordering follows the canonical index, so sorted collections of tiles are
/// stable across runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TileId {
    side: Side,
    row: u8,
    col: u8,
}

impl TileId {
    pub fn new(side: Side, row: u8, col: u8) -> Result<TileId, Error> {
        if row >= ROWS || col >= COLS {
            return Err(Error::InvalidTile(format!("{}-{row}-{col}", side.letter())));
        }
        Ok(TileId { side, row, col })
    }

    pub fn side(self) -> Side {
        self.side
    }

    pub fn row(self) -> u8 {
        self.row
    }

    pub fn col(self) -> u8 {
        self.col
    }

    /// Same (row, col) on the other half of the mat.
    pub fn mirror(self) -> TileId {
        TileId {
            side: self.side.opposite(),
            ..self
        }
    }

    /// Same side and row, other column.
    pub fn lateral_reversal(self) -> TileId {
        TileId {
            col: COLS - 1 - self.col,
            ..self
        }
    }

    pub fn canonical_index(self) -> usize {
        let side_base = match self.side {
            Side::Parent => 0,
            Side::Child => TILES_PER_SIDE,
        };
        side_base + (self.row * COLS + self.col) as usize
    }

    pub fn from_index(index: usize) -> Option<TileId> {
        if index >= TILE_COUNT {
            return None;
        }
        let side = if index < TILES_PER_SIDE {
            Side::Parent
        } else {
            Side::Child
        };
        let local = (index % TILES_PER_SIDE) as u8;
        Some(TileId {
            side,
            row: local / COLS,
            col: local % COLS,
        })
    }

    /// All 12 tiles in canonical order.
    pub fn all() -> impl Iterator<Item = TileId> + Clone {
        (0..TILE_COUNT).map(|i| TileId::from_index(i).expect("index in range"))
    }

    pub fn side_tiles(side: Side) -> impl Iterator<Item = TileId> + Clone {
        TileId::all().filter(move |t| t.side == side)
    }
}

impl PartialOrd for TileId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TileId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.canonical_index().cmp(&other.canonical_index())
    }
}

impl fmt::Display for TileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.side.letter(), self.row, self.col)
    }
}

impl FromStr for TileId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidTile(s.to_string());
        let mut parts = s.split('-');
        let side = match parts.next() {
            Some("P") => Side::Parent,
            Some("C") => Side::Child,
            _ => return Err(bad()),
        };
        let mut coord = || -> Result<u8, Error> {
            let p = parts.next().ok_or_else(bad)?;
            if p.len() != 1 {
                return Err(bad());
            }
            p.parse::<u8>().map_err(|_| bad())
        };
        let row = coord()?;
        let col = coord()?;
        if parts.next().is_some() {
            return Err(bad());
        }
        TileId::new(side, row, col).map_err(|_| bad())
    }
}

impl Serialize for TileId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TileId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub type Rgb = [u8; 3];

pub const BLACK: Rgb = [0, 0, 0];

/// Per-tile base colors. Each (row, col) position has its own color, shared
/// by both halves so a mirrored target matches the demonstrated tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Palette([Rgb; TILE_COUNT]);

const DEFAULT_POSITION_COLORS: [Rgb; TILES_PER_SIDE] = [
    [230, 40, 40],
    [40, 120, 230],
    [250, 200, 30],
    [40, 190, 80],
    [150, 60, 200],
    [250, 130, 20],
];

impl Default for Palette {
    fn default() -> Self {
        let mut colors = [BLACK; TILE_COUNT];
        for tile in TileId::all() {
            colors[tile.canonical_index()] =
                DEFAULT_POSITION_COLORS[(tile.row * COLS + tile.col) as usize];
        }
        Palette(colors)
    }
}

impl Palette {
    pub fn color(&self, tile: TileId) -> Rgb {
        self.0[tile.canonical_index()]
    }

    pub fn set(&mut self, tile: TileId, rgb: Rgb) {
        self.0[tile.canonical_index()] = rgb;
    }
}

impl Serialize for Palette {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(TILE_COUNT))?;
        for tile in TileId::all() {
            map.serialize_entry(&tile, &self.color(tile))?;
        }
        map.end()
    }
}

/// Missing entries fall back to the default color for that tile.
impl<'de> Deserialize<'de> for Palette {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let entries = std::collections::BTreeMap::<TileId, Rgb>::deserialize(deserializer)?;
        let mut palette = Palette::default();
        for (tile, rgb) in entries {
            palette.set(tile, rgb);
        }
        Ok(palette)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TileVisual {
    pub rgb: Rgb,
    pub lit: bool,
    pub flashing: bool,
}

impl TileVisual {
    pub const DARK: TileVisual = TileVisual {
        rgb: BLACK,
        lit: false,
        flashing: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Press,
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SensorEvent {
    pub tile: TileId,
    pub edge: Edge,
    pub t_ms: u64,
}

impl SensorEvent {
    pub fn press(tile: TileId, t_ms: u64) -> Self {
        SensorEvent {
            tile,
            edge: Edge::Press,
            t_ms,
        }
    }

    pub fn release(tile: TileId, t_ms: u64) -> Self {
        SensorEvent {
            tile,
            edge: Edge::Release,
            t_ms,
        }
    }
}

/// Complete visual state of the mat at one instant, in canonical tile order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub t_ms: u64,
    pub tiles: [TileVisual; TILE_COUNT],
}

impl Frame {
    pub fn dark(t_ms: u64) -> Frame {
        Frame {
            t_ms,
            tiles: [TileVisual::DARK; TILE_COUNT],
        }
    }

    pub fn tile(&self, tile: TileId) -> TileVisual {
        self.tiles[tile.canonical_index()]
    }

    pub fn lit_tiles(&self) -> Vec<TileId> {
        TileId::all().filter(|&t| self.tile(t).lit).collect()
    }
}

pub fn mirror(tile: TileId) -> TileId {
    tile.mirror()
}

pub fn canonical_index(tile: TileId) -> usize {
    tile.canonical_index()
}
