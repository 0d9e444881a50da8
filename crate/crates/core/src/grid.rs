//! The initial map of a `W x H` 4-connected pixel grid.
//!
//! Every edge of the map is a linel of the interpixel lattice and each of its
//! two darts one orientation of that linel. Darts are numbered row by row
//! over pointel rows: the `W` horizontal linels of row `y`, then (if
//! `y < H`) the `W + 1` vertical linels between pointel rows `y` and `y + 1`.
//! Positive darts point east (horizontal) or north (vertical), and
//! `alpha(d) = -d`.
//!
//! A dart belongs to the pixel (or the background) on its right-hand side
//! when looking along the image with rows growing downward, so each pixel's
//! sigma cycle walks its border `left side up, top east, right side down,
//! bottom west`. Consequently every sigma cycle is a closed loop of linels and
//! the phi cycles are exactly the darts leaving a common pointel.

use alloc::vec::Vec;
use core::fmt;

use crate::map::{CombMap, Dart, MapError};

/// Corner of the interpixel lattice; `0 <= x <= W`, `0 <= y <= H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pointel {
    pub x: i32,
    pub y: i32,
}

impl Pointel {
    pub const fn new(x: i32, y: i32) -> Self {
        Pointel { x, y }
    }

    pub fn step(self, code: FreemanCode) -> Pointel {
        let (dx, dy) = code.delta();
        Pointel::new(self.x + dx, self.y + dy)
    }
}

/// Unit move on the 4-connected lattice. `North` is `-y` (rows grow downward).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum FreemanCode {
    East = 0,
    North = 1,
    West = 2,
    South = 3,
}

impl FreemanCode {
    pub const ALL: [FreemanCode; 4] = [
        FreemanCode::East,
        FreemanCode::North,
        FreemanCode::West,
        FreemanCode::South,
    ];

    pub fn from_u8(v: u8) -> Option<FreemanCode> {
        FreemanCode::ALL.get(v as usize).copied()
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn delta(self) -> (i32, i32) {
        match self {
            FreemanCode::East => (1, 0),
            FreemanCode::North => (0, -1),
            FreemanCode::West => (-1, 0),
            FreemanCode::South => (0, 1),
        }
    }

    pub fn opposite(self) -> FreemanCode {
        FreemanCode::ALL[(self as usize + 2) % 4]
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, FreemanCode::East | FreemanCode::West)
    }

    /// Codes are adjacent when they differ by a quarter turn.
    pub fn is_adjacent(self, other: FreemanCode) -> bool {
        (self as u8 + 4 - other as u8) % 2 == 1
    }
}

impl fmt::Display for FreemanCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

/// A 4-connected digital path: a start pointel and a sequence of moves.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FreemanChain {
    pub start: Pointel,
    pub codes: Vec<FreemanCode>,
}

impl FreemanChain {
    pub fn new(start: Pointel, codes: Vec<FreemanCode>) -> Self {
        FreemanChain { start, codes }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn end(&self) -> Pointel {
        self.codes.iter().fold(self.start, |p, &c| p.step(c))
    }

    pub fn is_closed(&self) -> bool {
        !self.codes.is_empty() && self.end() == self.start
    }

    /// The `len() + 1` visited pointels (the last equals the first on a loop).
    pub fn points(&self) -> Vec<Pointel> {
        let mut out = Vec::with_capacity(self.codes.len() + 1);
        let mut p = self.start;
        out.push(p);
        for &c in &self.codes {
            p = p.step(c);
            out.push(p);
        }
        out
    }

    /// Each move as `(start pointel, code)`.
    pub fn linels(&self) -> impl Iterator<Item = (Pointel, FreemanCode)> + '_ {
        let mut p = self.start;
        self.codes.iter().map(move |&c| {
            let here = p;
            p = p.step(c);
            (here, c)
        })
    }

    /// Twice the signed shoelace area, in lattice units. Positive for the
    /// outer boundaries produced by this crate.
    pub fn signed_area2(&self) -> i64 {
        let mut acc = 0i64;
        let mut p = self.start;
        for &c in &self.codes {
            let q = p.step(c);
            acc += p.x as i64 * q.y as i64 - q.x as i64 * p.y as i64;
            p = q;
        }
        acc
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn extend_with(&mut self, other: &FreemanChain) {
        if self.codes.is_empty() {
            self.start = other.start;
        }
        debug_assert_eq!(self.end(), other.start);
        self.codes.extend_from_slice(&other.codes);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Linel {
    Horizontal { x: i32, y: i32 },
    Vertical { x: i32, y: i32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridError;

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("grid dimensions must be positive")
    }
}

impl core::error::Error for GridError {}

/// Initial map `G0` of a pixel grid with its linel embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridMap {
    width: u32,
    height: u32,
    map: CombMap,
}

impl GridMap {
    pub fn new(width: u32, height: u32) -> Result<Self, GridError> {
        if width == 0 || height == 0 || width > 8192 || height > 8192 {
            return Err(GridError);
        }
        let mut grid = GridMap {
            width,
            height,
            map: CombMap::with_slots(0),
        };
        let edges = grid.edge_count();
        let mut parts = Vec::with_capacity(2 * edges);
        for e in 1..=edges as i32 {
            for d in [Dart::new(e).unwrap(), Dart::new(-e).unwrap()] {
                parts.push((d, grid.next_on_owner(d), d.negated()));
            }
        }
        grid.map = CombMap::from_parts(&parts).expect("grid darts are consistent");
        Ok(grid)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// `2WH + W + H` linels.
    pub fn edge_count(&self) -> usize {
        let (w, h) = (self.width as usize, self.height as usize);
        2 * w * h + w + h
    }

    pub fn map(&self) -> &CombMap {
        &self.map
    }

    fn stride(&self) -> i32 {
        2 * self.width as i32 + 1
    }

    fn h_dart(&self, x: i32, y: i32) -> Dart {
        Dart::new(y * self.stride() + x + 1).unwrap()
    }

    fn v_dart(&self, x: i32, y: i32) -> Dart {
        Dart::new(y * self.stride() + self.width as i32 + x + 1).unwrap()
    }

    fn decode(&self, d: Dart) -> Option<Linel> {
        let e = d.id().unsigned_abs() as usize;
        if e == 0 || e > self.edge_count() {
            return None;
        }
        let t = (e - 1) as i32;
        let (y, r) = (t / self.stride(), t % self.stride());
        Some(if r < self.width as i32 {
            Linel::Horizontal { x: r, y }
        } else {
            Linel::Vertical {
                x: r - self.width as i32,
                y,
            }
        })
    }

    fn pixel_index(&self, x: i32, y: i32) -> Option<usize> {
        (x >= 0 && y >= 0 && x < self.width as i32 && y < self.height as i32)
            .then(|| y as usize * self.width as usize + x as usize)
    }

    /// The oriented linel of `d`.
    pub fn linel_of(&self, d: Dart) -> Result<(Pointel, FreemanCode), MapError> {
        let positive = d.id() > 0;
        Ok(match self.decode(d).ok_or(MapError::UnknownDart(d))? {
            Linel::Horizontal { x, y } if positive => (Pointel::new(x, y), FreemanCode::East),
            Linel::Horizontal { x, y } => (Pointel::new(x + 1, y), FreemanCode::West),
            Linel::Vertical { x, y } if positive => (Pointel::new(x, y + 1), FreemanCode::North),
            Linel::Vertical { x, y } => (Pointel::new(x, y), FreemanCode::South),
        })
    }

    /// Panicking variant of [`GridMap::linel_of`] for darts known to exist.
    pub fn linel(&self, d: Dart) -> (Pointel, FreemanCode) {
        self.linel_of(d).expect("dart belongs to the grid")
    }

    /// The dart leaving `p` with move `code`, if that linel lies in the grid.
    pub fn dart_at(&self, p: Pointel, code: FreemanCode) -> Option<Dart> {
        let (w, h) = (self.width as i32, self.height as i32);
        let (x, y) = (p.x, p.y);
        if x < 0 || y < 0 || x > w || y > h {
            return None;
        }
        match code {
            FreemanCode::East => (x < w).then(|| self.h_dart(x, y)),
            FreemanCode::West => (x >= 1).then(|| self.h_dart(x - 1, y).negated()),
            FreemanCode::North => (y >= 1).then(|| self.v_dart(x, y - 1)),
            FreemanCode::South => (y < h).then(|| self.v_dart(x, y).negated()),
        }
    }

    /// Zero-based index of the unoriented linel of `d`.
    pub fn edge_index(&self, d: Dart) -> usize {
        d.id().unsigned_abs() as usize - 1
    }

    /// Pixel (row-major index) on the right-hand side of `d`; `None` for the
    /// background.
    pub fn owner(&self, d: Dart) -> Option<usize> {
        let positive = d.id() > 0;
        match self.decode(d)? {
            Linel::Horizontal { x, y } if positive => self.pixel_index(x, y),
            Linel::Horizontal { x, y } => self.pixel_index(x, y - 1),
            Linel::Vertical { x, y } if positive => self.pixel_index(x, y),
            Linel::Vertical { x, y } => self.pixel_index(x - 1, y),
        }
    }

    /// The four darts of pixel `(x, y)` in sigma order: left, top, right, bottom.
    pub fn pixel_darts(&self, x: u32, y: u32) -> [Dart; 4] {
        let (x, y) = (x as i32, y as i32);
        [
            self.v_dart(x, y),
            self.h_dart(x, y),
            self.v_dart(x + 1, y).negated(),
            self.h_dart(x, y + 1).negated(),
        ]
    }

    /// The dart along the top border of pixel `(0, 0)`, owned by the background.
    pub fn background_dart(&self) -> Dart {
        self.h_dart(0, 0).negated()
    }

    pub fn is_background(&self, d: Dart) -> bool {
        self.owner(d).is_none()
    }

    /// The dart with the same owner leaving the end pointel of `d`.
    fn next_on_owner(&self, d: Dart) -> Dart {
        let (p, c) = self.linel(d);
        let end = p.step(c);
        let owner = self.owner(d);
        FreemanCode::ALL
            .iter()
            .filter_map(|&code| self.dart_at(end, code))
            .find(|&n| n != d.negated() && self.owner(n) == owner)
            .expect("every owner boundary is a closed loop")
    }

    /// Freeman chain of a sequence of base darts.
    pub fn chain_of(&self, darts: &[Dart]) -> FreemanChain {
        let start = darts.first().map(|&d| self.linel(d).0).unwrap_or_default();
        FreemanChain::new(start, darts.iter().map(|&d| self.linel(d).1).collect())
    }
}

impl Default for Pointel {
    fn default() -> Self {
        Pointel::new(0, 0)
    }
}
