//! Geometry of the infinite triangular grid.
//!
//! Coordinates are axial: `q` counts steps along the ENE basis vector,
//! `r` along the N basis vector. The cartesian embedding is
//! `pos(q, r) = (q * sqrt(3)/2, q/2 + r)`, which places every coordinate on a
//! node of the regular triangular grid with north pointing up. All public
//! contracts are integer-only; the embedding exists for reasoning and SVG
//! layout.

use std::fmt;
use std::ops::{Add, Sub};

use crate::error::GridError;

/// A node of the triangular grid in axial coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct GridCoord {
    pub q: i32,
    pub r: i32,
}

impl GridCoord {
    pub const ORIGIN: GridCoord = GridCoord { q: 0, r: 0 };

    pub fn new(q: i32, r: i32) -> Self {
        GridCoord { q, r }
    }

    /// The adjacent node in direction `d`.
    ///
    /// Only the six directions along grid axes name edges; perpendicular
    /// directions are rejected.
    pub fn neighbor(self, d: Direction) -> Result<GridCoord, GridError> {
        match d.offset() {
            Some((dq, dr)) => Ok(GridCoord::new(self.q + dq, self.r + dr)),
            None => Err(GridError::NotAnEdgeDirection(d)),
        }
    }

    /// Cartesian embedding, scaled by 2 to stay integral: `(q*sqrt3, q + 2r)`
    /// up to the sqrt(3) factor on x. Used by SVG layout only.
    pub fn embed_x2(self) -> (i32, i32) {
        (self.q, self.q + 2 * self.r)
    }
}

impl Add for GridCoord {
    type Output = GridCoord;
    fn add(self, o: GridCoord) -> GridCoord {
        GridCoord::new(self.q + o.q, self.r + o.r)
    }
}

impl Sub for GridCoord {
    type Output = GridCoord;
    fn sub(self, o: GridCoord) -> GridCoord {
        GridCoord::new(self.q - o.q, self.r - o.r)
    }
}

impl fmt::Display for GridCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.q, self.r)
    }
}

/// Rotation handedness: `Plus` turns counterclockwise, `Minus` clockwise.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// One of the twelve cardinal directions, 30 degrees apart.
///
/// Index 0 is N and the ring advances counterclockwise. Even indices are the
/// main-axis directions (edges of the grid), odd indices the perpendicular
/// ones.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Direction(u8);

pub const N: Direction = Direction(0);
pub const NNW: Direction = Direction(1);
pub const WNW: Direction = Direction(2);
pub const W: Direction = Direction(3);
pub const WSW: Direction = Direction(4);
pub const SSW: Direction = Direction(5);
pub const S: Direction = Direction(6);
pub const SSE: Direction = Direction(7);
pub const ESE: Direction = Direction(8);
pub const E: Direction = Direction(9);
pub const ENE: Direction = Direction(10);
pub const NNE: Direction = Direction(11);

const NAMES: [&str; 12] = [
    "N", "NNW", "WNW", "W", "WSW", "SSW", "S", "SSE", "ESE", "E", "ENE", "NNE",
];

/// Axial offsets of the six main directions, indexed by `ring() / 2`:
/// N, WNW, WSW, S, ESE, ENE.
const MAIN_OFFSETS: [(i32, i32); 6] = [(0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0)];

/// All twelve directions in ring order.
pub const ALL_DIRECTIONS: [Direction; 12] = {
    let mut a = [Direction(0); 12];
    let mut i = 0;
    while i < 12 {
        a[i] = Direction(i as u8);
        i += 1;
    }
    a
};

/// The six main-axis directions (D_m) in ring order.
pub const MAIN_DIRECTIONS: [Direction; 6] = [N, WNW, WSW, S, ESE, ENE];

/// The six perpendicular directions (D_p) in ring order.
pub const PERP_DIRECTIONS: [Direction; 6] = [NNW, W, SSW, SSE, E, NNE];

impl Direction {
    /// Direction with the given ring index (0..12, counterclockwise from N).
    pub fn from_ring(i: u8) -> Direction {
        assert!(i < 12);
        Direction(i)
    }

    pub fn from_name(s: &str) -> Option<Direction> {
        NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(s))
            .map(|i| Direction(i as u8))
    }

    pub fn ring(self) -> u8 {
        self.0
    }

    /// True for the six directions along grid axes (D_m).
    pub fn is_main(self) -> bool {
        self.0 % 2 == 0
    }

    /// True for the six perpendicular directions (D_p).
    pub fn is_perp(self) -> bool {
        !self.is_main()
    }

    /// Index into six-element main-direction tables, None for D_p.
    pub fn main_index(self) -> Option<usize> {
        self.is_main().then_some(self.0 as usize / 2)
    }

    /// The main direction with the given table index (0..6).
    pub fn main(i: usize) -> Direction {
        MAIN_DIRECTIONS[i]
    }

    /// Axial offset of a main direction; None for D_p.
    pub fn offset(self) -> Option<(i32, i32)> {
        self.main_index().map(|i| MAIN_OFFSETS[i])
    }

    pub fn opposite(self) -> Direction {
        Direction((self.0 + 6) % 12)
    }

    /// Rotate counterclockwise by `steps * 30` degrees (negative allowed).
    pub fn rot30(self, steps: i32) -> Direction {
        Direction((self.0 as i32 + steps).rem_euclid(12) as u8)
    }

    /// Rotate counterclockwise by `steps * 60` degrees. Stays within D_m/D_p.
    pub fn rot60(self, steps: i32) -> Direction {
        self.rot30(2 * steps)
    }

    pub fn name(self) -> &'static str {
        NAMES[self.0 as usize]
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rotate `d` by `degrees` (a multiple of 30), counterclockwise when `s` is
/// `Plus` and clockwise when `Minus`. Zero degrees is the identity; negative
/// values are normalized mod 360.
pub fn rotate(d: Direction, degrees: i32, s: Sign) -> Result<Direction, GridError> {
    if degrees % 30 != 0 {
        return Err(GridError::BadRotation(degrees));
    }
    let steps = degrees / 30;
    Ok(match s {
        Sign::Plus => d.rot30(steps),
        Sign::Minus => d.rot30(-steps),
    })
}

/// Integer stripe index of `v` for direction `d`: strictly increasing along
/// `d`, constant along `rotate(d, 90, +)`, with unit steps between adjacent
/// stripes of the grid.
///
/// Table (derived from cartesian dot products, scaled to primitive integers):
/// E: q, W: -q, NNE: q+r, SSW: -(q+r), NNW: r, SSE: -r, N: q+2r, S: -(q+2r),
/// ENE: 2q+r, WSW: -(2q+r), ESE: q-r, WNW: r-q.
pub fn proj(v: GridCoord, d: Direction) -> i64 {
    let q = v.q as i64;
    let r = v.r as i64;
    match d.ring() {
        0 => q + 2 * r,    // N
        1 => r,            // NNW
        2 => r - q,        // WNW
        3 => -q,           // W
        4 => -(2 * q + r), // WSW
        5 => -(q + r),     // SSW
        6 => -(q + 2 * r), // S
        7 => -r,           // SSE
        8 => q - r,        // ESE
        9 => q,            // E
        10 => 2 * q + r,   // ENE
        11 => q + r,       // NNE
        _ => unreachable!(),
    }
}

/// The grid axis through `anchor` in direction `dir`.
///
/// Membership is an equivalence: any member anchors the same axis.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Axis {
    pub anchor: GridCoord,
    pub dir: Direction,
}

impl Axis {
    pub fn new(anchor: GridCoord, dir: Direction) -> Self {
        Axis { anchor, dir }
    }
}

/// Whether `v` lies on axis `a`: the projections perpendicular to the axis
/// direction agree.
pub fn on_axis(v: GridCoord, a: Axis) -> bool {
    let perp = a.dir.rot30(3);
    proj(v, perp) == proj(a.anchor, perp)
}
