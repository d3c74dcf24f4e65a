//! Pointy-top hexagonal coordinates.
//!
//! Cells are addressed by axial `(q, r)`. The forward map to the planar
//! model frame is
//!
//! ```text
//! x = size * (√3 * q + √3/2 * r)
//! y = size * (3/2 * r)
//! ```
//!
//! and the inverse is its exact algebraic inverse, followed by cube rounding.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Tolerance on `x + y + z` accepted by [`cube_round`].
pub const CUBE_SUM_TOLERANCE: f64 = 1e-9;

/// Neighbor offsets in their fixed enumeration order.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

/// Integer axial cell address.
///
/// Ordering is row-major: by `r`, then by `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxialCoord {
    pub q: i32,
    pub r: i32,
}

impl AxialCoord {
    pub const ORIGIN: AxialCoord = AxialCoord { q: 0, r: 0 };

    pub const fn new(q: i32, r: i32) -> Self {
        AxialCoord { q, r }
    }

    pub fn to_cube(self) -> CubeCoord {
        CubeCoord {
            x: self.q,
            y: -self.q - self.r,
            z: self.r,
        }
    }

    /// The six adjacent cells, in [`NEIGHBOR_OFFSETS`] order.
    pub fn neighbors(self) -> [AxialCoord; 6] {
        NEIGHBOR_OFFSETS.map(|(dq, dr)| AxialCoord::new(self.q + dq, self.r + dr))
    }

    pub fn is_adjacent(self, other: AxialCoord) -> bool {
        hex_distance(self, other) == 1
    }
}

impl Ord for AxialCoord {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.r, self.q).cmp(&(other.r, other.q))
    }
}

impl PartialOrd for AxialCoord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for AxialCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.r)
    }
}

impl From<(i32, i32)> for AxialCoord {
    fn from((q, r): (i32, i32)) -> Self {
        AxialCoord::new(q, r)
    }
}

/// Axial coordinate with real components, as produced by the inverse transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalAxial {
    pub q: f64,
    pub r: f64,
}

impl FractionalAxial {
    pub fn new(q: f64, r: f64) -> Self {
        FractionalAxial { q, r }
    }

    pub fn to_cube(self) -> FractionalCube {
        FractionalCube {
            x: self.q,
            y: -self.q - self.r,
            z: self.r,
        }
    }
}

impl From<AxialCoord> for FractionalAxial {
    fn from(c: AxialCoord) -> Self {
        FractionalAxial::new(c.q as f64, c.r as f64)
    }
}

/// Integer cube coordinate; always satisfies `x + y + z == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CubeCoord {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl CubeCoord {
    pub fn to_axial(self) -> AxialCoord {
        AxialCoord::new(self.x, self.z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalCube {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Point in the planar model frame, meters east (`x`) and north (`y`).
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
}

impl WorldPoint {
    pub fn new(x: f64, y: f64) -> Self {
        WorldPoint { x, y }
    }

    pub fn distance(self, other: WorldPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Physical geometry of one regular hexagonal cell.
///
/// `size` is the edge length (center to corner), `width` the distance
/// between opposite edges (and between adjacent centers), `area` the
/// hexagon's area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HexMetrics {
    size: f64,
    width: f64,
    area: f64,
}

impl HexMetrics {
    pub fn from_size(size: f64) -> Result<Self> {
        if !size.is_finite() || size <= 0.0 {
            return Err(Error::invalid(format!(
                "hex size must be positive and finite, got {size}"
            )));
        }
        Ok(HexMetrics {
            size,
            width: SQRT_3 * size,
            area: 1.5 * SQRT_3 * size * size,
        })
    }

    pub fn size(&self) -> f64 {
        self.size
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn area(&self) -> f64 {
        self.area
    }
}

/// Metrics of a hexagon whose flat-to-flat width is `width_m` meters.
pub fn metrics_from_width(width_m: f64) -> Result<HexMetrics> {
    if !width_m.is_finite() || width_m <= 0.0 {
        return Err(Error::invalid(format!(
            "hex width must be positive and finite, got {width_m}"
        )));
    }
    HexMetrics::from_size(width_m / SQRT_3)
}

/// Center of a (possibly fractional) axial coordinate in the model frame.
pub fn axial_to_world(c: impl Into<FractionalAxial>, m: &HexMetrics) -> WorldPoint {
    let c = c.into();
    WorldPoint {
        x: m.size * (SQRT_3 * c.q + SQRT_3 / 2.0 * c.r),
        y: m.size * (1.5 * c.r),
    }
}

pub fn world_to_fractional(p: WorldPoint, m: &HexMetrics) -> FractionalAxial {
    FractionalAxial {
        q: (SQRT_3 / 3.0 * p.x - p.y / 3.0) / m.size,
        r: (2.0 / 3.0 * p.y) / m.size,
    }
}

/// The cell whose hexagon contains `p`.
pub fn world_to_axial(p: WorldPoint, m: &HexMetrics) -> AxialCoord {
    let frac = world_to_fractional(p, m).to_cube();
    // Built with y = -x - z, so the sum is zero up to one rounding.
    round_cube_unchecked(frac).to_axial()
}

/// Rounds a fractional cube triple to the nearest hex center.
///
/// The component with the largest rounding delta is recomputed from the
/// other two; on equal deltas `x` is preferred over `y`, `y` over `z`.
pub fn cube_round(f: FractionalCube) -> Result<CubeCoord> {
    if !(f.x.is_finite() && f.y.is_finite() && f.z.is_finite()) {
        return Err(Error::invalid("cube components must be finite"));
    }
    let sum = f.x + f.y + f.z;
    if sum.abs() > CUBE_SUM_TOLERANCE {
        return Err(Error::invalid(format!(
            "cube components must sum to zero, got {sum:e}"
        )));
    }
    Ok(round_cube_unchecked(f))
}

fn round_cube_unchecked(f: FractionalCube) -> CubeCoord {
    let (rx, ry, rz) = (f.x.round(), f.y.round(), f.z.round());
    let (dx, dy, dz) = ((rx - f.x).abs(), (ry - f.y).abs(), (rz - f.z).abs());
    let (mut x, mut y, mut z) = (rx as i32, ry as i32, rz as i32);
    if dx >= dy && dx >= dz {
        x = -y - z;
    } else if dy >= dz {
        y = -x - z;
    } else {
        z = -x - y;
    }
    CubeCoord { x, y, z }
}

/// Six neighbors of `c` in [`NEIGHBOR_OFFSETS`] order.
pub fn neighbors(c: AxialCoord) -> [AxialCoord; 6] {
    c.neighbors()
}

/// Number of steps between two cells along the hex lattice.
pub fn hex_distance(a: AxialCoord, b: AxialCoord) -> u64 {
    let dq = i64::from(a.q) - i64::from(b.q);
    let dr = i64::from(a.r) - i64::from(b.r);
    let ds = -dq - dr;
    (dq.unsigned_abs() + dr.unsigned_abs() + ds.unsigned_abs()) / 2
}
