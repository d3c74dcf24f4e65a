//! Depth-field statistics, flood-zone extraction and raster export.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexgrid::{world_to_axial, AxialCoord, HexMetrics, WorldPoint};
use crate::hydro::{Boundary, WaterGrid};
use crate::terrain::{GeoPoint, HexExtent, HexTerrain, NO_NEIGHBOR};

/// Depth at which the reported risk regions start, in meters.
pub const DEFAULT_RISK_THRESHOLD: f64 = 2.0;

pub const DEPTH_CSV_HEADER: &str = "q,r,elevation_m,depth_m";

/// Largest image [`render_depth_map`] will produce.
pub const MAX_IMAGE_PIXELS: u64 = 1 << 28;

/// Summary statistics of a depth field. `sum` adds depths, not volumes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FloodReport {
    pub count: u64,
    pub sum: f64,
    pub mean: f64,
    pub sample_std: f64,
    pub min: f64,
    pub max: f64,
}

impl FloodReport {
    /// Water volume in cubic meters for cells of the given metrics.
    pub fn volume(&self, metrics: &HexMetrics) -> f64 {
        self.sum * metrics.area()
    }
}

pub fn summarize(depths: &[f64]) -> Result<FloodReport> {
    if depths.iter().any(|d| d.is_nan()) {
        return Err(Error::invalid("depth field contains NaN"));
    }
    if depths.is_empty() {
        return Ok(FloodReport::default());
    }
    let n = depths.len();
    let sum: f64 = depths.iter().sum();
    let mean = sum / n as f64;
    let sample_std = if n > 1 {
        let ss: f64 = depths.iter().map(|d| (d - mean) * (d - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let min = depths.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = depths.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(FloodReport {
        count: n as u64,
        sum,
        mean,
        sample_std,
        min,
        max,
    })
}

/// A 6-connected group of cells at or above a depth threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloodZone {
    /// 1-based, in order of each zone's smallest `(r, q)` member.
    pub label: u32,
    /// Member cells in `(r, q)` order.
    pub cells: Vec<AxialCoord>,
    pub max_depth: f64,
    /// Square meters.
    pub area: f64,
}

/// Connected components of cells with `depth >= threshold`, deepest first.
pub fn flood_zones(grid: &WaterGrid, threshold: f64) -> Result<Vec<FloodZone>> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::invalid(format!(
            "threshold must be finite and >= 0, got {threshold}"
        )));
    }
    let terrain = grid.terrain();
    let depths = grid.depths();
    let qualifies = |i: usize| depths[i] >= threshold;
    let mut seen = vec![false; depths.len()];
    let mut zones = Vec::new();
    let mut queue = VecDeque::new();

    // Scanning in index order visits cells in (r, q) order, so discovery
    // order is the labeling order.
    for start in 0..depths.len() {
        if seen[start] || !qualifies(start) {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(i) = queue.pop_front() {
            members.push(i);
            for &j in grid.neighbor_indices(i) {
                if j == NO_NEIGHBOR {
                    continue;
                }
                let j = j as usize;
                if !seen[j] && qualifies(j) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        let max_depth = members
            .iter()
            .map(|&i| depths[i])
            .fold(f64::NEG_INFINITY, f64::max);
        zones.push(FloodZone {
            label: zones.len() as u32 + 1,
            area: members.len() as f64 * terrain.metrics().area(),
            cells: members.into_iter().map(|i| terrain.coord_of(i)).collect(),
            max_depth,
        });
    }
    zones.sort_by(|a, b| {
        b.max_depth
            .total_cmp(&a.max_depth)
            .then(a.label.cmp(&b.label))
    });
    Ok(zones)
}

pub type Rgb = [u8; 3];

/// Linear color ramp from `start` (zero depth) to `end` (field maximum).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorRamp {
    pub start: Rgb,
    pub end: Rgb,
}

impl Default for ColorRamp {
    fn default() -> Self {
        ColorRamp {
            start: [198, 219, 239],
            end: [8, 48, 107],
        }
    }
}

impl ColorRamp {
    pub fn at(&self, t: f64) -> Rgb {
        let t = t.clamp(0.0, 1.0);
        let mut out = [0u8; 3];
        for ((o, &s), &e) in out.iter_mut().zip(&self.start).zip(&self.end) {
            *o = (f64::from(s) + (f64::from(e) - f64::from(s)) * t).round() as u8;
        }
        out
    }
}

impl FromStr for ColorRamp {
    type Err = Error;

    /// Parses `R,G,B:R,G,B`.
    fn from_str(s: &str) -> Result<Self> {
        let color = |part: &str| -> Result<Rgb> {
            let v: Vec<u8> = part
                .split(',')
                .map(|c| c.trim().parse::<u8>())
                .collect::<Result<_, _>>()
                .map_err(|e| Error::invalid(format!("color '{part}': {e}")))?;
            <[u8; 3]>::try_from(v)
                .map_err(|_| Error::invalid(format!("color '{part}' needs three components")))
        };
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("ramp '{s}' must look like R,G,B:R,G,B")))?;
        Ok(ColorRamp {
            start: color(a)?,
            end: color(b)?,
        })
    }
}

const BACKGROUND: Rgb = [255, 255, 255];

/// Hillshade gray per cell, lit from the north-west at 45 degrees.
fn hillshade(grid: &WaterGrid) -> Vec<u8> {
    let terrain = grid.terrain();
    let h = terrain.heights();
    (0..terrain.len())
        .map(|i| {
            let c = terrain.world(terrain.coord_of(i));
            let (mut sxx, mut sxh, mut syy, mut syh) = (0.0, 0.0, 0.0, 0.0);
            for &j in grid.neighbor_indices(i) {
                if j == NO_NEIGHBOR {
                    continue;
                }
                let j = j as usize;
                let p = terrain.world(terrain.coord_of(j));
                let (dx, dy, dh) = (p.x - c.x, p.y - c.y, h[j] - h[i]);
                sxx += dx * dx;
                sxh += dx * dh;
                syy += dy * dy;
                syh += dy * dh;
            }
            let gx = if sxx > 0.0 { sxh / sxx } else { 0.0 };
            let gy = if syy > 0.0 { syh / syy } else { 0.0 };
            // Unit normal (-gx, -gy, 1)/|n| dotted with light (-1, 1, sqrt 2)/2.
            let norm = (gx * gx + gy * gy + 1.0).sqrt();
            let lit = (gx - gy + std::f64::consts::SQRT_2) / (2.0 * norm);
            (lit.clamp(0.0, 1.0) * 255.0).round() as u8
        })
        .collect()
}

/// Writes a binary PPM (P6) of the grid: wet cells on `ramp`, dry cells as
/// hillshaded terrain, outside cells white. North is up.
pub fn render_depth_map(
    grid: &WaterGrid,
    ramp: &ColorRamp,
    pixels_per_meter: f64,
    mut out: impl Write,
) -> Result<()> {
    if !(pixels_per_meter.is_finite() && pixels_per_meter > 0.0) {
        return Err(Error::invalid(format!(
            "pixels per meter must be positive, got {pixels_per_meter}"
        )));
    }
    if grid.is_empty() {
        return Err(Error::invalid("cannot render an empty grid"));
    }
    let terrain = grid.terrain();
    let m = terrain.metrics();
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in terrain.coords() {
        let p = terrain.world(c);
        min_x = min_x.min(p.x - m.width() / 2.0);
        max_x = max_x.max(p.x + m.width() / 2.0);
        min_y = min_y.min(p.y - m.size());
        max_y = max_y.max(p.y + m.size());
    }
    let w = ((max_x - min_x) * pixels_per_meter).ceil();
    let h = ((max_y - min_y) * pixels_per_meter).ceil();
    if !(w >= 1.0 && h >= 1.0) {
        return Err(Error::invalid(format!("image would be {w}x{h} pixels")));
    }
    if w * h > MAX_IMAGE_PIXELS as f64 {
        return Err(Error::Resource(format!(
            "image of {w}x{h} pixels exceeds {MAX_IMAGE_PIXELS}"
        )));
    }
    let (w, h) = (w as usize, h as usize);

    let depths = grid.depths();
    let field_max = depths.iter().cloned().fold(0.0, f64::max);
    let shade = hillshade(grid);
    let colors: Vec<Rgb> = depths
        .iter()
        .zip(&shade)
        .map(|(&d, &g)| {
            if d > 0.0 {
                ramp.at(d / field_max)
            } else {
                [g, g, g]
            }
        })
        .collect();

    let mut pixels = Vec::with_capacity(w * h * 3);
    for py in 0..h {
        let y = max_y - (py as f64 + 0.5) / pixels_per_meter;
        for px in 0..w {
            let x = min_x + (px as f64 + 0.5) / pixels_per_meter;
            let cell = world_to_axial(WorldPoint::new(x, y), m);
            let rgb = terrain.index_of(cell).map_or(BACKGROUND, |i| colors[i]);
            pixels.extend_from_slice(&rgb);
        }
    }
    write!(out, "P6\n{w} {h}\n255\n")?;
    out.write_all(&pixels)?;
    Ok(())
}

/// One row per cell, `(r, q)` order, six decimals.
pub fn export_depth_csv(grid: &WaterGrid, mut out: impl Write) -> Result<()> {
    let terrain = grid.terrain();
    writeln!(out, "{DEPTH_CSV_HEADER}")?;
    for (i, (&h, &d)) in terrain.heights().iter().zip(grid.depths()).enumerate() {
        let c = terrain.coord_of(i);
        writeln!(out, "{},{},{:.6},{:.6}", c.q, c.r, h, d)?;
    }
    Ok(())
}

/// Reads a depth CSV back into a closed-boundary grid with the given cell
/// metrics. The rows must cover a complete parallelogram block.
pub fn read_depth_csv(source: impl Read, metrics: HexMetrics) -> Result<WaterGrid> {
    let reader = BufReader::new(source);
    let mut rows: Vec<(AxialCoord, f64, f64, usize)> = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != DEPTH_CSV_HEADER {
                return Err(Error::parse(
                    lineno,
                    format!("expected header '{DEPTH_CSV_HEADER}'"),
                ));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                lineno,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let int = |s: &str| {
            s.parse::<i32>()
                .map_err(|_| Error::parse(lineno, format!("'{s}' is not an integer")))
        };
        let real = |s: &str| match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::parse(
                lineno,
                format!("'{s}' is not a finite number"),
            )),
        };
        let cell = AxialCoord::new(int(fields[0])?, int(fields[1])?);
        let (h, d) = (real(fields[2])?, real(fields[3])?);
        if d < 0.0 {
            return Err(Error::parse(lineno, format!("negative depth {d}")));
        }
        rows.push((cell, h, d, lineno));
    }
    if !saw_header {
        return Err(Error::parse(
            1,
            format!("missing header '{DEPTH_CSV_HEADER}'"),
        ));
    }
    let origin = GeoPoint { lat: 0.0, lon: 0.0 };
    if rows.is_empty() {
        let terrain = HexTerrain::new(
            metrics,
            origin,
            AxialCoord::ORIGIN,
            HexExtent::new(0, 0),
            vec![],
        )?;
        return Ok(WaterGrid::dry(terrain, Boundary::Closed));
    }

    let min_q = rows.iter().map(|r| r.0.q).min().unwrap_or(0);
    let max_q = rows.iter().map(|r| r.0.q).max().unwrap_or(0);
    let min_r = rows.iter().map(|r| r.0.r).min().unwrap_or(0);
    let max_r = rows.iter().map(|r| r.0.r).max().unwrap_or(0);
    let extent = HexExtent::new(
        (i64::from(max_q) - i64::from(min_q) + 1) as u32,
        (i64::from(max_r) - i64::from(min_r) + 1) as u32,
    );
    let n = extent.cell_count()?;
    if n != rows.len() {
        return Err(Error::parse(
            0,
            format!(
                "{} rows do not fill the {}x{} block of cells they span",
                rows.len(),
                extent.nq,
                extent.nr
            ),
        ));
    }
    let mut heights = vec![f64::NAN; n];
    let mut depths = vec![0.0; n];
    let min = AxialCoord::new(min_q, min_r);
    for &(cell, h, d, lineno) in &rows {
        let i = (cell.r - min.r) as usize * extent.nq as usize + (cell.q - min.q) as usize;
        if !heights[i].is_nan() {
            return Err(Error::parse(lineno, format!("duplicate cell {cell}")));
        }
        heights[i] = h;
        depths[i] = d;
    }
    let terrain = HexTerrain::new(metrics, origin, min, extent, heights)?;
    WaterGrid::with_depths(terrain, Boundary::Closed, depths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexgrid::metrics_from_width;
    use crate::terrain::{synthetic_terrain, SyntheticKind, SyntheticParams};
    use proptest::prelude::*;

    fn grid_with(n: u32, depths: impl Fn(AxialCoord) -> f64) -> WaterGrid {
        let t = synthetic_terrain(
            SyntheticKind::Plane,
            metrics_from_width(4.0).unwrap(),
            HexExtent::new(n, n),
            SyntheticParams {
                c: 1.0,
                ..Default::default()
            },
        )
        .unwrap();
        let d = t.coords().map(&depths).collect();
        WaterGrid::with_depths(t, Boundary::Closed, d).unwrap()
    }

    #[test]
    fn reported_statistics_are_consistent() {
        let mut field = vec![0.0; 21033];
        field[0] = 4.818;
        let rest = (597.884 - 4.818) / 21000.0;
        for d in &mut field[33..] {
            *d = rest;
        }
        let r = summarize(&field).unwrap();
        assert_eq!(r.count, 21033);
        assert!((r.sum - 597.884).abs() < 1e-9);
        assert!((r.mean - 0.028426).abs() < 5e-7);
        assert_eq!((r.min, r.max), (0.0, 4.818));
    }

    #[test]
    fn summarize_small_inputs() {
        assert_eq!(summarize(&[]).unwrap(), FloodReport::default());
        let r = summarize(&[1.0, 3.0]).unwrap();
        assert_eq!((r.count, r.mean, r.min, r.max), (2, 2.0, 1.0, 3.0));
        // sqrt(((1-2)^2 + (3-2)^2) / (2-1))
        assert!((r.sample_std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(summarize(&[0.4]).unwrap().sample_std, 0.0);
        assert!(summarize(&[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn report_serializes_six_fields() {
        let json = serde_json::to_value(summarize(&[1.0, 3.0]).unwrap()).unwrap();
        let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 6);
        for k in ["count", "sum", "mean", "sample_std", "min", "max"] {
            assert!(json.get(k).is_some(), "{k}");
        }
    }

    #[test]
    fn zone_examples() {
        let g = grid_with(5, |_| 0.1);
        assert!(flood_zones(&g, 0.5).unwrap().is_empty());

        let g = grid_with(5, |c| if c == AxialCoord::ORIGIN { 3.0 } else { 0.0 });
        let zones = flood_zones(&g, 2.0).unwrap();
        assert_eq!(zones.len(), 1);
        assert_eq!(zones[0].cells, vec![AxialCoord::ORIGIN]);
        assert!((zones[0].area - metrics_from_width(4.0).unwrap().area()).abs() < 1e-12);

        let pair = [AxialCoord::new(0, 0), AxialCoord::new(1, 0)];
        let g = grid_with(5, |c| if pair.contains(&c) { 1.0 } else { 0.0 });
        assert_eq!(flood_zones(&g, 0.5).unwrap().len(), 1);

        let apart = [AxialCoord::new(-2, -2), AxialCoord::new(2, 2)];
        let g = grid_with(5, |c| {
            if c == apart[0] {
                1.0
            } else if c == apart[1] {
                2.0
            } else {
                0.0
            }
        });
        let zones = flood_zones(&g, 0.5).unwrap();
        assert_eq!(zones.len(), 2);
        // Deepest first; labels follow (r, q) order of first member.
        assert_eq!((zones[0].label, zones[0].max_depth), (2, 2.0));
        assert_eq!((zones[1].label, zones[1].cells[0]), (1, apart[0]));

        assert!(flood_zones(&g, -1.0).is_err());
    }

    struct DisjointSet(Vec<usize>);

    impl DisjointSet {
        fn find(&mut self, x: usize) -> usize {
            let p = self.0[x];
            if p == x {
                return x;
            }
            let root = self.find(p);
            self.0[x] = root;
            root
        }

        fn union(&mut self, a: usize, b: usize) {
            let (ra, rb) = (self.find(a), self.find(b));
            self.0[ra] = rb;
        }
    }

    proptest! {
        #[test]
        fn zones_partition_the_qualifying_cells(seed in 0u64..10_000, threshold in 0.0f64..1.0) {
            let g = grid_with(8, |c| {
                let x = ((c.q as i64 * 73_856_093) ^ (c.r as i64 * 19_349_663) ^ seed as i64).rem_euclid(1000);
                x as f64 / 1000.0
            });
            let zones = flood_zones(&g, threshold).unwrap();
            let t = g.terrain();

            let mut owner = vec![None; g.len()];
            for (zi, z) in zones.iter().enumerate() {
                prop_assert!(z.max_depth >= threshold);
                for &c in &z.cells {
                    let i = t.index_of(c).unwrap();
                    prop_assert!(owner[i].is_none());
                    owner[i] = Some(zi);
                }
            }
            // Union-find over qualifying adjacent pairs gives the same partition.
            let mut ds = DisjointSet((0..g.len()).collect());
            for i in 0..g.len() {
                prop_assert_eq!(owner[i].is_some(), g.depths()[i] >= threshold);
                for &j in g.neighbor_indices(i) {
                    if j != NO_NEIGHBOR && owner[i].is_some() && owner[j as usize].is_some() {
                        prop_assert_eq!(owner[i], owner[j as usize]);
                        ds.union(i, j as usize);
                    }
                }
            }
            for i in 0..g.len() {
                for j in 0..g.len() {
                    if owner[i].is_some() && owner[j].is_some() {
                        prop_assert_eq!(owner[i] == owner[j], ds.find(i) == ds.find(j));
                    }
                }
            }

            // Raising the threshold refines zones: each higher zone sits
            // inside exactly one lower zone.
            let higher = flood_zones(&g, threshold + 0.25).unwrap();
            for z in &higher {
                let parents: std::collections::BTreeSet<_> =
                    z.cells.iter().map(|&c| owner[t.index_of(c).unwrap()]).collect();
                prop_assert_eq!(parents.len(), 1);
                prop_assert!(parents.iter().next().unwrap().is_some());
            }
        }

        #[test]
        fn summary_identities(v in proptest::collection::vec(0.0f64..10.0, 2..200)) {
            let r = summarize(&v).unwrap();
            prop_assert!((r.mean * r.count as f64 - r.sum).abs() <= 1e-9 * r.sum.max(1e-300));
            let ss: f64 = v.iter().map(|d| (d - r.mean).powi(2)).sum();
            let lhs = (r.count - 1) as f64 * r.sample_std * r.sample_std;
            prop_assert!((lhs - ss).abs() <= 1e-9 * ss.max(1e-300));
            prop_assert!(r.min <= r.mean && r.mean <= r.max);
        }
    }

    #[test]
    fn zone_count_can_grow_with_threshold() {
        // Two deep cells joined by a shallow one: one zone at a low
        // threshold, two once the bridge drops out.
        let deep = [AxialCoord::new(-1, 0), AxialCoord::new(1, 0)];
        let g = grid_with(5, |c| {
            if deep.contains(&c) {
                3.0
            } else if c == AxialCoord::ORIGIN {
                1.0
            } else {
                0.0
            }
        });
        assert_eq!(flood_zones(&g, 0.5).unwrap().len(), 1);
        assert_eq!(flood_zones(&g, 2.0).unwrap().len(), 2);
        assert_eq!(flood_zones(&g, 0.0).unwrap().len(), 1);
        assert!(flood_zones(&g, 3.5).unwrap().is_empty());
    }

    #[test]
    fn csv_export_format() {
        let empty = WaterGrid::dry(
            HexTerrain::new(
                metrics_from_width(4.0).unwrap(),
                GeoPoint { lat: 0.0, lon: 0.0 },
                AxialCoord::ORIGIN,
                HexExtent::new(0, 0),
                vec![],
            )
            .unwrap(),
            Boundary::Closed,
        );
        let mut buf = Vec::new();
        export_depth_csv(&empty, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "q,r,elevation_m,depth_m\n");

        let one = HexTerrain::new(
            metrics_from_width(4.0).unwrap(),
            GeoPoint { lat: 0.0, lon: 0.0 },
            AxialCoord::ORIGIN,
            HexExtent::new(1, 1),
            vec![1.5],
        )
        .unwrap();
        let g = WaterGrid::with_depths(one, Boundary::Closed, vec![0.25]).unwrap();
        let mut buf = Vec::new();
        export_depth_csv(&g, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "q,r,elevation_m,depth_m\n0,0,1.500000,0.250000\n"
        );
    }

    #[test]
    fn csv_round_trip_at_printed_precision() {
        let g = grid_with(6, |c| (c.q * c.q + c.r) as f64 * 0.123_456_789 + 1.0);
        let mut buf = Vec::new();
        export_depth_csv(&g, &mut buf).unwrap();
        let back = read_depth_csv(buf.as_slice(), *g.terrain().metrics()).unwrap();
        assert_eq!(back.terrain().min(), g.terrain().min());
        for (a, b) in g.depths().iter().zip(back.depths()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn csv_import_errors_carry_line_numbers() {
        let m = metrics_from_width(4.0).unwrap();
        let bad = "q,r,elevation_m,depth_m\n0,0,1,0\n1,0,x,0\n";
        assert!(matches!(
            read_depth_csv(bad.as_bytes(), m),
            Err(Error::Parse { line: 3, .. })
        ));
        let holes = "q,r,elevation_m,depth_m\n0,0,1,0\n1,1,1,0\n";
        assert!(matches!(
            read_depth_csv(holes.as_bytes(), m),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            read_depth_csv("a,b\n".as_bytes(), m),
            Err(Error::Parse { line: 1, .. })
        ));
        let empty = read_depth_csv("q,r,elevation_m,depth_m\n".as_bytes(), m).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn ppm_header_and_uniform_water() {
        let g = grid_with(4, |_| 0.3);
        let mut buf = Vec::new();
        render_depth_map(&g, &ColorRamp::default(), 2.0, &mut buf).unwrap();
        let text = String::from_utf8_lossy(&buf[..20]).to_string();
        let mut parts = text.splitn(4, '\n');
        assert_eq!(parts.next(), Some("P6"));
        let dims: Vec<usize> = parts
            .next()
            .unwrap()
            .split(' ')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(parts.next(), Some("255"));
        let header_len = format!("P6\n{} {}\n255\n", dims[0], dims[1]).len();
        let body = &buf[header_len..];
        assert_eq!(body.len(), dims[0] * dims[1] * 3);
        let water = ColorRamp::default().end;
        let mut seen_water = false;
        for px in body.chunks(3) {
            assert!(px == water || px == BACKGROUND, "{px:?}");
            seen_water |= px == water;
        }
        assert!(seen_water);
    }

    #[test]
    fn render_is_deterministic_and_validates() {
        let g = grid_with(5, |c| if c.q > 0 { c.q as f64 } else { 0.0 });
        let render = || {
            let mut buf = Vec::new();
            render_depth_map(&g, &ColorRamp::default(), 1.5, &mut buf).unwrap();
            buf
        };
        assert_eq!(render(), render());
        assert!(render_depth_map(&g, &ColorRamp::default(), 0.0, Vec::new()).is_err());
        assert_eq!(
            "1,2,3:4,5,6".parse::<ColorRamp>().unwrap(),
            ColorRamp {
                start: [1, 2, 3],
                end: [4, 5, 6]
            }
        );
        assert!("1,2:4,5,6".parse::<ColorRamp>().is_err());
    }
}
