//! Terrain ingestion: elevation rasters, resampling onto hex centers,
//! geodesic distance and extent normalization.
//!
//! Rasters are cell-registered: value `(row, col)` sits at the center of its
//! cell, row 0 is the northernmost row, and `bbox` is the outer edge of the
//! cell block. Horizontal axes are geographic degrees (`x` = longitude).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hexgrid::{axial_to_world, AxialCoord, HexMetrics, WorldPoint, NEIGHBOR_OFFSETS};

/// Spherical Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

/// Meters spanned by one degree of latitude on the sphere.
pub const METERS_PER_DEGREE: f64 = EARTH_RADIUS_M * PI / 180.0;

pub const DEFAULT_NODATA: f64 = -9999.0;

/// Upper bound on raster nodes accepted from any source.
pub const MAX_RASTER_CELLS: usize = 1 << 28;

/// Upper bound on hex cells in one terrain.
pub const MAX_HEX_CELLS: usize = 1 << 26;

/// Marker for a missing neighbor in [`HexTerrain::neighbor_table`].
pub const NO_NEIGHBOR: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::invalid(format!(
                "geographic point out of range: lat={lat}, lon={lon}"
            )));
        }
        Ok(GeoPoint { lat, lon })
    }
}

/// Geographic bounding box in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundingBox {
    pub south: f64,
    pub west: f64,
    pub north: f64,
    pub east: f64,
}

impl BoundingBox {
    pub fn new(south: f64, west: f64, north: f64, east: f64) -> Result<Self> {
        let b = BoundingBox {
            south,
            west,
            north,
            east,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.south, self.west, self.north, self.east]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.north <= self.south || self.east <= self.west {
            return Err(Error::invalid(format!(
                "bounding box needs north > south and east > west, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        (self.south..=self.north).contains(&p.lat) && (self.west..=self.east).contains(&p.lon)
    }
}

impl FromStr for BoundingBox {
    type Err = Error;

    /// Parses `S,W,N,E`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::invalid(format!("bbox '{s}': {e}")))?;
        match parts[..] {
            [south, west, north, east] => BoundingBox::new(south, west, north, east),
            _ => Err(Error::invalid(format!(
                "bbox '{s}' must have four comma-separated values S,W,N,E"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RasterFormat {
    EsriAscii,
    Csv,
}

impl FromStr for RasterFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "esri-ascii" | "asc" => Ok(RasterFormat::EsriAscii),
            "csv" => Ok(RasterFormat::Csv),
            other => Err(Error::invalid(format!("unknown raster format '{other}'"))),
        }
    }
}

/// Rectangular grid of terrain elevations in meters.
#[derive(Clone, Debug, PartialEq)]
pub struct ElevationRaster {
    bbox: BoundingBox,
    rows: usize,
    cols: usize,
    heights: Vec<f64>,
    nodata: f64,
}

impl ElevationRaster {
    pub fn new(
        bbox: BoundingBox,
        rows: usize,
        cols: usize,
        heights: Vec<f64>,
        nodata: f64,
    ) -> Result<Self> {
        bbox.validate()?;
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(
                "raster must have at least one row and column",
            ));
        }
        let n = checked_cells(rows, cols)?;
        if heights.len() != n {
            return Err(Error::invalid(format!(
                "raster {rows}x{cols} needs {n} heights, got {}",
                heights.len()
            )));
        }
        if let Some(bad) = heights
            .iter()
            .find(|&&h| !is_nodata(h, nodata) && !h.is_finite())
        {
            return Err(Error::invalid(format!("non-finite raster height {bad}")));
        }
        Ok(ElevationRaster {
            bbox,
            rows,
            cols,
            heights,
            nodata,
        })
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nodata(&self) -> f64 {
        self.nodata
    }

    /// Heights in row-major order, north row first.
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.heights[row * self.cols + col]
    }

    pub fn is_nodata(&self, h: f64) -> bool {
        is_nodata(h, self.nodata)
    }

    /// Geographic position of the center of raster cell `(row, col)`.
    pub fn node_position(&self, row: usize, col: usize) -> GeoPoint {
        let (dlat, dlon) = self.cell_size();
        GeoPoint {
            lat: self.bbox.north - (row as f64 + 0.5) * dlat,
            lon: self.bbox.west + (col as f64 + 0.5) * dlon,
        }
    }

    fn cell_size(&self) -> (f64, f64) {
        (
            (self.bbox.north - self.bbox.south) / self.rows as f64,
            (self.bbox.east - self.bbox.west) / self.cols as f64,
        )
    }

    /// Bilinear interpolation between the four surrounding cell centers.
    ///
    /// Points between the outer edge and the outermost centers clamp to the
    /// edge values. Returns `Ok(None)` when a surrounding node is nodata.
    pub fn sample(&self, p: GeoPoint) -> Result<Option<f64>> {
        if !self.bbox.contains(p) {
            return Err(Error::invalid(format!(
                "point ({}, {}) outside raster bbox",
                p.lat, p.lon
            )));
        }
        let (dlat, dlon) = self.cell_size();
        let fr = ((self.bbox.north - p.lat) / dlat - 0.5).clamp(0.0, (self.rows - 1) as f64);
        let fc = ((p.lon - self.bbox.west) / dlon - 0.5).clamp(0.0, (self.cols - 1) as f64);
        let (r0, t) = split_axis(fr, self.rows);
        let (c0, u) = split_axis(fc, self.cols);
        let r1 = (r0 + 1).min(self.rows - 1);
        let c1 = (c0 + 1).min(self.cols - 1);
        let corners = [
            self.get(r0, c0),
            self.get(r0, c1),
            self.get(r1, c0),
            self.get(r1, c1),
        ];
        if corners.iter().any(|&h| self.is_nodata(h)) {
            return Ok(None);
        }
        let [h00, h01, h10, h11] = corners;
        let top = h00 + (h01 - h00) * u;
        let bottom = h10 + (h11 - h10) * u;
        Ok(Some(top + (bottom - top) * t))
    }
}

fn split_axis(f: f64, n: usize) -> (usize, f64) {
    if n == 1 {
        return (0, 0.0);
    }
    let i = (f.floor() as usize).min(n - 2);
    (i, f - i as f64)
}

fn is_nodata(h: f64, nodata: f64) -> bool {
    h.is_nan() || h == nodata
}

fn checked_cells(rows: usize, cols: usize) -> Result<usize> {
    match rows.checked_mul(cols) {
        Some(n) if n <= MAX_RASTER_CELLS => Ok(n),
        _ => Err(Error::Resource(format!(
            "raster of {rows}x{cols} exceeds {MAX_RASTER_CELLS} cells"
        ))),
    }
}

/// Parses a raster from `source` in the declared format.
pub fn load_elevation_raster(source: impl Read, format: RasterFormat) -> Result<ElevationRaster> {
    let reader = BufReader::new(source);
    match format {
        RasterFormat::EsriAscii => parse_esri_ascii(reader),
        RasterFormat::Csv => parse_csv(reader),
    }
}

fn parse_value(tok: &str, line: usize, nodata: f64) -> Result<f64> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("'{}' is not a number", tok.trim())))?;
    if !v.is_finite() && !is_nodata(v, nodata) {
        return Err(Error::parse(
            line,
            format!("non-finite height '{}'", tok.trim()),
        ));
    }
    Ok(v)
}

#[derive(Default)]
struct EsriHeader {
    ncols: Option<usize>,
    nrows: Option<usize>,
    xll: Option<(f64, bool)>,
    yll: Option<(f64, bool)>,
    cellsize: Option<f64>,
    nodata: Option<f64>,
}

fn parse_esri_ascii(reader: impl BufRead) -> Result<ElevationRaster> {
    let mut header = EsriHeader::default();
    let mut heights = Vec::new();
    let mut dims: Option<(usize, usize)> = None;
    let mut data_rows = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if dims.is_none() {
            let mut toks = trimmed.split_whitespace();
            let key = toks.next().unwrap_or_default().to_ascii_lowercase();
            let is_key = key.starts_with(|c: char| c.is_ascii_alphabetic())
                && !matches!(key.as_str(), "nan" | "inf" | "infinity");
            if is_key {
                let val = toks.next().ok_or_else(|| {
                    Error::parse(lineno, format!("header key '{key}' has no value"))
                })?;
                let num = |v: &str| -> Result<f64> {
                    v.parse::<f64>()
                        .map_err(|_| Error::parse(lineno, format!("bad value '{v}' for '{key}'")))
                };
                let count = |v: &str| -> Result<usize> {
                    v.parse::<usize>()
                        .map_err(|_| Error::parse(lineno, format!("bad value '{v}' for '{key}'")))
                };
                match key.as_str() {
                    "ncols" => header.ncols = Some(count(val)?),
                    "nrows" => header.nrows = Some(count(val)?),
                    "xllcorner" => header.xll = Some((num(val)?, false)),
                    "xllcenter" => header.xll = Some((num(val)?, true)),
                    "yllcorner" => header.yll = Some((num(val)?, false)),
                    "yllcenter" => header.yll = Some((num(val)?, true)),
                    "cellsize" => header.cellsize = Some(num(val)?),
                    "nodata_value" => header.nodata = Some(num(val)?),
                    _ => return Err(Error::parse(lineno, format!("unknown header key '{key}'"))),
                }
                continue;
            }
            let missing = |k: &str| Error::parse(lineno, format!("header is missing '{k}'"));
            let ncols = header.ncols.ok_or_else(|| missing("ncols"))?;
            let nrows = header.nrows.ok_or_else(|| missing("nrows"))?;
            if ncols == 0 || nrows == 0 {
                return Err(Error::parse(lineno, "ncols and nrows must be positive"));
            }
            let n = checked_cells(nrows, ncols)?;
            heights.reserve_exact(n);
            dims = Some((nrows, ncols));
        }
        let (nrows, ncols) = dims.expect("dimensions set above");
        let nodata = header.nodata.unwrap_or(DEFAULT_NODATA);
        if data_rows == nrows {
            return Err(Error::parse(
                lineno,
                format!("more than nrows={nrows} data rows"),
            ));
        }
        let before = heights.len();
        for tok in trimmed.split_whitespace() {
            heights.push(parse_value(tok, lineno, nodata)?);
        }
        let got = heights.len() - before;
        if got != ncols {
            return Err(Error::parse(
                lineno,
                format!("row has {got} values, expected ncols={ncols}"),
            ));
        }
        data_rows += 1;
    }

    let (nrows, ncols) = dims.ok_or_else(|| Error::parse(0, "no data rows"))?;
    if data_rows != nrows {
        return Err(Error::parse(
            0,
            format!("expected nrows={nrows} data rows, found {data_rows}"),
        ));
    }
    let missing = |k: &str| Error::parse(0, format!("header is missing '{k}'"));
    let cs = header.cellsize.ok_or_else(|| missing("cellsize"))?;
    if !(cs.is_finite() && cs > 0.0) {
        return Err(Error::parse(
            0,
            format!("cellsize must be positive, got {cs}"),
        ));
    }
    let (xll, x_center) = header.xll.ok_or_else(|| missing("xllcorner"))?;
    let (yll, y_center) = header.yll.ok_or_else(|| missing("yllcorner"))?;
    let west = if x_center { xll - cs / 2.0 } else { xll };
    let south = if y_center { yll - cs / 2.0 } else { yll };
    let bbox = BoundingBox::new(
        south,
        west,
        south + nrows as f64 * cs,
        west + ncols as f64 * cs,
    )?;
    ElevationRaster::new(
        bbox,
        nrows,
        ncols,
        heights,
        header.nodata.unwrap_or(DEFAULT_NODATA),
    )
}

struct CsvHeader {
    bbox: BoundingBox,
    rows: usize,
    cols: usize,
    nodata: f64,
}

fn parse_csv_header(body: &str, line: usize) -> Result<CsvHeader> {
    let mut bbox = None;
    let mut rows = None;
    let mut cols = None;
    let mut nodata = DEFAULT_NODATA;
    for tok in body.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(line, format!("header token '{tok}' is not key=value")))?;
        let bad = |e: &dyn std::fmt::Display| Error::parse(line, format!("header '{k}': {e}"));
        match k {
            "bbox" => bbox = Some(v.parse::<BoundingBox>().map_err(|e| bad(&e))?),
            "rows" => rows = Some(v.parse::<usize>().map_err(|e| bad(&e))?),
            "cols" => cols = Some(v.parse::<usize>().map_err(|e| bad(&e))?),
            "nodata" => nodata = v.parse::<f64>().map_err(|e| bad(&e))?,
            _ => return Err(Error::parse(line, format!("unknown header key '{k}'"))),
        }
    }
    match (bbox, rows, cols) {
        (Some(bbox), Some(rows), Some(cols)) => Ok(CsvHeader {
            bbox,
            rows,
            cols,
            nodata,
        }),
        _ => Err(Error::parse(line, "header needs bbox=, rows= and cols=")),
    }
}

fn parse_csv(reader: impl BufRead) -> Result<ElevationRaster> {
    let mut header: Option<CsvHeader> = None;
    let mut heights = Vec::new();
    let mut cols: Option<usize> = None;
    let mut rows = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if comment.starts_with("bbox=") {
                if header.is_some() || rows > 0 {
                    return Err(Error::parse(lineno, "header must precede data rows"));
                }
                let h = parse_csv_header(comment, lineno)?;
                checked_cells(h.rows, h.cols)?;
                cols = Some(h.cols);
                header = Some(h);
            }
            continue;
        }
        let nodata = header.as_ref().map_or(DEFAULT_NODATA, |h| h.nodata);
        let before = heights.len();
        for tok in trimmed.split(',') {
            heights.push(parse_value(tok, lineno, nodata)?);
        }
        let got = heights.len() - before;
        let expected = *cols.get_or_insert(got);
        if got != expected {
            return Err(Error::parse(
                lineno,
                format!("row has {got} values, expected {expected}"),
            ));
        }
        rows += 1;
        if let Some(h) = &header {
            if rows > h.rows {
                return Err(Error::parse(
                    lineno,
                    format!("more than rows={} data rows", h.rows),
                ));
            }
        } else {
            checked_cells(rows, expected)?;
        }
    }

    let cols = cols
        .filter(|_| rows > 0)
        .ok_or_else(|| Error::parse(0, "no data rows"))?;
    match header {
        Some(h) => {
            if rows != h.rows {
                return Err(Error::parse(
                    0,
                    format!("expected rows={} data rows, found {rows}", h.rows),
                ));
            }
            ElevationRaster::new(h.bbox, h.rows, h.cols, heights, h.nodata)
        }
        // Without a header each value occupies a one-degree cell anchored at (0, 0).
        None => ElevationRaster::new(
            BoundingBox::new(0.0, 0.0, rows as f64, cols as f64)?,
            rows,
            cols,
            heights,
            DEFAULT_NODATA,
        ),
    }
}

/// Writes `raster` in the CSV raster format, with optional extra comment
/// lines after the header. Values use shortest round-trip formatting.
pub fn write_csv_raster(
    raster: &ElevationRaster,
    comments: &[String],
    mut out: impl Write,
) -> io::Result<()> {
    let b = raster.bbox;
    writeln!(
        out,
        "# bbox={},{},{},{} rows={} cols={} nodata={}",
        b.south, b.west, b.north, b.east, raster.rows, raster.cols, raster.nodata
    )?;
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut line = String::new();
    for row in raster.heights.chunks(raster.cols) {
        line.clear();
        for (i, h) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            write!(line, "{h}").expect("writing to a String");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Number of cells along the `q` and `r` axes of a parallelogram terrain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HexExtent {
    pub nq: u32,
    pub nr: u32,
}

impl HexExtent {
    pub fn new(nq: u32, nr: u32) -> Self {
        HexExtent { nq, nr }
    }

    pub fn is_empty(&self) -> bool {
        self.nq == 0 || self.nr == 0
    }

    fn require_nonempty(&self) -> Result<usize> {
        if self.is_empty() {
            return Err(Error::invalid(
                "terrain extent must be positive on both axes",
            ));
        }
        self.cell_count()
    }

    pub fn cell_count(&self) -> Result<usize> {
        match (self.nq as usize).checked_mul(self.nr as usize) {
            Some(n) if n <= MAX_HEX_CELLS => Ok(n),
            _ => Err(Error::Resource(format!(
                "terrain of {}x{} exceeds {MAX_HEX_CELLS} cells",
                self.nq, self.nr
            ))),
        }
    }
}

/// Per-cell terrain elevation over a parallelogram block of axial cells.
///
/// Cells span `min.q .. min.q + nq` and `min.r .. min.r + nr`; storage is
/// row-major by `(r, q)` so index order equals [`AxialCoord`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct HexTerrain {
    metrics: HexMetrics,
    origin: GeoPoint,
    min: AxialCoord,
    extent: HexExtent,
    heights: Vec<f64>,
}

impl HexTerrain {
    pub fn new(
        metrics: HexMetrics,
        origin: GeoPoint,
        min: AxialCoord,
        extent: HexExtent,
        heights: Vec<f64>,
    ) -> Result<Self> {
        let n = extent.cell_count()?;
        if heights.len() != n {
            return Err(Error::invalid(format!(
                "terrain {}x{} needs {n} heights, got {}",
                extent.nq,
                extent.nr,
                heights.len()
            )));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::invalid("terrain elevations must be finite"));
        }
        min.q
            .checked_add(extent.nq as i32)
            .zip(min.r.checked_add(extent.nr as i32))
            .ok_or_else(|| Error::invalid("terrain block overflows axial range"))?;
        Ok(HexTerrain {
            metrics,
            origin,
            min,
            extent,
            heights,
        })
    }

    pub fn metrics(&self) -> &HexMetrics {
        &self.metrics
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn min(&self) -> AxialCoord {
        self.min
    }

    pub fn extent(&self) -> HexExtent {
        self.extent
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn height(&self, c: AxialCoord) -> Option<f64> {
        self.index_of(c).map(|i| self.heights[i])
    }

    pub fn index_of(&self, c: AxialCoord) -> Option<usize> {
        let dq = i64::from(c.q) - i64::from(self.min.q);
        let dr = i64::from(c.r) - i64::from(self.min.r);
        if (0..i64::from(self.extent.nq)).contains(&dq)
            && (0..i64::from(self.extent.nr)).contains(&dr)
        {
            Some(dr as usize * self.extent.nq as usize + dq as usize)
        } else {
            None
        }
    }

    pub fn coord_of(&self, index: usize) -> AxialCoord {
        let nq = self.extent.nq as usize;
        AxialCoord::new(
            self.min.q + (index % nq) as i32,
            self.min.r + (index / nq) as i32,
        )
    }

    pub fn coords(&self) -> impl Iterator<Item = AxialCoord> + '_ {
        (0..self.len()).map(|i| self.coord_of(i))
    }

    pub fn world(&self, c: AxialCoord) -> WorldPoint {
        axial_to_world(c, &self.metrics)
    }

    /// For every cell, the indices of its six neighbors (or [`NO_NEIGHBOR`]).
    pub fn neighbor_table(&self) -> Vec<[u32; 6]> {
        (0..self.len())
            .map(|i| {
                let c = self.coord_of(i);
                NEIGHBOR_OFFSETS.map(|(dq, dr)| {
                    self.index_of(AxialCoord::new(c.q + dq, c.r + dr))
                        .map_or(NO_NEIGHBOR, |j| j as u32)
                })
            })
            .collect()
    }
}

/// Geographic position of a model-frame point, using a local equirectangular
/// approximation around `origin`.
pub fn world_to_geo(origin: GeoPoint, p: WorldPoint) -> GeoPoint {
    GeoPoint {
        lat: origin.lat + p.y / METERS_PER_DEGREE,
        lon: origin.lon + p.x / (METERS_PER_DEGREE * origin.lat.to_radians().cos()),
    }
}

/// Resamples `raster` onto the centers of an `extent` block of hex cells
/// whose axial `(0, 0)` sits at `origin`.
pub fn sample_to_hex(
    raster: &ElevationRaster,
    metrics: HexMetrics,
    origin: GeoPoint,
    extent: HexExtent,
) -> Result<HexTerrain> {
    let n = extent.require_nonempty()?;
    let min = AxialCoord::ORIGIN;
    let nq = extent.nq as usize;
    let mut heights = Vec::with_capacity(n);
    for i in 0..n {
        let cell = AxialCoord::new((i % nq) as i32, (i / nq) as i32);
        let p = world_to_geo(origin, axial_to_world(cell, &metrics));
        if !raster.bbox.contains(p) {
            return Err(Error::OutOfBounds { cell });
        }
        let h = raster.sample(p)?.ok_or(Error::DataGap { cell })?;
        heights.push(h);
    }
    HexTerrain::new(metrics, origin, min, extent, heights)
}

/// Great-circle distance in meters on a sphere of radius [`EARTH_RADIUS_M`].
pub fn geodesic_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Terrain rescaled so its larger horizontal extent spans `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedModel {
    /// Model units per meter.
    pub scale: f64,
    /// `[x, y, z]` per cell, in terrain index order.
    pub points: Vec<[f64; 3]>,
}

/// Scales horizontal coordinates and heights by one common factor so the
/// wider side of the terrain footprint becomes 1. Each cell occupies a
/// `width x width` box around its center.
pub fn normalize_extent(terrain: &HexTerrain) -> Result<NormalizedModel> {
    if terrain.is_empty() {
        return Err(Error::invalid("cannot normalize an empty terrain"));
    }
    let half = terrain.metrics.width() / 2.0;
    let centers: Vec<WorldPoint> = terrain.coords().map(|c| terrain.world(c)).collect();
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &centers {
        min_x = min_x.min(p.x - half);
        min_y = min_y.min(p.y - half);
        max_x = max_x.max(p.x + half);
        max_y = max_y.max(p.y + half);
    }
    let scale = 1.0 / (max_x - min_x).max(max_y - min_y);
    let points = centers
        .iter()
        .zip(&terrain.heights)
        .map(|(p, h)| [(p.x - min_x) * scale, (p.y - min_y) * scale, h * scale])
        .collect();
    Ok(NormalizedModel { scale, points })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    Plane,
    TiltedPlane,
    Bowl,
    VValley,
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plane" => Ok(SyntheticKind::Plane),
            "tilted-plane" => Ok(SyntheticKind::TiltedPlane),
            "bowl" => Ok(SyntheticKind::Bowl),
            "v-valley" => Ok(SyntheticKind::VValley),
            other => Err(Error::invalid(format!(
                "unknown synthetic terrain kind '{other}'"
            ))),
        }
    }
}

/// Coefficients of the analytic height fields; unused ones are ignored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k: f64,
}

/// Analytic terrain over an `extent` block centered on axial `(0, 0)`.
///
/// With `(x, y)` the model-frame cell center:
/// plane `c`, tilted-plane `a*x + b*y + c`, bowl `k*(x^2 + y^2)`,
/// v-valley `k*|x|`.
pub fn synthetic_terrain(
    kind: SyntheticKind,
    metrics: HexMetrics,
    extent: HexExtent,
    params: SyntheticParams,
) -> Result<HexTerrain> {
    let n = extent.require_nonempty()?;
    let min = AxialCoord::new(-((extent.nq as i32 - 1) / 2), -((extent.nr as i32 - 1) / 2));
    let nq = extent.nq as usize;
    let SyntheticParams { a, b, c, k } = params;
    let heights = (0..n)
        .map(|i| {
            let cell = AxialCoord::new(min.q + (i % nq) as i32, min.r + (i / nq) as i32);
            let p = axial_to_world(cell, &metrics);
            match kind {
                SyntheticKind::Plane => c,
                SyntheticKind::TiltedPlane => a * p.x + b * p.y + c,
                SyntheticKind::Bowl => k * (p.x * p.x + p.y * p.y),
                SyntheticKind::VValley => k * p.x.abs(),
            }
        })
        .collect();
    HexTerrain::new(
        metrics,
        GeoPoint { lat: 0.0, lon: 0.0 },
        min,
        extent,
        heights,
    )
}
