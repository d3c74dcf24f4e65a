//! Elevation web-service client with batching, retry and a disk cache.
//!
//! A request asks for elevations on a `rows x cols` lattice spanning a
//! bounding box, corners included. The cache is consulted first and written
//! on every successful fetch, so a warm cache makes the service optional.
//!
//! Wire protocol of [`HttpProvider`]: `POST base_url` with body
//! `{"locations":[{"lat":..,"lon":..},..]}`; the response is
//! `{"results":[{"lat":..,"lon":..,"elevation":..},..]}` in request order.
//! When `api_key_env` names a set variable its value is sent as a bearer
//! token.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::terrain::{
    load_elevation_raster, write_csv_raster, BoundingBox, ElevationRaster, GeoPoint, RasterFormat,
    DEFAULT_NODATA,
};

pub const DEFAULT_BATCH_SIZE: usize = 256;
pub const DEFAULT_MAX_RETRIES: u32 = 3;
pub const DEFAULT_BACKOFF_MS: u64 = 500;

/// Responses must echo request coordinates to within this many degrees.
const COORD_ECHO_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub base_url: String,
    /// Name of the environment variable holding the API key, if any.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
}

fn default_batch_size() -> usize {
    DEFAULT_BATCH_SIZE
}

fn default_max_retries() -> u32 {
    DEFAULT_MAX_RETRIES
}

fn default_backoff_ms() -> u64 {
    DEFAULT_BACKOFF_MS
}

impl ProviderConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        ProviderConfig {
            base_url: base_url.into(),
            api_key_env: None,
            batch_size: DEFAULT_BATCH_SIZE,
            max_retries: DEFAULT_MAX_RETRIES,
            backoff_ms: DEFAULT_BACKOFF_MS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_url.trim().is_empty() {
            return Err(Error::invalid("base_url must not be empty"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        if self.backoff_ms == 0 {
            return Err(Error::invalid("backoff_ms must be positive"));
        }
        Ok(())
    }
}

/// One elevation answer from a provider.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElevationSample {
    pub lat: f64,
    pub lon: f64,
    pub elevation: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    /// Worth retrying: transport failures, throttling, server errors.
    #[error("transient: {0}")]
    Transient(String),
    /// Not worth retrying: rejected request, bad credentials.
    #[error("fatal: {0}")]
    Fatal(String),
    /// The service answered with something unusable.
    #[error("protocol: {0}")]
    Protocol(String),
}

/// Seam for elevation services. Answers must be in request order.
pub trait ElevationProvider {
    fn elevations(&self, points: &[GeoPoint]) -> Result<Vec<ElevationSample>, ProviderError>;
}

impl<P: ElevationProvider + ?Sized> ElevationProvider for &P {
    fn elevations(&self, points: &[GeoPoint]) -> Result<Vec<ElevationSample>, ProviderError> {
        (**self).elevations(points)
    }
}

#[derive(Serialize)]
struct LocationsRequest<'a> {
    locations: &'a [GeoPoint],
}

#[derive(Deserialize)]
struct ResultsResponse {
    results: Vec<ElevationSample>,
}

/// JSON-over-HTTP provider.
pub struct HttpProvider {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
}

impl HttpProvider {
    pub fn new(config: &ProviderConfig) -> Result<Self> {
        config.validate()?;
        let api_key = match &config.api_key_env {
            Some(var) => match std::env::var(var) {
                Ok(v) => Some(v),
                Err(_) => {
                    warn!("environment variable {var} is not set; sending requests without a key");
                    None
                }
            },
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Ok(HttpProvider {
            agent,
            url: config.base_url.clone(),
            api_key,
        })
    }
}

impl ElevationProvider for HttpProvider {
    fn elevations(&self, points: &[GeoPoint]) -> Result<Vec<ElevationSample>, ProviderError> {
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(LocationsRequest { locations: points })
            .map_err(|e| match e {
                ureq::Error::StatusCode(code) if code == 429 || code >= 500 => {
                    ProviderError::Transient(format!("HTTP {code}"))
                }
                ureq::Error::StatusCode(code) => ProviderError::Fatal(format!("HTTP {code}")),
                other => ProviderError::Transient(other.to_string()),
            })?;
        let body: ResultsResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::Protocol(format!("bad response body: {e}")))?;
        Ok(body.results)
    }
}

/// Lattice points, south-west first, longitude varying fastest.
///
/// Point `(i, j)` is at `south + i * dlat`, `west + j * dlon` with the
/// spacing chosen so the last point lands on the opposite corner.
pub fn lattice_points(bbox: &BoundingBox, rows: usize, cols: usize) -> Result<Vec<GeoPoint>> {
    bbox.validate()?;
    if rows < 2 || cols < 2 {
        return Err(Error::invalid(format!(
            "lattice needs at least 2x2 points, got {rows}x{cols}"
        )));
    }
    rows.checked_mul(cols)
        .filter(|&n| n <= crate::terrain::MAX_RASTER_CELLS)
        .ok_or_else(|| Error::Resource(format!("lattice of {rows}x{cols} points is too large")))?;
    let dlat = (bbox.north - bbox.south) / (rows - 1) as f64;
    let dlon = (bbox.east - bbox.west) / (cols - 1) as f64;
    let mut pts = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            pts.push(GeoPoint {
                lat: bbox.south + i as f64 * dlat,
                lon: bbox.west + j as f64 * dlon,
            });
        }
    }
    Ok(pts)
}

/// Hex digest identifying a `(bbox, rows, cols)` request.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CacheKey(String);

impl CacheKey {
    pub fn for_request(bbox: &BoundingBox, rows: usize, cols: usize) -> Self {
        let material = format!(
            "elevation-grid/v1 {:016x} {:016x} {:016x} {:016x} {rows} {cols}",
            bbox.south.to_bits(),
            bbox.west.to_bits(),
            bbox.north.to_bits(),
            bbox.east.to_bits(),
        );
        CacheKey(hex::encode(Sha256::digest(material.as_bytes())))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CacheEntry {
    pub key: CacheKey,
    pub raster: ElevationRaster,
    /// Seconds since the Unix epoch.
    pub fetched_at: u64,
}

/// One CSV raster file per request, named by the key's hex digest.
#[derive(Clone, Debug)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DiskCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.as_str())
    }

    /// Reads an entry, distinguishing a miss from an unusable file.
    pub fn lookup(&self, key: &CacheKey) -> Result<Option<CacheEntry>> {
        let path = self.path_for(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let mut stored_key = None;
        let mut fetched_at = None;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            if let Some(v) = body.strip_prefix("key=") {
                stored_key = Some(v.to_string());
            } else if let Some(v) = body.strip_prefix("fetched_at=") {
                fetched_at = v.parse::<u64>().ok();
            }
        }
        if stored_key.as_deref() != Some(key.as_str()) {
            return Err(Error::parse(
                0,
                format!("{} has a missing or wrong key", path.display()),
            ));
        }
        let fetched_at = fetched_at
            .ok_or_else(|| Error::parse(0, format!("{} has no fetched_at", path.display())))?;
        let raster = load_elevation_raster(text.as_bytes(), RasterFormat::Csv)?;
        Ok(Some(CacheEntry {
            key: key.clone(),
            raster,
            fetched_at,
        }))
    }

    /// Like [`DiskCache::lookup`], but unusable files count as misses.
    pub fn get(&self, key: &CacheKey) -> Option<CacheEntry> {
        match self.lookup(key) {
            Ok(entry) => entry,
            Err(e) => {
                warn!(
                    "ignoring unusable cache entry {}: {e}",
                    self.path_for(key).display()
                );
                None
            }
        }
    }

    /// Writes the entry atomically (temp file, then rename).
    pub fn put(&self, entry: &CacheEntry) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        let comments = [
            format!("key={}", entry.key.as_str()),
            format!("fetched_at={}", entry.fetched_at),
        ];
        write_csv_raster(&entry.raster, &comments, tmp.as_file_mut())?;
        tmp.as_file_mut().flush()?;
        tmp.persist(self.path_for(&entry.key))
            .map_err(|e| Error::Io(e.error))?;
        Ok(())
    }
}

pub struct ElevationClient<P> {
    provider: P,
    cache: DiskCache,
    config: ProviderConfig,
}

impl<P: ElevationProvider> ElevationClient<P> {
    pub fn new(provider: P, cache: DiskCache, config: ProviderConfig) -> Result<Self> {
        config.validate()?;
        Ok(ElevationClient {
            provider,
            cache,
            config,
        })
    }

    pub fn cache(&self) -> &DiskCache {
        &self.cache
    }

    /// Elevation raster for a `rows x cols` lattice over `bbox`.
    ///
    /// The raster is cell-registered with each lattice point at a cell
    /// center, so its bbox extends half a spacing beyond the request.
    pub fn fetch_elevation_grid(
        &self,
        bbox: &BoundingBox,
        rows: usize,
        cols: usize,
    ) -> Result<ElevationRaster> {
        let points = lattice_points(bbox, rows, cols)?;
        let key = CacheKey::for_request(bbox, rows, cols);
        if let Some(entry) = self.cache.get(&key) {
            debug!("elevation cache hit {}", key.as_str());
            return Ok(entry.raster);
        }

        let mut elevations = Vec::with_capacity(points.len());
        for batch in points.chunks(self.config.batch_size) {
            let samples = self.fetch_batch(batch)?;
            elevations.extend(samples.into_iter().map(|s| s.elevation));
        }

        // Lattice row 0 is the south edge; raster row 0 is the north edge.
        let mut heights = Vec::with_capacity(elevations.len());
        for row in elevations.chunks(cols).rev() {
            heights.extend_from_slice(row);
        }
        let dlat = (bbox.north - bbox.south) / (rows - 1) as f64;
        let dlon = (bbox.east - bbox.west) / (cols - 1) as f64;
        let cell_bbox = BoundingBox::new(
            bbox.south - dlat / 2.0,
            bbox.west - dlon / 2.0,
            bbox.north + dlat / 2.0,
            bbox.east + dlon / 2.0,
        )?;
        let raster = ElevationRaster::new(cell_bbox, rows, cols, heights, DEFAULT_NODATA)?;
        let fetched_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        self.cache.put(&CacheEntry {
            key,
            raster: raster.clone(),
            fetched_at,
        })?;
        Ok(raster)
    }

    fn fetch_batch(&self, batch: &[GeoPoint]) -> Result<Vec<ElevationSample>> {
        let mut attempt = 0u32;
        loop {
            match self.provider.elevations(batch) {
                Ok(samples) => return check_batch(batch, samples),
                Err(ProviderError::Transient(msg)) if attempt < self.config.max_retries => {
                    let wait = self
                        .config
                        .backoff_ms
                        .saturating_mul(1u64 << attempt.min(16));
                    warn!(
                        "elevation request failed ({msg}); retry {} in {wait} ms",
                        attempt + 1
                    );
                    thread::sleep(Duration::from_millis(wait));
                    attempt += 1;
                }
                Err(ProviderError::Protocol(msg)) => return Err(Error::Protocol(msg)),
                Err(e) => {
                    return Err(Error::Unavailable(format!(
                        "{e} after {} attempt(s)",
                        attempt + 1
                    )))
                }
            }
        }
    }
}

fn check_batch(batch: &[GeoPoint], samples: Vec<ElevationSample>) -> Result<Vec<ElevationSample>> {
    if samples.len() != batch.len() {
        return Err(Error::Protocol(format!(
            "requested {} elevations, received {}",
            batch.len(),
            samples.len()
        )));
    }
    for (i, (p, s)) in batch.iter().zip(&samples).enumerate() {
        if (p.lat - s.lat).abs() > COORD_ECHO_TOLERANCE
            || (p.lon - s.lon).abs() > COORD_ECHO_TOLERANCE
        {
            return Err(Error::Protocol(format!(
                "result {i} is for ({}, {}), expected ({}, {})",
                s.lat, s.lon, p.lat, p.lon
            )));
        }
        if !s.elevation.is_finite() {
            return Err(Error::Protocol(format!(
                "result {i} has non-finite elevation"
            )));
        }
    }
    Ok(samples)
}
