//! Scenario files: JSON with exact key names, unknown keys rejected.

use std::fs;
use std::path::{Path, PathBuf};

use hexflood_core::analysis::DEFAULT_RISK_THRESHOLD;
use hexflood_core::elevation_client::ProviderConfig;
use hexflood_core::hydro::{DEFAULT_RAIN_RATE, DEFAULT_STEP_SECONDS};
use hexflood_core::{
    metrics_from_width, Boundary, BoundingBox, ColorRamp, GeoPoint, HexExtent, HexMetrics,
    RasterFormat, SimulationParams, SyntheticKind, SyntheticParams,
};
use serde::Deserialize;

use crate::failure::Failure;

pub const DEFAULT_HEX_WIDTH: f64 = 4.0;
pub const DEFAULT_PIXELS_PER_METER: f64 = 0.5;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub terrain: TerrainSource,
    /// Flat-to-flat hex width in meters.
    #[serde(default = "default_hex_width")]
    pub hex_width: f64,
    /// Meters of depth per hour.
    #[serde(default = "default_rain_rate")]
    pub rain_rate: f64,
    /// Hours.
    pub rain_duration: f64,
    /// Hours.
    #[serde(default)]
    pub equilibrate_duration: f64,
    #[serde(default = "default_step_seconds")]
    pub step_seconds: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub boundary: Boundary,
    /// Write a snapshot every this many steps; 0 keeps only the phase ends.
    #[serde(default)]
    pub snapshot_every: u64,
    /// Relative paths resolve against the config file's directory.
    pub output_dir: PathBuf,
    /// Minimum depth in meters of a flood-zone cell.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_pixels_per_meter")]
    pub pixels_per_meter: f64,
    #[serde(default)]
    pub ramp: ColorRamp,
}

/// Where terrain heights come from. Exactly one source per scenario.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainSource {
    File(FileTerrain),
    Provider(ProviderTerrain),
    Synthetic(SyntheticTerrain),
}

/// A raster on disk, resampled onto hexes.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileTerrain {
    pub path: PathBuf,
    pub format: RasterFormat,
    /// Position of hex `(0, 0)`; defaults to the south-west raster cell center.
    #[serde(default)]
    pub origin: Option<GeoPoint>,
    pub extent: HexExtent,
}

/// A raster fetched (or read from cache) through the elevation service.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderTerrain {
    pub bbox: BoundingBox,
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub origin: Option<GeoPoint>,
    pub extent: HexExtent,
    pub cache_dir: PathBuf,
    pub service: ProviderConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticTerrain {
    pub kind: SyntheticKind,
    pub extent: HexExtent,
    #[serde(default)]
    pub params: SyntheticParams,
}

fn default_hex_width() -> f64 {
    DEFAULT_HEX_WIDTH
}

fn default_rain_rate() -> f64 {
    DEFAULT_RAIN_RATE
}

fn default_step_seconds() -> f64 {
    DEFAULT_STEP_SECONDS
}

fn default_threshold() -> f64 {
    DEFAULT_RISK_THRESHOLD
}

fn default_pixels_per_meter() -> f64 {
    DEFAULT_PIXELS_PER_METER
}

impl ScenarioConfig {
    /// Reads, validates, and resolves relative paths of a scenario file.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path.display(), e))?;
        let mut config =
            Self::parse(&text).map_err(|m| Failure::Usage(format!("{}: {m}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        Ok(config)
    }

    /// Parses and validates; errors name the offending key.
    pub fn parse(text: &str) -> Result<Self, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            if key == "." {
                e.inner().to_string()
            } else {
                format!("{key}: {}", e.inner())
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.output_dir);
        match &mut self.terrain {
            TerrainSource::File(f) => join(&mut f.path),
            TerrainSource::Provider(p) => join(&mut p.cache_dir),
            TerrainSource::Synthetic(_) => {}
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        positive("hex_width", self.hex_width)?;
        positive("pixels_per_meter", self.pixels_per_meter)?;
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(format!(
                "threshold must be finite and >= 0, got {}",
                self.threshold
            ));
        }
        self.params().validate().map_err(|e| e.to_string())?;
        match &self.terrain {
            TerrainSource::File(f) => {
                extent("terrain.file.extent", f.extent)?;
                origin("terrain.file.origin", f.origin)?;
            }
            TerrainSource::Provider(p) => {
                extent("terrain.provider.extent", p.extent)?;
                origin("terrain.provider.origin", p.origin)?;
                p.bbox
                    .validate()
                    .map_err(|e| format!("terrain.provider.bbox: {e}"))?;
                if p.rows < 2 || p.cols < 2 {
                    return Err(format!(
                        "terrain.provider.rows/cols must both be >= 2, got {}x{}",
                        p.rows, p.cols
                    ));
                }
                p.service
                    .validate()
                    .map_err(|e| format!("terrain.provider.service: {e}"))?;
            }
            TerrainSource::Synthetic(s) => {
                extent("terrain.synthetic.extent", s.extent)?;
                let SyntheticParams { a, b, c, k } = s.params;
                if ![a, b, c, k].iter().all(|v| v.is_finite()) {
                    return Err("terrain.synthetic.params must be finite".into());
                }
            }
        }
        Ok(())
    }

    pub fn metrics(&self) -> HexMetrics {
        metrics_from_width(self.hex_width).expect("hex_width validated")
    }

    pub fn params(&self) -> SimulationParams {
        SimulationParams {
            step_seconds: self.step_seconds,
            rain_rate: self.rain_rate,
            rain_duration: self.rain_duration,
            equilibrate_duration: self.equilibrate_duration,
            seed: self.seed,
            boundary: self.boundary,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(format!("{name} must be positive, got {v}"))
    }
}

fn extent(name: &str, e: HexExtent) -> Result<(), String> {
    match e.cell_count() {
        Ok(0) => Err(format!("{name} must have at least one cell")),
        Ok(_) => Ok(()),
        Err(err) => Err(format!("{name}: {err}")),
    }
}

fn origin(name: &str, p: Option<GeoPoint>) -> Result<(), String> {
    match p {
        Some(p) => GeoPoint::new(p.lat, p.lon)
            .map(|_| ())
            .map_err(|e| format!("{name}: {e}")),
        None => Ok(()),
    }
}
