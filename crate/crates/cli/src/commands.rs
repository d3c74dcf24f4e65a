use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use hexflood_core::elevation_client::{DiskCache, ElevationClient, HttpProvider, ProviderConfig};
use hexflood_core::hydro::{Snapshot, SnapshotKind};
use hexflood_core::terrain::write_csv_raster;
use hexflood_core::{
    export_depth_csv, flood_zones, load_elevation_raster, metrics_from_width, read_depth_csv,
    render_depth_map, run_scenario_with, sample_to_hex, summarize, synthetic_terrain, BoundingBox,
    ColorRamp, ElevationRaster, Error, FloodReport, FloodZone, GeoPoint, HexExtent, HexMetrics,
    HexTerrain, WaterGrid,
};
use log::info;

use crate::config::{ScenarioConfig, TerrainSource, DEFAULT_HEX_WIDTH, DEFAULT_PIXELS_PER_METER};
use crate::failure::Failure;
use crate::output::{create_dir, write_atomic};

#[derive(Debug, Args)]
pub struct FetchDemArgs {
    /// Bounding box as "south,west,north,east" in degrees
    #[arg(long)]
    pub bbox: BoundingBox,
    /// Lattice rows (north-south samples)
    #[arg(long)]
    pub rows: usize,
    /// Lattice columns (west-east samples)
    #[arg(long)]
    pub cols: usize,
    /// Elevation service endpoint
    #[arg(long)]
    pub base_url: String,
    /// Environment variable holding the service API key
    #[arg(long)]
    pub api_key_env: Option<String>,
    #[arg(long, default_value_t = hexflood_core::elevation_client::DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
    #[arg(long, default_value_t = hexflood_core::elevation_client::DEFAULT_MAX_RETRIES)]
    pub max_retries: u32,
    #[arg(long, default_value_t = hexflood_core::elevation_client::DEFAULT_BACKOFF_MS)]
    pub backoff_ms: u64,
    #[arg(long, default_value = ".hexflood-cache")]
    pub cache_dir: PathBuf,
    /// Output CSV raster
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON file
    pub config: PathBuf,
    /// Write outputs here instead of the config's output_dir
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Depth CSV (q,r,elevation_m,depth_m)
    pub depths: PathBuf,
    /// Minimum depth in meters of a flood-zone cell
    #[arg(long, default_value_t = hexflood_core::analysis::DEFAULT_RISK_THRESHOLD, value_parser = non_negative)]
    pub threshold: f64,
    /// Hex width in meters the CSV was produced with
    #[arg(long, default_value_t = DEFAULT_HEX_WIDTH, value_parser = positive)]
    pub hex_width: f64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Depth CSV (q,r,elevation_m,depth_m)
    pub depths: PathBuf,
    /// Output PPM image
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PIXELS_PER_METER, value_parser = positive)]
    pub pixels_per_meter: f64,
    #[arg(long, default_value_t = DEFAULT_HEX_WIDTH, value_parser = positive)]
    pub hex_width: f64,
    /// Water colors as "R,G,B:R,G,B" from zero depth to the field maximum
    #[arg(long)]
    pub ramp: Option<ColorRamp>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(v) => Err(format!("must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        Ok(v) => Err(format!("must be finite and >= 0, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

pub fn fetch_dem(args: FetchDemArgs) -> Result<(), Failure> {
    let config = ProviderConfig {
        base_url: args.base_url,
        api_key_env: args.api_key_env,
        batch_size: args.batch_size,
        max_retries: args.max_retries,
        backoff_ms: args.backoff_ms,
    };
    let raster = fetch(&config, &args.cache_dir, &args.bbox, args.rows, args.cols)?;
    write_atomic(&args.out, |w| {
        write_csv_raster(&raster, &[], w).map_err(|e| Failure::io(args.out.display(), e))
    })?;
    info!(
        "wrote {}x{} raster to {}",
        raster.rows(),
        raster.cols(),
        args.out.display()
    );
    Ok(())
}

fn fetch(
    config: &ProviderConfig,
    cache_dir: &Path,
    bbox: &BoundingBox,
    rows: usize,
    cols: usize,
) -> Result<ElevationRaster, Failure> {
    let provider =
        HttpProvider::new(config).map_err(|e| Failure::from_core("elevation service", e))?;
    let client = ElevationClient::new(provider, DiskCache::new(cache_dir), config.clone())
        .map_err(|e| Failure::from_core("elevation service", e))?;
    client
        .fetch_elevation_grid(bbox, rows, cols)
        .map_err(|e| Failure::from_core("fetching elevations", e))
}

fn raster_terrain(
    raster: &ElevationRaster,
    metrics: HexMetrics,
    origin: Option<GeoPoint>,
    extent: HexExtent,
) -> Result<HexTerrain, Failure> {
    let origin = origin.unwrap_or_else(|| raster.node_position(raster.rows() - 1, 0));
    sample_to_hex(raster, metrics, origin, extent).map_err(|e| Failure::from_core("terrain", e))
}

fn build_terrain(config: &ScenarioConfig) -> Result<HexTerrain, Failure> {
    let metrics = config.metrics();
    match &config.terrain {
        TerrainSource::File(f) => {
            let file = File::open(&f.path).map_err(|e| Failure::io(f.path.display(), e))?;
            let raster = load_elevation_raster(file, f.format)
                .map_err(|e| Failure::from_core(f.path.display(), e))?;
            raster_terrain(&raster, metrics, f.origin, f.extent)
        }
        TerrainSource::Provider(p) => {
            let raster = fetch(&p.service, &p.cache_dir, &p.bbox, p.rows, p.cols)?;
            raster_terrain(&raster, metrics, p.origin, p.extent)
        }
        TerrainSource::Synthetic(s) => synthetic_terrain(s.kind, metrics, s.extent, s.params)
            .map_err(|e| Failure::from_core("terrain", e)),
    }
}

fn snapshot_names(s: &Snapshot) -> Vec<String> {
    s.kinds
        .iter()
        .map(|k| match k {
            SnapshotKind::Cadence => format!("step_{:08}.csv", s.step),
            SnapshotKind::AfterRain => "after_rain.csv".to_string(),
            SnapshotKind::Final => "final.csv".to_string(),
        })
        .collect()
}

fn write_depths(path: &Path, grid: &WaterGrid) -> Result<(), Failure> {
    write_atomic(path, |w| {
        export_depth_csv(grid, w).map_err(|e| Failure::from_core(path.display(), e))
    })
}

pub fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let config = ScenarioConfig::load(&args.config)?;
    let out_dir = args.output_dir.unwrap_or_else(|| config.output_dir.clone());
    let terrain = build_terrain(&config)?;
    let metrics = *terrain.metrics();
    let params = config.params();
    info!(
        "{} cells, {} rain + {} equilibration steps",
        terrain.len(),
        params.rain_steps(),
        params.equilibrate_steps()
    );
    create_dir(&out_dir)?;

    let final_grid = run_scenario_with(terrain, &params, config.snapshot_every, |snap| {
        for name in snapshot_names(&snap) {
            write_depths(&out_dir.join(name), &snap.grid)
                .map_err(|f| Error::Io(io::Error::other(f.to_string())))?;
        }
        Ok(())
    })
    .map_err(|e| Failure::from_core("simulation", e))?;

    let report = summarize(final_grid.depths()).map_err(|e| Failure::from_core("report", e))?;
    let zones = flood_zones(&final_grid, config.threshold)
        .map_err(|e| Failure::from_core("flood zones", e))?;

    let report_path = out_dir.join("report.json");
    write_atomic(&report_path, |w| {
        write_report_json(&report, w).map_err(|e| Failure::io(report_path.display(), e))
    })?;
    let zones_path = out_dir.join("zones.csv");
    write_atomic(&zones_path, |w| {
        write_zones_csv(&zones, w).map_err(|e| Failure::io(zones_path.display(), e))
    })?;
    let image_path = out_dir.join("final.ppm");
    write_atomic(&image_path, |w| {
        render_depth_map(&final_grid, &config.ramp, config.pixels_per_meter, w)
            .map_err(|e| Failure::from_core(image_path.display(), e))
    })?;

    print_summary(&report, &zones, &metrics)
}

pub fn report(args: ReportArgs) -> Result<(), Failure> {
    let metrics =
        metrics_from_width(args.hex_width).map_err(|e| Failure::from_core("--hex-width", e))?;
    let grid = read_grid(&args.depths, metrics)?;
    let report =
        summarize(grid.depths()).map_err(|e| Failure::from_input(args.depths.display(), e))?;
    let zones =
        flood_zones(&grid, args.threshold).map_err(|e| Failure::from_core("flood zones", e))?;
    print_summary(&report, &zones, &metrics)
}

pub fn render(args: RenderArgs) -> Result<(), Failure> {
    let metrics =
        metrics_from_width(args.hex_width).map_err(|e| Failure::from_core("--hex-width", e))?;
    let grid = read_grid(&args.depths, metrics)?;
    let ramp = args.ramp.unwrap_or_default();
    write_atomic(&args.out, |w| {
        render_depth_map(&grid, &ramp, args.pixels_per_meter, w)
            .map_err(|e| Failure::from_core(args.out.display(), e))
    })
}

fn read_grid(path: &Path, metrics: HexMetrics) -> Result<WaterGrid, Failure> {
    let file = File::open(path).map_err(|e| Failure::io(path.display(), e))?;
    read_depth_csv(file, metrics).map_err(|e| Failure::from_input(path.display(), e))
}

fn write_report_json(report: &FloodReport, mut w: impl Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)
}

fn write_zones_csv(zones: &[FloodZone], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "label,cells,area_m2,max_depth_m")?;
    for z in zones {
        writeln!(
            w,
            "{},{},{:.3},{:.6}",
            z.label,
            z.cells.len(),
            z.area,
            z.max_depth
        )?;
    }
    Ok(())
}

fn print_summary(
    report: &FloodReport,
    zones: &[FloodZone],
    metrics: &HexMetrics,
) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    write_summary(report, zones, metrics, &mut out).map_err(|e| Failure::io("stdout", e))
}

fn write_summary(
    report: &FloodReport,
    zones: &[FloodZone],
    metrics: &HexMetrics,
    out: &mut impl Write,
) -> io::Result<()> {
    write_report_json(report, &mut *out)?;
    writeln!(out, "volume_m3 {:.3}", report.volume(metrics))?;
    writeln!(out, "{} zones", zones.len())?;
    if !zones.is_empty() {
        writeln!(
            out,
            "{:>6} {:>8} {:>12} {:>12}",
            "label", "cells", "area_m2", "max_depth_m"
        )?;
        for z in zones {
            writeln!(
                out,
                "{:>6} {:>8} {:>12.3} {:>12.6}",
                z.label,
                z.cells.len(),
                z.area,
                z.max_depth
            )?;
        }
    }
    out.flush()
}
