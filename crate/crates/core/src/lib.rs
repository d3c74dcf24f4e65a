//! Hexagonal cellular-automata runoff simulation.
//!
//! Terrain elevations are resampled onto a pointy-top hex grid, rain is
//! added uniformly, and water is moved by repeatedly leveling each cell's
//! seven-cell partition in a seeded random order. Results are summarized
//! as depth statistics, connected flood zones, CSV tables and PPM images.

pub mod analysis;
pub mod elevation_client;
pub mod error;
pub mod hexgrid;
pub mod hydro;
pub mod terrain;

pub use analysis::{
    export_depth_csv, flood_zones, read_depth_csv, render_depth_map, summarize, ColorRamp,
    FloodReport, FloodZone,
};
pub use error::{Error, Result};
pub use hexgrid::{
    axial_to_world, cube_round, hex_distance, metrics_from_width, neighbors, world_to_axial,
    AxialCoord, CubeCoord, FractionalAxial, FractionalCube, HexMetrics, WorldPoint,
};
pub use hydro::{
    distribute_partition, run_scenario, run_scenario_with, Boundary, SimulationParams, SplitMix64,
    WaterGrid,
};
pub use terrain::{
    geodesic_distance, load_elevation_raster, normalize_extent, sample_to_hex, synthetic_terrain,
    BoundingBox, ElevationRaster, GeoPoint, HexExtent, HexTerrain, RasterFormat, SyntheticKind,
    SyntheticParams,
};
