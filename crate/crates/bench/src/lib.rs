//! Shared fixtures for the benchmarks.

use hexflood_core::{
    metrics_from_width, synthetic_terrain, HexExtent, HexTerrain, SplitMix64, SyntheticKind,
    SyntheticParams,
};

/// `n x n` terrain with pseudo-random heights in `[0, 10)` meters.
pub fn rough_terrain(n: u32, seed: u64) -> HexTerrain {
    let metrics = metrics_from_width(4.0).expect("valid width");
    let flat = synthetic_terrain(
        SyntheticKind::Plane,
        metrics,
        HexExtent::new(n, n),
        SyntheticParams::default(),
    )
    .expect("valid extent");
    let mut rng = SplitMix64::new(seed);
    let heights = (0..flat.len())
        .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 10.0)
        .collect();
    HexTerrain::new(metrics, flat.origin(), flat.min(), flat.extent(), heights)
        .expect("finite heights")
}
