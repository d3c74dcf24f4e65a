//! Cellular-automata runoff engine.
//!
//! Each step visits every cell once, in a freshly shuffled order, and
//! redistributes the water of that cell's partition so the partition's
//! water surface is level over its lowest cells. Rainfall is added before
//! each step of the rain phase.

mod grid;
mod partition;
mod rng;
mod scenario;

pub use grid::{Boundary, Partition, WaterGrid};
pub use partition::{distribute_partition, PartitionOutcome, MAX_PARTITION};
pub use rng::{next_random, shuffle, SplitMix64};
pub use scenario::{
    run_scenario, run_scenario_with, Phase, ScenarioOutcome, SimulationParams, Snapshot,
    SnapshotKind, DEFAULT_RAIN_RATE, DEFAULT_STEP_SECONDS, MAX_RETAINED_VALUES, MAX_STEPS,
};
