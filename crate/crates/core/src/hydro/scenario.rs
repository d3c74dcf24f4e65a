use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{Boundary, WaterGrid};
use super::rng::SplitMix64;
use crate::error::{Error, Result};
use crate::terrain::HexTerrain;

/// 80 mm spread evenly over 72 hours, in meters of depth per hour.
pub const DEFAULT_RAIN_RATE: f64 = 0.08 / 72.0;

pub const DEFAULT_STEP_SECONDS: f64 = 10.0;

/// Upper bound on CA steps in one scenario.
pub const MAX_STEPS: u64 = 1 << 32;

/// Upper bound on depth values retained by [`run_scenario`].
pub const MAX_RETAINED_VALUES: u64 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    pub step_seconds: f64,
    /// Meters of depth per hour.
    pub rain_rate: f64,
    /// Hours.
    pub rain_duration: f64,
    /// Hours of continued stepping without rain.
    pub equilibrate_duration: f64,
    pub seed: u64,
    pub boundary: Boundary,
}

impl Default for SimulationParams {
    fn default() -> Self {
        SimulationParams {
            step_seconds: DEFAULT_STEP_SECONDS,
            rain_rate: DEFAULT_RAIN_RATE,
            rain_duration: 0.0,
            equilibrate_duration: 0.0,
            seed: 0,
            boundary: Boundary::Closed,
        }
    }
}

impl SimulationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_seconds.is_finite() && self.step_seconds > 0.0) {
            return Err(Error::invalid(format!(
                "step_seconds must be positive, got {}",
                self.step_seconds
            )));
        }
        for (name, v) in [
            ("rain_rate", self.rain_rate),
            ("rain_duration", self.rain_duration),
            ("equilibrate_duration", self.equilibrate_duration),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Steps needed to cover `hours`, rounding a partial final step up.
    pub fn steps_for(&self, hours: f64) -> u64 {
        let exact = hours * 3600.0 / self.step_seconds;
        // Absorb representation noise such as 4320.000000000001.
        let rounded = exact.round();
        if (exact - rounded).abs() <= 1e-9 * rounded.max(1.0) {
            rounded as u64
        } else {
            exact.ceil() as u64
        }
    }

    pub fn rain_steps(&self) -> u64 {
        self.steps_for(self.rain_duration)
    }

    pub fn equilibrate_steps(&self) -> u64 {
        self.steps_for(self.equilibrate_duration)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Rain,
    Equilibrate,
}

/// Why a snapshot was taken; one snapshot may carry several.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnapshotKind {
    Cadence,
    AfterRain,
    Final,
}

/// Copy of the grid after `step` completed steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub phase: Phase,
    pub kinds: Vec<SnapshotKind>,
    pub grid: WaterGrid,
}

#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub snapshots: Vec<Snapshot>,
    pub final_grid: WaterGrid,
}

fn check_limits(terrain: &HexTerrain, params: &SimulationParams) -> Result<(u64, u64)> {
    params.validate()?;
    let rain = params.rain_steps();
    let eq = params.equilibrate_steps();
    match rain.checked_add(eq) {
        Some(total) if total <= MAX_STEPS => {}
        _ => {
            return Err(Error::Resource(format!(
                "scenario needs {rain} + {eq} steps, limit is {MAX_STEPS}"
            )))
        }
    }
    if terrain.is_empty() {
        return Err(Error::invalid("cannot simulate an empty terrain"));
    }
    Ok((rain, eq))
}

/// Runs the rain phase then the equilibration phase from dry terrain,
/// handing each snapshot to `on_snapshot` as soon as it is taken.
///
/// Snapshots are taken every `snapshot_every` steps (0 disables the
/// cadence), after the rain phase, and at the end.
pub fn run_scenario_with<F>(
    terrain: impl Into<Arc<HexTerrain>>,
    params: &SimulationParams,
    snapshot_every: u64,
    mut on_snapshot: F,
) -> Result<WaterGrid>
where
    F: FnMut(Snapshot) -> Result<()>,
{
    let terrain = terrain.into();
    let (rain_steps, eq_steps) = check_limits(&terrain, params)?;
    let total = rain_steps + eq_steps;
    let mut grid = WaterGrid::dry(terrain, params.boundary);
    let mut rng = SplitMix64::new(params.seed);

    let mut emit = |grid: &WaterGrid, step: u64| -> Result<()> {
        let mut kinds = Vec::new();
        if snapshot_every > 0 && step > 0 && step.is_multiple_of(snapshot_every) {
            kinds.push(SnapshotKind::Cadence);
        }
        if step == rain_steps {
            kinds.push(SnapshotKind::AfterRain);
        }
        if step == total {
            kinds.push(SnapshotKind::Final);
        }
        if kinds.is_empty() {
            return Ok(());
        }
        let phase = if step <= rain_steps && rain_steps > 0 {
            Phase::Rain
        } else {
            Phase::Equilibrate
        };
        on_snapshot(Snapshot {
            step,
            phase,
            kinds,
            grid: grid.clone(),
        })
    };

    if rain_steps == 0 {
        emit(&grid, 0)?;
    }
    for step in 1..=total {
        if step <= rain_steps {
            grid.apply_rain(params.rain_rate, params.step_seconds)?;
        }
        grid.step(&mut rng);
        emit(&grid, step)?;
    }
    Ok(grid)
}

/// Like [`run_scenario_with`] but collects every snapshot.
pub fn run_scenario(
    terrain: impl Into<Arc<HexTerrain>>,
    params: &SimulationParams,
    snapshot_every: u64,
) -> Result<ScenarioOutcome> {
    let terrain = terrain.into();
    let (rain, eq) = check_limits(&terrain, params)?;
    let total = rain + eq;
    let cadence = total.checked_div(snapshot_every).unwrap_or(0);
    let retained = (cadence + 2).saturating_mul(terrain.len() as u64);
    if retained > MAX_RETAINED_VALUES {
        return Err(Error::Resource(format!(
            "retaining {} snapshots of {} cells exceeds {MAX_RETAINED_VALUES} values",
            cadence + 2,
            terrain.len()
        )));
    }
    let mut snapshots = Vec::new();
    let final_grid = run_scenario_with(terrain, params, snapshot_every, |s| {
        snapshots.push(s);
        Ok(())
    })?;
    Ok(ScenarioOutcome {
        snapshots,
        final_grid,
    })
}
