//! Mapping-only runs: the robot stays put and keeps observing a room.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::SensorSpec;
use super::metrics::{mapping_metrics, MappingSample};
use crate::error::Result;
use crate::grid::{Cell, CellState, GridMap, Point, RoomId, RoomLabels};
use crate::mapping::{DetectorModel, FusedMap, FusionParams, ObjectId, DEFAULT_GATE};
use crate::world::generator::HOUSE_CLASSES;
use crate::world::{simulate_sensing, Environment, GroundTruthObject, TruthId};

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryConfig {
    pub steps: usize,
    pub objects: usize,
    /// Side of the square room, in cells.
    pub room_cells: usize,
    pub resolution: f64,
    /// Smallest distance between two objects, in meters.
    pub min_spacing: f64,
    pub sensor: SensorSpec,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        StationaryConfig {
            steps: 100,
            objects: 1,
            room_cells: 20,
            resolution: 0.25,
            min_spacing: 1.0,
            sensor: SensorSpec::default(),
        }
    }
}

/// A walled square room with objects scattered within sensor range of its
/// center cell, which is where the robot stands. Objects keep
/// `min_spacing` apart; fewer are placed when no spot is left.
pub fn stationary_environment(seed: u64, config: &StationaryConfig) -> Result<(Environment, Point)> {
    let n = config.room_cells;
    let mut map = GridMap::new(n, n, config.resolution, CellState::Free)?;
    let mut rooms = RoomLabels::unlabeled(n, n);
    for (c, _) in map.clone().iter_cells() {
        if c.x == 0 || c.y == 0 || c.x as usize == n - 1 || c.y as usize == n - 1 {
            map.set(c, CellState::Occupied);
        } else {
            rooms.set(c, Some(RoomId(0)));
        }
    }
    let center = Cell::new(n as i32 / 2, n as i32 / 2);
    let robot = map.center(center);
    let max_r = config.sensor.max_range - config.resolution;
    let mut candidates: Vec<Cell> = map
        .free_cells()
        .filter(|&c| {
            let d = (map.center(c) - robot).norm();
            d >= 2.0 * config.resolution && d <= max_r
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objects = Vec::new();
    for k in 0..config.objects {
        if candidates.is_empty() {
            break;
        }
        let c = candidates.swap_remove(rng.random_range(0..candidates.len()));
        let p = map.center(c);
        candidates.retain(|&o| (map.center(o) - p).norm() >= config.min_spacing);
        objects.push(GroundTruthObject {
            id: TruthId(k as u32),
            position: p,
            class: rng.random_range(0..HOUSE_CLASSES.len()),
            room: Some(RoomId(0)),
        });
    }
    let env = Environment {
        map,
        rooms,
        objects,
        class_set: HOUSE_CLASSES.iter().map(|s| s.to_string()).collect(),
        room_kinds: BTreeMap::new(),
    };
    Ok((env, robot))
}

/// Per-step mapping metrics and per-object position errors of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryTrace {
    pub samples: Vec<Option<MappingSample>>,
    /// Position error of every matched object, per step, in meters.
    pub errors: Vec<Vec<f64>>,
    pub resolution: f64,
}

pub fn run_stationary(seed: u64, config: &StationaryConfig) -> Result<StationaryTrace> {
    let (env, robot) = stationary_environment(seed, config)?;
    let sensor = config.sensor.build(&env.class_set)?;
    let model = DetectorModel::new(sensor.detector_alphas.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut fused = FusedMap::unknown(env.map.width(), env.map.height(), env.map.resolution())?;
    let mut matches: BTreeMap<ObjectId, TruthId> = BTreeMap::new();
    let mut samples = Vec::with_capacity(config.steps);
    let mut errors = Vec::with_capacity(config.steps);
    for _ in 0..config.steps {
        let sense = simulate_sensing(&env, &robot, 0.0, &sensor, &mut rng);
        fused.reveal(&sense.revealed, &env.rooms);
        let params = FusionParams {
            meas_cov: &sensor.range_bearing_cov,
            model: &model,
            gate: DEFAULT_GATE,
            heading: 0.0,
        };
        for det in &sense.detections {
            let r = fused.integrate(det, &sense.pose, &params)?;
            if let Some(t) = det.truth_id {
                matches.entry(r.id).or_insert(t);
            }
        }
        samples.push(mapping_metrics(&fused.objects, &env, &matches));
        errors.push(
            fused
                .objects
                .iter()
                .filter_map(|o| {
                    let t = env.object(*matches.get(&o.id)?)?;
                    Some((o.mu - t.position).norm())
                })
                .collect(),
        );
    }
    Ok(StationaryTrace {
        samples,
        errors,
        resolution: config.resolution,
    })
}
