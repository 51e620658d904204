//! Simulated perception: occupancy reveal by line of sight, range-bearing
//! object detections with Dirichlet-distributed class confidences, and a
//! noisy localization estimate.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::env::{Environment, TruthId};
use crate::error::{Error, Result};
use crate::gauss::{self, Cov2};
use crate::geometry::los::line_of_sight;
use crate::geometry::{RayMode, DEFAULT_RAY_COUNT};
use crate::grid::{Cell, CellState, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct SensorConfig {
    /// Meters.
    pub max_range: f64,
    /// Rays used by the agent when it computes visibility regions.
    pub ray_mode: RayMode,
    /// Covariance of (range m, bearing rad) noise.
    pub range_bearing_cov: Cov2,
    /// Dirichlet concentration of the detector output, one vector per true class.
    pub detector_alphas: Vec<Vec<f64>>,
    /// Localization noise injected at every sensing step.
    pub pose_noise_cov: Cov2,
    /// Probability of one spurious detection per sensing call.
    pub false_positive_rate: f64,
    /// Emit the Dirichlet mean instead of a random draw.
    pub noiseless_detector: bool,
}

impl SensorConfig {
    /// Peaked detector: each class gets `1 + peak` on itself and `1` elsewhere.
    pub fn with_peaked_detector(num_classes: usize, peak: f64) -> Self {
        let alphas = (0..num_classes)
            .map(|c| {
                (0..num_classes)
                    .map(|k| if k == c { 1.0 + peak } else { 1.0 })
                    .collect()
            })
            .collect();
        SensorConfig {
            max_range: 3.0,
            ray_mode: RayMode::Rays(DEFAULT_RAY_COUNT),
            range_bearing_cov: Cov2::from_diagonal(&nalgebra::Vector2::new(0.05f64.powi(2), 0.03f64.powi(2))),
            detector_alphas: alphas,
            pose_noise_cov: Cov2::from_diagonal(&nalgebra::Vector2::new(0.05f64.powi(2), 0.05f64.powi(2))),
            false_positive_rate: 0.0,
            noiseless_detector: false,
        }
    }

    pub fn validate(&self, num_classes: usize) -> Result<()> {
        if !(self.max_range > 0.0) {
            return Err(Error::InvalidConfig("max_range must be positive".into()));
        }
        if let RayMode::Rays(0) = self.ray_mode {
            return Err(Error::InvalidConfig("ray count must be positive".into()));
        }
        if !gauss::is_psd(&self.range_bearing_cov, 1e-9) || !gauss::is_psd(&self.pose_noise_cov, 1e-9) {
            return Err(Error::InvalidConfig("noise covariances must be symmetric PSD".into()));
        }
        if self.detector_alphas.len() != num_classes
            || self
                .detector_alphas
                .iter()
                .any(|a| a.len() != num_classes || a.iter().any(|&v| !(v > 0.0 && v.is_finite())))
        {
            return Err(Error::InvalidConfig(format!(
                "detector needs {num_classes} strictly positive alpha vectors of length {num_classes}"
            )));
        }
        if !(0.0..=1.0).contains(&self.false_positive_rate) {
            return Err(Error::InvalidConfig("false_positive_rate must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Gaussian belief over the robot position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotPoseBelief {
    pub mean: Point,
    pub covariance: Cov2,
}

impl RobotPoseBelief {
    pub fn exact(mean: Point) -> Self {
        RobotPoseBelief {
            mean,
            covariance: Cov2::zeros(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeBearing {
    pub range: f64,
    /// Radians, counter-clockwise from the sensing heading.
    pub bearing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    /// Hidden from the agent; used only for evaluation bookkeeping.
    pub truth_id: Option<TruthId>,
    pub measurement: RangeBearing,
    pub confidence: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingResult {
    /// Cells in line of sight, with their true state.
    pub revealed: Vec<(Cell, CellState)>,
    pub detections: Vec<DetectionEvent>,
    pub pose: RobotPoseBelief,
}

/// Cells seen from `origin`: every cell whose center is within range and
/// joined to the origin center by a segment that crosses no occupied cell
/// interior (the seen cell itself may be occupied).
pub fn visible_cells(env: &Environment, origin: Cell, max_range: f64) -> Vec<(Cell, CellState)> {
    let map = &env.map;
    let reach = (max_range / map.resolution()).ceil() as i32 + 1;
    let mut out = Vec::new();
    for y in (origin.y - reach)..=(origin.y + reach) {
        for x in (origin.x - reach)..=(origin.x + reach) {
            let c = Cell::new(x, y);
            let Some(state) = map.get(c) else { continue };
            if origin.distance(c) * map.resolution() > max_range + 1e-9 {
                continue;
            }
            if line_of_sight(origin, c, |m| map.get(m) != Some(CellState::Free)) {
                out.push((c, state));
            }
        }
    }
    out
}

pub(crate) fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = alpha
            .iter()
            .map(|&a| Gamma::new(a, 1.0).expect("alphas validated positive").sample(rng))
            .collect();
        let total: f64 = g.iter().sum();
        if total > 0.0 && total.is_finite() {
            return g.into_iter().map(|v| v / total).collect();
        }
    }
}

/// One sensing sweep (full 360 degrees) from the true pose.
pub fn simulate_sensing<R: Rng + ?Sized>(
    env: &Environment,
    true_pose: &Point,
    heading: f64,
    config: &SensorConfig,
    rng: &mut R,
) -> SensingResult {
    let map = &env.map;
    let revealed = match map.cell_of(true_pose) {
        Some(origin) => visible_cells(env, origin, config.max_range),
        None => Vec::new(),
    };
    let seen = |c: Cell| revealed.binary_search_by_key(&(c.y, c.x), |(r, _)| (r.y, r.x)).is_ok();

    let min_range = 0.5 * map.resolution();
    let mut detections = Vec::new();
    for obj in &env.objects {
        let Some(cell) = map.cell_of(&obj.position) else {
            continue;
        };
        let d = obj.position - true_pose;
        let range = d.norm();
        if range > config.max_range || range < min_range || !seen(cell) {
            continue;
        }
        let noise = gauss::sample_zero_mean(&config.range_bearing_cov, rng);
        let measurement = RangeBearing {
            range: range + noise.x,
            bearing: gauss::wrap_angle(d.y.atan2(d.x) - heading + noise.y),
        };
        let alpha = &config.detector_alphas[obj.class];
        let confidence = if config.noiseless_detector {
            let total: f64 = alpha.iter().sum();
            alpha.iter().map(|a| a / total).collect()
        } else {
            sample_dirichlet(alpha, rng)
        };
        detections.push(DetectionEvent {
            truth_id: Some(obj.id),
            measurement,
            confidence,
        });
    }

    if config.false_positive_rate > 0.0 && rng.random::<f64>() < config.false_positive_rate {
        let free: Vec<Cell> = revealed
            .iter()
            .filter(|(c, s)| *s == CellState::Free && map.cell_of(true_pose) != Some(*c))
            .map(|(c, _)| *c)
            .collect();
        if !free.is_empty() {
            let c = free[rng.random_range(0..free.len())];
            let d = map.center(c) - true_pose;
            let ones = vec![1.0; env.class_set.len()];
            detections.push(DetectionEvent {
                truth_id: None,
                measurement: RangeBearing {
                    range: d.norm(),
                    bearing: gauss::wrap_angle(d.y.atan2(d.x) - heading),
                },
                confidence: sample_dirichlet(&ones, rng),
            });
        }
    }

    let pose = RobotPoseBelief {
        mean: true_pose + gauss::sample_zero_mean(&config.pose_noise_cov, rng),
        covariance: config.pose_noise_cov,
    };

    SensingResult {
        revealed,
        detections,
        pose,
    }
}
