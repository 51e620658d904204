use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::Cov2;
use crate::geometry::{RayMode, DEFAULT_MIN_EDGE_SIZE, DEFAULT_RAY_COUNT};
use crate::planner::{DEFAULT_EPSILON, DEFAULT_GAMMA, DEFAULT_TAU, DEFAULT_TRIAL_BUDGET};
use crate::semantics::{
    build_networks, builtin_networks, house_space_specs, BayesianNetwork, CooccurrenceCounts, DEFAULT_FALLBACK_PRIOR,
    DEFAULT_LAMBDA,
};
use crate::world::generator::default_detector_alphas;
use crate::world::{generate_house, load_environment, Environment, HouseSpec, MotionModel, SensorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub enum Method {
    /// Semantic priors, MDP and RTDP.
    #[default]
    #[serde(rename = "ours")]
    Ours,
    /// Best-scoring frontier followed by a shortest path.
    #[serde(rename = "fess")]
    FeSs,
    /// The full pipeline with a constant room prior.
    #[serde(rename = "ours-ns")]
    OursNs,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ours, Method::FeSs, Method::OursNs];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ours => "ours",
            Method::FeSs => "fess",
            Method::OursNs => "ours-ns",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s) || (s.eq_ignore_ascii_case("fe-ss") && *m == Method::FeSs))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}` (expected ours, fess or ours-ns)")))
    }
}

/// Where the world comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvSource {
    /// An environment JSON file, relative to the scenario file.
    File { path: PathBuf },
    Generated {
        seed: u64,
        #[serde(default = "default_rooms")]
        rooms: usize,
        #[serde(default = "default_objects")]
        objects: usize,
        /// Nominal room width in cells.
        #[serde(default = "default_room_cells")]
        room_cells: usize,
    },
}

fn default_rooms() -> usize {
    HouseSpec::default().rooms
}
fn default_objects() -> usize {
    HouseSpec::default().objects
}
fn default_room_cells() -> usize {
    HouseSpec::default().room_cells
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorSpec {
    /// Confusion structure of the house generator's classes.
    House,
    /// `1 + peak` on the true class, 1 elsewhere.
    Peaked {
        peak: f64,
    },
    Alphas {
        alphas: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    #[serde(default = "d_max_range")]
    pub max_range: f64,
    /// Rays for visibility regions; 0 selects exact per-cell visibility.
    #[serde(default = "d_rays")]
    pub rays: u32,
    #[serde(default = "d_range_sigma")]
    pub range_sigma: f64,
    #[serde(default = "d_bearing_sigma")]
    pub bearing_sigma: f64,
    #[serde(default = "d_pose_sigma")]
    pub pose_sigma: f64,
    #[serde(default = "d_detector")]
    pub detector: DetectorSpec,
    #[serde(default)]
    pub false_positive_rate: f64,
    #[serde(default)]
    pub noiseless_detector: bool,
}

fn d_max_range() -> f64 {
    3.0
}
fn d_rays() -> u32 {
    DEFAULT_RAY_COUNT
}
fn d_range_sigma() -> f64 {
    0.05
}
fn d_bearing_sigma() -> f64 {
    0.03
}
fn d_pose_sigma() -> f64 {
    0.05
}
fn d_detector() -> DetectorSpec {
    DetectorSpec::House
}

impl Default for SensorSpec {
    fn default() -> Self {
        SensorSpec {
            max_range: d_max_range(),
            rays: d_rays(),
            range_sigma: d_range_sigma(),
            bearing_sigma: d_bearing_sigma(),
            pose_sigma: d_pose_sigma(),
            detector: d_detector(),
            false_positive_rate: 0.0,
            noiseless_detector: false,
        }
    }
}

impl SensorSpec {
    pub fn build(&self, classes: &[String]) -> Result<SensorConfig> {
        let alphas = match &self.detector {
            DetectorSpec::House => default_detector_alphas(classes),
            DetectorSpec::Peaked { peak } => SensorConfig::with_peaked_detector(classes.len(), *peak).detector_alphas,
            DetectorSpec::Alphas { alphas } => alphas.clone(),
        };
        let diag = |a: f64, b: f64| Cov2::from_diagonal(&Vector2::new(a * a, b * b));
        let config = SensorConfig {
            max_range: self.max_range,
            ray_mode: if self.rays == 0 {
                RayMode::Dense
            } else {
                RayMode::Rays(self.rays)
            },
            range_bearing_cov: diag(self.range_sigma, self.bearing_sigma),
            detector_alphas: alphas,
            pose_noise_cov: diag(self.pose_sigma, self.pose_sigma),
            false_positive_rate: self.false_positive_rate,
            noiseless_detector: self.noiseless_detector,
        };
        config.validate(classes.len())?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetworkSource {
    /// The shipped bathroom, kitchen, bedroom and living-room networks.
    #[default]
    Builtin,
    /// Network JSON files, relative to the scenario file.
    Files { paths: Vec<PathBuf> },
    /// Tables estimated from co-occurrence counts over generated houses.
    Learned {
        houses: usize,
        seed: u64,
        #[serde(default = "d_alpha")]
        alpha: f64,
    },
}

fn d_alpha() -> f64 {
    1.0
}

/// One search task: world, target, parameters and method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub environment: EnvSource,
    pub target: String,
    /// Start position in meters; a random free cell when absent.
    #[serde(default)]
    pub start: Option<[f64; 2]>,
    #[serde(default = "d_epsilon")]
    pub epsilon: f64,
    #[serde(default = "d_tau")]
    pub tau: f64,
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    #[serde(default = "d_p0")]
    pub fallback_prior: f64,
    #[serde(default = "d_budget")]
    pub step_budget: usize,
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    /// RTDP trial budget per decision step.
    #[serde(default = "d_trials")]
    pub trials_per_step: usize,
    #[serde(default = "d_min_edge")]
    pub min_edge_size: usize,
    #[serde(default)]
    pub sensor: SensorSpec,
    /// Commanded, left and right slip probabilities.
    #[serde(default = "d_motion")]
    pub motion: [f64; 3],
    #[serde(default)]
    pub networks: NetworkSource,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    /// Map snapshots every this many steps in the episode log; 0 keeps only
    /// the final map.
    #[serde(default)]
    pub snapshot_every: usize,
}

fn d_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn d_tau() -> f64 {
    DEFAULT_TAU
}
fn d_lambda() -> f64 {
    DEFAULT_LAMBDA
}
fn d_p0() -> f64 {
    DEFAULT_FALLBACK_PRIOR
}
fn d_budget() -> usize {
    2000
}
fn d_gamma() -> f64 {
    DEFAULT_GAMMA
}
fn d_trials() -> usize {
    DEFAULT_TRIAL_BUDGET
}
fn d_min_edge() -> usize {
    DEFAULT_MIN_EDGE_SIZE
}
fn d_motion() -> [f64; 3] {
    [0.8, 0.1, 0.1]
}

impl ScenarioConfig {
    /// Defaults everywhere except the world and the target.
    pub fn new(environment: EnvSource, target: impl Into<String>) -> Self {
        ScenarioConfig {
            name: String::new(),
            environment,
            target: target.into(),
            start: None,
            epsilon: d_epsilon(),
            tau: d_tau(),
            lambda: d_lambda(),
            fallback_prior: d_p0(),
            step_budget: d_budget(),
            gamma: d_gamma(),
            trials_per_step: d_trials(),
            min_edge_size: d_min_edge(),
            sensor: SensorSpec::default(),
            motion: d_motion(),
            networks: NetworkSource::default(),
            method: Method::default(),
            seed: 0,
            snapshot_every: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ScenarioConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if self.step_budget == 0 {
            return bad("step_budget must be positive".into());
        }
        if !(0.0..1.0).contains(&self.tau) {
            return bad(format!("tau must lie in [0, 1), got {}", self.tau));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad(format!("lambda must lie in (0, 1), got {}", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.fallback_prior) {
            return bad(format!(
                "fallback_prior must lie in [0, 1], got {}",
                self.fallback_prior
            ));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        if self.trials_per_step == 0 {
            return bad("trials_per_step must be positive".into());
        }
        self.motion_model()?;
        Ok(())
    }

    pub fn motion_model(&self) -> Result<MotionModel> {
        MotionModel::new(self.motion[0], self.motion[1], self.motion[2])
    }

    pub fn load_environment(&self, base: &Path) -> Result<Environment> {
        match &self.environment {
            EnvSource::File { path } => {
                let text = std::fs::read_to_string(base.join(path))?;
                load_environment(&text)
            }
            EnvSource::Generated {
                seed,
                rooms,
                objects,
                room_cells,
            } => generate_house(
                *seed,
                &HouseSpec {
                    rooms: *rooms,
                    objects: *objects,
                    room_cells: *room_cells,
                    ..HouseSpec::default()
                },
            ),
        }
    }

    pub fn load_networks(&self, base: &Path) -> Result<Vec<BayesianNetwork>> {
        match &self.networks {
            NetworkSource::Builtin => Ok(builtin_networks()),
            NetworkSource::Files { paths } => paths
                .iter()
                .map(|p| BayesianNetwork::from_json(&std::fs::read_to_string(base.join(p))?))
                .collect(),
            NetworkSource::Learned { houses, seed, alpha } => learned_networks(*houses, *seed, *alpha),
        }
    }
}

/// Networks whose single-parent tables are estimated from `houses`
/// generated houses.
pub fn learned_networks(houses: usize, seed: u64, alpha: f64) -> Result<Vec<BayesianNetwork>> {
    let classes: Vec<String> = crate::world::generator::HOUSE_CLASSES
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut counts = CooccurrenceCounts::empty(classes);
    for k in 0..houses as u64 {
        counts.add_environment(&generate_house(seed.wrapping_add(k), &HouseSpec::default())?);
    }
    build_networks(&counts, &house_space_specs(), alpha)
}
