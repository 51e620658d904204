//! Reward shaping from the robot's position uncertainty.
//!
//! The robot's position after arriving in a state is Gaussian around the
//! state's cell center. Rewards are the probability mass of that Gaussian
//! falling on goal cells, weighted per cell.

use std::collections::BTreeMap;

use statrs::function::erf::erf;

use super::mdp::MdpModel;
use crate::gauss::Cov2;
use crate::geometry::{FrontierEdge, VisibilityRegion};
use crate::grid::{Cell, RoomId};

/// Masses below this are dropped from the kernel.
const NEGLIGIBLE: f64 = 1e-15;

/// Standard deviations covered on each side of the mean.
const WINDOW_SIGMAS: f64 = 9.0;

/// Below this standard deviation (in cells) an axis is treated as exact.
const POINT_SIGMA: f64 = 1e-9;

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// `P(a <= X < b)` for `X ~ N(mu, sigma^2)`.
fn interval_mass(a: f64, b: f64, mu: f64, sigma: f64) -> f64 {
    if sigma < POINT_SIGMA {
        return if a <= mu && mu < b { 1.0 } else { 0.0 };
    }
    (std_normal_cdf((b - mu) / sigma) - std_normal_cdf((a - mu) / sigma)).max(0.0)
}

/// Mass a Gaussian centered on a cell center puts on the cells around it,
/// as `(dx, dy, mass)` offsets. `cov` is in meters squared.
pub fn cell_mass_kernel(cov: &Cov2, resolution: f64) -> Vec<(i32, i32, f64)> {
    let c = cov / (resolution * resolution);
    let sx = c[(0, 0)].max(0.0).sqrt();
    let sy = c[(1, 1)].max(0.0).sqrt();
    let cxy = 0.5 * (c[(0, 1)] + c[(1, 0)]);
    let reach_x = (WINDOW_SIGMAS * sx + 0.5).ceil() as i32;
    let reach_y = (WINDOW_SIGMAS * sy + 0.5).ceil() as i32;
    let correlated = sx >= POINT_SIGMA && sy >= POINT_SIGMA && cxy.abs() > 1e-12 * sx * sy;

    let mut out = Vec::new();
    for dy in -reach_y..=reach_y {
        for dx in -reach_x..=reach_x {
            // cell (dx, dy) spans [dx - 1/2, dx + 1/2) around a mean at 0
            let (x0, x1) = (f64::from(dx) - 0.5, f64::from(dx) + 0.5);
            let (y0, y1) = (f64::from(dy) - 0.5, f64::from(dy) + 0.5);
            let m = if correlated {
                correlated_mass(x0, x1, y0, y1, sx, sy, cxy)
            } else {
                interval_mass(x0, x1, 0.0, sx) * interval_mass(y0, y1, 0.0, sy)
            };
            if m > NEGLIGIBLE {
                out.push((dx, dy, m));
            }
        }
    }
    out
}

/// Integrates the x-marginal against the conditional y-mass with
/// Gauss-Legendre quadrature.
fn correlated_mass(x0: f64, x1: f64, y0: f64, y1: f64, sx: f64, sy: f64, cxy: f64) -> f64 {
    let rho = (cxy / (sx * sy)).clamp(-1.0, 1.0);
    let s_cond = sy * (1.0 - rho * rho).max(0.0).sqrt();
    let (mid, half) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
    let norm = 1.0 / (sx * (2.0 * std::f64::consts::PI).sqrt());
    let mut total = 0.0;
    for (t, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        let x = mid + half * t;
        let pdf = norm * (-0.5 * (x / sx).powi(2)).exp();
        let m_cond = rho * sy / sx * x;
        total += w * pdf * interval_mass(y0, y1, m_cond, s_cond);
    }
    (total * half).max(0.0)
}

/// Sets `R(s') = Σ_c mass(c | s') w(c)` for the given cell weights.
fn apply_weights(mdp: &mut MdpModel, weights: &BTreeMap<Cell, f64>, kernel: &[(i32, i32, f64)]) {
    let rewards: Vec<f64> = mdp
        .states()
        .iter()
        .map(|&s| {
            kernel
                .iter()
                .filter_map(|&(dx, dy, m)| weights.get(&s.offset(dx, dy)).map(|w| m * w))
                .sum()
        })
        .collect();
    mdp.set_rewards(rewards).expect("rewards sized to the state space");
}

/// Frontier shaping: each edge's cells weigh `P(target | room) · |e|`, and
/// every frontier cell becomes a goal.
pub fn shape_frontier_reward<F>(
    mdp: MdpModel,
    frontiers: &[FrontierEdge],
    room_prob: F,
    pose_cov: &Cov2,
    resolution: f64,
) -> MdpModel
where
    F: Fn(Option<RoomId>) -> f64,
{
    let probs: Vec<f64> = frontiers.iter().map(|e| room_prob(e.room)).collect();
    frontier_with_probs(mdp, frontiers, &probs, pose_cov, resolution)
}

fn frontier_with_probs(
    mut mdp: MdpModel,
    frontiers: &[FrontierEdge],
    probs: &[f64],
    pose_cov: &Cov2,
    resolution: f64,
) -> MdpModel {
    let mut weights: BTreeMap<Cell, f64> = BTreeMap::new();
    for (e, p) in frontiers.iter().zip(probs) {
        let w = p * e.size() as f64;
        for &c in &e.cells {
            *weights.entry(c).or_default() += w;
        }
    }
    apply_weights(&mut mdp, &weights, &cell_mass_kernel(pose_cov, resolution));
    mdp.set_goals(frontiers.iter().flat_map(|e| e.cells.iter().copied()));
    mdp
}

/// Visibility shaping: reward is the mass inside the region, whose states
/// become goals.
pub fn shape_visibility_reward(
    mut mdp: MdpModel,
    vis: &VisibilityRegion,
    pose_cov: &Cov2,
    resolution: f64,
) -> MdpModel {
    let weights: BTreeMap<Cell, f64> = vis.cells.iter().map(|&c| (c, 1.0)).collect();
    apply_weights(&mut mdp, &weights, &cell_mass_kernel(pose_cov, resolution));
    mdp.set_goals(vis.cells.iter().copied());
    mdp
}

/// A reward shape kept around so it can be re-applied after the map grows.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardShape {
    Frontier {
        edges: Vec<FrontierEdge>,
        /// Room probability of each edge.
        room_probs: Vec<f64>,
        pose_cov: Cov2,
    },
    Visibility {
        region: VisibilityRegion,
        pose_cov: Cov2,
    },
}

impl RewardShape {
    pub fn apply(&self, mdp: MdpModel, resolution: f64) -> MdpModel {
        match self {
            RewardShape::Frontier {
                edges,
                room_probs,
                pose_cov,
            } => frontier_with_probs(mdp, edges, room_probs, pose_cov, resolution),
            RewardShape::Visibility { region, pose_cov } => shape_visibility_reward(mdp, region, pose_cov, resolution),
        }
    }
}
