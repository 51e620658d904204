//! The search loop: sense, update the map, decide, plan, move.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Method, ScenarioConfig};
use super::metrics::{mapping_metrics, shortest_target_distance, spl_term, target_region, MappingSample, SplEpisode};
use super::paths::shortest_path;
use crate::error::{Error, Result};
use crate::geometry::{compute_visibility, detect_frontiers, FrontierEdge};
use crate::grid::{Cell, GridMap, Point, RoomId};
use crate::mapping::{DetectorModel, FusedMap, FusionParams, MapSnapshot, ObjectId, DEFAULT_GATE};
use crate::planner::{
    adapt, build_mdp, cell_mass_kernel, greedy_action, rtdp_improve, select_goal, GoalDecision, MdpModel, RewardShape,
    RtdpConfig, ValueTable,
};
use crate::semantics::{room_target_probabilities, BayesianNetwork};
use crate::world::{simulate_motion, simulate_sensing, Environment, MotionModel, MoveAction, SensorConfig, TruthId};

/// Modeled seconds per unit of planning work (one Bellman backup, one
/// shaped state, one settled search node). Keeps logged planning time
/// reproducible; measured wall-clock time is reported separately.
pub const WORK_UNIT_SECONDS: f64 = 1e-7;

const WORLD_STREAM: u64 = 0;
const START_STREAM: u64 = 1;
const PLAN_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Stopped on an object that is an instance of the target.
    Found,
    /// Stopped confidently on an object that is not the target.
    WrongObject,
    /// Nothing left to explore.
    Exhausted,
    StepBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalRecord {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub object: Option<u32>,
}

impl From<GoalDecision> for GoalRecord {
    fn from(g: GoalDecision) -> Self {
        let (kind, object) = match g {
            GoalDecision::Found(id) => ("found", Some(id.0)),
            GoalDecision::Observe(id) => ("observe", Some(id.0)),
            GoalDecision::Explore => ("explore", None),
            GoalDecision::Exhausted => ("exhausted", None),
        };
        GoalRecord {
            kind: kind.to_string(),
            object,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub truth_id: Option<u32>,
    pub object_id: u32,
    pub created: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerTrace {
    pub goal_cells: usize,
    pub trials: usize,
    pub backups: u64,
    pub converged: bool,
    pub start_value: f64,
    pub work: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub true_pose: [f64; 2],
    pub believed_pose: [f64; 2],
    pub goal: GoalRecord,
    /// `None` when the robot held position or stopped.
    pub action: Option<MoveAction>,
    pub detections: Vec<DetectionRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planner: Option<PlannerTrace>,
    pub n_objects: usize,
    /// Target probability of the object of interest.
    pub p_interest: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub success: bool,
    pub reason: StopReason,
    /// Motion commands executed.
    pub steps_used: usize,
    pub path_length_m: f64,
    /// Shortest distance from the start to any cell that sees a target.
    pub shortest_path_m: Option<f64>,
    pub spl: f64,
    pub planning_work: u64,
    pub planning_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub scenario: String,
    pub method: Method,
    pub seed: u64,
    pub target: String,
    pub start: [f64; 2],
    pub steps: Vec<StepRecord>,
    pub outcome: EpisodeOutcome,
    pub snapshots: Vec<(usize, MapSnapshot)>,
    pub final_map: MapSnapshot,
}

impl EpisodeLog {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("episode logs serialize")
    }
}

/// An episode together with what is not part of its reproducible record.
#[derive(Debug, Clone)]
pub struct EpisodeRun {
    pub log: EpisodeLog,
    /// Mapping metrics after each step's update.
    pub timeseries: Vec<(usize, Option<MappingSample>)>,
    /// Measured wall-clock seconds spent planning.
    pub wall_planning_s: f64,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Random free cell center, preferring cells that do not already see a target.
pub fn choose_start(env: &Environment, target: usize, max_range: f64, seed: u64) -> Result<Point> {
    let region = target_region(env, target, max_range);
    let free: Vec<Cell> = env.map.free_cells().collect();
    if free.is_empty() {
        return Err(Error::EmptyStateSpace);
    }
    let away: Vec<Cell> = free.iter().copied().filter(|c| !region.contains(c)).collect();
    let pool = if away.is_empty() { &free } else { &away };
    let mut r = rng(seed, START_STREAM);
    let k = rand::Rng::random_range(&mut r, 0..pool.len());
    Ok(env.map.center(pool[k]))
}

/// Loads the world and networks named by `config` and runs one episode.
pub fn run_scenario(config: &ScenarioConfig, base: &Path) -> Result<EpisodeRun> {
    let env = config.load_environment(base)?;
    let networks = config.load_networks(base)?;
    run_episode(config, &env, &networks)
}

/// Free cell for the believed position: its own cell when free, else the
/// nearest free cell (ties in row-major order).
fn believed_cell(grid: &GridMap, p: &Point) -> Option<Cell> {
    if let Some(c) = grid.cell_of(p) {
        if grid.is_free(c) {
            return Some(c);
        }
    }
    grid.free_cells().min_by(|a, b| {
        let da = (grid.center(*a) - p).norm();
        let db = (grid.center(*b) - p).norm();
        da.total_cmp(&db).then((a.y, a.x).cmp(&(b.y, b.x)))
    })
}

/// Free cells 8-connected to `start` on the agent's map.
fn reachable_cells(grid: &GridMap, start: Cell) -> BTreeSet<Cell> {
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors8() {
            if grid.is_free(n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen
}

#[derive(Default)]
struct MdpPlanner {
    mdp: Option<MdpModel>,
    table: Option<ValueTable>,
    shape: Option<RewardShape>,
    grid: Option<GridMap>,
}

impl MdpPlanner {
    #[allow(clippy::too_many_arguments)]
    fn plan(
        &mut self,
        grid: &GridMap,
        shape: RewardShape,
        agent: Cell,
        motion: &MotionModel,
        gamma: f64,
        trials: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Option<MoveAction>, PlannerTrace)> {
        let mut work = 0u64;
        if self.shape.as_ref() != Some(&shape) || self.grid.as_ref() != Some(grid) {
            let (mdp, table) = match (self.mdp.take(), self.table.take()) {
                (Some(m), Some(t)) => adapt(&m, &t, grid, &shape)?,
                _ => {
                    let m = shape.apply(build_mdp(grid, motion, gamma)?, grid.resolution());
                    let t = ValueTable::optimistic(&m);
                    (m, t)
                }
            };
            let pose_cov = match &shape {
                RewardShape::Frontier { pose_cov, .. } | RewardShape::Visibility { pose_cov, .. } => pose_cov,
            };
            let kernel = cell_mass_kernel(pose_cov, grid.resolution()).len() as u64;
            work += mdp.len() as u64 * (8 + kernel);
            self.mdp = Some(mdp);
            self.table = Some(table);
            self.shape = Some(shape);
            self.grid = Some(grid.clone());
        }
        let mdp = self.mdp.as_ref().expect("planner holds an MDP");
        let table = self.table.as_mut().expect("planner holds a value table");
        let s = mdp
            .state_of(agent)
            .ok_or_else(|| Error::InvalidConfig("robot cell is not a planning state".into()))?;
        let cfg = RtdpConfig {
            max_trials: trials,
            ..RtdpConfig::default()
        };
        let report = rtdp_improve(mdp, table, s, &cfg, rng)?;
        work += report.backups;
        let action = (!mdp.is_goal(s)).then(|| greedy_action(table, mdp, s));
        Ok((
            action,
            PlannerTrace {
                goal_cells: mdp.goal_count(),
                trials: report.trials,
                backups: report.backups,
                converged: report.converged,
                start_value: table.value(mdp, s),
                work,
            },
        ))
    }
}

/// Shortest-path step toward `targets`; `None` when already there.
fn path_step(grid: &GridMap, agent: Cell, targets: &BTreeSet<Cell>) -> (Option<MoveAction>, u64) {
    match shortest_path(grid, agent, targets) {
        Some(p) if p.cells.len() >= 2 => {
            let next = p.cells[1];
            (
                MoveAction::from_delta(next.x - agent.x, next.y - agent.y),
                p.settled as u64,
            )
        }
        Some(p) => (None, p.settled as u64),
        None => (None, grid.len() as u64),
    }
}

/// Frontier edges restricted to cells the robot can reach, with the room
/// probability of each.
fn reachable_edges(
    frontiers: &[FrontierEdge],
    reachable: &BTreeSet<Cell>,
    probs: &BTreeMap<RoomId, f64>,
    fallback: f64,
) -> (Vec<FrontierEdge>, Vec<f64>) {
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for e in frontiers {
        let cells: Vec<Cell> = e.cells.iter().copied().filter(|c| reachable.contains(c)).collect();
        if cells.is_empty() {
            continue;
        }
        weights.push(e.room.and_then(|r| probs.get(&r).copied()).unwrap_or(fallback));
        edges.push(FrontierEdge { cells, room: e.room });
    }
    (edges, weights)
}

fn majority_truth(votes: &BTreeMap<TruthId, u32>) -> Option<TruthId> {
    votes
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(t, _)| *t)
}

pub fn run_episode(config: &ScenarioConfig, env: &Environment, networks: &[BayesianNetwork]) -> Result<EpisodeRun> {
    config.validate()?;
    let target = env
        .class_index(&config.target)
        .ok_or_else(|| Error::InvalidConfig(format!("target class `{}` not in the class set", config.target)))?;
    let sensor: SensorConfig = config.sensor.build(&env.class_set)?;
    let motion = config.motion_model()?;
    let model = DetectorModel::new(sensor.detector_alphas.clone())?;
    let mut world_rng = rng(config.seed, WORLD_STREAM);
    let mut plan_rng = rng(config.seed, PLAN_STREAM);

    let start = match config.start {
        Some([x, y]) => {
            let p = Point::new(x, y);
            match env.map.cell_of(&p) {
                Some(c) if env.map.is_free(c) => p,
                _ => return Err(Error::InvalidConfig(format!("start ({x}, {y}) is not a free cell"))),
            }
        }
        None => choose_start(env, target, sensor.max_range, config.seed)?,
    };
    let shortest = shortest_target_distance(env, &start, target, sensor.max_range);

    let mut fused = FusedMap::unknown(env.map.width(), env.map.height(), env.map.resolution())?;
    let mut votes: BTreeMap<ObjectId, BTreeMap<TruthId, u32>> = BTreeMap::new();
    let mut matches: BTreeMap<ObjectId, TruthId> = BTreeMap::new();
    let mut planner = MdpPlanner::default();
    let mut excluded: BTreeMap<ObjectId, BTreeSet<Cell>> = BTreeMap::new();
    let mut abandoned: BTreeSet<ObjectId> = BTreeSet::new();
    let mut holding: Option<(ObjectId, Cell)> = None;

    let mut true_pose = start;
    let mut steps = Vec::new();
    let mut timeseries = Vec::new();
    let mut snapshots = Vec::new();
    let mut path_length = 0.0;
    let mut moves = 0usize;
    let mut work = 0u64;
    let mut wall = 0.0f64;
    let mut reason = StopReason::StepBudget;
    let mut success = false;

    for step in 0..config.step_budget {
        let sense = simulate_sensing(env, &true_pose, 0.0, &sensor, &mut world_rng);
        fused.reveal(&sense.revealed, &env.rooms);
        let params = FusionParams {
            meas_cov: &sensor.range_bearing_cov,
            model: &model,
            gate: DEFAULT_GATE,
            heading: 0.0,
        };
        let mut detections = Vec::with_capacity(sense.detections.len());
        let mut updated = BTreeSet::new();
        for det in &sense.detections {
            let r = fused.integrate(det, &sense.pose, &params)?;
            updated.insert(r.id);
            if let Some(t) = det.truth_id {
                let v = votes.entry(r.id).or_default();
                *v.entry(t).or_default() += 1;
                if let Some(m) = majority_truth(v) {
                    matches.insert(r.id, m);
                }
            }
            detections.push(DetectionRecord {
                truth_id: det.truth_id.map(|t| t.0),
                object_id: r.id.0,
                created: r.created,
            });
        }
        timeseries.push((step, mapping_metrics(&fused.objects, env, &matches)));
        if config.snapshot_every > 0 && step % config.snapshot_every == 0 {
            snapshots.push((step, MapSnapshot::capture(&fused, &env.class_set)));
        }

        if let Some((id, cell)) = holding.take() {
            if !updated.contains(&id) {
                excluded.entry(id).or_default().insert(cell);
            }
        }

        let frontiers = detect_frontiers(&fused.grid, &fused.rooms, config.min_edge_size);
        let mut decision = select_goal(&fused.objects, target, config.tau, config.epsilon, &frontiers);
        if let GoalDecision::Observe(id) = decision {
            if abandoned.contains(&id) {
                decision = if frontiers.is_empty() {
                    GoalDecision::Exhausted
                } else {
                    GoalDecision::Explore
                };
            }
        }
        let p_interest = crate::mapping::object_of_interest(&fused.objects, target)
            .and_then(|id| fused.objects.get(id))
            .map(|o| o.class_dist[target]);

        let mut record = StepRecord {
            step,
            true_pose: [true_pose.x, true_pose.y],
            believed_pose: [sense.pose.mean.x, sense.pose.mean.y],
            goal: decision.into(),
            action: None,
            detections,
            planner: None,
            n_objects: fused.objects.len(),
            p_interest,
        };

        match decision {
            GoalDecision::Found(id) => {
                success = matches
                    .get(&id)
                    .and_then(|t| env.object(*t))
                    .is_some_and(|o| o.class == target);
                reason = if success {
                    StopReason::Found
                } else {
                    StopReason::WrongObject
                };
                steps.push(record);
                break;
            }
            GoalDecision::Exhausted => {
                reason = StopReason::Exhausted;
                steps.push(record);
                break;
            }
            _ => {}
        }

        let Some(agent) = believed_cell(&fused.grid, &sense.pose.mean) else {
            reason = StopReason::Exhausted;
            steps.push(record);
            break;
        };
        let reachable = reachable_cells(&fused.grid, agent);
        let clock = Instant::now();

        // goal cells and, for the MDP planner, the reward shape
        let (targets, shape) = match decision {
            GoalDecision::Observe(id) => {
                let o = fused.objects.get(id).expect("object of interest exists");
                let mut region = compute_visibility(&fused.grid, &o.mu, sensor.max_range, sensor.ray_mode);
                let skip = excluded.get(&id);
                region
                    .cells
                    .retain(|c| reachable.contains(c) && !skip.is_some_and(|s| s.contains(c)));
                work += region.len() as u64;
                if region.is_empty() {
                    abandoned.insert(id);
                    wall += clock.elapsed().as_secs_f64();
                    steps.push(record);
                    continue;
                }
                if region.contains(agent) {
                    // in view already: hold and look again
                    holding = Some((id, agent));
                    wall += clock.elapsed().as_secs_f64();
                    steps.push(record);
                    continue;
                }
                let targets = region.cells.clone();
                (
                    targets,
                    RewardShape::Visibility {
                        region: region.with_source(id),
                        pose_cov: sense.pose.covariance,
                    },
                )
            }
            _ => {
                let rooms: BTreeSet<RoomId> = frontiers.iter().filter_map(|e| e.room).collect();
                let probs = match config.method {
                    Method::OursNs => rooms.iter().map(|&r| (r, 1.0)).collect(),
                    _ => room_target_probabilities(
                        &fused.objects,
                        &rooms,
                        target,
                        &env.class_set,
                        networks,
                        config.lambda,
                        config.fallback_prior,
                    ),
                };
                let fallback = if config.method == Method::OursNs {
                    1.0
                } else {
                    config.fallback_prior
                };
                let mut open = reachable.clone();
                open.remove(&agent);
                let (edges, weights) = reachable_edges(&frontiers, &open, &probs, fallback);
                if edges.is_empty() {
                    reason = StopReason::Exhausted;
                    record.goal = GoalDecision::Exhausted.into();
                    steps.push(record);
                    break;
                }
                let targets = match config.method {
                    Method::FeSs => best_edge_cells(&fused.grid, agent, &edges, &weights, &mut work),
                    _ => BTreeSet::new(),
                };
                (
                    targets,
                    RewardShape::Frontier {
                        edges,
                        room_probs: weights,
                        pose_cov: sense.pose.covariance,
                    },
                )
            }
        };

        let action = match config.method {
            Method::FeSs => {
                let (a, w) = path_step(&fused.grid, agent, &targets);
                work += w;
                a
            }
            _ => {
                let (a, trace) = planner.plan(
                    &fused.grid,
                    shape,
                    agent,
                    &motion,
                    config.gamma,
                    config.trials_per_step,
                    &mut plan_rng,
                )?;
                work += trace.work;
                record.planner = Some(trace);
                a
            }
        };
        wall += clock.elapsed().as_secs_f64();

        if let Some(a) = action {
            let next = simulate_motion(&env.map, &true_pose, a, &motion, &mut world_rng);
            path_length += (next - true_pose).norm();
            true_pose = next;
            moves += 1;
        }
        record.action = action;
        steps.push(record);
    }

    let spl = spl_term(&SplEpisode {
        success,
        shortest: shortest.unwrap_or(0.0),
        taken: path_length,
    });
    let log = EpisodeLog {
        scenario: config.name.clone(),
        method: config.method,
        seed: config.seed,
        target: config.target.clone(),
        start: [start.x, start.y],
        steps,
        outcome: EpisodeOutcome {
            success,
            reason,
            steps_used: moves,
            path_length_m: path_length,
            shortest_path_m: shortest,
            spl,
            planning_work: work,
            planning_time_s: work as f64 * WORK_UNIT_SECONDS,
        },
        snapshots,
        final_map: MapSnapshot::capture(&fused, &env.class_set),
    };
    Ok(EpisodeRun {
        log,
        timeseries,
        wall_planning_s: wall,
    })
}

/// The frontier-baseline choice: the edge with the largest
/// `P(target | room) · |e|`, nearest first among equals.
fn best_edge_cells(
    grid: &GridMap,
    agent: Cell,
    edges: &[FrontierEdge],
    weights: &[f64],
    work: &mut u64,
) -> BTreeSet<Cell> {
    let scores: Vec<f64> = edges.iter().zip(weights).map(|(e, w)| w * e.size() as f64).collect();
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * top.abs().max(1.0);
    let mut best: Option<(f64, usize)> = None;
    for (i, e) in edges.iter().enumerate() {
        if scores[i] < top - tol {
            continue;
        }
        let cells: BTreeSet<Cell> = e.cells.iter().copied().collect();
        let d = shortest_path(grid, agent, &cells).map_or(f64::INFINITY, |p| {
            *work += p.settled as u64;
            p.cost
        });
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| edges[i].cells.iter().copied().collect())
        .unwrap_or_default()
}
