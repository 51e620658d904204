//! Real-time dynamic programming over an [`MdpModel`].

use std::collections::BTreeMap;

use rand::Rng;

use super::mdp::{build_mdp, MdpModel, StateId};
use super::reward::RewardShape;
use crate::error::{Error, Result};
use crate::grid::{Cell, GridMap};
use crate::world::MoveAction;

pub const DEFAULT_TRIAL_BUDGET: usize = 2000;

/// Relative tolerance under which two action values count as tied.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    values: Vec<f64>,
    visits: Vec<u32>,
    initial: f64,
}

impl ValueTable {
    /// Every state at `R_max / (1 - γ)`, an upper bound on any return.
    pub fn optimistic(mdp: &MdpModel) -> Self {
        Self::uniform(mdp, mdp.max_reward() / (1.0 - mdp.gamma()))
    }

    pub fn zeros(mdp: &MdpModel) -> Self {
        Self::uniform(mdp, 0.0)
    }

    pub fn uniform(mdp: &MdpModel, v: f64) -> Self {
        ValueTable {
            values: vec![v; mdp.len()],
            visits: vec![0; mdp.len()],
            initial: v,
        }
    }

    /// Goal states are absorbing and always worth zero.
    pub fn value(&self, mdp: &MdpModel, s: StateId) -> f64 {
        if mdp.is_goal(s) {
            0.0
        } else {
            self.values[s]
        }
    }

    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    pub fn visits(&self, s: StateId) -> u32 {
        self.visits[s]
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One-step lookahead `Σ P(s'|s,a) [R(s') + γ V(s')]`.
pub fn q_value(mdp: &MdpModel, table: &ValueTable, s: StateId, a: MoveAction) -> f64 {
    mdp.successors(s, a)
        .map(|(t, p)| p * (mdp.reward(t) + mdp.gamma() * table.value(mdp, t)))
        .sum()
}

fn best(mdp: &MdpModel, table: &ValueTable, s: StateId) -> (MoveAction, f64) {
    let q: [f64; 8] = std::array::from_fn(|i| q_value(mdp, table, s, MoveAction::from_index(i)));
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_EPS * max.abs().max(1.0);
    let i = q.iter().position(|&v| v >= max - tol).unwrap_or(0);
    (MoveAction::from_index(i), max)
}

/// Greedy action under the table; ties go to the first action in
/// N, NE, E, SE, S, SW, W, NW order, and goal states answer North.
pub fn greedy_action(table: &ValueTable, mdp: &MdpModel, s: StateId) -> MoveAction {
    if mdp.is_goal(s) {
        return MoveAction::North;
    }
    best(mdp, table, s).0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtdpConfig {
    pub max_trials: usize,
    /// Steps per trial; `None` means `4 (W + H)`.
    pub depth_cap: Option<usize>,
    /// Largest Bellman residual on the greedy envelope that counts as
    /// converged.
    pub tolerance: f64,
    /// Trials between convergence checks.
    pub check_every: usize,
}

impl Default for RtdpConfig {
    fn default() -> Self {
        RtdpConfig {
            max_trials: DEFAULT_TRIAL_BUDGET,
            depth_cap: None,
            tolerance: 1e-6,
            check_every: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RtdpReport {
    pub trials: usize,
    pub backups: u64,
    pub converged: bool,
}

/// Runs RTDP trials from `start`, sweeping the greedy envelope every
/// `check_every` trials, until a sweep finds every residual within
/// tolerance or the trial budget is spent.
pub fn rtdp_improve<R: Rng + ?Sized>(
    mdp: &MdpModel,
    table: &mut ValueTable,
    start: StateId,
    config: &RtdpConfig,
    rng: &mut R,
) -> Result<RtdpReport> {
    if start >= mdp.len() {
        return Err(Error::InvalidConfig(format!(
            "start state {start} outside the state space"
        )));
    }
    if mdp.goal_count() == 0 {
        return Err(Error::NoGoals);
    }
    if table.len() != mdp.len() {
        return Err(Error::InvalidConfig("value table does not match the MDP".into()));
    }
    let mut report = RtdpReport::default();
    if mdp.is_goal(start) {
        report.converged = true;
        return Ok(report);
    }
    let cap = config.depth_cap.unwrap_or(4 * (mdp.width() + mdp.height()));
    let check_every = config.check_every.max(1);
    let mut path = Vec::with_capacity(cap);
    while report.trials < config.max_trials {
        if report.trials % check_every == 0 {
            let (ok, n) = envelope_sweep(mdp, table, start, config.tolerance);
            report.backups += n;
            if ok {
                report.converged = true;
                return Ok(report);
            }
        }
        path.clear();
        let mut s = start;
        while !mdp.is_goal(s) && path.len() < cap {
            let (a, v) = best(mdp, table, s);
            table.values[s] = v;
            table.visits[s] = table.visits[s].saturating_add(1);
            report.backups += 1;
            path.push(s);
            s = sample_successor(mdp, s, a, rng);
        }
        for &s in path.iter().rev() {
            table.values[s] = best(mdp, table, s).1;
            report.backups += 1;
        }
        report.trials += 1;
    }
    let (ok, n) = envelope_sweep(mdp, table, start, config.tolerance);
    report.backups += n;
    report.converged = ok;
    Ok(report)
}

fn sample_successor<R: Rng + ?Sized>(mdp: &MdpModel, s: StateId, a: MoveAction, rng: &mut R) -> StateId {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = s;
    for (t, p) in mdp.successors(s, a) {
        acc += p;
        last = t;
        if u < acc {
            return t;
        }
    }
    last
}

/// Backs up every state the greedy policy can reach from `start` and
/// reports whether the largest residual was within `tol`, plus the number
/// of backups made.
fn envelope_sweep(mdp: &MdpModel, table: &mut ValueTable, start: StateId, tol: f64) -> (bool, u64) {
    let mut seen = vec![false; mdp.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut work = 0;
    let mut residual = 0.0f64;
    while let Some(s) = stack.pop() {
        if mdp.is_goal(s) {
            continue;
        }
        let (a, v) = best(mdp, table, s);
        work += 1;
        residual = residual.max((v - table.values[s]).abs());
        table.values[s] = v;
        for (t, _) in mdp.successors(s, a) {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    (residual <= tol, work)
}

/// Rebuilds the MDP on a new grid under `shape` and warm-starts the values.
///
/// Values carry over for persisting states when the reward and goal status of
/// every persisting state is unchanged. Otherwise, and for new states, the
/// optimistic bound of the new model is used.
pub fn adapt(
    old_mdp: &MdpModel,
    old_table: &ValueTable,
    grid: &GridMap,
    shape: &RewardShape,
) -> Result<(MdpModel, ValueTable)> {
    let base = build_mdp(grid, old_mdp.motion(), old_mdp.gamma())?;
    let mdp = shape.apply(base, grid.resolution());
    let mut table = ValueTable::optimistic(&mdp);

    let persisting: BTreeMap<Cell, (StateId, StateId)> = mdp
        .states()
        .iter()
        .enumerate()
        .filter_map(|(s, &c)| old_mdp.state_of(c).map(|o| (c, (o, s))))
        .collect();
    let same_shape = persisting
        .values()
        .all(|&(o, s)| old_mdp.reward(o).to_bits() == mdp.reward(s).to_bits() && old_mdp.is_goal(o) == mdp.is_goal(s))
        && old_mdp.goal_count() == persisting.values().filter(|&&(o, _)| old_mdp.is_goal(o)).count();
    if same_shape && old_table.len() == old_mdp.len() {
        for &(o, s) in persisting.values() {
            table.values[s] = old_table.values[o];
            table.visits[s] = old_table.visits[o];
        }
        if persisting.len() == mdp.len() {
            table.initial = old_table.initial;
        }
    }
    Ok((mdp, table))
}
