use crate::error::{Error, Result};
use crate::grid::{Cell, GridMap};
use crate::world::{MotionModel, MoveAction};

pub const DEFAULT_GAMMA: f64 = 0.95;

const NONE: u32 = u32::MAX;

/// Dense index of a state in an [`MdpModel`].
pub type StateId = usize;

/// Grid MDP over the free cells of the agent's map.
///
/// Moves into unknown, occupied or off-map cells leave the robot in place.
/// Rewards are keyed by the arrival state and goal states are absorbing.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpModel {
    width: usize,
    height: usize,
    states: Vec<Cell>,
    index: Vec<u32>,
    /// Sparse successor lists, `states.len() * 8` entries.
    transitions: Vec<Vec<(u32, f64)>>,
    rewards: Vec<f64>,
    goals: Vec<bool>,
    gamma: f64,
    motion: MotionModel,
}

pub fn build_mdp(grid: &GridMap, motion: &MotionModel, gamma: f64) -> Result<MdpModel> {
    motion.validate()?;
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidConfig(format!(
            "discount must lie in [0, 1), got {gamma}"
        )));
    }
    let states: Vec<Cell> = grid.free_cells().collect();
    if states.is_empty() {
        return Err(Error::EmptyStateSpace);
    }
    let mut index = vec![NONE; grid.len()];
    for (i, &c) in states.iter().enumerate() {
        index[grid.index(c).expect("free cell in bounds")] = i as u32;
    }
    let mut transitions = Vec::with_capacity(states.len() * 8);
    for (s, &c) in states.iter().enumerate() {
        for a in MoveAction::ALL {
            let mut row: Vec<(u32, f64)> = Vec::with_capacity(3);
            for (dir, p) in motion.outcomes(a) {
                if p == 0.0 {
                    continue;
                }
                let next = dir.apply(c);
                let t = grid
                    .index(next)
                    .map(|i| index[i])
                    .filter(|&t| t != NONE)
                    .unwrap_or(s as u32);
                match row.iter_mut().find(|(u, _)| *u == t) {
                    Some(e) => e.1 += p,
                    None => row.push((t, p)),
                }
            }
            row.sort_by_key(|&(t, _)| t);
            transitions.push(row);
        }
    }
    let n = states.len();
    Ok(MdpModel {
        width: grid.width(),
        height: grid.height(),
        states,
        index,
        transitions,
        rewards: vec![0.0; n],
        goals: vec![false; n],
        gamma,
        motion: *motion,
    })
}

impl MdpModel {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn motion(&self) -> &MotionModel {
        &self.motion
    }

    /// Cells of all states, row-major.
    pub fn states(&self) -> &[Cell] {
        &self.states
    }

    pub fn cell(&self, s: StateId) -> Cell {
        self.states[s]
    }

    pub fn state_of(&self, c: Cell) -> Option<StateId> {
        if c.x < 0 || c.y < 0 || c.x as usize >= self.width || c.y as usize >= self.height {
            return None;
        }
        let i = self.index[c.y as usize * self.width + c.x as usize];
        (i != NONE).then_some(i as usize)
    }

    /// `(successor, probability)` pairs of taking `a` in `s`.
    pub fn successors(&self, s: StateId, a: MoveAction) -> impl Iterator<Item = (StateId, f64)> + '_ {
        self.transitions[s * 8 + a.index()]
            .iter()
            .map(|&(t, p)| (t as usize, p))
    }

    pub fn reward(&self, s: StateId) -> f64 {
        self.rewards[s]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn max_reward(&self) -> f64 {
        self.rewards.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_goal(&self, s: StateId) -> bool {
        self.goals[s]
    }

    pub fn goals(&self) -> &[bool] {
        &self.goals
    }

    pub fn goal_count(&self) -> usize {
        self.goals.iter().filter(|&&g| g).count()
    }

    pub fn goal_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.states.iter().zip(&self.goals).filter(|(_, &g)| g).map(|(&c, _)| c)
    }

    /// Replaces the reward vector; entries must be finite and non-negative.
    pub fn set_rewards(&mut self, rewards: Vec<f64>) -> Result<()> {
        if rewards.len() != self.len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} rewards, got {}",
                self.len(),
                rewards.len()
            )));
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidConfig("rewards must be finite".into()));
        }
        self.rewards = rewards;
        Ok(())
    }

    /// Marks exactly the states among `cells` as goals.
    pub fn set_goals<I: IntoIterator<Item = Cell>>(&mut self, cells: I) {
        self.goals.iter_mut().for_each(|g| *g = false);
        for c in cells {
            if let Some(s) = self.state_of(c) {
                self.goals[s] = true;
            }
        }
    }

    /// Drops goals for which `keep` is false.
    pub fn retain_goals<F: FnMut(Cell) -> bool>(&mut self, mut keep: F) {
        for (s, g) in self.goals.iter_mut().enumerate() {
            if *g && !keep(self.states[s]) {
                *g = false;
            }
        }
    }

    /// States reachable from `start` under some action sequence.
    pub fn reachable_from(&self, start: StateId) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(s) = stack.pop() {
            for a in MoveAction::ALL {
                for (t, _) in self.successors(s, a) {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        seen
    }
}
