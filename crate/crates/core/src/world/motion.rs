//! Cell-to-cell robot moves with slip to the adjacent diagonals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, GridMap, Point};

/// The eight moves, in the fixed tie-breaking order used by the planner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveAction {
    North,
    NorthEast,
    East,
    SouthEast,
    South,
    SouthWest,
    West,
    NorthWest,
}

impl MoveAction {
    pub const ALL: [MoveAction; 8] = [
        MoveAction::North,
        MoveAction::NorthEast,
        MoveAction::East,
        MoveAction::SouthEast,
        MoveAction::South,
        MoveAction::SouthWest,
        MoveAction::West,
        MoveAction::NorthWest,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> MoveAction {
        Self::ALL[i % 8]
    }

    pub fn delta(self) -> (i32, i32) {
        match self {
            MoveAction::North => (0, 1),
            MoveAction::NorthEast => (1, 1),
            MoveAction::East => (1, 0),
            MoveAction::SouthEast => (1, -1),
            MoveAction::South => (0, -1),
            MoveAction::SouthWest => (-1, -1),
            MoveAction::West => (-1, 0),
            MoveAction::NorthWest => (-1, 1),
        }
    }

    /// Neighbor 45 degrees counter-clockwise (North -> NorthWest).
    pub fn left(self) -> MoveAction {
        Self::from_index(self.index() + 7)
    }

    /// Neighbor 45 degrees clockwise (North -> NorthEast).
    pub fn right(self) -> MoveAction {
        Self::from_index(self.index() + 1)
    }

    pub fn apply(self, c: Cell) -> Cell {
        let (dx, dy) = self.delta();
        c.offset(dx, dy)
    }

    pub fn from_delta(dx: i32, dy: i32) -> Option<MoveAction> {
        Self::ALL.into_iter().find(|a| a.delta() == (dx, dy))
    }
}

/// Outcome distribution of a move: the commanded direction or one of its two
/// adjacent diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionModel {
    pub commanded: f64,
    pub left: f64,
    pub right: f64,
}

impl Default for MotionModel {
    fn default() -> Self {
        MotionModel {
            commanded: 0.8,
            left: 0.1,
            right: 0.1,
        }
    }
}

impl MotionModel {
    pub fn deterministic() -> Self {
        MotionModel {
            commanded: 1.0,
            left: 0.0,
            right: 0.0,
        }
    }

    pub fn new(commanded: f64, left: f64, right: f64) -> Result<Self> {
        let m = MotionModel { commanded, left, right };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let w = [self.commanded, self.left, self.right];
        if w.iter().any(|&p| !(0.0..=1.0).contains(&p)) || ((w.iter().sum::<f64>()) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "motion weights {w:?} are not a distribution"
            )));
        }
        Ok(())
    }

    /// `(direction, probability)` for commanded, left and right outcomes.
    pub fn outcomes(&self, action: MoveAction) -> [(MoveAction, f64); 3] {
        [
            (action, self.commanded),
            (action.left(), self.left),
            (action.right(), self.right),
        ]
    }

    pub fn sample<R: Rng + ?Sized>(&self, action: MoveAction, rng: &mut R) -> MoveAction {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let outcomes = self.outcomes(action);
        for &(dir, p) in &outcomes {
            acc += p;
            if p > 0.0 && u < acc {
                return dir;
            }
        }
        // rounding left u beyond the accumulated mass; fall back to the last
        // outcome carrying any probability
        outcomes
            .iter()
            .rev()
            .find(|(_, p)| *p > 0.0)
            .map_or(action, |&(d, _)| d)
    }
}

/// One stochastic step of the true robot. Moves that would leave the map or
/// enter an occupied cell leave the robot where it is.
pub fn simulate_motion<R: Rng + ?Sized>(
    map: &GridMap,
    true_pose: &Point,
    action: MoveAction,
    model: &MotionModel,
    rng: &mut R,
) -> Point {
    let Some(cell) = map.cell_of(true_pose) else {
        return *true_pose;
    };
    let dir = model.sample(action, rng);
    let next = dir.apply(cell);
    if map.is_free(next) {
        let (dx, dy) = dir.delta();
        true_pose + Point::new(f64::from(dx), f64::from(dy)) * map.resolution()
    } else {
        *true_pose
    }
}
