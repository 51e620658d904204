use serde::Serialize;

use crate::geometry::FrontierEdge;
use crate::mapping::{object_of_interest, ObjectId, ObjectMap};

pub const DEFAULT_TAU: f64 = 0.6;
pub const DEFAULT_EPSILON: f64 = 0.01;

/// What the robot should do next.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GoalDecision {
    /// The object of interest is confidently the target.
    Found(ObjectId),
    /// Promising candidate; go look at it again.
    Observe(ObjectId),
    Explore,
    /// No candidate worth observing and nothing left to explore.
    Exhausted,
}

impl GoalDecision {
    pub fn is_done(&self) -> bool {
        matches!(self, GoalDecision::Found(_) | GoalDecision::Exhausted)
    }
}

/// Optimistic goal choice: stop when the best candidate reaches `1 - ε`,
/// observe it when above `τ`, explore otherwise.
pub fn select_goal(map: &ObjectMap, target: usize, tau: f64, epsilon: f64, frontiers: &[FrontierEdge]) -> GoalDecision {
    if let Some(id) = object_of_interest(map, target) {
        let p = map
            .get(id)
            .and_then(|o| o.class_dist.get(target))
            .copied()
            .unwrap_or(0.0);
        if p >= 1.0 - epsilon {
            return GoalDecision::Found(id);
        }
        if p > tau {
            return GoalDecision::Observe(id);
        }
    }
    if frontiers.is_empty() {
        GoalDecision::Exhausted
    } else {
        GoalDecision::Explore
    }
}
