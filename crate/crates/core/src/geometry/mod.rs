//! Goal-forming geometry on the agent's partial map: frontier edges and
//! visibility regions.

mod frontier;
pub mod los;
mod visibility;

pub use frontier::{detect_frontiers, is_frontier_cell, FrontierEdge, DEFAULT_MIN_EDGE_SIZE};
pub use visibility::{compute_visibility, RayMode, VisibilityRegion, DEFAULT_RAY_COUNT};
