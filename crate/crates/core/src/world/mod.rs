//! Ground-truth environments and the simulated robot that moves and senses
//! in them.

mod env;
pub mod generator;
mod motion;
mod sensing;

pub use env::{load_environment, Environment, EnvironmentDoc, GroundTruthObject, ObjectDoc, TruthId};
pub use generator::{generate_house, HouseSpec};
pub use motion::{simulate_motion, MotionModel, MoveAction};
pub use sensing::{
    simulate_sensing, visible_cells, DetectionEvent, RangeBearing, RobotPoseBelief, SensingResult, SensorConfig,
};
