//! The agent-side semantic map.
//!
//! Detections are associated to map objects by Mahalanobis gating, object
//! positions are fused with an extended Kalman update that marginalizes the
//! robot pose, class distributions follow a recursive Bayes rule under a
//! Dirichlet detector model, and every object carries the room it falls in.

mod classify;
mod fusion;
mod objects;
mod snapshot;

pub use classify::{uniform, update_class, ClassUpdate, DetectorModel, CONFIDENCE_FLOOR};
pub use fusion::{fuse_position, implied_position, measurement_model};
pub use objects::{
    assign_room, associate_detection, object_of_interest, Association, FusedMap, FusionParams, Integration, ObjectId,
    ObjectMap, SemanticObject, DEFAULT_GATE, ROOM_SEARCH_RADIUS,
};
pub use snapshot::{MapSnapshot, ObjectRecord};
