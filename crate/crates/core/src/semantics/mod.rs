//! Semantic prior knowledge: which classes tend to share a room, and how
//! likely the target is in a room given what has been seen there.

mod evidence;
mod library;
mod lidstone;
mod network;

pub use evidence::{
    extract_evidence, infer_target_room, infer_target_room_probability, room_target_probabilities, EvidenceSet,
    RoomInference, DEFAULT_FALLBACK_PRIOR, DEFAULT_LAMBDA,
};
pub use library::{build_networks, builtin_networks, house_space_specs, SpaceSpec, DEFAULT_ROOT_PRIOR};
pub use lidstone::{lidstone_probability, CooccurrenceCounts};
pub use network::{BayesianNetwork, NetworkFile};
