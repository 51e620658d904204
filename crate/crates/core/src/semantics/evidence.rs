use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::network::BayesianNetwork;
use crate::error::Error;
use crate::grid::RoomId;
use crate::mapping::ObjectMap;

pub const DEFAULT_LAMBDA: f64 = 0.5;

/// Probability used for a room when no network applies.
pub const DEFAULT_FALLBACK_PRIOR: f64 = 0.1;

/// Classes believed present in one room.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSet {
    pub room: RoomId,
    pub classes: BTreeSet<usize>,
}

/// Classes `c` for which some object in `room` has `p(c) > lambda`.
pub fn extract_evidence(map: &ObjectMap, room: RoomId, lambda: f64) -> EvidenceSet {
    let classes = map
        .iter()
        .filter(|o| o.room == Some(room))
        .flat_map(|o| {
            o.class_dist
                .iter()
                .enumerate()
                .filter(move |&(_, &p)| p > lambda)
                .map(|(k, _)| k)
        })
        .collect();
    EvidenceSet { room, classes }
}

/// Outcome of a target-room query, with the paths that fell back to the
/// default prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomInference {
    pub probability: f64,
    /// No network contained the target and shared a node with the evidence.
    pub fallback: bool,
    /// Some qualifying network gave the evidence zero probability.
    pub zero_evidence: bool,
}

/// `P(target | evidence, room)`: the maximum over networks that contain the
/// target and at least one evidence class, or `p0` when none do.
///
/// `class_names` maps class indices in the evidence to network node names.
pub fn infer_target_room(
    target: &str,
    evidence: &EvidenceSet,
    class_names: &[String],
    networks: &[BayesianNetwork],
    p0: f64,
) -> RoomInference {
    let names: Vec<&str> = evidence
        .classes
        .iter()
        .filter_map(|&k| class_names.get(k).map(String::as_str))
        .collect();
    let mut best: Option<f64> = None;
    let mut zero_evidence = false;
    for net in networks.iter().filter(|n| n.contains(target)) {
        let shared: Vec<&str> = names.iter().copied().filter(|n| net.contains(n)).collect();
        if shared.is_empty() {
            continue;
        }
        let p = match net.query(target, &shared) {
            Ok(p) => p,
            Err(Error::ZeroProbabilityEvidence) => {
                zero_evidence = true;
                p0
            }
            // node lookups cannot fail after the containment filter
            Err(_) => p0,
        };
        best = Some(best.map_or(p, |b: f64| b.max(p)));
    }
    RoomInference {
        probability: best.unwrap_or(p0),
        fallback: best.is_none(),
        zero_evidence,
    }
}

pub fn infer_target_room_probability(
    target: &str,
    evidence: &EvidenceSet,
    class_names: &[String],
    networks: &[BayesianNetwork],
    p0: f64,
) -> f64 {
    infer_target_room(target, evidence, class_names, networks, p0).probability
}

/// Target probability for every room in `rooms`.
pub fn room_target_probabilities(
    map: &ObjectMap,
    rooms: &BTreeSet<RoomId>,
    target: usize,
    class_names: &[String],
    networks: &[BayesianNetwork],
    lambda: f64,
    p0: f64,
) -> BTreeMap<RoomId, f64> {
    let Some(target_name) = class_names.get(target) else {
        return rooms.iter().map(|&r| (r, p0)).collect();
    };
    rooms
        .iter()
        .map(|&r| {
            let ev = extract_evidence(map, r, lambda);
            (
                r,
                infer_target_room_probability(target_name, &ev, class_names, networks, p0),
            )
        })
        .collect()
}
