use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::classify::{uniform, update_class, DetectorModel};
use super::fusion::{fuse_position, implied_position};
use crate::error::{Error, Result};
use crate::gauss::Cov2;
use crate::grid::{Cell, CellState, GridMap, Point, RoomId, RoomLabels};
use crate::world::{DetectionEvent, RangeBearing, RobotPoseBelief};

/// 99% quantile of the chi-square distribution with two degrees of freedom.
pub const DEFAULT_GATE: f64 = 9.21;

/// Unlabeled positions borrow the label of a labeled free cell this close.
pub const ROOM_SEARCH_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectId(pub u32);

/// A mapped object: position belief, class distribution and room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticObject {
    pub id: ObjectId,
    pub mu: Point,
    pub sigma: Cov2,
    pub class_dist: Vec<f64>,
    pub room: Option<RoomId>,
    pub observations: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObjectMap {
    objects: BTreeMap<ObjectId, SemanticObject>,
    next_id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Association {
    Existing(ObjectId),
    NewObject,
}

impl ObjectMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn get(&self, id: ObjectId) -> Option<&SemanticObject> {
        self.objects.get(&id)
    }

    pub fn get_mut(&mut self, id: ObjectId) -> Option<&mut SemanticObject> {
        self.objects.get_mut(&id)
    }

    /// Objects in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &SemanticObject> {
        self.objects.values()
    }

    /// Adds an object under a fresh id.
    pub fn insert(&mut self, mu: Point, sigma: Cov2, class_dist: Vec<f64>, room: Option<RoomId>) -> ObjectId {
        let id = ObjectId(self.next_id);
        self.next_id += 1;
        self.objects.insert(
            id,
            SemanticObject {
                id,
                mu,
                sigma,
                class_dist,
                room,
                observations: 1,
            },
        );
        id
    }

    /// Inserts an object with a caller-chosen id, replacing any existing one.
    pub fn insert_object(&mut self, object: SemanticObject) {
        self.next_id = self.next_id.max(object.id.0 + 1);
        self.objects.insert(object.id, object);
    }
}

fn mahalanobis_sq(delta: &Point, cov: &Cov2) -> f64 {
    let inv = cov
        .try_inverse()
        .or_else(|| (cov + Cov2::identity() * 1e-12).try_inverse());
    match inv {
        Some(inv) => (delta.transpose() * inv * delta)[(0, 0)],
        None => f64::INFINITY,
    }
}

/// Nearest existing object in Mahalanobis distance, if inside the gate.
pub fn associate_detection(map: &ObjectMap, implied_position: &Point, implied_cov: &Cov2, gate: f64) -> Association {
    let mut best: Option<(ObjectId, f64)> = None;
    for o in map.iter() {
        let d2 = mahalanobis_sq(&(implied_position - o.mu), &(o.sigma + implied_cov));
        if d2 <= gate && best.is_none_or(|(_, b)| d2 < b) {
            best = Some((o.id, d2));
        }
    }
    best.map_or(Association::NewObject, |(id, _)| Association::Existing(id))
}

/// Room of the containing cell, else the nearest labeled free cell within
/// three cells (ties by row-major order), else none.
pub fn assign_room(position: &Point, grid: &GridMap, rooms: &RoomLabels) -> Result<Option<RoomId>> {
    let cell = grid.cell_of(position).ok_or(Error::OutOfBounds {
        x: position.x,
        y: position.y,
    })?;
    if let Some(r) = rooms.get(cell) {
        return Ok(Some(r));
    }
    let reach = ROOM_SEARCH_RADIUS as i32;
    let mut best: Option<(f64, (i32, i32), RoomId)> = None;
    for y in (cell.y - reach)..=(cell.y + reach) {
        for x in (cell.x - reach)..=(cell.x + reach) {
            let c = Cell::new(x, y);
            let d = cell.distance(c);
            if d > ROOM_SEARCH_RADIUS || grid.get(c) != Some(CellState::Free) {
                continue;
            }
            let Some(r) = rooms.get(c) else { continue };
            let key = (d, (y, x));
            if best.is_none_or(|(bd, bk, _)| key < (bd, bk)) {
                best = Some((d, (y, x), r));
            }
        }
    }
    Ok(best.map(|(_, _, r)| r))
}

/// Object maximizing the probability of `target`; lowest id on ties.
pub fn object_of_interest(map: &ObjectMap, target: usize) -> Option<ObjectId> {
    let mut best: Option<(ObjectId, f64)> = None;
    for o in map.iter() {
        let p = o.class_dist.get(target).copied().unwrap_or(0.0);
        if best.is_none_or(|(_, b)| p > b) {
            best = Some((o.id, p));
        }
    }
    best.map(|(id, _)| id)
}

/// The agent's fused map: partial occupancy grid, object map and the room
/// labels known so far.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedMap {
    pub grid: GridMap,
    pub objects: ObjectMap,
    pub rooms: RoomLabels,
}

/// What happened to one detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integration {
    pub id: ObjectId,
    pub created: bool,
    /// The class update hit the all-zero case and kept the prior.
    pub degenerate_class: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams<'a> {
    pub meas_cov: &'a Cov2,
    pub model: &'a DetectorModel,
    pub gate: f64,
    /// Sensing heading; measurement bearings are relative to it.
    pub heading: f64,
}

impl FusedMap {
    pub fn unknown(width: usize, height: usize, resolution: f64) -> Result<Self> {
        Ok(FusedMap {
            grid: GridMap::new(width, height, resolution, CellState::Unknown)?,
            objects: ObjectMap::new(),
            rooms: RoomLabels::unlabeled(width, height),
        })
    }

    /// Writes newly observed cell states; free cells pick up their room label
    /// from `segmentation`.
    pub fn reveal(&mut self, cells: &[(Cell, CellState)], segmentation: &RoomLabels) {
        for &(c, s) in cells {
            self.grid.set(c, s);
            if s == CellState::Free {
                self.rooms.set(c, segmentation.get(c));
            }
        }
    }

    /// Associates one detection with the map and updates or creates the
    /// matching object.
    pub fn integrate(
        &mut self,
        det: &DetectionEvent,
        pose: &RobotPoseBelief,
        params: &FusionParams<'_>,
    ) -> Result<Integration> {
        let z = RangeBearing {
            range: det.measurement.range,
            bearing: det.measurement.bearing + params.heading,
        };
        let (p, cov) = implied_position(pose, &z, params.meas_cov);
        match associate_detection(&self.objects, &p, &cov, params.gate) {
            Association::NewObject => {
                let up = update_class(&uniform(params.model.num_classes()), &det.confidence, params.model)?;
                let room = assign_room(&p, &self.grid, &self.rooms).unwrap_or(None);
                let id = self.objects.insert(p, cov, up.dist, room);
                Ok(Integration {
                    id,
                    created: true,
                    degenerate_class: up.degenerate,
                })
            }
            Association::Existing(id) => {
                let o = self.objects.get(id).expect("associated id exists");
                let (mu, sigma) = match fuse_position(&o.mu, &o.sigma, pose, &z, params.meas_cov) {
                    Ok(v) => v,
                    // robot on top of the estimate: keep the position, still use the class cue
                    Err(Error::DegenerateGeometry) => (o.mu, o.sigma),
                    Err(e) => return Err(e),
                };
                let up = update_class(&o.class_dist, &det.confidence, params.model)?;
                let room = assign_room(&mu, &self.grid, &self.rooms).unwrap_or(None);
                let o = self.objects.get_mut(id).expect("associated id exists");
                o.mu = mu;
                o.sigma = sigma;
                o.class_dist = up.dist;
                o.room = room;
                o.observations += 1;
                Ok(Integration {
                    id,
                    created: false,
                    degenerate_class: up.degenerate,
                })
            }
        }
    }
}
