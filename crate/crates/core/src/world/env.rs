use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellState, GridMap, Point, RoomId, RoomLabels};

/// Identifier of a ground-truth object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TruthId(pub u32);

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthObject {
    pub id: TruthId,
    pub position: Point,
    pub class: usize,
    pub room: Option<RoomId>,
}

/// A fully known synthetic world. Immutable after loading.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub map: GridMap,
    pub rooms: RoomLabels,
    pub objects: Vec<GroundTruthObject>,
    pub class_set: Vec<String>,
    /// Semantic category of each room, when the source provides one.
    pub room_kinds: BTreeMap<RoomId, String>,
}

/// On-disk environment document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentDoc {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    /// Row-major, 0 free / 1 occupied.
    pub cells: Vec<i64>,
    /// Row-major room ids, -1 for none.
    pub rooms: Vec<i64>,
    pub classes: Vec<String>,
    pub objects: Vec<ObjectDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room_kinds: Option<BTreeMap<u32, String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectDoc {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub class: String,
}

impl Environment {
    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_set.iter().position(|c| c == name)
    }

    pub fn object(&self, id: TruthId) -> Option<&GroundTruthObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn objects_of_class(&self, class: usize) -> impl Iterator<Item = &GroundTruthObject> {
        self.objects.iter().filter(move |o| o.class == class)
    }

    pub fn to_document(&self) -> EnvironmentDoc {
        EnvironmentDoc {
            width: self.map.width(),
            height: self.map.height(),
            resolution: self.map.resolution(),
            cells: self.map.cells().iter().map(|s| i64::from(s.code())).collect(),
            rooms: self
                .rooms
                .labels()
                .iter()
                .map(|r| r.map_or(-1, |r| i64::from(r.0)))
                .collect(),
            classes: self.class_set.clone(),
            objects: self
                .objects
                .iter()
                .map(|o| ObjectDoc {
                    id: o.id.0,
                    x: o.position.x,
                    y: o.position.y,
                    class: self.class_set[o.class].clone(),
                })
                .collect(),
            room_kinds: (!self.room_kinds.is_empty())
                .then(|| self.room_kinds.iter().map(|(r, k)| (r.0, k.clone())).collect()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("environment documents always serialize")
    }

    pub fn from_document(doc: &EnvironmentDoc) -> Result<Self> {
        let cells = doc
            .cells
            .iter()
            .map(|&v| match v {
                0 => Ok(CellState::Free),
                1 => Ok(CellState::Occupied),
                other => Err(Error::Validation(format!(
                    "ground-truth cells must be 0 or 1, found {other}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let map = GridMap::from_cells(doc.width, doc.height, doc.resolution, cells)?;

        let labels = doc
            .rooms
            .iter()
            .map(|&v| match v {
                -1 => Ok(None),
                v if v >= 0 && v <= i64::from(u32::MAX) => Ok(Some(RoomId(v as u32))),
                other => Err(Error::Validation(format!("invalid room id {other}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let rooms = RoomLabels::from_labels(doc.width, doc.height, labels)?;
        if let Some(c) = map.free_cells().find(|&c| rooms.get(c).is_none()) {
            return Err(Error::Validation(format!(
                "free cell ({}, {}) has no room id",
                c.x, c.y
            )));
        }

        if doc.classes.len() < 2 {
            return Err(Error::Validation("at least two classes are required".into()));
        }
        let mut names = BTreeSet::new();
        for c in &doc.classes {
            if !names.insert(c.as_str()) {
                return Err(Error::Validation(format!("duplicate class `{c}`")));
            }
        }

        let mut ids = BTreeSet::new();
        let mut objects = Vec::with_capacity(doc.objects.len());
        for o in &doc.objects {
            if !ids.insert(o.id) {
                return Err(Error::Validation(format!("duplicate object id {}", o.id)));
            }
            let class = doc
                .classes
                .iter()
                .position(|c| *c == o.class)
                .ok_or_else(|| Error::Validation(format!("object {} has unknown class `{}`", o.id, o.class)))?;
            let position = Point::new(o.x, o.y);
            let cell = map.cell_of(&position).ok_or(Error::OutOfBounds { x: o.x, y: o.y })?;
            if !map.is_free(cell) {
                return Err(Error::Validation(format!(
                    "object {} lies in an occupied cell ({}, {})",
                    o.id, cell.x, cell.y
                )));
            }
            objects.push(GroundTruthObject {
                id: TruthId(o.id),
                position,
                class,
                room: rooms.get(cell),
            });
        }

        let room_kinds = doc
            .room_kinds
            .as_ref()
            .map(|m| m.iter().map(|(&r, k)| (RoomId(r), k.clone())).collect())
            .unwrap_or_default();

        Ok(Environment {
            map,
            rooms,
            objects,
            class_set: doc.classes.clone(),
            room_kinds,
        })
    }
}

/// Parses and validates an environment document.
pub fn load_environment(source: &str) -> Result<Environment> {
    let doc: EnvironmentDoc = serde_json::from_str(source)?;
    Environment::from_document(&doc)
}
