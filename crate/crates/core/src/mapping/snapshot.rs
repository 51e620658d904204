//! JSON snapshots of the fused map for replay and debugging.

use serde::{Deserialize, Serialize};

use super::objects::{FusedMap, ObjectId, ObjectMap, SemanticObject};
use crate::error::{Error, Result};
use crate::gauss::Cov2;
use crate::grid::{CellState, GridMap, Point, RoomId, RoomLabels};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSnapshot {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    /// Row-major, 0 free / 1 occupied / -1 unknown.
    pub cells: Vec<i64>,
    pub rooms: Vec<i64>,
    pub classes: Vec<String>,
    pub objects: Vec<ObjectRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub id: u32,
    pub mu: [f64; 2],
    pub sigma: [[f64; 2]; 2],
    pub class_dist: Vec<f64>,
    pub room: i64,
}

impl MapSnapshot {
    pub fn capture(map: &FusedMap, classes: &[String]) -> Self {
        MapSnapshot {
            width: map.grid.width(),
            height: map.grid.height(),
            resolution: map.grid.resolution(),
            cells: map.grid.cells().iter().map(|s| i64::from(s.code())).collect(),
            rooms: map
                .rooms
                .labels()
                .iter()
                .map(|r| r.map_or(-1, |r| i64::from(r.0)))
                .collect(),
            classes: classes.to_vec(),
            objects: map
                .objects
                .iter()
                .map(|o| ObjectRecord {
                    id: o.id.0,
                    mu: [o.mu.x, o.mu.y],
                    sigma: [[o.sigma[(0, 0)], o.sigma[(0, 1)]], [o.sigma[(1, 0)], o.sigma[(1, 1)]]],
                    class_dist: o.class_dist.clone(),
                    room: o.room.map_or(-1, |r| i64::from(r.0)),
                })
                .collect(),
        }
    }

    pub fn restore(&self) -> Result<FusedMap> {
        let cells = self
            .cells
            .iter()
            .map(|&v| CellState::from_code(v).ok_or_else(|| Error::Validation(format!("invalid cell code {v}"))))
            .collect::<Result<Vec<_>>>()?;
        let grid = GridMap::from_cells(self.width, self.height, self.resolution, cells)?;
        let rooms = RoomLabels::from_labels(
            self.width,
            self.height,
            self.rooms.iter().map(|&r| (r >= 0).then_some(RoomId(r as u32))).collect(),
        )?;
        let mut objects = ObjectMap::new();
        for r in &self.objects {
            objects.insert_object(SemanticObject {
                id: ObjectId(r.id),
                mu: Point::new(r.mu[0], r.mu[1]),
                sigma: Cov2::new(r.sigma[0][0], r.sigma[0][1], r.sigma[1][0], r.sigma[1][1]),
                class_dist: r.class_dist.clone(),
                room: (r.room >= 0).then_some(RoomId(r.room as u32)),
                observations: 0,
            });
        }
        Ok(FusedMap { grid, objects, rooms })
    }
}
