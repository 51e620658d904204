//! Occupancy grids, cell coordinates and room labels.
//!
//! Cells are addressed by integer `(x, y)` with `x` the column and `y` the
//! row; `y` grows "up" (north). Storage is row-major: index `y * width + x`.
//! The world-frame position of a cell center is `((x + 0.5) r, (y + 0.5) r)`
//! where `r` is the resolution in meters per cell.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2D position or displacement in meters.
pub type Point = Vector2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

impl CellState {
    /// Document encoding: free 0, occupied 1, unknown -1.
    pub fn code(self) -> i8 {
        match self {
            CellState::Free => 0,
            CellState::Occupied => 1,
            CellState::Unknown => -1,
        }
    }

    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            0 => Some(CellState::Free),
            1 => Some(CellState::Occupied),
            -1 => Some(CellState::Unknown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Cell::new(self.x + dx, self.y + dy)
    }

    /// The eight surrounding cells, in no particular order.
    pub fn neighbors8(self) -> impl Iterator<Item = Cell> {
        const D: [(i32, i32); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
        D.into_iter().map(move |(dx, dy)| self.offset(dx, dy))
    }

    /// Euclidean distance between cell centers, in cells.
    pub fn distance(self, other: Cell) -> f64 {
        let dx = f64::from(self.x - other.x);
        let dy = f64::from(self.y - other.y);
        dx.hypot(dy)
    }
}

/// Room identifier from the segmentation (ground truth here).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RoomId(pub u32);

/// Occupancy grid with cells in {free, occupied, unknown}.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<CellState>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, resolution: f64, fill: CellState) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Validation(format!(
                "grid dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::Validation(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        Ok(GridMap {
            width,
            height,
            resolution,
            cells: vec![fill; width * height],
        })
    }

    pub fn from_cells(width: usize, height: usize, resolution: f64, cells: Vec<CellState>) -> Result<Self> {
        let mut grid = GridMap::new(width, height, resolution, CellState::Unknown)?;
        if cells.len() != width * height {
            return Err(Error::Validation(format!(
                "expected {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        grid.cells = cells;
        Ok(grid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    /// Row-major index; `None` outside the grid.
    pub fn index(&self, c: Cell) -> Option<usize> {
        self.contains(c).then(|| c.y as usize * self.width + c.x as usize)
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new((index % self.width) as i32, (index / self.width) as i32)
    }

    pub fn get(&self, c: Cell) -> Option<CellState> {
        self.index(c).map(|i| self.cells[i])
    }

    pub fn set(&mut self, c: Cell, state: CellState) {
        if let Some(i) = self.index(c) {
            self.cells[i] = state;
        }
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.get(c) == Some(CellState::Free)
    }

    /// Cell containing a world position, or `None` when outside the map.
    pub fn cell_of(&self, p: &Point) -> Option<Cell> {
        let fx = (p.x / self.resolution).floor();
        let fy = (p.y / self.resolution).floor();
        if !fx.is_finite() || !fy.is_finite() {
            return None;
        }
        let c = Cell::new(fx as i32, fy as i32);
        (fx >= 0.0 && fy >= 0.0 && self.contains(c)).then_some(c)
    }

    pub fn center(&self, c: Cell) -> Point {
        Point::new(
            (f64::from(c.x) + 0.5) * self.resolution,
            (f64::from(c.y) + 0.5) * self.resolution,
        )
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (Cell, CellState)> + '_ {
        self.cells.iter().enumerate().map(move |(i, &s)| (self.cell_at(i), s))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.iter_cells().filter(|&(_, s)| s == CellState::Free).map(|(c, _)| c)
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|&&s| s == state).count()
    }
}

/// Per-cell room labels; `None` is the no-room sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomLabels {
    width: usize,
    height: usize,
    labels: Vec<Option<RoomId>>,
}

impl RoomLabels {
    pub fn unlabeled(width: usize, height: usize) -> Self {
        RoomLabels {
            width,
            height,
            labels: vec![None; width * height],
        }
    }

    pub fn from_labels(width: usize, height: usize, labels: Vec<Option<RoomId>>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::Validation(format!(
                "expected {} room labels, got {}",
                width * height,
                labels.len()
            )));
        }
        Ok(RoomLabels { width, height, labels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[Option<RoomId>] {
        &self.labels
    }

    fn index(&self, c: Cell) -> Option<usize> {
        (c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height)
            .then(|| c.y as usize * self.width + c.x as usize)
    }

    pub fn get(&self, c: Cell) -> Option<RoomId> {
        self.index(c).and_then(|i| self.labels[i])
    }

    pub fn set(&mut self, c: Cell, room: Option<RoomId>) {
        if let Some(i) = self.index(c) {
            self.labels[i] = room;
        }
    }

    /// Distinct labels present, ascending.
    pub fn rooms(&self) -> Vec<RoomId> {
        let mut rooms: Vec<RoomId> = self.labels.iter().flatten().copied().collect();
        rooms.sort_unstable();
        rooms.dedup();
        rooms
    }
}
