//! Visibility regions: the cells from which a point can be seen.
//!
//! Two modes share one contract. `Dense` tests every cell center with an
//! exact line-of-sight walk. `Rays(n)` casts `n` rays from the source and
//! keeps every cell a ray passes through before it is stopped. Unknown and
//! occupied cells stop rays and are never part of a region.
//!
//! Ray bearings follow the base-2 van der Corput sequence, so the first `n`
//! bearings are always a subset of the first `n + 1`. That makes regions
//! nested in the ray count, and `n = 2^k` gives exactly uniform spacing.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use serde::Serialize;

use super::los::line_of_sight;
use crate::grid::{Cell, CellState, GridMap, Point};
use crate::mapping::ObjectId;

pub const DEFAULT_RAY_COUNT: u32 = 720;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayMode {
    /// Exact per-cell line of sight.
    Dense,
    /// Sampled rays.
    Rays(u32),
}

impl Default for RayMode {
    fn default() -> Self {
        RayMode::Rays(DEFAULT_RAY_COUNT)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityRegion {
    pub source: Option<ObjectId>,
    pub cells: BTreeSet<Cell>,
}

impl VisibilityRegion {
    pub fn with_source(mut self, id: ObjectId) -> Self {
        self.source = Some(id);
        self
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.cells.contains(&c)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }
}

fn blocks(grid: &GridMap, c: Cell) -> bool {
    grid.get(c) != Some(CellState::Free)
}

/// Region of free cells visible from `source` within `max_range` meters.
/// A source outside the grid yields an empty region.
pub fn compute_visibility(grid: &GridMap, source: &Point, max_range: f64, mode: RayMode) -> VisibilityRegion {
    let cells = match grid.cell_of(source) {
        None => BTreeSet::new(),
        Some(origin) => match mode {
            RayMode::Dense => dense(grid, origin, max_range),
            RayMode::Rays(n) => sampled(grid, origin, source, max_range, n),
        },
    };
    VisibilityRegion { source: None, cells }
}

fn within_range(grid: &GridMap, a: Cell, b: Cell, max_range: f64) -> bool {
    a.distance(b) * grid.resolution() <= max_range + 1e-9
}

fn dense(grid: &GridMap, origin: Cell, max_range: f64) -> BTreeSet<Cell> {
    let reach = (max_range / grid.resolution()).ceil() as i32 + 1;
    let mut out = BTreeSet::new();
    for y in (origin.y - reach)..=(origin.y + reach) {
        for x in (origin.x - reach)..=(origin.x + reach) {
            let c = Cell::new(x, y);
            if !grid.is_free(c) || !within_range(grid, origin, c, max_range) {
                continue;
            }
            if line_of_sight(origin, c, |m| blocks(grid, m)) {
                out.insert(c);
            }
        }
    }
    out
}

/// Radical inverse of `i` in base 2, in [0, 1).
fn van_der_corput(mut i: u32) -> f64 {
    let mut denom = 1.0;
    let mut v = 0.0;
    while i > 0 {
        denom *= 2.0;
        v += f64::from(i & 1) / denom;
        i >>= 1;
    }
    v
}

fn sampled(grid: &GridMap, origin: Cell, source: &Point, max_range: f64, rays: u32) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    if !grid.is_free(origin) {
        return out;
    }
    out.insert(origin);
    let res = grid.resolution();
    // work in cell units
    let (ox, oy) = (source.x / res, source.y / res);
    let max_t = max_range / res;
    for i in 0..rays {
        let theta = TAU * van_der_corput(i);
        let (dx, dy) = (theta.cos(), theta.sin());
        let mut cell = origin;
        let step_x = if dx > 0.0 { 1 } else { -1 };
        let step_y = if dy > 0.0 { 1 } else { -1 };
        let t_delta_x = if dx != 0.0 { (1.0 / dx).abs() } else { f64::INFINITY };
        let t_delta_y = if dy != 0.0 { (1.0 / dy).abs() } else { f64::INFINITY };
        let mut t_max_x = if dx > 0.0 {
            (f64::from(cell.x) + 1.0 - ox) / dx
        } else if dx < 0.0 {
            (f64::from(cell.x) - ox) / dx
        } else {
            f64::INFINITY
        };
        let mut t_max_y = if dy > 0.0 {
            (f64::from(cell.y) + 1.0 - oy) / dy
        } else if dy < 0.0 {
            (f64::from(cell.y) - oy) / dy
        } else {
            f64::INFINITY
        };
        loop {
            let t = if t_max_x < t_max_y {
                cell.x += step_x;
                let t = t_max_x;
                t_max_x += t_delta_x;
                t
            } else {
                cell.y += step_y;
                let t = t_max_y;
                t_max_y += t_delta_y;
                t
            };
            if t > max_t || blocks(grid, cell) {
                break;
            }
            if within_range(grid, origin, cell, max_range) {
                out.insert(cell);
            }
        }
    }
    out
}
