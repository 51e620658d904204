//! Frontier edges: free cells bordering unknown space, grouped by
//! 8-connectivity.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::grid::{Cell, CellState, GridMap, RoomId, RoomLabels};

/// Components smaller than this many cells are treated as noise.
pub const DEFAULT_MIN_EDGE_SIZE: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierEdge {
    /// Member cells in row-major order.
    pub cells: Vec<Cell>,
    pub room: Option<RoomId>,
}

impl FrontierEdge {
    pub fn size(&self) -> usize {
        self.cells.len()
    }
}

/// Free cell with at least one unknown cell in its 8-neighborhood.
pub fn is_frontier_cell(grid: &GridMap, c: Cell) -> bool {
    grid.get(c) == Some(CellState::Free) && c.neighbors8().any(|n| grid.get(n) == Some(CellState::Unknown))
}

pub fn detect_frontiers(grid: &GridMap, rooms: &RoomLabels, min_edge_size: usize) -> Vec<FrontierEdge> {
    let mut is_frontier = vec![false; grid.len()];
    for (i, flag) in is_frontier.iter_mut().enumerate() {
        *flag = is_frontier_cell(grid, grid.cell_at(i));
    }

    let mut seen = vec![false; grid.len()];
    let mut edges = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..grid.len() {
        if !is_frontier[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut cells = Vec::new();
        while let Some(i) = queue.pop_front() {
            let c = grid.cell_at(i);
            cells.push(c);
            for n in c.neighbors8() {
                if let Some(j) = grid.index(n) {
                    if is_frontier[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        if cells.len() < min_edge_size.max(1) {
            continue;
        }
        cells.sort_by_key(|c| (c.y, c.x));
        let room = majority_room(&cells, rooms);
        edges.push(FrontierEdge { cells, room });
    }
    edges
}

/// Most frequent label among the cells; ties go to the smaller id.
fn majority_room(cells: &[Cell], rooms: &RoomLabels) -> Option<RoomId> {
    let mut votes: BTreeMap<RoomId, usize> = BTreeMap::new();
    for &c in cells {
        if let Some(r) = rooms.get(c) {
            *votes.entry(r).or_default() += 1;
        }
    }
    votes
        .into_iter()
        .fold(None, |best: Option<(RoomId, usize)>, (r, n)| match best {
            Some((_, m)) if m >= n => best,
            _ => Some((r, n)),
        })
        .map(|(r, _)| r)
}
