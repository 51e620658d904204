//! 8-connected shortest paths on grid cells; diagonal steps cost √2.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use crate::grid::{Cell, GridMap};
use crate::world::MoveAction;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    idx: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, then on row-major index for determinism
        other.cost.total_cmp(&self.cost).then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of a search: the cost in cells and the path from start to the
/// reached target, both endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub cost: f64,
    pub cells: Vec<Cell>,
    /// Nodes settled during the search.
    pub settled: usize,
}

/// Cheapest path over free cells from `start` to any cell in `targets`.
pub fn shortest_path(grid: &GridMap, start: Cell, targets: &BTreeSet<Cell>) -> Option<PathResult> {
    let s = grid.index(start)?;
    if targets.is_empty() {
        return None;
    }
    let n = grid.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Entry { cost: 0.0, idx: s });
    let mut settled = 0;
    while let Some(Entry { cost, idx }) = heap.pop() {
        if done[idx] {
            continue;
        }
        done[idx] = true;
        settled += 1;
        let c = grid.cell_at(idx);
        if targets.contains(&c) {
            let mut cells = vec![c];
            let mut i = idx;
            while prev[i] != usize::MAX {
                i = prev[i];
                cells.push(grid.cell_at(i));
            }
            cells.reverse();
            return Some(PathResult { cost, cells, settled });
        }
        for a in MoveAction::ALL {
            let next = a.apply(c);
            let Some(j) = grid.index(next) else { continue };
            if done[j] || !grid.is_free(next) {
                continue;
            }
            let (dx, dy) = a.delta();
            let step = if dx != 0 && dy != 0 {
                std::f64::consts::SQRT_2
            } else {
                1.0
            };
            let nd = cost + step;
            if nd < dist[j] {
                dist[j] = nd;
                prev[j] = idx;
                heap.push(Entry { cost: nd, idx: j });
            }
        }
    }
    None
}
