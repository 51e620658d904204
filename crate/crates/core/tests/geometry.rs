mod common;

use std::collections::BTreeSet;

use rand::Rng;

use semsearch::geometry::los::segment_cells;
use semsearch::geometry::{compute_visibility, detect_frontiers, RayMode, DEFAULT_MIN_EDGE_SIZE};
use semsearch::grid::{Cell, CellState, GridMap, RoomLabels};

#[test]
fn column_frontier() {
    let mut g = GridMap::new(5, 5, 1.0, CellState::Unknown).unwrap();
    for y in 0..5 {
        for x in 0..3 {
            g.set(Cell::new(x, y), CellState::Free);
        }
    }
    let edges = detect_frontiers(&g, &RoomLabels::unlabeled(5, 5), 1);
    assert_eq!(edges.len(), 1);
    let want: Vec<Cell> = (0..5).map(|y| Cell::new(2, y)).collect();
    assert_eq!(edges[0].cells, want);
}

#[test]
fn fourteen_cells_are_noise() {
    let mut g = GridMap::new(16, 3, 1.0, CellState::Occupied).unwrap();
    for x in 0..14 {
        g.set(Cell::new(x, 1), CellState::Free);
        g.set(Cell::new(x, 2), CellState::Unknown);
    }
    let rooms = RoomLabels::unlabeled(16, 3);
    assert!(detect_frontiers(&g, &rooms, DEFAULT_MIN_EDGE_SIZE).is_empty());
    g.set(Cell::new(14, 1), CellState::Free);
    g.set(Cell::new(14, 2), CellState::Unknown);
    assert_eq!(detect_frontiers(&g, &rooms, DEFAULT_MIN_EDGE_SIZE).len(), 1);
}

#[test]
fn frontiers_match_brute_force() {
    let mut r = common::rng(5);
    for _ in 0..50 {
        let g = common::random_grid(&mut r, 24, 18, 0.2, 0.3);
        let rooms = common::random_rooms(&mut r, 24, 18, 3);
        let min = r.random_range(1..6);
        let got: BTreeSet<_> = detect_frontiers(&g, &rooms, min)
            .into_iter()
            .map(|e| (e.cells.into_iter().collect::<BTreeSet<_>>(), e.room))
            .collect();
        assert_eq!(got, common::brute_frontiers(&g, &rooms, min));
    }
}

#[test]
fn dense_visibility_matches_brute_force() {
    let mut r = common::rng(8);
    for _ in 0..20 {
        let g = common::random_grid(&mut r, 20, 20, 0.25, 0.1);
        let free: Vec<Cell> = g.free_cells().collect();
        let o = free[r.random_range(0..free.len())];
        let range = r.random_range(0.5..4.0);
        let got = compute_visibility(&g, &g.center(o), range, RayMode::Dense);
        assert_eq!(got.cells, common::brute_visibility(&g, o, range));
    }
}

#[test]
fn wall_between_source_and_cell() {
    let mut g = GridMap::new(9, 3, 1.0, CellState::Free).unwrap();
    g.set(Cell::new(4, 1), CellState::Occupied);
    let v = compute_visibility(&g, &g.center(Cell::new(1, 1)), 20.0, RayMode::Dense);
    assert!(!v.contains(Cell::new(7, 1)));
    assert!(v.contains(Cell::new(3, 1)));
    assert_eq!(v.cells, common::brute_visibility(&g, Cell::new(1, 1), 20.0));
}

#[test]
fn range_cutoff() {
    let g = GridMap::new(11, 11, 1.0, CellState::Free).unwrap();
    let o = Cell::new(5, 5);
    let v = compute_visibility(&g, &g.center(o), 2.0, RayMode::Dense);
    assert!(v.cells.iter().all(|c| c.distance(o) <= 2.0));
    assert!(v.contains(Cell::new(7, 5)));
    let all = compute_visibility(&g, &g.center(o), 100.0, RayMode::Dense);
    assert_eq!(all.len(), 121);
}

#[test]
fn segment_cells_agree_with_the_interior_test() {
    let mut r = common::rng(2);
    for _ in 0..500 {
        let a = Cell::new(r.random_range(-10..10), r.random_range(-10..10));
        let b = Cell::new(r.random_range(-10..10), r.random_range(-10..10));
        let got: BTreeSet<Cell> = segment_cells(a, b).into_iter().collect();
        let mut want = BTreeSet::from([a, b]);
        for y in a.y.min(b.y)..=a.y.max(b.y) {
            for x in a.x.min(b.x)..=a.x.max(b.x) {
                let c = Cell::new(x, y);
                if common::segment_meets_interior(a, b, c) {
                    want.insert(c);
                }
            }
        }
        assert_eq!(got, want, "{a:?} -> {b:?}");
    }
}
