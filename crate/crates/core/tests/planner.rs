mod common;

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::Matrix2;

use semsearch::gauss::Cov2;
use semsearch::geometry::{detect_frontiers, FrontierEdge, VisibilityRegion};
use semsearch::grid::{Cell, CellState, GridMap, Point, RoomId, RoomLabels};
use semsearch::mapping::ObjectMap;
use semsearch::planner::{
    adapt, build_mdp, cell_mass_kernel, greedy_action, rtdp_improve, select_goal, shape_frontier_reward,
    shape_visibility_reward, GoalDecision, MdpModel, RewardShape, RtdpConfig, ValueTable,
};
use semsearch::world::{MotionModel, MoveAction};

fn transitions_equal(mdp: &MdpModel, oracle: &common::PlainMdp) {
    assert_eq!(mdp.states(), oracle.cells.as_slice());
    for (s, _) in oracle.cells.iter().enumerate() {
        for a in 0..8 {
            let mut want: BTreeMap<usize, f64> = BTreeMap::new();
            for &(t, p) in &oracle.next[s][a] {
                *want.entry(t).or_default() += p;
            }
            let got: BTreeMap<usize, f64> = mdp.successors(s, MoveAction::from_index(a)).collect();
            assert_eq!(got.len(), want.len());
            for (t, p) in want {
                assert!((got[&t] - p).abs() < 1e-12);
            }
            let total: f64 = mdp.successors(s, MoveAction::from_index(a)).map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn transitions_match_mass_accounting() {
    let mut r = common::rng(3);
    for _ in 0..10 {
        let g = common::random_grid(&mut r, 12, 9, 0.3, 0.0);
        if g.free_cells().next().is_none() {
            continue;
        }
        let mdp = build_mdp(&g, &MotionModel::default(), 0.95).unwrap();
        let oracle = common::PlainMdp::new(&g, [0.8, 0.1, 0.1], &BTreeMap::new(), &BTreeSet::new(), 0.95);
        transitions_equal(&mdp, &oracle);
    }
}

#[test]
fn small_grids() {
    let g = GridMap::new(3, 3, 1.0, CellState::Free).unwrap();
    let det = build_mdp(&g, &MotionModel::deterministic(), 0.95).unwrap();
    assert_eq!(det.len(), 9);
    let centre = det.state_of(Cell::new(1, 1)).unwrap();
    let up: Vec<_> = det.successors(centre, MoveAction::North).collect();
    assert_eq!(up, vec![(det.state_of(Cell::new(1, 2)).unwrap(), 1.0)]);
    let noisy = build_mdp(&g, &MotionModel::default(), 0.95).unwrap();
    let up: BTreeMap<_, _> = noisy.successors(centre, MoveAction::North).collect();
    assert_eq!(up[&noisy.state_of(Cell::new(1, 2)).unwrap()], 0.8);
    assert_eq!(up[&noisy.state_of(Cell::new(0, 2)).unwrap()], 0.1);
    assert_eq!(up[&noisy.state_of(Cell::new(2, 2)).unwrap()], 0.1);
    // west wall: the north-west branch leaves the map and stays put
    let side = noisy.state_of(Cell::new(0, 1)).unwrap();
    let up: BTreeMap<_, _> = noisy.successors(side, MoveAction::North).collect();
    assert!((up[&side] - 0.1).abs() < 1e-12);
    assert!((up[&noisy.state_of(Cell::new(0, 2)).unwrap()] - 0.8).abs() < 1e-12);
    assert!((up[&noisy.state_of(Cell::new(1, 2)).unwrap()] - 0.1).abs() < 1e-12);
    // top row: every branch leaves the map
    let top = noisy.state_of(Cell::new(0, 2)).unwrap();
    assert_eq!(
        noisy.successors(top, MoveAction::North).collect::<Vec<_>>(),
        vec![(top, 1.0)]
    );
    assert!(build_mdp(
        &GridMap::new(3, 3, 1.0, CellState::Occupied).unwrap(),
        &MotionModel::default(),
        0.95
    )
    .is_err());
}

fn edge(cells: &[(i32, i32)], room: Option<RoomId>) -> FrontierEdge {
    let mut c: Vec<Cell> = cells.iter().map(|&(x, y)| Cell::new(x, y)).collect();
    c.sort_by_key(|c| (c.y, c.x));
    FrontierEdge { cells: c, room }
}

#[test]
fn delta_pose_frontier_reward() {
    let g = GridMap::new(30, 5, 0.25, CellState::Free).unwrap();
    let cells: Vec<(i32, i32)> = (0..20).map(|x| (x, 2)).collect();
    let e = edge(&cells, Some(RoomId(1)));
    let mdp = build_mdp(&g, &MotionModel::default(), 0.95).unwrap();
    let mdp = shape_frontier_reward(mdp, &[e], |_| 0.5, &Cov2::zeros(), 0.25);
    let on = mdp.state_of(Cell::new(7, 2)).unwrap();
    assert!((mdp.reward(on) - 10.0).abs() < 1e-9);
    let off = mdp.state_of(Cell::new(28, 0)).unwrap();
    assert!(mdp.reward(off).abs() < 1e-12);
    assert!(mdp.is_goal(on) && !mdp.is_goal(off));
}

#[test]
fn straddling_gaussian_frontier_reward() {
    // edge occupies x >= 10 on every row; pose at x = 9 leaks over
    let g = GridMap::new(20, 21, 0.25, CellState::Free).unwrap();
    let cells: Vec<(i32, i32)> = (10..20).flat_map(|x| (0..21).map(move |y| (x, y))).collect();
    let e = edge(&cells, None);
    let size = e.size() as f64;
    let sigma_cells = 0.8;
    let cov = Matrix2::identity() * (sigma_cells * 0.25f64).powi(2);
    let mdp = build_mdp(&g, &MotionModel::default(), 0.95).unwrap();
    let mdp = shape_frontier_reward(mdp, std::slice::from_ref(&e), |_| 0.3, &cov, 0.25);
    let cov_cells = Matrix2::identity() * sigma_cells * sigma_cells;
    for probe in [Cell::new(9, 10), Cell::new(10, 10), Cell::new(8, 3)] {
        let mut mass = 0.0;
        for c in &e.cells {
            let (dx, dy) = (c.x - probe.x, c.y - probe.y);
            if dx.abs() <= 8 && dy.abs() <= 8 {
                mass += common::simpson_cell_mass(&cov_cells, dx, dy, 40);
            }
        }
        let want = mass * 0.3 * size;
        let got = mdp.reward(mdp.state_of(probe).unwrap());
        assert!((got - want).abs() < 1e-6 * size, "{probe:?}: {got} vs {want}");
    }
}

#[test]
fn half_in_half_out_visibility_mass() {
    let g = GridMap::new(21, 21, 0.25, CellState::Free).unwrap();
    // region: every column from x = 10 eastward
    let region = VisibilityRegion {
        source: None,
        cells: (10..21).flat_map(|x| (0..21).map(move |y| Cell::new(x, y))).collect(),
    };
    let sigma_cells = 1.5;
    let cov = Matrix2::identity() * (sigma_cells * 0.25f64).powi(2);
    let mdp = build_mdp(&g, &MotionModel::default(), 0.95).unwrap();
    let mdp = shape_visibility_reward(mdp, &region, &cov, 0.25);
    let cov_cells = Matrix2::identity() * sigma_cells * sigma_cells;
    let probe = Cell::new(10, 10);
    let mut mass = 0.0;
    for c in &region.cells {
        let (dx, dy) = (c.x - probe.x, c.y - probe.y);
        if dx.abs() <= 12 && dy.abs() <= 12 {
            mass += common::simpson_cell_mass(&cov_cells, dx, dy, 40);
        }
    }
    let got = mdp.reward(mdp.state_of(probe).unwrap());
    assert!((got - mass).abs() < 1e-6, "{got} vs {mass}");
    // the two cells either side of the boundary split the mass about evenly
    let edge_probe = mdp.state_of(Cell::new(9, 10)).unwrap();
    let left = mdp.reward(edge_probe);
    assert!(left < 0.5 && mass > 0.5 && ((left + mass) / 2.0 - 0.5).abs() < 0.05);
    let inside = shape_visibility_reward(
        build_mdp(&g, &MotionModel::default(), 0.95).unwrap(),
        &region,
        &Cov2::zeros(),
        0.25,
    );
    assert_eq!(inside.reward(inside.state_of(Cell::new(15, 3)).unwrap()), 1.0);
    assert_eq!(inside.reward(inside.state_of(Cell::new(2, 3)).unwrap()), 0.0);
}

#[test]
fn kernel_matches_simpson_for_correlated_covariance() {
    for (sx, sy, rho) in [(0.7, 1.2, 0.5), (1.5, 0.6, -0.8), (0.4, 0.4, 0.0), (2.0, 1.0, 0.3)] {
        let c = Matrix2::new(sx * sx, rho * sx * sy, rho * sx * sy, sy * sy);
        let kernel = cell_mass_kernel(&(c * 0.0625), 0.25);
        let total: f64 = kernel.iter().map(|k| k.2).sum();
        assert!((total - 1.0).abs() < 1e-6);
        for &(dx, dy, m) in &kernel {
            if dx.abs() <= 3 && dy.abs() <= 3 {
                let want = common::simpson_cell_mass(&c, dx, dy, 60);
                assert!((m - want).abs() < 1e-6, "({dx},{dy}) {m} vs {want}");
            }
        }
    }
}

#[test]
fn corridor_value_is_discounted_reward() {
    for d in 1..5 {
        let g = GridMap::new(5, 5, 1.0, CellState::Free).unwrap();
        let goal = Cell::new(0, d);
        let mut mdp = build_mdp(&g, &MotionModel::deterministic(), 0.95).unwrap();
        let mut rewards = vec![0.0; mdp.len()];
        rewards[mdp.state_of(goal).unwrap()] = 1.0;
        mdp.set_rewards(rewards).unwrap();
        mdp.set_goals([goal]);
        let start = mdp.state_of(Cell::new(0, 0)).unwrap();
        let mut t = ValueTable::optimistic(&mdp);
        let rep = rtdp_improve(&mdp, &mut t, start, &RtdpConfig::default(), &mut common::rng(1)).unwrap();
        assert!(rep.converged);
        let oracle = common::PlainMdp::new(
            &g,
            [1.0, 0.0, 0.0],
            &BTreeMap::from([(goal, 1.0)]),
            &BTreeSet::from([goal]),
            0.95,
        );
        let vi = oracle.value_iteration(1e-12);
        let got = t.value(&mdp, start);
        assert!((got - 0.95f64.powi(d - 1)).abs() < 1e-6);
        assert!((got - vi[oracle.index[&Cell::new(0, 0)]]).abs() < 1e-6);
        if d == 1 {
            assert_eq!(greedy_action(&t, &mdp, start), MoveAction::North);
        }
    }
}

#[test]
fn converged_policies_match_value_iteration() {
    for seed in 0..4 {
        let check = common::rtdp_against_value_iteration(seed);
        assert!(check.converged);
        assert!(check.return_gap <= 1e-6, "{check:?}");
        assert_eq!(check.mismatches, 0, "{check:?}");
    }
}

#[test]
fn adapt_counts_new_states() {
    let mut g = GridMap::new(10, 10, 0.25, CellState::Unknown).unwrap();
    for x in 0..5 {
        for y in 0..10 {
            g.set(Cell::new(x, y), CellState::Free);
        }
    }
    let rooms = RoomLabels::unlabeled(10, 10);
    let edges = detect_frontiers(&g, &rooms, 1);
    let shape = RewardShape::Frontier {
        room_probs: vec![1.0; edges.len()],
        edges,
        pose_cov: Cov2::zeros(),
    };
    let base = shape.apply(build_mdp(&g, &MotionModel::default(), 0.95).unwrap(), 0.25);
    let table = ValueTable::optimistic(&base);
    let (same, same_table) = adapt(&base, &table, &g, &shape).unwrap();
    assert_eq!(same, base);
    assert_eq!(same_table, table);

    let before: BTreeSet<Cell> = base.states().iter().copied().collect();
    let mut grown = g.clone();
    for y in 0..10 {
        grown.set(Cell::new(5, y), CellState::Free);
    }
    let (mdp, _) = adapt(&base, &table, &grown, &shape).unwrap();
    let after: BTreeSet<Cell> = mdp.states().iter().copied().collect();
    assert_eq!(after.len(), before.len() + 10);
    assert_eq!(after.difference(&before).count(), 10);
}

/// Follows the greedy policy on a deterministic MDP until it reaches a goal.
fn walk_to_goal(mdp: &MdpModel, table: &ValueTable, mut s: usize) -> Cell {
    for _ in 0..500 {
        if mdp.is_goal(s) {
            return mdp.cell(s);
        }
        let a = greedy_action(table, mdp, s);
        s = mdp.successors(s, a).next().unwrap().0;
    }
    panic!("greedy walk did not reach a goal");
}

#[test]
fn consumed_edge_replan_matches_cold_replan() {
    // known strip x < 6 with unknown to the east (near edge) and a pocket of
    // unknown far north-west (far edge)
    let mut g = GridMap::new(14, 14, 0.25, CellState::Free).unwrap();
    for y in 0..14 {
        for x in 6..14 {
            g.set(Cell::new(x, y), CellState::Unknown);
        }
    }
    for y in 11..14 {
        for x in 0..3 {
            g.set(Cell::new(x, y), CellState::Unknown);
        }
    }
    let rooms = RoomLabels::unlabeled(14, 14);
    let motion = MotionModel::deterministic();
    let frontier_shape = |grid: &GridMap| {
        let edges = detect_frontiers(grid, &rooms, 1);
        RewardShape::Frontier {
            room_probs: vec![1.0; edges.len()],
            edges,
            pose_cov: Cov2::zeros(),
        }
    };
    let shape = frontier_shape(&g);
    let mdp = shape.apply(build_mdp(&g, &motion, 0.95).unwrap(), 0.25);
    let start = Cell::new(3, 2);
    let mut table = ValueTable::optimistic(&mdp);
    rtdp_improve(
        &mdp,
        &mut table,
        mdp.state_of(start).unwrap(),
        &RtdpConfig::default(),
        &mut common::rng(0),
    )
    .unwrap();

    // the east unknown turns out to be a wall: that edge is consumed
    let mut explored = g.clone();
    for y in 0..14 {
        explored.set(Cell::new(6, y), CellState::Occupied);
        for x in 7..14 {
            explored.set(Cell::new(x, y), CellState::Occupied);
        }
    }
    let new_shape = frontier_shape(&explored);
    let (warm_mdp, mut warm) = adapt(&mdp, &table, &explored, &new_shape).unwrap();
    for c in warm_mdp.goal_cells() {
        assert!(c.x < 6, "consumed edge cell {c:?} still a goal");
    }
    let s = warm_mdp.state_of(start).unwrap();
    rtdp_improve(&warm_mdp, &mut warm, s, &RtdpConfig::default(), &mut common::rng(1)).unwrap();
    let cold_mdp = new_shape.apply(build_mdp(&explored, &motion, 0.95).unwrap(), 0.25);
    let mut cold = ValueTable::optimistic(&cold_mdp);
    rtdp_improve(&cold_mdp, &mut cold, s, &RtdpConfig::default(), &mut common::rng(2)).unwrap();
    assert_eq!(walk_to_goal(&warm_mdp, &warm, s), walk_to_goal(&cold_mdp, &cold, s));
}

#[test]
fn goal_selection_examples() {
    let one = |p: f64| {
        let mut m = ObjectMap::new();
        m.insert(Point::zeros(), Cov2::identity(), vec![p, 1.0 - p], None);
        m
    };
    let edges = vec![edge(&[(0, 0)], None)];
    assert!(matches!(
        select_goal(&one(0.995), 0, 0.7, 0.01, &edges),
        GoalDecision::Found(_)
    ));
    assert!(matches!(
        select_goal(&one(0.8), 0, 0.7, 0.01, &edges),
        GoalDecision::Observe(_)
    ));
    assert_eq!(select_goal(&one(0.3), 0, 0.7, 0.01, &edges), GoalDecision::Explore);
    assert_eq!(select_goal(&one(0.3), 0, 0.7, 0.01, &[]), GoalDecision::Exhausted);
}
