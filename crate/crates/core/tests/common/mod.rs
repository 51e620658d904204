//! Independent reference implementations used by the integration tests,
//! plus the shared checks that pit the library against them.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use semsearch::grid::{Cell, CellState, GridMap, RoomId, RoomLabels};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random grid with each cell Free/Occupied/Unknown by the given weights.
pub fn random_grid(r: &mut impl Rng, w: usize, h: usize, p_occ: f64, p_unknown: f64) -> GridMap {
    let mut g = GridMap::new(w, h, 0.25, CellState::Free).unwrap();
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let u: f64 = r.random();
            let s = if u < p_occ {
                CellState::Occupied
            } else if u < p_occ + p_unknown {
                CellState::Unknown
            } else {
                CellState::Free
            };
            g.set(Cell::new(x, y), s);
        }
    }
    g
}

pub fn random_rooms(r: &mut impl Rng, w: usize, h: usize, k: u32) -> RoomLabels {
    let mut rooms = RoomLabels::unlabeled(w, h);
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let v = r.random_range(0..=k);
            rooms.set(Cell::new(x, y), (v < k).then_some(RoomId(v)));
        }
    }
    rooms
}

// ---------------------------------------------------------------------------
// Line of sight and visibility

/// Open-interval parameter range of the segment `a + t (b - a)` inside the
/// open slab `|p - c| < 1/2`, or `None` when it never enters.
fn slab(a: i32, b: i32, c: i32) -> Option<(f64, f64)> {
    let d = f64::from(b - a);
    if d == 0.0 {
        return (a == c).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let t0 = (f64::from(c - a) - 0.5) / d;
    let t1 = (f64::from(c - a) + 0.5) / d;
    Some((t0.min(t1), t0.max(t1)))
}

/// Whether the closed segment between the centers of `a` and `b` meets the
/// open square of cell `c`.
pub fn segment_meets_interior(a: Cell, b: Cell, c: Cell) -> bool {
    let (Some((x0, x1)), Some((y0, y1))) = (slab(a.x, b.x, c.x), slab(a.y, b.y, c.y)) else {
        return false;
    };
    // the endpoints are cell centers, so only the endpoint cells contain
    // them and the clipped open interval decides the rest
    x0.max(y0).max(0.0) < x1.min(y1).min(1.0)
}

/// True when no non-endpoint cell whose interior the segment crosses is
/// rejected by `passable`.
pub fn brute_los(a: Cell, b: Cell, passable: impl Fn(Cell) -> bool) -> bool {
    for y in a.y.min(b.y)..=a.y.max(b.y) {
        for x in a.x.min(b.x)..=a.x.max(b.x) {
            let c = Cell::new(x, y);
            if c == a || c == b {
                continue;
            }
            if segment_meets_interior(a, b, c) && !passable(c) {
                return false;
            }
        }
    }
    true
}

/// Free cells within range whose center sees the origin's center.
pub fn brute_visibility(grid: &GridMap, origin: Cell, max_range: f64) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    for y in 0..grid.height() as i32 {
        for x in 0..grid.width() as i32 {
            let c = Cell::new(x, y);
            if grid.get(c) != Some(CellState::Free) {
                continue;
            }
            let d = f64::from((c.x - origin.x).pow(2) + (c.y - origin.y).pow(2)).sqrt();
            if d * grid.resolution() > max_range + 1e-9 {
                continue;
            }
            if brute_los(origin, c, |m| grid.get(m) == Some(CellState::Free)) {
                out.insert(c);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Frontiers

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Frontier components by literal predicate and union-find, each with its
/// majority room (ties to the smaller id).
pub fn brute_frontiers(
    grid: &GridMap,
    rooms: &RoomLabels,
    min_size: usize,
) -> BTreeSet<(BTreeSet<Cell>, Option<RoomId>)> {
    let (w, h) = (grid.width() as i32, grid.height() as i32);
    let at = |x: i32, y: i32| -> Option<CellState> {
        (x >= 0 && y >= 0 && x < w && y < h).then(|| grid.get(Cell::new(x, y)).unwrap())
    };
    let mut frontier = BTreeSet::new();
    for y in 0..h {
        for x in 0..w {
            if at(x, y) != Some(CellState::Free) {
                continue;
            }
            let mut unknown_near = false;
            for k in -1..=1 {
                for l in -1..=1 {
                    if (k, l) != (0, 0) && at(x + k, y + l) == Some(CellState::Unknown) {
                        unknown_near = true;
                    }
                }
            }
            if unknown_near {
                frontier.insert(Cell::new(x, y));
            }
        }
    }
    let cells: Vec<Cell> = frontier.iter().copied().collect();
    let idx: BTreeMap<Cell, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    for (i, c) in cells.iter().enumerate() {
        for k in -1..=1 {
            for l in -1..=1 {
                if let Some(&j) = idx.get(&Cell::new(c.x + k, c.y + l)) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<Cell>> = BTreeMap::new();
    for (i, &c) in cells.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().insert(c);
    }
    groups
        .into_values()
        .filter(|g| g.len() >= min_size.max(1))
        .map(|g| {
            let mut votes: BTreeMap<u32, usize> = BTreeMap::new();
            for c in &g {
                if let Some(r) = rooms.get(*c) {
                    *votes.entry(r.0).or_default() += 1;
                }
            }
            let best = votes
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(&r, _)| RoomId(r));
            (g, best)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Bayesian networks

/// A random Boolean network as plain data: node names, parent lists sorted
/// by name, and `P(present)` per parent row (first parent = high bit).
#[derive(Debug, Clone)]
pub struct PlainNet {
    pub names: Vec<String>,
    pub parents: Vec<Vec<usize>>,
    pub present: Vec<Vec<f64>>,
}

impl PlainNet {
    pub fn random(r: &mut impl Rng, n: usize, max_parents: usize) -> Self {
        // names shuffled against the topological order so the bit order is
        // exercised independently of construction order
        let mut names: Vec<String> = (0..n).map(|i| format!("n{i:02}")).collect();
        for i in (1..n).rev() {
            names.swap(i, r.random_range(0..=i));
        }
        let mut parents = Vec::with_capacity(n);
        for i in 0..n {
            let mut ps: Vec<usize> = (0..i).filter(|_| r.random_bool(0.4)).collect();
            while ps.len() > max_parents {
                ps.remove(r.random_range(0..ps.len()));
            }
            ps.sort_by(|&a, &b| names[a].cmp(&names[b]));
            parents.push(ps);
        }
        let present = parents
            .iter()
            .map(|ps: &Vec<usize>| {
                (0..1usize << ps.len())
                    .map(|_| {
                        // keep some rows near the edges of [0, 1]
                        match r.random_range(0..6) {
                            0 => 0.0,
                            1 => 1.0,
                            _ => r.random_range(0.02..0.98),
                        }
                    })
                    .collect()
            })
            .collect();
        PlainNet {
            names,
            parents,
            present,
        }
    }

    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                out.push((self.names[p].clone(), self.names[c].clone()));
            }
        }
        out
    }

    pub fn cpts(&self) -> BTreeMap<String, Vec<[f64; 2]>> {
        self.names
            .iter()
            .zip(&self.present)
            .map(|(n, rows)| (n.clone(), rows.iter().map(|&p| [1.0 - p, p]).collect()))
            .collect()
    }

    /// Full joint probability of one assignment (bit i = node i).
    pub fn joint(&self, bits: usize) -> f64 {
        let mut p = 1.0;
        for (i, ps) in self.parents.iter().enumerate() {
            let mut row = 0;
            for &q in ps {
                row = row * 2 + ((bits >> q) & 1);
            }
            let on = self.present[i][row];
            p *= if (bits >> i) & 1 == 1 { on } else { 1.0 - on };
        }
        p
    }

    /// `P(target | evidence all present)` from the full joint table, or
    /// `None` when the evidence has zero probability.
    pub fn enumerate(&self, target: usize, evidence: &[usize]) -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for bits in 0..1usize << self.names.len() {
            if evidence.iter().any(|&e| (bits >> e) & 1 == 0) {
                continue;
            }
            let p = self.joint(bits);
            den += p;
            if (bits >> target) & 1 == 1 {
                num += p;
            }
        }
        (den > 0.0).then(|| num / den)
    }
}

// ---------------------------------------------------------------------------
// Grid MDPs

pub const DIRS: [(i32, i32); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];

/// Plain grid MDP over the Free cells of a grid, built from direction
/// offsets: action `a` lands on direction `a` with weight `w[0]`, `a - 1`
/// with `w[1]` and `a + 1` with `w[2]`.
#[derive(Debug, Clone)]
pub struct PlainMdp {
    pub cells: Vec<Cell>,
    pub index: BTreeMap<Cell, usize>,
    /// `next[s][a]` as `(s', p)` pairs, duplicates allowed.
    pub next: Vec<Vec<Vec<(usize, f64)>>>,
    pub reward: Vec<f64>,
    pub goal: Vec<bool>,
    pub gamma: f64,
}

impl PlainMdp {
    pub fn new(grid: &GridMap, w: [f64; 3], reward: &BTreeMap<Cell, f64>, goals: &BTreeSet<Cell>, gamma: f64) -> Self {
        let cells: Vec<Cell> = (0..grid.height() as i32)
            .flat_map(|y| (0..grid.width() as i32).map(move |x| Cell::new(x, y)))
            .filter(|&c| grid.get(c) == Some(CellState::Free))
            .collect();
        let index: BTreeMap<Cell, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let next = cells
            .iter()
            .enumerate()
            .map(|(s, c)| {
                (0..8)
                    .map(|a| {
                        [(a, w[0]), ((a + 7) % 8, w[1]), ((a + 1) % 8, w[2])]
                            .into_iter()
                            .filter(|&(_, p)| p > 0.0)
                            .map(|(d, p)| {
                                let n = Cell::new(c.x + DIRS[d].0, c.y + DIRS[d].1);
                                (index.get(&n).copied().unwrap_or(s), p)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        PlainMdp {
            reward: cells.iter().map(|c| reward.get(c).copied().unwrap_or(0.0)).collect(),
            goal: cells.iter().map(|c| goals.contains(c)).collect(),
            cells,
            index,
            next,
            gamma,
        }
    }

    pub fn q(&self, v: &[f64], s: usize, a: usize) -> f64 {
        self.next[s][a]
            .iter()
            .map(|&(t, p)| p * (self.reward[t] + self.gamma * v[t]))
            .sum()
    }

    /// Value iteration to a sup-norm change below `tol`.
    pub fn value_iteration(&self, tol: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.cells.len()];
        loop {
            let mut delta: f64 = 0.0;
            let mut nv = v.clone();
            for s in 0..v.len() {
                if self.goal[s] {
                    continue;
                }
                nv[s] = (0..8).map(|a| self.q(&v, s, a)).fold(f64::NEG_INFINITY, f64::max);
                delta = delta.max((nv[s] - v[s]).abs());
            }
            v = nv;
            if delta < tol * (1.0 - self.gamma) {
                return v;
            }
        }
    }

    /// Exact value of a deterministic policy by iterating its Bellman
    /// operator to a fixed point.
    pub fn evaluate(&self, policy: &[usize], tol: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.cells.len()];
        loop {
            let mut delta: f64 = 0.0;
            let mut nv = v.clone();
            for s in 0..v.len() {
                if self.goal[s] {
                    continue;
                }
                nv[s] = self.q(&v, s, policy[s]);
                delta = delta.max((nv[s] - v[s]).abs());
            }
            v = nv;
            if delta < tol * (1.0 - self.gamma) {
                return v;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Gaussian masses

/// Mass of `N(0, cov)` (in cell units) over the square
/// `[dx - 1/2, dx + 1/2] x [dy - 1/2, dy + 1/2]`, by composite Simpson's rule.
pub fn simpson_cell_mass(cov: &Matrix2<f64>, dx: i32, dy: i32, n: usize) -> f64 {
    let inv = cov.try_inverse().unwrap();
    let norm = 1.0 / (2.0 * std::f64::consts::PI * cov.determinant().sqrt());
    let n = n + n % 2;
    let h = 1.0 / n as f64;
    let weight = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut total = 0.0;
    for i in 0..=n {
        let x = f64::from(dx) - 0.5 + i as f64 * h;
        for j in 0..=n {
            let y = f64::from(dy) - 0.5 + j as f64 * h;
            let p = Vector2::new(x, y);
            let q = (p.transpose() * inv * p)[(0, 0)];
            total += weight(i) * weight(j) * norm * (-0.5 * q).exp();
        }
    }
    total * h * h / 9.0
}

// ---------------------------------------------------------------------------
// Monte Carlo position fusion

/// Importance-sampled posterior of an object position. Poses come from
/// their Gaussian; object positions alternate between the prior and the
/// position implied by `z`, and every draw is weighted against that
/// two-part mixture so either regime keeps a usable sample size.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_fusion(
    prior_mu: Vector2<f64>,
    prior_sigma: Matrix2<f64>,
    pose_mu: Vector2<f64>,
    pose_sigma: Matrix2<f64>,
    z: (f64, f64),
    meas_cov: Matrix2<f64>,
    samples: usize,
    seed: u64,
) -> (Vector2<f64>, Matrix2<f64>, f64) {
    use std::f64::consts::PI;
    let mut r = rng(seed);
    let lp = prior_sigma.cholesky().unwrap().l();
    let lx = pose_sigma.cholesky().map(|c| c.l()).unwrap_or_else(Matrix2::zeros);
    let lz = meas_cov.cholesky().unwrap().l();
    let inv_p = prior_sigma.try_inverse().unwrap();
    let inv_r = meas_cov.try_inverse().unwrap();
    let log_norm_p = -(2.0 * PI).ln() - 0.5 * prior_sigma.determinant().ln();
    let log_norm_r = -(2.0 * PI).ln() - 0.5 * meas_cov.determinant().ln();
    let mut normal = || Vector2::new(StandardNormal.sample(&mut r), StandardNormal.sample(&mut r));
    let mut draws = Vec::with_capacity(samples);
    let mut logw = Vec::with_capacity(samples);
    for k in 0..samples {
        let x: Vector2<f64> = pose_mu + lx * normal();
        let m: Vector2<f64> = if k % 2 == 0 {
            prior_mu + lp * normal()
        } else {
            let rb = Vector2::new(z.0, z.1) + lz * normal();
            x + Vector2::new(rb.x * rb.y.cos(), rb.x * rb.y.sin())
        };
        let d = m - x;
        let range = d.norm();
        let db = (z.1 - d.y.atan2(d.x) + PI).rem_euclid(2.0 * PI) - PI;
        let innov = Vector2::new(z.0 - range, db);
        let dp = m - prior_mu;
        let log_prior = log_norm_p - 0.5 * (dp.transpose() * inv_p * dp)[(0, 0)];
        let log_lik = log_norm_r - 0.5 * (innov.transpose() * inv_r * innov)[(0, 0)];
        // implied-position density: the range-bearing Gaussian over the
        // polar-to-Cartesian Jacobian
        let log_implied = log_lik - range.ln();
        let hi = log_prior.max(log_implied);
        let log_mix = hi + (0.5 * ((log_prior - hi).exp() + (log_implied - hi).exp())).ln();
        logw.push(log_prior + log_lik - log_mix);
        draws.push(m);
    }
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    let ess = total * total / w.iter().map(|v| v * v).sum::<f64>();
    let mean = draws.iter().zip(&w).map(|(m, wi)| m * *wi).sum::<Vector2<f64>>() / total;
    let cov = draws
        .iter()
        .zip(&w)
        .map(|(m, wi)| (m - mean) * (m - mean).transpose() * *wi)
        .sum::<Matrix2<f64>>()
        / total;
    (mean, cov, ess)
}

// ---------------------------------------------------------------------------
// Shared checks

/// A random square planning problem: obstacles, a handful of rewarding goal
/// cells, sparse small rewards elsewhere, and a start that can reach a goal.
pub fn random_planning_problem(r: &mut impl Rng, size: usize) -> (GridMap, BTreeMap<Cell, f64>, BTreeSet<Cell>, Cell) {
    loop {
        let grid = random_grid(r, size, size, 0.2, 0.0);
        let free: Vec<Cell> = grid.free_cells().collect();
        if free.len() < 10 {
            continue;
        }
        let mut goals = BTreeSet::new();
        let mut reward = BTreeMap::new();
        for _ in 0..r.random_range(2..=5) {
            let g = free[r.random_range(0..free.len())];
            goals.insert(g);
            reward.insert(g, r.random_range(0.5..2.0));
        }
        for &c in &free {
            if !goals.contains(&c) && r.random_bool(0.05) {
                reward.insert(c, r.random_range(0.0..0.2));
            }
        }
        let start = free[r.random_range(0..free.len())];
        if goals.contains(&start) {
            continue;
        }
        // start must reach some goal through free cells
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        let mut ok = false;
        while let Some(c) = stack.pop() {
            if goals.contains(&c) {
                ok = true;
                break;
            }
            for (dx, dy) in DIRS {
                let n = Cell::new(c.x + dx, c.y + dy);
                if grid.get(n) == Some(CellState::Free) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        if ok {
            return (grid, reward, goals, start);
        }
    }
}

/// Outcome of comparing a converged RTDP policy with value iteration.
#[derive(Debug, Clone, Copy)]
pub struct PolicyCheck {
    pub converged: bool,
    /// `|V^pi(start) - V*(start)|`.
    pub return_gap: f64,
    /// States on the greedy envelope whose action is neither the optimal
    /// one nor worth the same within 1e-6.
    pub mismatches: usize,
    pub envelope: usize,
}

pub fn rtdp_against_value_iteration(seed: u64) -> PolicyCheck {
    use semsearch::planner::{build_mdp, greedy_action, rtdp_improve, RtdpConfig, ValueTable};
    use semsearch::world::MotionModel;

    let mut r = rng(seed);
    let (grid, reward, goals, start) = random_planning_problem(&mut r, 20);
    let w = [0.8, 0.1, 0.1];
    let gamma = 0.95;
    let oracle = PlainMdp::new(&grid, w, &reward, &goals, gamma);
    let v_star = oracle.value_iteration(1e-12);

    let mut mdp = build_mdp(&grid, &MotionModel::new(w[0], w[1], w[2]).unwrap(), gamma).unwrap();
    let rewards: Vec<f64> = mdp
        .states()
        .iter()
        .map(|c| reward.get(c).copied().unwrap_or(0.0))
        .collect();
    mdp.set_rewards(rewards).unwrap();
    mdp.set_goals(goals.iter().copied());
    let mut table = ValueTable::optimistic(&mdp);
    let config = RtdpConfig {
        max_trials: 200_000,
        tolerance: 1e-10,
        ..RtdpConfig::default()
    };
    let s0 = mdp.state_of(start).unwrap();
    let report = rtdp_improve(&mdp, &mut table, s0, &config, &mut rng(seed ^ 0x5eed)).unwrap();

    // greedy policy everywhere (only the envelope matters for the return)
    let policy: Vec<usize> = oracle
        .cells
        .iter()
        .map(|&c| greedy_action(&table, &mdp, mdp.state_of(c).unwrap()).index())
        .collect();
    let v_pi = oracle.evaluate(&policy, 1e-12);
    let o0 = oracle.index[&start];

    let mut envelope = BTreeSet::from([o0]);
    let mut stack = vec![o0];
    let mut mismatches = 0;
    while let Some(s) = stack.pop() {
        if oracle.goal[s] {
            continue;
        }
        let best = (0..8)
            .map(|a| oracle.q(&v_star, s, a))
            .fold(f64::NEG_INFINITY, f64::max);
        if oracle.q(&v_star, s, policy[s]) < best - 1e-6 {
            mismatches += 1;
        }
        for &(t, _) in &oracle.next[s][policy[s]] {
            if envelope.insert(t) {
                stack.push(t);
            }
        }
    }
    PolicyCheck {
        converged: report.converged,
        return_gap: (v_pi[o0] - v_star[o0]).abs(),
        mismatches,
        envelope: envelope.len(),
    }
}
