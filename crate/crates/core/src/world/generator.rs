//! Deterministic procedural houses.
//!
//! A rectangle is split recursively (largest leaf first, across its longer
//! side) until the requested number of rooms exists. Every split wall gets
//! one doorway, so the room graph is a tree and every free cell is reachable.
//! Rooms are then given a category, and objects are drawn from
//! category-specific class weights. Each category always receives its anchor
//! objects, and every house contains at least one towel in a bathroom.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::env::{Environment, GroundTruthObject, TruthId};
use crate::error::{Error, Result};
use crate::grid::{Cell, CellState, GridMap, RoomId, RoomLabels};

/// Object classes emitted by the generator, in document order.
pub const HOUSE_CLASSES: [&str; 14] = [
    "towel",
    "sink",
    "toilet",
    "bathtub",
    "stove",
    "fridge",
    "microwave",
    "bed",
    "pillow",
    "wardrobe",
    "sofa",
    "tv",
    "table",
    "chair",
];

pub const ROOM_KINDS: [&str; 4] = ["bathroom", "kitchen", "bedroom", "living"];

/// Pairs of classes the default simulated detector tends to confuse.
const CONFUSABLE: [(&str, &str); 7] = [
    ("towel", "pillow"),
    ("sink", "bathtub"),
    ("stove", "microwave"),
    ("fridge", "wardrobe"),
    ("toilet", "chair"),
    ("bed", "sofa"),
    ("tv", "table"),
];

fn kind_weights(kind: &str) -> &'static [(&'static str, f64)] {
    match kind {
        "bathroom" => &[("towel", 3.0), ("sink", 3.0), ("toilet", 2.0), ("bathtub", 2.0)],
        "kitchen" => &[
            ("stove", 3.0),
            ("fridge", 2.0),
            ("microwave", 2.0),
            ("sink", 3.0),
            ("table", 2.0),
            ("chair", 3.0),
            ("towel", 0.4),
        ],
        "bedroom" => &[
            ("bed", 2.0),
            ("pillow", 4.0),
            ("wardrobe", 2.0),
            ("chair", 1.0),
            ("tv", 0.5),
            ("towel", 0.3),
        ],
        _ => &[
            ("sofa", 3.0),
            ("tv", 2.0),
            ("table", 2.0),
            ("chair", 3.0),
            ("pillow", 2.0),
        ],
    }
}

fn anchors(kind: &str) -> &'static [&'static str] {
    match kind {
        "bathroom" => &["toilet", "sink"],
        "kitchen" => &["stove", "fridge"],
        "bedroom" => &["bed"],
        _ => &["sofa"],
    }
}

/// Dirichlet concentrations for the default detector over `classes`: each
/// class has weight 5 on itself, 3 on its confusable partner, 1 elsewhere.
pub fn default_detector_alphas(classes: &[String]) -> Vec<Vec<f64>> {
    let partner = |name: &str| {
        CONFUSABLE.iter().find_map(|&(a, b)| {
            if a == name {
                Some(b)
            } else if b == name {
                Some(a)
            } else {
                None
            }
        })
    };
    classes
        .iter()
        .map(|c| {
            let p = partner(c);
            classes
                .iter()
                .map(|k| {
                    if k == c {
                        5.0
                    } else if Some(k.as_str()) == p {
                        3.0
                    } else {
                        1.0
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HouseSpec {
    pub rooms: usize,
    pub objects: usize,
    /// Meters per cell.
    pub resolution: f64,
    /// Nominal interior width of a room, in cells.
    pub room_cells: usize,
}

impl Default for HouseSpec {
    fn default() -> Self {
        HouseSpec {
            rooms: 6,
            objects: 40,
            resolution: 0.25,
            room_cells: 14,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: i32,
    y0: i32,
    x1: i32,
    y1: i32,
}

impl Rect {
    fn w(&self) -> i32 {
        self.x1 - self.x0 + 1
    }
    fn h(&self) -> i32 {
        self.y1 - self.y0 + 1
    }
    fn area(&self) -> i32 {
        self.w() * self.h()
    }
}

#[derive(Debug, Clone, Copy)]
struct Split {
    vertical: bool,
    line: i32,
    from: i32,
    to: i32,
}

const MIN_SIDE: i32 = 3;

pub fn generate_house(seed: u64, spec: &HouseSpec) -> Result<Environment> {
    if spec.rooms == 0 {
        return Err(Error::InvalidConfig("a house needs at least one room".into()));
    }
    if spec.room_cells < MIN_SIDE as usize {
        return Err(Error::InvalidConfig(format!("room_cells must be >= {MIN_SIDE}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (spec.rooms as f64).sqrt().ceil() as usize;
    let rows = spec.rooms.div_ceil(cols);
    let width = cols * (spec.room_cells + 1) + 1;
    let height = rows * (spec.room_cells + 1) + 1;

    let mut leaves = vec![Rect {
        x0: 1,
        y0: 1,
        x1: width as i32 - 2,
        y1: height as i32 - 2,
    }];
    let mut splits = Vec::new();
    while leaves.len() < spec.rooms {
        let mut order: Vec<usize> = (0..leaves.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(leaves[i].area()));
        let Some((i, vertical)) = order.into_iter().find_map(|i| {
            let r = leaves[i];
            let can_v = r.w() > 2 * MIN_SIDE;
            let can_h = r.h() > 2 * MIN_SIDE;
            match (can_v, can_h) {
                (true, true) => Some((i, r.w() >= r.h())),
                (true, false) => Some((i, true)),
                (false, true) => Some((i, false)),
                _ => None,
            }
        }) else {
            return Err(Error::InvalidConfig(format!(
                "cannot fit {} rooms at room_cells = {}",
                spec.rooms, spec.room_cells
            )));
        };
        let r = leaves.swap_remove(i);
        let (lo, hi) = if vertical { (r.x0, r.x1) } else { (r.y0, r.y1) };
        let span = hi - lo + 1;
        let min_line = lo + MIN_SIDE.max(span * 3 / 10);
        let max_line = hi - MIN_SIDE.max(span * 3 / 10);
        let line = if min_line <= max_line {
            rng.random_range(min_line..=max_line)
        } else {
            lo + span / 2
        };
        if vertical {
            leaves.push(Rect { x1: line - 1, ..r });
            leaves.push(Rect { x0: line + 1, ..r });
            splits.push(Split {
                vertical,
                line,
                from: r.y0,
                to: r.y1,
            });
        } else {
            leaves.push(Rect { y1: line - 1, ..r });
            leaves.push(Rect { y0: line + 1, ..r });
            splits.push(Split {
                vertical,
                line,
                from: r.x0,
                to: r.x1,
            });
        }
    }
    // stable room numbering: bottom-to-top, left-to-right
    leaves.sort_by_key(|r| (r.y0, r.x0));

    let mut map = GridMap::new(width, height, spec.resolution, CellState::Occupied)?;
    let mut rooms = RoomLabels::unlabeled(width, height);
    for (k, r) in leaves.iter().enumerate() {
        for y in r.y0..=r.y1 {
            for x in r.x0..=r.x1 {
                let c = Cell::new(x, y);
                map.set(c, CellState::Free);
                rooms.set(c, Some(RoomId(k as u32)));
            }
        }
    }

    let mut doors = BTreeSet::new();
    for s in &splits {
        let side = |t: i32| -> (Cell, Cell, Cell) {
            if s.vertical {
                (Cell::new(s.line, t), Cell::new(s.line - 1, t), Cell::new(s.line + 1, t))
            } else {
                (Cell::new(t, s.line), Cell::new(t, s.line - 1), Cell::new(t, s.line + 1))
            }
        };
        let ok = |t: i32| {
            let (_, a, b) = side(t);
            map.is_free(a) && map.is_free(b) && !doors.contains(&a) && !doors.contains(&b)
        };
        let candidates: Vec<i32> = (s.from..=s.to).filter(|&t| ok(t)).collect();
        if candidates.is_empty() {
            return Err(Error::Validation("no doorway position on a split wall".into()));
        }
        let wide: Vec<i32> = candidates
            .iter()
            .copied()
            .filter(|t| candidates.contains(&(t + 1)))
            .collect();
        let (t, two) = if wide.is_empty() {
            (candidates[rng.random_range(0..candidates.len())], false)
        } else {
            (wide[rng.random_range(0..wide.len())], true)
        };
        for t in [Some(t), two.then_some(t + 1)].into_iter().flatten() {
            let (door, a, _) = side(t);
            map.set(door, CellState::Free);
            rooms.set(door, rooms.get(a));
            doors.insert(door);
        }
    }

    // room categories
    let n = leaves.len();
    let mut kinds: Vec<&str> = Vec::with_capacity(n);
    for k in ROOM_KINDS.iter().take(n) {
        kinds.push(k);
    }
    let extra = [("bedroom", 3.0), ("bathroom", 2.0), ("living", 1.0), ("kitchen", 1.0)];
    let total_w: f64 = extra.iter().map(|e| e.1).sum();
    while kinds.len() < n {
        let mut u = rng.random::<f64>() * total_w;
        let mut pick = extra[0].0;
        for &(k, w) in &extra {
            if u < w {
                pick = k;
                break;
            }
            u -= w;
        }
        kinds.push(pick);
    }
    kinds.shuffle(&mut rng);
    let room_kinds: BTreeMap<RoomId, String> = kinds
        .iter()
        .enumerate()
        .map(|(k, kind)| (RoomId(k as u32), kind.to_string()))
        .collect();

    // objects: anchors first, then category-weighted draws
    let class_set: Vec<String> = HOUSE_CLASSES.iter().map(|s| s.to_string()).collect();
    let class_of = |name: &str| HOUSE_CLASSES.iter().position(|c| *c == name).expect("known class");
    let near_door = |c: Cell| c.neighbors8().any(|m| doors.contains(&m));
    let mut free_by_room: Vec<Vec<Cell>> = leaves
        .iter()
        .map(|r| {
            let mut v: Vec<Cell> = (r.y0..=r.y1)
                .flat_map(|y| (r.x0..=r.x1).map(move |x| Cell::new(x, y)))
                .filter(|&c| !near_door(c))
                .collect();
            v.shuffle(&mut rng);
            v
        })
        .collect();

    let mut placements: Vec<(usize, usize)> = Vec::new(); // (room, class)
    for (room, kind) in kinds.iter().enumerate() {
        for a in anchors(kind) {
            placements.push((room, class_of(a)));
        }
    }
    placements.truncate(spec.objects);
    let areas: Vec<f64> = leaves.iter().map(|r| f64::from(r.area())).collect();
    let area_total: f64 = areas.iter().sum();
    while placements.len() < spec.objects {
        let mut u = rng.random::<f64>() * area_total;
        let mut room = n - 1;
        for (k, a) in areas.iter().enumerate() {
            if u < *a {
                room = k;
                break;
            }
            u -= a;
        }
        let weights = kind_weights(kinds[room]);
        let wt: f64 = weights.iter().map(|w| w.1).sum();
        let mut u = rng.random::<f64>() * wt;
        let mut class = weights[0].0;
        for &(c, w) in weights {
            if u < w {
                class = c;
                break;
            }
            u -= w;
        }
        placements.push((room, class_of(class)));
    }
    let towel = class_of("towel");
    let has_bath_towel = placements.iter().any(|&(r, c)| c == towel && kinds[r] == "bathroom");
    if !has_bath_towel && !placements.is_empty() {
        let bath = kinds.iter().position(|k| *k == "bathroom");
        let slot = placements
            .iter()
            .rposition(|&(r, c)| Some(r) == bath && !anchors(kinds[r]).contains(&HOUSE_CLASSES[c]))
            .unwrap_or(placements.len() - 1);
        placements[slot] = (bath.unwrap_or(placements[slot].0), towel);
    }

    // keep objects one cell apart while there is space for it
    let mut taken: BTreeSet<Cell> = BTreeSet::new();
    let take = |pool: &mut Vec<Cell>, taken: &BTreeSet<Cell>| -> Option<Cell> {
        let spaced = pool.iter().rposition(|c| !c.neighbors8().any(|m| taken.contains(&m)));
        match spaced {
            Some(i) => Some(pool.remove(i)),
            None => pool.pop(),
        }
    };
    let mut objects = Vec::with_capacity(placements.len());
    for (k, &(room, class)) in placements.iter().enumerate() {
        let cell = match take(&mut free_by_room[room], &taken) {
            Some(c) => c,
            None => {
                // room is full: use the emptiest other room
                let other = (0..n)
                    .max_by_key(|&r| free_by_room[r].len())
                    .expect("at least one room");
                take(&mut free_by_room[other], &taken)
                    .ok_or_else(|| Error::InvalidConfig(format!("house too small for {} objects", spec.objects)))?
            }
        };
        taken.insert(cell);
        objects.push(GroundTruthObject {
            id: TruthId(k as u32),
            position: map.center(cell),
            class,
            room: rooms.get(cell),
        });
    }

    Ok(Environment {
        map,
        rooms,
        objects,
        class_set,
        room_kinds,
    })
}
