use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::paths::shortest_path;
use crate::gauss::sym_eigenvalues;
use crate::geometry::{compute_visibility, RayMode};
use crate::grid::{Cell, Point};
use crate::mapping::{ObjectId, ObjectMap};
use crate::world::{Environment, TruthId};

/// Mapping quality at one instant, over the map objects that have a
/// ground-truth match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingSample {
    pub n_objects: usize,
    /// Meters.
    pub mean_err: f64,
    pub median_err: f64,
    pub cross_entropy: f64,
    pub class_entropy: f64,
    pub a_opt: f64,
    pub d_opt: f64,
    pub e_opt: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// `-log p` with `p` floored at the smallest normal double.
fn neg_log(p: f64) -> f64 {
    -p.max(f64::MIN_POSITIVE).ln()
}

/// Position error, class cross-entropy and entropy, and covariance
/// optimality criteria, averaged over matched objects. `None` when nothing
/// is matched.
pub fn mapping_metrics(
    map: &ObjectMap,
    env: &Environment,
    matches: &BTreeMap<ObjectId, TruthId>,
) -> Option<MappingSample> {
    let mut errors = Vec::new();
    let (mut ce, mut h, mut a, mut d, mut e) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for o in map.iter() {
        let Some(truth) = matches.get(&o.id).and_then(|t| env.object(*t)) else {
            continue;
        };
        errors.push((o.mu - truth.position).norm());
        ce += neg_log(o.class_dist.get(truth.class).copied().unwrap_or(0.0));
        h += o
            .class_dist
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum::<f64>();
        let [l0, l1] = sym_eigenvalues(&o.sigma);
        a += l0 + l1;
        d += l0 * l1;
        e += l1;
    }
    let n = errors.len();
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    let mean_err = errors.iter().sum::<f64>() / nf;
    Some(MappingSample {
        n_objects: n,
        mean_err,
        median_err: median(&mut errors),
        cross_entropy: ce / nf,
        class_entropy: h / nf,
        a_opt: a / nf,
        d_opt: d / nf,
        e_opt: e / nf,
    })
}

/// One episode as seen by the SPL metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplEpisode {
    pub success: bool,
    /// Shortest feasible length.
    pub shortest: f64,
    /// Length actually travelled.
    pub taken: f64,
}

/// Success weighted by path length, `(1/N) Σ S_i l_i / max(p_i, l_i)`.
/// A success with `l_i = 0` contributes one.
pub fn spl(episodes: &[SplEpisode]) -> f64 {
    if episodes.is_empty() {
        return 0.0;
    }
    let total: f64 = episodes.iter().map(spl_term).sum();
    total / episodes.len() as f64
}

pub fn spl_term(e: &SplEpisode) -> f64 {
    if !e.success {
        0.0
    } else if e.shortest <= 0.0 {
        1.0
    } else {
        e.shortest / e.taken.max(e.shortest)
    }
}

/// Union of the ground-truth visibility regions of every instance of `class`.
pub fn target_region(env: &Environment, class: usize, max_range: f64) -> BTreeSet<Cell> {
    env.objects_of_class(class)
        .flat_map(|o| compute_visibility(&env.map, &o.position, max_range, RayMode::Dense).cells)
        .collect()
}

/// Meters from `start` to the nearest cell that sees a target instance, on
/// the ground-truth map. `None` if no such cell is reachable.
pub fn shortest_target_distance(env: &Environment, start: &Point, class: usize, max_range: f64) -> Option<f64> {
    let from = env.map.cell_of(start)?;
    let region = target_region(env, class, max_range);
    shortest_path(&env.map, from, &region).map(|r| r.cost * env.map.resolution())
}
