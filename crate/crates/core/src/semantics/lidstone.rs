use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::Environment;

/// Room-level co-occurrence statistics over a class set.
///
/// `pairs[i][j]` is N(c_i, c_j), the number of times c_i was seen in a room
/// where c_j was seen; `singles[j]` is N(c_j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceCounts {
    pub classes: Vec<String>,
    pub pairs: Vec<Vec<u64>>,
    pub singles: Vec<u64>,
}

impl CooccurrenceCounts {
    pub fn new(classes: Vec<String>, pairs: Vec<Vec<u64>>, singles: Vec<u64>) -> Result<Self> {
        let n = classes.len();
        if singles.len() != n || pairs.len() != n || pairs.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!(
                "co-occurrence tables must be {n}x{n} with {n} class counts"
            )));
        }
        for (i, row) in pairs.iter().enumerate() {
            for (j, &nij) in row.iter().enumerate() {
                if nij > singles[j] {
                    return Err(Error::Validation(format!(
                        "N({}, {}) = {nij} exceeds N({}) = {}",
                        classes[i], classes[j], classes[j], singles[j]
                    )));
                }
            }
        }
        Ok(CooccurrenceCounts {
            classes,
            pairs,
            singles,
        })
    }

    pub fn empty(classes: Vec<String>) -> Self {
        let n = classes.len();
        CooccurrenceCounts {
            classes,
            pairs: vec![vec![0; n]; n],
            singles: vec![0; n],
        }
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    /// Counts class presence per room: every room containing `c_j` adds one
    /// to N(c_j), and one to N(c_i, c_j) when it also contains `c_i`.
    pub fn add_environment(&mut self, env: &Environment) {
        for room in env.rooms.rooms() {
            let mut present = vec![false; self.classes.len()];
            for o in env.objects.iter().filter(|o| o.room == Some(room)) {
                if let Some(k) = self.class_index(&env.class_set[o.class]) {
                    present[k] = true;
                }
            }
            for j in 0..present.len() {
                if !present[j] {
                    continue;
                }
                self.singles[j] += 1;
                for (i, &here) in present.iter().enumerate() {
                    if here {
                        self.pairs[i][j] += 1;
                    }
                }
            }
        }
    }
}

/// Smoothed conditional `(N(c_i, c_j) + α) / (N(c_j) + α |C|)`.
pub fn lidstone_probability(counts: &CooccurrenceCounts, ci: usize, cj: usize, alpha: f64) -> Result<f64> {
    let n = counts.classes.len();
    if ci >= n || cj >= n {
        return Err(Error::UnknownNode(format!("class index {}", ci.max(cj))));
    }
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "smoothing alpha must be >= 0, got {alpha}"
        )));
    }
    let denom = counts.singles[cj] as f64 + alpha * n as f64;
    if denom == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok((counts.pairs[ci][cj] as f64 + alpha) / denom)
}
