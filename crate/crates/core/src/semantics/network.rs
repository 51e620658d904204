//! Boolean Bayesian networks over object classes, with exact inference by
//! enumeration.
//!
//! Each node is "class present in the room". A node's table holds one row
//! per assignment of its parents, and each row is `[P(absent), P(present)]`.
//! Parents are ordered by node name. The first parent is the most significant
//! bit of the row index, so for parents `(a, b)` the rows run
//! `(¬a,¬b), (¬a,b), (a,¬b), (a,b)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BayesianNetwork {
    space_label: String,
    nodes: Vec<String>,
    /// Parent indices, sorted by parent name.
    parents: Vec<Vec<usize>>,
    /// `P(present | parent row)` per node.
    present: Vec<Vec<f64>>,
    topo: Vec<usize>,
}

/// On-disk network description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub space_label: String,
    pub nodes: Vec<String>,
    /// `[parent, child]` pairs.
    pub edges: Vec<[String; 2]>,
    pub cpts: BTreeMap<String, Vec<[f64; 2]>>,
}

impl BayesianNetwork {
    pub fn new(
        space_label: impl Into<String>,
        nodes: Vec<String>,
        edges: &[(String, String)],
        cpts: &BTreeMap<String, Vec<[f64; 2]>>,
    ) -> Result<Self> {
        let space_label = space_label.into();
        let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        if index.len() != nodes.len() {
            return Err(Error::Validation(format!("network `{space_label}` repeats a node")));
        }
        let lookup = |n: &str| index.get(n).copied().ok_or_else(|| Error::UnknownNode(n.to_string()));

        let mut parent_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes.len()];
        for (p, c) in edges {
            let (pi, ci) = (lookup(p)?, lookup(c)?);
            if pi == ci {
                return Err(Error::Cycle(space_label));
            }
            parent_sets[ci].insert(pi);
        }
        let parents: Vec<Vec<usize>> = parent_sets
            .into_iter()
            .map(|s| {
                let mut v: Vec<usize> = s.into_iter().collect();
                v.sort_by(|&a, &b| nodes[a].cmp(&nodes[b]));
                v
            })
            .collect();

        let topo = topological_order(&parents).ok_or_else(|| Error::Cycle(space_label.clone()))?;

        let mut present = Vec::with_capacity(nodes.len());
        for (i, name) in nodes.iter().enumerate() {
            let expected = 1usize << parents[i].len();
            let rows = cpts.get(name).map(Vec::as_slice).unwrap_or(&[]);
            if rows.len() != expected {
                return Err(Error::MissingCpt {
                    space: space_label.clone(),
                    node: name.clone(),
                    expected,
                    found: rows.len(),
                });
            }
            for row in rows {
                let ok = row.iter().all(|p| (0.0..=1.0).contains(p)) && (row[0] + row[1] - 1.0).abs() <= ROW_TOLERANCE;
                if !ok {
                    return Err(Error::Validation(format!(
                        "network `{space_label}`: CPT row {row:?} of `{name}` is not a distribution"
                    )));
                }
            }
            present.push(rows.iter().map(|r| r[1]).collect());
        }
        if let Some(extra) = cpts.keys().find(|k| !index.contains_key(k.as_str())) {
            return Err(Error::UnknownNode(extra.clone()));
        }

        Ok(BayesianNetwork {
            space_label,
            nodes,
            parents,
            present,
            topo,
        })
    }

    pub fn from_file(file: &NetworkFile) -> Result<Self> {
        let edges: Vec<(String, String)> = file.edges.iter().map(|[p, c]| (p.clone(), c.clone())).collect();
        Self::new(file.space_label.clone(), file.nodes.clone(), &edges, &file.cpts)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }

    pub fn to_file(&self) -> NetworkFile {
        let mut edges = Vec::new();
        let mut cpts = BTreeMap::new();
        for (i, name) in self.nodes.iter().enumerate() {
            for &p in &self.parents[i] {
                edges.push([self.nodes[p].clone(), name.clone()]);
            }
            cpts.insert(name.clone(), self.present[i].iter().map(|&p| [1.0 - p, p]).collect());
        }
        NetworkFile {
            space_label: self.space_label.clone(),
            nodes: self.nodes.clone(),
            edges,
            cpts,
        }
    }

    pub fn space_label(&self) -> &str {
        &self.space_label
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn contains(&self, node: &str) -> bool {
        self.nodes.iter().any(|n| n == node)
    }

    pub fn node_index(&self, node: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == node)
    }

    /// Parent names of a node, in row-index order.
    pub fn parents_of(&self, node: &str) -> Option<Vec<&str>> {
        let i = self.node_index(node)?;
        Some(self.parents[i].iter().map(|&p| self.nodes[p].as_str()).collect())
    }

    /// `P(node = value | parents as in assignment)`.
    pub fn conditional(&self, node: usize, value: bool, assignment: &[bool]) -> f64 {
        let row = self.parents[node]
            .iter()
            .fold(0usize, |acc, &p| (acc << 1) | usize::from(assignment[p]));
        let p = self.present[node][row];
        if value {
            p
        } else {
            1.0 - p
        }
    }

    /// `P(target present | every evidence node present)`, exact.
    pub fn query(&self, target: &str, evidence: &[&str]) -> Result<f64> {
        let t = self
            .node_index(target)
            .ok_or_else(|| Error::UnknownNode(target.to_string()))?;
        let mut fixed: Vec<Option<bool>> = vec![None; self.nodes.len()];
        for e in evidence {
            let i = self.node_index(e).ok_or_else(|| Error::UnknownNode(e.to_string()))?;
            fixed[i] = Some(true);
        }
        let mut assignment = vec![false; self.nodes.len()];
        let p_evidence = self.enumerate(0, &fixed, &mut assignment);
        if !(p_evidence > 0.0) {
            return Err(Error::ZeroProbabilityEvidence);
        }
        if fixed[t] == Some(true) {
            return Ok(1.0);
        }
        fixed[t] = Some(true);
        let p_joint = self.enumerate(0, &fixed, &mut assignment);
        Ok((p_joint / p_evidence).clamp(0.0, 1.0))
    }

    /// Sum over the unfixed variables from position `k` of the topological
    /// order onward, given the values already placed in `assignment`.
    fn enumerate(&self, k: usize, fixed: &[Option<bool>], assignment: &mut [bool]) -> f64 {
        let Some(&v) = self.topo.get(k) else {
            return 1.0;
        };
        match fixed[v] {
            Some(value) => {
                assignment[v] = value;
                let p = self.conditional(v, value, assignment);
                if p == 0.0 {
                    0.0
                } else {
                    p * self.enumerate(k + 1, fixed, assignment)
                }
            }
            None => [false, true]
                .into_iter()
                .map(|value| {
                    assignment[v] = value;
                    let p = self.conditional(v, value, assignment);
                    if p == 0.0 {
                        0.0
                    } else {
                        p * self.enumerate(k + 1, fixed, assignment)
                    }
                })
                .sum(),
        }
    }
}

/// Kahn's algorithm; `None` when the graph has a cycle.
fn topological_order(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(c);
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).rev().collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    (order.len() == n).then_some(order)
}
