//! Hand-set networks for common household spaces, and a builder that
//! estimates single-parent tables from co-occurrence counts.

use std::collections::BTreeMap;

use super::lidstone::{lidstone_probability, CooccurrenceCounts};
use super::network::BayesianNetwork;
use crate::error::{Error, Result};

const BUILTIN: [&str; 4] = [
    include_str!("../../data/networks/bathroom.json"),
    include_str!("../../data/networks/kitchen.json"),
    include_str!("../../data/networks/bedroom.json"),
    include_str!("../../data/networks/living.json"),
];

/// Bathroom, kitchen, bedroom and living-room networks.
pub fn builtin_networks() -> Vec<BayesianNetwork> {
    BUILTIN
        .iter()
        .map(|s| BayesianNetwork::from_json(s).expect("built-in network is valid"))
        .collect()
}

/// Structure of one semantic space to be filled from counts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpaceSpec {
    pub label: String,
    pub nodes: Vec<String>,
    /// `(parent, child)` pairs.
    pub edges: Vec<(String, String)>,
    /// `P(present)` for parentless nodes; 0.5 when not given.
    pub root_priors: BTreeMap<String, f64>,
    /// Tables for nodes with several parents, rows as in the network file.
    pub cpts: BTreeMap<String, Vec<[f64; 2]>>,
}

pub const DEFAULT_ROOT_PRIOR: f64 = 0.5;

/// Builds one network per space. A child with a single parent `p` gets
/// `P(child | p) = lidstone(child, p)`; with `p` absent it gets the
/// zero-count value `1 / |C|`. Nodes with several parents need a table in
/// the spec.
pub fn build_networks(counts: &CooccurrenceCounts, specs: &[SpaceSpec], alpha: f64) -> Result<Vec<BayesianNetwork>> {
    let absent = 1.0 / counts.classes.len().max(1) as f64;
    specs
        .iter()
        .map(|spec| {
            let mut cpts = spec.cpts.clone();
            for node in &spec.nodes {
                if cpts.contains_key(node) {
                    continue;
                }
                let parents: Vec<&String> = spec.edges.iter().filter(|(_, c)| c == node).map(|(p, _)| p).collect();
                let rows = match parents.as_slice() {
                    [] => {
                        let p = spec.root_priors.get(node).copied().unwrap_or(DEFAULT_ROOT_PRIOR);
                        vec![[1.0 - p, p]]
                    }
                    [parent] => {
                        let ci = counts
                            .class_index(node)
                            .ok_or_else(|| Error::UnknownNode(node.clone()))?;
                        let cj = counts
                            .class_index(parent)
                            .ok_or_else(|| Error::UnknownNode((*parent).clone()))?;
                        let p = lidstone_probability(counts, ci, cj, alpha)?;
                        vec![[1.0 - absent, absent], [1.0 - p, p]]
                    }
                    _ => continue,
                };
                cpts.insert(node.clone(), rows);
            }
            BayesianNetwork::new(spec.label.clone(), spec.nodes.clone(), &spec.edges, &cpts)
        })
        .collect()
}

/// Star-shaped spaces matching the house generator: each room kind's anchor
/// class is the parent of the classes that kind usually holds.
pub fn house_space_specs() -> Vec<SpaceSpec> {
    let star = |label: &str, root: &str, children: &[&str]| {
        let mut nodes = vec![root.to_string()];
        nodes.extend(children.iter().map(|c| c.to_string()));
        SpaceSpec {
            label: label.to_string(),
            nodes,
            edges: children.iter().map(|c| (root.to_string(), c.to_string())).collect(),
            ..SpaceSpec::default()
        }
    };
    vec![
        star("bathroom", "toilet", &["sink", "bathtub", "towel"]),
        star("kitchen", "stove", &["fridge", "microwave", "sink", "towel"]),
        star("bedroom", "bed", &["pillow", "wardrobe", "towel"]),
        star("living", "sofa", &["tv", "table", "chair", "pillow"]),
    ]
}
