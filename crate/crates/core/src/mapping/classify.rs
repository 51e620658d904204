//! Recursive Bayes update of an object's class distribution under a
//! Dirichlet model of detector confidence vectors.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Confidence components are clamped into this band before evaluating the
/// density, since detectors emit exact zeros where the density degenerates.
pub const CONFIDENCE_FLOOR: f64 = 1e-6;

/// The agent's model of the detector: one Dirichlet per true class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    alphas: Vec<Vec<f64>>,
}

impl DetectorModel {
    pub fn new(alphas: Vec<Vec<f64>>) -> Result<Self> {
        let n = alphas.len();
        if n == 0 || alphas.iter().any(|a| a.len() != n) {
            return Err(Error::InvalidConfig(
                "detector model needs one alpha vector per class, each of length |classes|".into(),
            ));
        }
        if alphas.iter().flatten().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidConfig("detector alphas must be strictly positive".into()));
        }
        Ok(DetectorModel { alphas })
    }

    pub fn num_classes(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[Vec<f64>] {
        &self.alphas
    }

    /// `ln Dir(L; alpha_c)` for each class `c`.
    pub fn log_likelihoods(&self, confidence: &[f64]) -> Vec<f64> {
        let l = clamp_confidence(confidence);
        let logs: Vec<f64> = l.iter().map(|v| v.ln()).collect();
        self.alphas
            .iter()
            .map(|alpha| {
                let total: f64 = alpha.iter().sum();
                let norm = ln_gamma(total) - alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>();
                norm + alpha.iter().zip(&logs).map(|(&a, &lg)| (a - 1.0) * lg).sum::<f64>()
            })
            .collect()
    }
}

fn clamp_confidence(l: &[f64]) -> Vec<f64> {
    let clamped: Vec<f64> = l
        .iter()
        .map(|&v| {
            if v.is_nan() {
                CONFIDENCE_FLOOR
            } else {
                v.clamp(CONFIDENCE_FLOOR, 1.0 - CONFIDENCE_FLOOR)
            }
        })
        .collect();
    let total: f64 = clamped.iter().sum();
    clamped.into_iter().map(|v| v / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassUpdate {
    pub dist: Vec<f64>,
    /// Set when every class had zero posterior mass; `dist` is then the prior.
    pub degenerate: bool,
}

/// `posterior(c) ∝ Dir(L; α_c) · prior(c)`, evaluated in log space.
pub fn update_class(prior: &[f64], confidence: &[f64], model: &DetectorModel) -> Result<ClassUpdate> {
    let n = model.num_classes();
    if prior.len() != n || confidence.len() != n {
        return Err(Error::Validation(format!(
            "class vectors must have length {n} (prior {}, confidence {})",
            prior.len(),
            confidence.len()
        )));
    }
    let log_post: Vec<f64> = model
        .log_likelihoods(confidence)
        .into_iter()
        .zip(prior)
        .map(|(ll, &p)| if p > 0.0 { ll + p.ln() } else { f64::NEG_INFINITY })
        .collect();
    let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Ok(ClassUpdate {
            dist: prior.to_vec(),
            degenerate: true,
        });
    }
    let unnorm: Vec<f64> = log_post.iter().map(|&lp| (lp - max).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    Ok(ClassUpdate {
        dist: unnorm.into_iter().map(|v| v / total).collect(),
        degenerate: false,
    })
}

pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}
