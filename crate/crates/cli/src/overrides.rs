//! Parameter overrides loaded from `--params-file` JSON.

use matchest::edcs::ParamMode;
use matchest::estimate::{BeyondConfig, EstimateMode, TwoThirdsConfig};
use matchest::{Error, Result};
use serde::Deserialize;

/// Flat optional-field overrides applied on top of the defaults. Unknown
/// fields are rejected so typos surface instead of silently doing nothing.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    /// Start from the formula-driven parameter set instead of the
    /// desk-scale defaults.
    pub asymptotic: Option<bool>,
    pub epsilon: Option<f64>,
    pub r: Option<usize>,
    // Subgraph engine.
    pub beta: Option<usize>,
    pub lambda: Option<f64>,
    pub delta: Option<usize>,
    pub max_epochs: Option<usize>,
    // Local oracle.
    pub degree_samples: Option<usize>,
    pub degree_cutoff: Option<f64>,
    pub phases: Option<usize>,
    // Beyond estimator.
    pub gamma: Option<f64>,
    pub outer_iterations: Option<usize>,
    pub case_threshold: Option<f64>,
    pub kappa: Option<usize>,
    pub pair_delta: Option<usize>,
    pub k_buckets: Option<usize>,
    pub r1: Option<usize>,
    pub r2: Option<usize>,
    pub r3: Option<usize>,
}

impl ParamOverrides {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("params file: {e}")))
    }

    pub fn epsilon_or(&self, default: f64) -> f64 {
        self.epsilon.unwrap_or(default)
    }

    pub fn two_thirds_config(&self, n: usize, mode: EstimateMode, seed: u64) -> TwoThirdsConfig {
        let epsilon = self.epsilon_or(0.1);
        let mut cfg = if self.asymptotic.unwrap_or(false) {
            TwoThirdsConfig::asymptotic(n, epsilon, seed)
        } else {
            TwoThirdsConfig::practical(n, epsilon, seed)
        };
        cfg.mode = mode;
        if let Some(r) = self.r {
            cfg.r = r;
        }
        if let Some(b) = self.beta {
            cfg.edcs.beta = b;
        }
        if let Some(l) = self.lambda {
            cfg.edcs.lambda = l;
        }
        if let Some(d) = self.delta {
            cfg.edcs.delta = d;
        }
        if let Some(t) = self.max_epochs {
            cfg.edcs.max_epochs = t;
        }
        if self.beta.is_some() || self.lambda.is_some() || self.delta.is_some() {
            cfg.edcs.mode = ParamMode::Practical;
        }
        if let Some(k) = self.degree_samples {
            cfg.lca.degree_sample_count = k;
        }
        if let Some(c) = self.degree_cutoff {
            cfg.lca.degree_cutoff = c;
        }
        if let Some(p) = self.phases {
            cfg.lca.phase_count = p;
        }
        cfg
    }

    pub fn beyond_config(&self, n: usize, mode: EstimateMode, seed: u64) -> BeyondConfig {
        let epsilon = self.epsilon_or(0.1);
        let gamma = self.gamma.unwrap_or(0.5);
        let mut cfg = if self.asymptotic.unwrap_or(false) {
            BeyondConfig::asymptotic(n, epsilon, gamma, seed)
        } else {
            BeyondConfig::practical(n, epsilon, gamma, seed)
        };
        cfg.mode = mode;
        cfg.alg1 = self.two_thirds_config(n, mode, cfg.alg1.seed);
        if let Some(t) = self.outer_iterations {
            cfg.outer_iterations = t;
        }
        if let Some(c) = self.case_threshold {
            cfg.case_threshold = c;
        }
        if let Some(k) = self.kappa {
            cfg.kappa = k;
        }
        if let Some(d) = self.pair_delta {
            cfg.delta = d;
        }
        if let Some(k) = self.k_buckets {
            cfg.k_buckets = k;
        }
        if let Some(r) = self.r1 {
            cfg.r1 = r;
        }
        if let Some(r) = self.r2 {
            cfg.r2 = r;
        }
        if let Some(r) = self.r3 {
            cfg.r3 = r;
        }
        cfg
    }
}
