use serde::{Deserialize, Serialize};

/// Permutation statistics of the particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    #[default]
    Fermion,
    Boson,
    Distinguishable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Partition,
    MeanField,
    PerturbedMeanField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub quantity: Quantity,
    pub estimate: f64,
    pub std_error: f64,
    /// Half width of the 95% interval relative to the estimate.
    pub rel_ci: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
    pub steps: usize,
    pub delta_t: f64,
    pub beta: f64,
    pub seed: u64,
    pub degenerate: u64,
    /// Set when degenerate samples exceed the tolerated rate.
    pub flagged: bool,
    pub statistics: Statistics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

impl EstimateReport {
    pub fn new(quantity: Quantity, estimate: f64, std_error: f64, rel_ci: f64) -> Self {
        let half = rel_ci * estimate.abs();
        Self {
            quantity,
            estimate,
            std_error,
            rel_ci,
            ci_low: estimate - half,
            ci_high: estimate + half,
            samples: 0,
            steps: 0,
            delta_t: 0.0,
            beta: 0.0,
            seed: 0,
            degenerate: 0,
            flagged: false,
            statistics: Statistics::Fermion,
            epsilon: None,
            notes: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    /// |estimate − reference| / |reference|.
    pub fn rel_diff(&self, reference: f64) -> f64 {
        (self.estimate - reference).abs() / reference.abs()
    }

    /// Whether `reference` lies within `k` half-widths of the 95% interval.
    pub fn within_ci(&self, reference: f64, k: f64) -> bool {
        (self.estimate - reference).abs() <= k * self.rel_ci * self.estimate.abs()
    }
}
