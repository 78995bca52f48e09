//! Ratio-estimator statistics: the regularized denominator, delta-method
//! confidence intervals, moment summaries and replica diagnostics.

use crate::accumulator::{Moments, PairAccumulator};
use crate::error::{Error, Result};
use crate::report::{EstimateReport, Quantity};
use crate::rng::replica_seed;
use serde::{Deserialize, Serialize};

pub const Z95: f64 = 1.96;

/// Smoothed ramp: 0 below −ε, cubic blends on (−ε, ε), identity above ε.
pub fn g_ramp(z: f64, eps: f64) -> f64 {
    if z <= -eps {
        0.0
    } else if z <= 0.0 {
        let t = z + eps;
        t * t * t / (6.0 * eps * eps)
    } else if z < eps {
        let t = eps - z;
        t * t * t / (6.0 * eps * eps) + z
    } else {
        z
    }
}

/// ε + g(z − ε); exactly z once z ≥ 2ε.
pub fn g_epsilon(z: f64, eps: f64) -> f64 {
    if z >= 2.0 * eps {
        z
    } else {
        eps + g_ramp(z - eps, eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizedRatio {
    pub epsilon: f64,
}

impl RegularizedRatio {
    /// ε = fraction·|b̄| from a pilot mean.
    pub fn from_pilot(pilot_mean_b: f64, fraction: f64) -> Self {
        Self { epsilon: fraction * pilot_mean_b.abs() }
    }

    pub fn apply(&self, b: f64) -> f64 {
        if self.epsilon > 0.0 {
            g_epsilon(b, self.epsilon)
        } else {
            b
        }
    }
}

pub const DEFAULT_EPS_FRACTION: f64 = 0.25;

/// Pilot batch size for choosing ε.
pub fn pilot_size(m_x: u64) -> u64 {
    (m_x / 16).clamp(2, 4096)
}

/// h = ā / g_ε(b̄) with the delta-method interval
/// σ̂_h² = σ̂_a²/ā² + σ̂_b²/b̄² − 2σ̂_ab/(ā b̄).
pub fn ratio_with_ci(acc: &PairAccumulator, reg: Option<RegularizedRatio>) -> Result<EstimateReport> {
    let n = acc.count();
    if n < 2 {
        return Err(Error::EstimationFailed(format!("need at least two samples, got {n}")));
    }
    let (a, b) = (acc.mean_a(), acc.mean_b());
    let denom = reg.map_or(b, |r| r.apply(b));
    let estimate = a / denom;
    let mut var_h = acc.var_a() / (a * a) + acc.var_b() / (b * b) - 2.0 * acc.cov_ab() / (a * b);
    let mut notes = Vec::new();
    if var_h.is_nan() {
        return Err(Error::Numeric("ratio variance is not a number".into()));
    }
    if var_h < 0.0 {
        notes.push(format!("negative ratio variance {var_h:e} clamped to zero"));
        var_h = 0.0;
    }
    let sigma_h = var_h.sqrt();
    let rel = Z95 * sigma_h / (n as f64).sqrt();
    let mut rep = EstimateReport::new(Quantity::MeanField, estimate, estimate.abs() * sigma_h / (n as f64).sqrt(), rel);
    rep.ci_low = (a / b) * (1.0 - rel);
    rep.ci_high = (a / b) * (1.0 + rel);
    if rep.ci_low > rep.ci_high {
        std::mem::swap(&mut rep.ci_low, &mut rep.ci_high);
    }
    if denom != b {
        notes.push(format!("denominator regularized: mean {b:e} -> {denom:e}"));
    }
    rep.samples = n;
    rep.degenerate = acc.degenerate;
    rep.epsilon = reg.map(|r| r.epsilon);
    rep.notes = notes;
    Ok(rep)
}

/// Central-moment summary of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub count: u64,
    pub mean: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl From<&Moments> for MomentSummary {
    fn from(m: &Moments) -> Self {
        Self {
            count: m.count as u64,
            mean: m.mean,
            mu2: m.central(2),
            mu3: m.central(3),
            mu4: m.central(4),
            skewness: m.skewness(),
            excess_kurtosis: m.excess_kurtosis(),
        }
    }
}

/// M1 replicas of M2 samples each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicaPlan {
    pub m1: u64,
    pub m2: u64,
}

impl ReplicaPlan {
    pub fn total(&self) -> u64 {
        self.m1 * self.m2
    }

    pub fn validate(&self) -> Result<()> {
        if self.m1 < 30 {
            return Err(Error::Config(format!("need at least 30 replicas for a normality fit, got {}", self.m1)));
        }
        if self.m2 < 2 {
            return Err(Error::Config("need at least two samples per replica".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaSummary {
    pub plan: ReplicaPlan,
    pub seeds: Vec<u64>,
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub negatives: usize,
    /// Replica values multiplied by the caller's scale factor.
    pub scaled: Vec<f64>,
}

/// Runs `runner(replica_seed, m2)` for each replica and summarizes the spread.
pub fn replica_diagnostics<F>(plan: ReplicaPlan, seed: u64, scale: f64, runner: F) -> Result<ReplicaSummary>
where
    F: Fn(u64, u64) -> Result<f64>,
{
    plan.validate()?;
    let seeds: Vec<u64> = (0..plan.m1).map(|r| replica_seed(seed, r)).collect();
    let values = seeds.iter().map(|&s| runner(s, plan.m2)).collect::<Result<Vec<f64>>>()?;
    let m = Moments::from_slice(&values);
    let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
    Ok(ReplicaSummary {
        plan,
        negatives: scaled.iter().filter(|v| **v < 0.0).count(),
        mean: m.mean,
        std: m.variance().sqrt(),
        skewness: m.skewness(),
        excess_kurtosis: m.excess_kurtosis(),
        seeds,
        values,
        scaled,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub fitted_mean: f64,
    pub fitted_std: f64,
}

impl Histogram {
    pub fn build(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() || bins == 0 {
            return Err(Error::Config("histogram needs values and at least one bin".into()));
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for v in values {
            let i = (((v - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        let m = Moments::from_slice(values);
        Ok(Self { edges, counts, fitted_mean: m.mean, fitted_std: m.variance().sqrt() })
    }

    /// Normal density with the fitted parameters.
    pub fn fitted_density(&self, x: f64) -> f64 {
        let s = self.fitted_std;
        (-(x - self.fitted_mean).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    }

    /// Rows of (bin_lo, bin_hi, count, fitted_mean, fitted_std).
    pub fn csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count,fitted_mean,fitted_std\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{},{},{},{}\n", self.edges[i], self.edges[i + 1], c, self.fitted_mean, self.fitted_std));
        }
        out
    }
}
