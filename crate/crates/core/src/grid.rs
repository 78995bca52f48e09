//! Uniform time grid on the unit interval.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    steps: usize,
}

impl TimeGrid {
    pub fn new(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Config("time grid needs at least one step".into()));
        }
        Ok(Self { steps })
    }

    /// Grid whose physical step β/M is as close as possible to `dt`.
    pub fn from_dt(beta: f64, dt: f64) -> Result<Self> {
        if !(beta > 0.0 && dt > 0.0) || !beta.is_finite() || !dt.is_finite() {
            return Err(Error::Config(format!("need beta > 0 and dt > 0, got beta={beta}, dt={dt}")));
        }
        let m = (beta / dt).round().max(1.0);
        Self::new(m as usize)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn nodes(&self) -> usize {
        self.steps + 1
    }

    pub fn delta_s(&self) -> f64 {
        1.0 / self.steps as f64
    }

    pub fn dt(&self, beta: f64) -> f64 {
        beta / self.steps as f64
    }

    pub fn node(&self, m: usize) -> f64 {
        if m >= self.steps {
            1.0
        } else {
            m as f64 * self.delta_s()
        }
    }

    pub fn node_values(&self) -> Vec<f64> {
        (0..=self.steps).map(|m| self.node(m)).collect()
    }

    /// Trapezoid weights: half weight at both ends.
    pub fn weights(&self) -> Vec<f64> {
        let ds = self.delta_s();
        let mut w = vec![ds; self.nodes()];
        w[0] = 0.5 * ds;
        w[self.steps] = 0.5 * ds;
        w
    }

    /// Grid with `factor` times as many steps sharing every node of `self`.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        Self::new(self.steps * factor)
    }
}
