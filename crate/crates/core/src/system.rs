use crate::determinant::spin_groups;
use crate::error::{Error, Result};
use crate::paths::{check_dim, ImportanceDensity};
use crate::potentials::PotentialSpec;
use serde::{Deserialize, Serialize};

/// Particle count, dimension, potential and optional per-particle spins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct System {
    pub n: usize,
    pub d: usize,
    pub potential: PotentialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spins: Option<Vec<f64>>,
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

impl System {
    pub fn new(n: usize, d: usize, potential: PotentialSpec) -> Self {
        Self { n, d, potential, spins: None }
    }

    pub fn with_spins(mut self, spins: Vec<f64>) -> Self {
        self.spins = Some(spins);
        self
    }

    pub fn dn(&self) -> usize {
        self.d * self.n
    }

    /// Checks everything except the separability needed by spin-split determinants.
    pub fn validate_shape(&self) -> Result<()> {
        check_dim(self.d)?;
        if self.n == 0 {
            return Err(Error::Config("need at least one particle".into()));
        }
        self.potential.validate()?;
        if let Some(spins) = &self.spins {
            spin_groups(spins, self.n)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if self.spins.is_some() {
            if !self.potential.is_separable() {
                return Err(Error::Unsupported(
                    "spin-split determinants need a particle-wise separable potential (no pair interaction)".into(),
                ));
            }
        }
        Ok(())
    }

    /// log n!, or log n₊!·n₋! with spins.
    pub fn log_combinatorial(&self) -> f64 {
        match &self.spins {
            Some(s) => match spin_groups(s, self.n) {
                Ok((up, down)) => ln_factorial(up.len()) + ln_factorial(down.len()),
                Err(_) => f64::NAN,
            },
            None => ln_factorial(self.n),
        }
    }

    /// log of (2πβ)^{−dn/2}.
    pub fn log_free_normalization(&self, beta: f64) -> f64 {
        -0.5 * self.dn() as f64 * (2.0 * std::f64::consts::PI * beta).ln()
    }

    pub fn density(&self, beta: f64) -> ImportanceDensity {
        ImportanceDensity::new(beta, self.dn())
    }
}
