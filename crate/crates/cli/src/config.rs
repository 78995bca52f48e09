//! Run configuration files: TOML by default, JSON when the path ends in `.json`.

use crate::error::{CliError, CliResult};
use bbdet_core::{PerturbationConfig, PotentialSpec, ReplicaPlan, Statistics, System, TimeGrid};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ExactHo,
    EstimateZ,
    #[default]
    EstimateH,
    Tensor,
    Perturb,
    Replicas,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::ExactHo => "exact-ho",
            Experiment::EstimateZ => "estimate-z",
            Experiment::EstimateH => "estimate-h",
            Experiment::Tensor => "tensor",
            Experiment::Perturb => "perturb",
            Experiment::Replicas => "replicas",
        }
    }
}

fn default_seed() -> u64 {
    1
}

fn default_samples() -> u64 {
    1 << 16
}

fn default_d() -> usize {
    3
}

/// One experiment. Exactly one of `delta_t`/`steps` may be omitted; when both
/// are given they must satisfy `delta_t * steps = beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub experiment: Experiment,
    pub n: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub statistics: Statistics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spins: Option<Vec<f64>>,
    /// Known value to compare against; V1 runs fill it from the exact oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub potential: PotentialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<ReplicaPlan>,
}

impl RunConfig {
    pub fn new(experiment: Experiment, n: usize, d: usize, beta: f64, potential: PotentialSpec) -> Self {
        Self {
            experiment,
            n,
            d,
            beta,
            delta_t: Some(0.025),
            steps: None,
            samples: default_samples(),
            seed: default_seed(),
            statistics: Statistics::Fermion,
            spins: None,
            reference: None,
            workers: None,
            output: None,
            potential,
            perturbation: None,
            replicas: None,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.delta_t = Some(dt);
        self.steps = None;
        self
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_reference(mut self, reference: f64) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn grid(&self) -> CliResult<TimeGrid> {
        let bad = |msg: String| Err(CliError::Invalid(msg));
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        match (self.delta_t, self.steps) {
            (None, None) => bad("set delta_t or steps".into()),
            (None, Some(m)) => Ok(TimeGrid::new(m)?),
            (Some(dt), steps) => {
                let grid = TimeGrid::from_dt(self.beta, dt)?;
                let m = steps.unwrap_or(grid.steps());
                if (dt * m as f64 - self.beta).abs() > 1e-9 * self.beta {
                    return bad(format!("delta_t = {dt} and steps = {m} do not multiply to beta = {}", self.beta));
                }
                Ok(TimeGrid::new(m)?)
            }
        }
    }

    pub fn system(&self) -> System {
        let s = System::new(self.n, self.d, self.potential.clone());
        match &self.spins {
            Some(sp) => s.with_spins(sp.clone()),
            None => s,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        self.grid()?;
        self.system().validate_shape()?;
        if self.samples < 2 && self.experiment != Experiment::ExactHo {
            return Err(CliError::Invalid("samples must be at least 2".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Invalid("workers must be at least 1".into()));
        }
        if let Some(p) = &self.perturbation {
            p.validate(self.beta)?;
        }
        if let Some(r) = &self.replicas {
            r.validate()?;
        }
        Ok(())
    }

    /// V1 runs can be checked against the recursion oracle.
    pub fn is_plain_harmonic(&self) -> bool {
        self.potential == PotentialSpec::harmonic() && self.spins.is_none()
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Invalid(format!("cannot write TOML: {e}")))
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse { path: "<toml>".into(), message: e.to_string() })
    }

    pub fn from_json_str(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse { path: "<json>".into(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|message| CliError::Parse { path: path.display().to_string(), message })
    }
}
