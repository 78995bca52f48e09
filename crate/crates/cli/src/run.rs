//! Dispatch of single experiments and the manifest that records them.

use crate::config::{Experiment, RunConfig};
use crate::error::{CliError, CliResult};
use crate::table::Table;
use bbdet_core::estimators::Regularization;
use bbdet_core::oracles::{exact_ho_meanfield_with, exact_ho_partition_with};
use bbdet_core::{
    estimate_both, estimate_partition, perturbed_meanfield, replica_diagnostics, tensor_estimate, EstimateReport, PerturbationReport,
    Quantity, ReplicaPlan, ReplicaSummary, Statistics,
};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Absolute tolerance for the exact mean-field derivative.
pub const EXACT_H_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub label: String,
    pub estimate: f64,
    pub reference: f64,
    /// |estimate − reference| / |reference|.
    pub rel_diff: f64,
    pub rel_ci: f64,
}

impl Comparison {
    pub fn new(label: impl Into<String>, estimate: f64, reference: f64, rel_ci: f64) -> Self {
        Self { label: label.into(), estimate, reference, rel_diff: (estimate - reference).abs() / reference.abs(), rel_ci }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub version: String,
    pub wall_time_s: f64,
    /// Every job that contributed a row, in row order.
    pub configs: Vec<RunConfig>,
    pub comparisons: Vec<Comparison>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<EstimateReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbation: Vec<PerturbationReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replicas: Vec<ReplicaSummary>,
    /// Jobs whose estimate could not be formed; their table cells are empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
    pub table: Table,
}

impl RunManifest {
    pub fn new(preset: Option<&str>, table: Table) -> Self {
        Self {
            preset: preset.map(str::to_string),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
            configs: Vec::new(),
            comparisons: Vec::new(),
            reports: Vec::new(),
            perturbation: Vec::new(),
            replicas: Vec::new(),
            failures: Vec::new(),
            table,
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub const REPORT_COLUMNS: [&str; 12] =
    ["quantity", "beta", "n", "d", "delta_t", "M_x", "seed", "estimate", "std_error", "rel_ci", "reference", "rel_diff"];

fn quantity_name(q: Quantity) -> &'static str {
    match q {
        Quantity::Partition => "Z",
        Quantity::MeanField => "h",
        Quantity::PerturbedMeanField => "h_perturb",
    }
}

/// Exact V1 value of `quantity`, when the configuration has one.
pub fn exact_reference(cfg: &RunConfig, quantity: Quantity) -> CliResult<Option<f64>> {
    if !cfg.is_plain_harmonic() {
        return Ok(None);
    }
    Ok(Some(match quantity {
        Quantity::Partition => exact_ho_partition_with(cfg.n, cfg.beta, cfg.d, cfg.statistics)?,
        _ => exact_ho_meanfield_with(cfg.n, cfg.beta, cfg.d, EXACT_H_TOLERANCE, cfg.statistics)?,
    }))
}

fn push_report(m: &mut RunManifest, cfg: &RunConfig, rep: &EstimateReport, reference: Option<f64>) {
    let rel = reference.map(|r| rep.rel_diff(r));
    m.table.push(vec![
        quantity_name(rep.quantity).into(),
        cfg.beta.into(),
        cfg.n.into(),
        cfg.d.into(),
        rep.delta_t.into(),
        rep.samples.into(),
        rep.seed.into(),
        rep.estimate.into(),
        rep.std_error.into(),
        rep.rel_ci.into(),
        reference.into(),
        rel.into(),
    ]);
    if let Some(r) = reference {
        m.comparisons.push(Comparison::new(quantity_name(rep.quantity), rep.estimate, r, rep.rel_ci));
    }
    m.reports.push(rep.clone());
}

/// Z̃ = Z̄ · n!(2πβ)^{dn/2}, the scaled replica value.
pub fn replica_scale(cfg: &RunConfig) -> f64 {
    let s = cfg.system();
    (s.log_combinatorial() - s.log_free_normalization(cfg.beta)).exp()
}

/// Runs one configured experiment on the current rayon pool.
pub fn run_experiment(cfg: &RunConfig) -> CliResult<RunManifest> {
    let started = Instant::now();
    cfg.validate()?;
    let grid = cfg.grid()?;
    let system = cfg.system();
    let (beta, m_x, seed) = (cfg.beta, cfg.samples, cfg.seed);
    let mut m = RunManifest::new(None, Table::new(&REPORT_COLUMNS));
    match cfg.experiment {
        Experiment::ExactHo => {
            if !cfg.is_plain_harmonic() {
                return Err(CliError::Invalid("exact-ho needs the Harmonic potential without spins".into()));
            }
            m.table = Table::new(&["n", "d", "beta", "statistics", "Z_exact", "h_exact"]);
            let z = exact_ho_partition_with(cfg.n, beta, cfg.d, cfg.statistics)?;
            let h = exact_ho_meanfield_with(cfg.n, beta, cfg.d, EXACT_H_TOLERANCE, cfg.statistics)?;
            let stats = match cfg.statistics {
                Statistics::Fermion => "fermion",
                Statistics::Boson => "boson",
                Statistics::Distinguishable => "distinguishable",
            };
            m.table.push(vec![cfg.n.into(), cfg.d.into(), beta.into(), stats.into(), z.into(), h.into()]);
        }
        Experiment::EstimateZ => {
            let z = estimate_partition(&system, &grid, beta, m_x, seed)?;
            let reference = cfg.reference.or(exact_reference(cfg, Quantity::Partition)?);
            push_report(&mut m, cfg, &z, reference);
        }
        Experiment::EstimateH => {
            let (z, h) = estimate_both(&system, &grid, beta, m_x, seed, Regularization::default())?;
            push_report(&mut m, cfg, &z, exact_reference(cfg, Quantity::Partition)?);
            let reference = cfg.reference.or(exact_reference(cfg, Quantity::MeanField)?);
            push_report(&mut m, cfg, &h, reference);
        }
        Experiment::Tensor => {
            let (z, h) = tensor_estimate(&system, &grid, beta, m_x, seed, cfg.statistics)?;
            push_report(&mut m, cfg, &z, exact_reference(cfg, Quantity::Partition)?);
            let reference = cfg.reference.or(exact_reference(cfg, Quantity::MeanField)?);
            push_report(&mut m, cfg, &h, reference);
        }
        Experiment::Perturb => {
            let pc = cfg.perturbation.unwrap_or_default();
            let rep = perturbed_meanfield(&system, &grid, beta, m_x, seed, &pc)?;
            let reference = cfg.reference.or(exact_reference(cfg, Quantity::MeanField)?);
            push_report(&mut m, cfg, &rep.h_nu, reference);
            push_report(&mut m, cfg, &rep.h_perturb, reference);
            m.perturbation.push(rep);
        }
        Experiment::Replicas => {
            let plan = cfg.replicas.unwrap_or(ReplicaPlan { m1: 256, m2: m_x });
            let summary = run_replicas(cfg, plan)?;
            m.table = Table::new(&["replica", "seed", "M2", "Z_bar", "Z_scaled"]);
            for (r, ((s, v), sc)) in summary.seeds.iter().zip(&summary.values).zip(&summary.scaled).enumerate() {
                m.table.push(vec![r.into(), (*s).into(), plan.m2.into(), (*v).into(), (*sc).into()]);
            }
            m.replicas.push(summary);
        }
    }
    m.configs.push(cfg.clone());
    m.wall_time_s = started.elapsed().as_secs_f64();
    Ok(m)
}

/// M1 independent partition estimates of M2 samples each.
pub fn run_replicas(cfg: &RunConfig, plan: ReplicaPlan) -> CliResult<ReplicaSummary> {
    let grid = cfg.grid()?;
    let system = cfg.system();
    let runner = |s: u64, m2: u64| Ok(estimate_partition(&system, &grid, cfg.beta, m2, s)?.estimate);
    Ok(replica_diagnostics(plan, cfg.seed, replica_scale(cfg), runner)?)
}

/// Runs `f` on a dedicated pool of `workers` threads, or the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
