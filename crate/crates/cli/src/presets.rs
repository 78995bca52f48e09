//! Named experiments with their default parameters. Sample counts are
//! overridable so the tables can be reproduced at desk scale.

use crate::config::{Experiment, RunConfig};
use crate::error::{CliError, CliResult};
use crate::run::{exact_reference, run_replicas, Comparison, RunManifest};
use crate::table::{Cell, Table};
use bbdet_core::estimators::Regularization;
use bbdet_core::rng::replica_seed;
use bbdet_core::statistics::Histogram;
use bbdet_core::{convergence_sweep, estimate_both, estimate_partition, perturbed_meanfield, tensor_estimate, PerturbationConfig};
use bbdet_core::{PotentialSpec, Quantity, ReplicaPlan, Statistics};
use std::time::Instant;

pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo { name: "table1", description: "V1 d=3 n=6 partition function vs exact, beta in {1, 1.5, 2}, dt in {0.025, 0.0125}, M_x=2^28" },
    PresetInfo { name: "table2", description: "V1 d=3 n=6 mean-field energy vs exact, beta in {1, 1.5, 2}, dt in {0.025, 0.0125}, M_x=2^28" },
    PresetInfo { name: "table3", description: "V2 d=3 n=6 lambda=0.5 mean-field energy vs reference, beta in {0.5, 1, 1.5, 2}, M_x=2^26" },
    PresetInfo { name: "table4", description: "d=2 beta in {1, 0.3} V2 lambda=0.5, n in {3, 6, 10} and {6, 10, 20}, M_x=2^22" },
    PresetInfo { name: "table5", description: "V2 d=3 n=6 lambda=0.5 permutation-sum oracle (M_x=2^22) vs determinant (M_x=2^26), beta in {0.5, 1, 1.5}" },
    PresetInfo { name: "table6", description: "V2 d=3 lambda=0.5 perturbation indicator, n in {3, 6}, beta in {1, 1.5}, c_star=2, M_x=2^22" },
    PresetInfo { name: "fig1", description: "V1 d=3 n=6 beta=1 dt=0.0125 relative error of Z and h vs M_x = 2^12 .. 2^20" },
    PresetInfo { name: "fig-histogram", description: "V1 d=3 n=6 beta=2 dt=0.025 histograms of 256 scaled Z replicas, M2 in {2^18, 2^20, 2^22, 2^24}" },
    PresetInfo { name: "fig-moments", description: "V2 d=3 n=6 lambda=0.5 beta=0.5 dt=0.025 h estimate and per-sample central moments vs M_x up to 2^22" },
];

/// "name: description" lines.
pub fn list_presets() -> Vec<String> {
    PRESETS.iter().map(|p| format!("{}: {}", p.name, p.description)).collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PresetOptions {
    /// Replaces the default M_x (the largest size for sweeps).
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    /// Replica count for fig-histogram, independent seeds for fig1.
    pub replicas: Option<u64>,
    /// Restricts the Δt column to one value.
    pub delta_t: Option<f64>,
}

const V2_LAMBDA: f64 = 0.5;
const DTS: [f64; 2] = [0.025, 0.0125];
const HISTOGRAM_BINS: usize = 16;

struct Ctx {
    opts: PresetOptions,
    manifest: RunManifest,
}

impl Ctx {
    fn samples(&self, default: u64) -> u64 {
        self.opts.samples.unwrap_or(default)
    }

    fn seed(&self) -> u64 {
        self.opts.seed.unwrap_or(1)
    }

    fn dts(&self) -> Vec<f64> {
        self.opts.delta_t.map_or(DTS.to_vec(), |d| vec![d])
    }

    fn config(&self, experiment: Experiment, n: usize, d: usize, beta: f64, potential: PotentialSpec, dt: f64, samples: u64) -> RunConfig {
        RunConfig::new(experiment, n, d, beta, potential).with_dt(dt).with_samples(samples).with_seed(self.seed())
    }

    fn fail(&mut self, cfg: &RunConfig, err: &CliError) {
        self.manifest.failures.push(format!("n={} d={} beta={} delta_t={:?} M_x={}: {err}", cfg.n, cfg.d, cfg.beta, cfg.delta_t, cfg.samples));
    }
}

pub fn preset_names() -> Vec<String> {
    PRESETS.iter().map(|p| p.name.to_string()).collect()
}

/// Runs a preset on the current rayon pool. Estimation failures of single
/// rows are recorded in `failures` rather than aborting the table.
pub fn run_preset(name: &str, opts: &PresetOptions) -> CliResult<RunManifest> {
    if !PRESETS.iter().any(|p| p.name == name) {
        return Err(CliError::UnknownPreset { name: name.to_string(), valid: preset_names() });
    }
    let started = Instant::now();
    let mut ctx = Ctx { opts: opts.clone(), manifest: RunManifest::new(Some(name), Table::default()) };
    match name {
        "table1" | "table2" => separable_table(&mut ctx, name == "table2")?,
        "table3" => table3(&mut ctx)?,
        "table4" => table4(&mut ctx)?,
        "table5" => table5(&mut ctx)?,
        "table6" => table6(&mut ctx)?,
        "fig1" => fig1(&mut ctx)?,
        "fig-histogram" => fig_histogram(&mut ctx)?,
        "fig-moments" => fig_moments(&mut ctx)?,
        _ => unreachable!(),
    }
    ctx.manifest.wall_time_s = started.elapsed().as_secs_f64();
    Ok(ctx.manifest)
}

fn separable_table(ctx: &mut Ctx, meanfield: bool) -> CliResult<()> {
    let (exact_col, bar_col, q) =
        if meanfield { ("h_exact", "h_bar", Quantity::MeanField) } else { ("Z_exact", "Z_bar", Quantity::Partition) };
    ctx.manifest.table = Table::new(&["beta", "M_x", exact_col, "delta_t", bar_col, "rel_diff", "rel_ci"]);
    let m_x = ctx.samples(1 << 28);
    for beta in [1.0, 1.5, 2.0] {
        for dt in ctx.dts() {
            let cfg = ctx.config(if meanfield { Experiment::EstimateH } else { Experiment::EstimateZ }, 6, 3, beta, PotentialSpec::harmonic(), dt, m_x);
            let exact = exact_reference(&cfg, q)?.expect("V1 has an exact value");
            let res = (|| -> CliResult<_> {
                let grid = cfg.grid()?;
                let system = cfg.system();
                Ok(if meanfield {
                    estimate_both(&system, &grid, beta, m_x, cfg.seed, Regularization::default())?.1
                } else {
                    estimate_partition(&system, &grid, beta, m_x, cfg.seed)?
                })
            })();
            let row = match res {
                Ok(rep) => {
                    ctx.manifest.comparisons.push(Comparison::new(format!("beta={beta} dt={dt}"), rep.estimate, exact, rep.rel_ci));
                    let row = vec![rep.estimate.into(), rep.rel_diff(exact).into(), rep.rel_ci.into()];
                    ctx.manifest.reports.push(rep);
                    row
                }
                Err(e) => {
                    ctx.fail(&cfg, &e);
                    vec![Cell::Empty; 3]
                }
            };
            let mut full = vec![beta.into(), m_x.into(), exact.into(), dt.into()];
            full.extend(row);
            ctx.manifest.table.push(full);
            ctx.manifest.configs.push(cfg.with_reference(exact));
        }
    }
    Ok(())
}

/// h̄_ν rows against fixed references for V2.
fn v2_rows(ctx: &mut Ctx, d: usize, cases: &[(f64, usize, f64)], m_x: u64, with_n: bool) -> CliResult<()> {
    for &(beta, n, reference) in cases {
        for dt in ctx.dts() {
            let cfg = ctx.config(Experiment::EstimateH, n, d, beta, PotentialSpec::harmonic_coulomb(V2_LAMBDA), dt, m_x).with_reference(reference);
            let res = (|| -> CliResult<_> { Ok(estimate_both(&cfg.system(), &cfg.grid()?, beta, m_x, cfg.seed, Regularization::default())?.1) })();
            let tail = match res {
                Ok(rep) => {
                    ctx.manifest.comparisons.push(Comparison::new(format!("beta={beta} n={n} dt={dt}"), rep.estimate, reference, rep.rel_ci));
                    let t = vec![rep.estimate.into(), rep.rel_diff(reference).into(), rep.rel_ci.into()];
                    ctx.manifest.reports.push(rep);
                    t
                }
                Err(e) => {
                    ctx.fail(&cfg, &e);
                    vec![Cell::Empty; 3]
                }
            };
            let mut row: Vec<Cell> = vec![beta.into()];
            if with_n {
                row.push(n.into());
            }
            row.extend([m_x.into(), reference.into(), dt.into()]);
            row.extend(tail);
            ctx.manifest.table.push(row);
            ctx.manifest.configs.push(cfg);
        }
    }
    Ok(())
}

fn table3(ctx: &mut Ctx) -> CliResult<()> {
    ctx.manifest.table = Table::new(&["beta", "M_x", "h_ref", "delta_t", "h_bar", "rel_diff", "rel_ci"]);
    let m_x = ctx.samples(1 << 26);
    v2_rows(ctx, 3, &[(0.5, 6, 41.66), (1.0, 6, 26.692), (1.5, 6, 22.63), (2.0, 6, 22.1)], m_x, false)
}

fn table4(ctx: &mut Ctx) -> CliResult<()> {
    ctx.manifest.table = Table::new(&["beta", "n", "M_x", "h_ref", "delta_t", "h_bar", "rel_diff", "rel_ci"]);
    let m_x = ctx.samples(1 << 22);
    let cases = [(1.0, 3, 8.719), (1.0, 6, 22.82), (1.0, 10, 49.0), (0.3, 6, 46.45), (0.3, 10, 84.92), (0.3, 20, 203.0)];
    v2_rows(ctx, 2, &cases, m_x, true)
}

fn table5(ctx: &mut Ctx) -> CliResult<()> {
    ctx.manifest.table = Table::new(&[
        "beta", "h_ref", "delta_t", "M_x_tensor", "h_tensor", "rel_ci_tensor", "M_x", "h_bar", "rel_diff_tensor",
    ]);
    let m_tensor = ctx.samples(1 << 22);
    let m_det = ctx.samples(1 << 26);
    for (beta, reference) in [(0.5, 41.66), (1.0, 26.692), (1.5, 22.63)] {
        for dt in ctx.dts() {
            let pot = PotentialSpec::harmonic_coulomb(V2_LAMBDA);
            let tcfg = ctx.config(Experiment::Tensor, 6, 3, beta, pot.clone(), dt, m_tensor).with_reference(reference);
            let dcfg = ctx.config(Experiment::EstimateH, 6, 3, beta, pot, dt, m_det).with_reference(reference);
            let tensor = (|| -> CliResult<_> {
                Ok(tensor_estimate(&tcfg.system(), &tcfg.grid()?, beta, m_tensor, tcfg.seed, Statistics::Fermion)?.1)
            })();
            let det = (|| -> CliResult<_> { Ok(estimate_both(&dcfg.system(), &dcfg.grid()?, beta, m_det, dcfg.seed, Regularization::default())?.1) })();
            let mut row: Vec<Cell> = vec![beta.into(), reference.into(), dt.into(), m_tensor.into()];
            match &tensor {
                Ok(t) => row.extend([t.estimate.into(), t.rel_ci.into()]),
                Err(e) => {
                    ctx.fail(&tcfg, e);
                    row.extend([Cell::Empty, Cell::Empty]);
                }
            }
            row.push(m_det.into());
            match &det {
                Ok(h) => row.push(h.estimate.into()),
                Err(e) => {
                    ctx.fail(&dcfg, e);
                    row.push(Cell::Empty);
                }
            }
            match (&tensor, &det) {
                (Ok(t), Ok(h)) => {
                    row.push(h.rel_diff(t.estimate).into());
                    ctx.manifest.comparisons.push(Comparison::new(format!("tensor beta={beta} dt={dt}"), h.estimate, t.estimate, t.rel_ci));
                }
                _ => row.push(Cell::Empty),
            }
            for r in [tensor, det].into_iter().flatten() {
                ctx.manifest.comparisons.push(Comparison::new(format!("reference beta={beta} dt={dt}"), r.estimate, reference, r.rel_ci));
                ctx.manifest.reports.push(r);
            }
            ctx.manifest.table.push(row);
            ctx.manifest.configs.extend([tcfg, dcfg]);
        }
    }
    Ok(())
}

fn table6(ctx: &mut Ctx) -> CliResult<()> {
    ctx.manifest.table = Table::new(&[
        "beta", "n", "h_ref", "delta_t", "M_x", "h_bar", "rel_diff", "h_perturb", "rel_diff_perturb", "indicator",
    ]);
    let m_x = ctx.samples(1 << 22);
    for (beta, n, reference) in [(1.0, 3, 11.355), (1.0, 6, 26.692), (1.5, 3, 9.157), (1.5, 6, 22.63)] {
        for dt in ctx.dts() {
            let mut cfg = ctx.config(Experiment::Perturb, n, 3, beta, PotentialSpec::harmonic_coulomb(V2_LAMBDA), dt, m_x).with_reference(reference);
            cfg.perturbation = Some(PerturbationConfig::default());
            let res = (|| -> CliResult<_> {
                Ok(perturbed_meanfield(&cfg.system(), &cfg.grid()?, beta, m_x, cfg.seed, &cfg.perturbation.unwrap_or_default())?)
            })();
            let mut row: Vec<Cell> = vec![beta.into(), n.into(), reference.into(), dt.into(), m_x.into()];
            match res {
                Ok(p) => {
                    row.extend([
                        p.h_nu.estimate.into(),
                        p.h_nu.rel_diff(reference).into(),
                        p.h_perturb.estimate.into(),
                        p.h_perturb.rel_diff(reference).into(),
                        p.indicator.into(),
                    ]);
                    let label = format!("beta={beta} n={n} dt={dt}");
                    ctx.manifest.comparisons.push(Comparison::new(format!("h_nu {label}"), p.h_nu.estimate, reference, p.h_nu.rel_ci));
                    ctx.manifest.comparisons.push(Comparison::new(format!("h_perturb {label}"), p.h_perturb.estimate, reference, p.h_perturb.rel_ci));
                    ctx.manifest.perturbation.push(p);
                }
                Err(e) => {
                    ctx.fail(&cfg, &e);
                    row.extend(vec![Cell::Empty; 5]);
                }
            }
            ctx.manifest.table.push(row);
            ctx.manifest.configs.push(cfg);
        }
    }
    Ok(())
}

/// Powers of two from 2^12 up to `max`.
pub fn sweep_sizes(min_log2: u32, max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (min_log2..64).map(|k| 1u64 << k).take_while(|&s| s <= max).collect();
    if out.is_empty() {
        out.push(max.max(2));
    }
    out
}

fn fig1(ctx: &mut Ctx) -> CliResult<()> {
    ctx.manifest.table = Table::new(&["M_x", "rel_err_Z", "rel_err_h"]);
    let max = ctx.samples(1 << 20);
    let sizes = sweep_sizes(12, max);
    let repeats = ctx.opts.replicas.unwrap_or(1).max(1);
    let base = ctx.config(Experiment::EstimateH, 6, 3, 1.0, PotentialSpec::harmonic(), 0.0125, max);
    let z_exact = exact_reference(&base, Quantity::Partition)?.expect("V1");
    let h_exact = exact_reference(&base, Quantity::MeanField)?.expect("V1");
    let (grid, system) = (base.grid()?, base.system());
    let mut sq_z = vec![0.0; sizes.len()];
    let mut sq_h = vec![0.0; sizes.len()];
    let mut h_missing = vec![false; sizes.len()];
    for r in 0..repeats {
        let seed = if repeats == 1 { base.seed } else { replica_seed(base.seed, r) };
        let points = convergence_sweep(&system, &grid, 1.0, &sizes, seed)?;
        for (i, p) in points.iter().enumerate() {
            sq_z[i] += (p.partition.estimate / z_exact - 1.0).powi(2);
            match &p.meanfield {
                Some(h) => sq_h[i] += (h.estimate / h_exact - 1.0).powi(2),
                None => h_missing[i] = true,
            }
        }
        ctx.manifest.configs.push(base.clone().with_seed(seed));
    }
    // With several seeds the columns are root-mean-square relative errors.
    for (i, &s) in sizes.iter().enumerate() {
        let ez = (sq_z[i] / repeats as f64).sqrt();
        let eh = if h_missing[i] { None } else { Some((sq_h[i] / repeats as f64).sqrt()) };
        ctx.manifest.table.push(vec![s.into(), ez.into(), eh.into()]);
    }
    Ok(())
}

fn fig_histogram(ctx: &mut Ctx) -> CliResult<()> {
    ctx.manifest.table = Table::new(&["M2", "bin_lo", "bin_hi", "count", "fitted_density", "fitted_mean", "fitted_std"]);
    let top = ctx.samples(1 << 24);
    let m1 = ctx.opts.replicas.unwrap_or(256);
    for m2 in [top / 64, top / 16, top / 4, top] {
        let plan = ReplicaPlan { m1, m2 };
        let mut cfg = ctx.config(Experiment::Replicas, 6, 3, 2.0, PotentialSpec::harmonic(), 0.025, m2);
        cfg.replicas = Some(plan);
        match run_replicas(&cfg, plan) {
            Ok(summary) => {
                let h = Histogram::build(&summary.scaled, HISTOGRAM_BINS)?;
                for (i, &c) in h.counts.iter().enumerate() {
                    let (lo, hi) = (h.edges[i], h.edges[i + 1]);
                    ctx.manifest.table.push(vec![
                        m2.into(),
                        lo.into(),
                        hi.into(),
                        c.into(),
                        h.fitted_density(0.5 * (lo + hi)).into(),
                        h.fitted_mean.into(),
                        h.fitted_std.into(),
                    ]);
                }
                ctx.manifest.replicas.push(summary);
            }
            Err(e) => ctx.fail(&cfg, &e),
        }
        ctx.manifest.configs.push(cfg);
    }
    Ok(())
}

fn fig_moments(ctx: &mut Ctx) -> CliResult<()> {
    ctx.manifest.table = Table::new(&[
        "M_x", "h_bar", "rel_ci", "a_mean", "a_mu2", "a_mu3", "a_mu4", "b_mean", "b_mu2", "b_mu3", "b_mu4",
    ]);
    let max = ctx.samples(1 << 22);
    let cfg = ctx.config(Experiment::EstimateH, 6, 3, 0.5, PotentialSpec::harmonic_coulomb(V2_LAMBDA), 0.025, max);
    let points = convergence_sweep(&cfg.system(), &cfg.grid()?, 0.5, &sweep_sizes(10, max), cfg.seed)?;
    for p in points {
        let (a, b) = (p.a_moments, p.b_moments);
        let (h, ci) = p.meanfield.as_ref().map_or((None, None), |h| (Some(h.estimate), Some(h.rel_ci)));
        ctx.manifest.table.push(vec![
            p.samples.into(),
            h.into(),
            ci.into(),
            a.mean.into(),
            a.mu2.into(),
            a.mu3.into(),
            a.mu4.into(),
            b.mean.into(),
            b.mu2.into(),
            b.mu3.into(),
            b.mu4.into(),
        ]);
    }
    ctx.manifest.configs.push(cfg);
    Ok(())
}
