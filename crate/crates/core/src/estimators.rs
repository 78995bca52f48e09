//! Monte Carlo drivers for the partition function and the mean-field energy.
//!
//! Samples are processed in fixed blocks of `BLOCK` indices. Each block gets
//! its own accumulator and blocks are combined by a balanced tree over their
//! index order, so the result does not depend on how many threads ran.

use crate::accumulator::{tree_reduce, PairAccumulator};
use crate::determinant::{sample_pair_with, spin_groups, spin_pair_with, Quadrature, SamplePair};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::paths::{resample, sample_bridge, BridgeSample};
use crate::report::{EstimateReport, Quantity};
use crate::statistics::{pilot_size, ratio_with_ci, MomentSummary, RegularizedRatio, DEFAULT_EPS_FRACTION, Z95};
use crate::system::System;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

pub const BLOCK: u64 = 1024;
/// Tolerated fraction of degenerate samples before a run is flagged.
pub const DEGENERATE_RATE: f64 = 1e-6;

/// Accumulates `[start, end)` for every consecutive pair of `bounds`.
pub(crate) fn segment_accumulators<const K: usize, F>(
    system: &System,
    grid: &TimeGrid,
    beta: f64,
    seed: u64,
    bounds: &[u64],
    eval: F,
) -> Result<Vec<[PairAccumulator; K]>>
where
    F: Fn(&BridgeSample) -> [SamplePair; K] + Sync,
{
    system.validate_shape()?;
    let density = system.density(beta);
    let segs: Vec<(u64, u64)> = bounds.windows(2).map(|w| (w[0], w[1])).collect();
    segs.par_iter()
        .map(|&(start, end)| {
            let mut accs = [PairAccumulator::default(); K];
            let mut sample = sample_bridge(seed, start, system.n, system.d, grid, &density)?;
            for i in start..end {
                if i != start {
                    resample(&mut sample, seed, i, grid, &density);
                }
                for (acc, p) in accs.iter_mut().zip(eval(&sample)) {
                    if p.degenerate {
                        acc.push_degenerate();
                    } else {
                        acc.push(p.a_value, p.b_value);
                    }
                }
            }
            Ok(accs)
        })
        .collect()
}

pub(crate) fn block_bounds(m_x: u64) -> Vec<u64> {
    let mut b: Vec<u64> = (0..m_x).step_by(BLOCK as usize).collect();
    b.push(m_x);
    b
}

pub(crate) fn merge_prefix<const K: usize>(segs: &[[PairAccumulator; K]]) -> [PairAccumulator; K] {
    tree_reduce(segs, |x, y| {
        let mut out = [PairAccumulator::default(); K];
        for i in 0..K {
            out[i] = x[i].merge(&y[i]);
        }
        out
    })
    .unwrap_or([PairAccumulator::default(); K])
}

/// Accumulator over samples `0..m_x` for a per-sample evaluator.
pub fn run_pairs<const K: usize, F>(system: &System, grid: &TimeGrid, beta: f64, m_x: u64, seed: u64, eval: F) -> Result<[PairAccumulator; K]>
where
    F: Fn(&BridgeSample) -> [SamplePair; K] + Sync,
{
    let segs = segment_accumulators(system, grid, beta, seed, &block_bounds(m_x), eval)?;
    Ok(merge_prefix(&segs))
}

/// The determinant evaluator for `system` (spin-split when spins are set).
pub fn determinant_evaluator(system: &System, grid: &TimeGrid, beta: f64, with_derivative: bool) -> Result<impl Fn(&BridgeSample) -> SamplePair + Sync> {
    system.validate()?;
    let q = Quadrature::new(grid);
    let density = system.density(beta);
    let spec = system.potential.clone();
    let groups = match &system.spins {
        Some(s) => Some(spin_groups(s, system.n)?),
        None => None,
    };
    Ok(move |s: &BridgeSample| match &groups {
        Some(g) => spin_pair_with(s, &spec, &q, beta, &density, g, with_derivative),
        None => sample_pair_with(s, &spec, &q, beta, &density, with_derivative),
    })
}

pub(crate) fn fill_meta(rep: &mut EstimateReport, acc: &PairAccumulator, grid: &TimeGrid, beta: f64, seed: u64, started: Instant) {
    rep.samples = acc.count();
    rep.steps = grid.steps();
    rep.delta_t = grid.dt(beta);
    rep.beta = beta;
    rep.seed = seed;
    rep.degenerate = acc.degenerate;
    rep.flagged = acc.degenerate as f64 > DEGENERATE_RATE * acc.count() as f64;
    rep.wall_time_s = started.elapsed().as_secs_f64();
}

/// log of the constant turning mean(B) into a partition function estimate.
pub fn log_partition_prefactor(system: &System, beta: f64) -> f64 {
    system.potential.nuclei_factor(beta).log_value - system.log_combinatorial() + system.log_free_normalization(beta)
}

/// Partition estimate from an accumulator of B samples.
pub fn partition_report(acc: &PairAccumulator, log_prefactor: f64) -> Result<EstimateReport> {
    let n = acc.count();
    if n < 2 {
        return Err(Error::EstimationFailed(format!("need at least two samples, got {n}")));
    }
    if acc.degenerate == n {
        return Err(Error::EstimationFailed("every sample was degenerate".into()));
    }
    let c = log_prefactor.exp();
    let b = acc.mean_b();
    let sd = acc.var_b().sqrt();
    let sqrt_n = (n as f64).sqrt();
    let rel = Z95 * sd / (sqrt_n * b.abs());
    let mut rep = EstimateReport::new(Quantity::Partition, c * b, c * sd / sqrt_n, rel);
    if c == 0.0 || !c.is_finite() {
        rep.notes.push(format!("prefactor exp({log_prefactor}) is not representable; see log_estimate"));
    }
    Ok(rep)
}

/// How the ratio denominator is regularized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Regularization {
    None,
    /// ε = fraction·|b̄| from the pilot prefix.
    Pilot(f64),
    Fixed(f64),
}

impl Default for Regularization {
    fn default() -> Self {
        Regularization::Pilot(DEFAULT_EPS_FRACTION)
    }
}

/// Mean-field estimate from an accumulator of (A, B) samples.
pub fn meanfield_report(acc: &PairAccumulator, reg: Option<RegularizedRatio>, shift: f64) -> Result<EstimateReport> {
    let n = acc.count();
    if n >= 1 && acc.degenerate == n {
        return Err(Error::EstimationFailed("every sample was degenerate".into()));
    }
    let se_b = (acc.var_b() / n as f64).sqrt();
    let b = acc.mean_b();
    if b.abs() <= 2.0 * se_b || b == 0.0 {
        return Err(Error::SignDominated { mean: b, std_error: se_b });
    }
    let mut rep = ratio_with_ci(acc, reg)?;
    if shift != 0.0 {
        let half = rep.rel_ci * rep.estimate.abs();
        rep.estimate += shift;
        rep.ci_low += shift;
        rep.ci_high += shift;
        rep.rel_ci = half / rep.estimate.abs();
        rep.notes.push(format!("includes nuclear repulsion constant {shift}"));
    }
    Ok(rep)
}

fn pilot_regularization<F>(system: &System, grid: &TimeGrid, beta: f64, m_x: u64, seed: u64, reg: Regularization, eval: &F) -> Result<Option<RegularizedRatio>>
where
    F: Fn(&BridgeSample) -> [SamplePair; 1] + Sync,
{
    Ok(match reg {
        Regularization::None => None,
        Regularization::Fixed(e) => Some(RegularizedRatio { epsilon: e }),
        Regularization::Pilot(f) => {
            let p = pilot_size(m_x);
            let acc = run_pairs(system, grid, beta, p, seed, eval)?;
            Some(RegularizedRatio::from_pilot(acc[0].mean_b(), f))
        }
    })
}

pub fn estimate_partition(system: &System, grid: &TimeGrid, beta: f64, m_x: u64, seed: u64) -> Result<EstimateReport> {
    let started = Instant::now();
    if m_x < 2 {
        return Err(Error::Config("M_x must be at least 2".into()));
    }
    let ev = determinant_evaluator(system, grid, beta, false)?;
    let [acc] = run_pairs(system, grid, beta, m_x, seed, |s| [ev(s)])?;
    let mut rep = partition_report(&acc, log_partition_prefactor(system, beta))?;
    fill_meta(&mut rep, &acc, grid, beta, seed, started);
    Ok(rep)
}

pub fn estimate_meanfield(system: &System, grid: &TimeGrid, beta: f64, m_x: u64, seed: u64) -> Result<EstimateReport> {
    Ok(estimate_both(system, grid, beta, m_x, seed, Regularization::default())?.1)
}

/// Partition and mean-field estimates from one pass over the samples.
pub fn estimate_both(system: &System, grid: &TimeGrid, beta: f64, m_x: u64, seed: u64, reg: Regularization) -> Result<(EstimateReport, EstimateReport)> {
    let started = Instant::now();
    if m_x < 2 {
        return Err(Error::Config("M_x must be at least 2".into()));
    }
    let ev = determinant_evaluator(system, grid, beta, true)?;
    let eval = |s: &BridgeSample| [ev(s)];
    let reg = pilot_regularization(system, grid, beta, m_x, seed, reg, &eval)?;
    let [acc] = run_pairs(system, grid, beta, m_x, seed, eval)?;
    let mut z = partition_report(&acc, log_partition_prefactor(system, beta))?;
    fill_meta(&mut z, &acc, grid, beta, seed, started);
    let mut h = meanfield_report(&acc, reg, system.potential.nuclear_repulsion())?;
    fill_meta(&mut h, &acc, grid, beta, seed, started);
    Ok((z, h))
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub samples: u64,
    pub partition: EstimateReport,
    pub meanfield: Option<EstimateReport>,
    pub a_moments: MomentSummary,
    pub b_moments: MomentSummary,
    pub accumulator: PairAccumulator,
}

/// Estimates at each size in `sizes`, all sharing one sample prefix.
pub fn convergence_sweep(system: &System, grid: &TimeGrid, beta: f64, sizes: &[u64], seed: u64) -> Result<Vec<SweepPoint>> {
    let started = Instant::now();
    if sizes.is_empty() || sizes.windows(2).any(|w| w[1] <= w[0]) || sizes[0] < 2 {
        return Err(Error::Config("sweep sizes must be increasing and at least 2".into()));
    }
    let max = *sizes.last().unwrap();
    let mut bounds = block_bounds(max);
    bounds.extend_from_slice(sizes);
    bounds.sort_unstable();
    bounds.dedup();
    let ev = determinant_evaluator(system, grid, beta, true)?;
    let eval = |s: &BridgeSample| [ev(s)];
    let segs = segment_accumulators(system, grid, beta, seed, &bounds, eval)?;
    let log_pref = log_partition_prefactor(system, beta);
    let mut out = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let upto = bounds.iter().position(|&b| b == size).unwrap();
        let [acc] = merge_prefix(&segs[..upto]);
        let mut z = partition_report(&acc, log_pref)?;
        fill_meta(&mut z, &acc, grid, beta, seed, started);
        let reg = pilot_regularization(system, grid, beta, size, seed, Regularization::default(), &eval)?;
        let h = match meanfield_report(&acc, reg, system.potential.nuclear_repulsion()) {
            Ok(mut h) => {
                fill_meta(&mut h, &acc, grid, beta, seed, started);
                Some(h)
            }
            Err(Error::SignDominated { .. }) => None,
            Err(e) => return Err(e),
        };
        out.push(SweepPoint {
            samples: size,
            partition: z,
            meanfield: h,
            a_moments: MomentSummary::from(&acc.a),
            b_moments: MomentSummary::from(&acc.b),
            accumulator: acc,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialSpec;

    #[test]
    fn bounds_cover_range() {
        assert_eq!(block_bounds(2500), vec![0, 1024, 2048, 2500]);
        assert_eq!(block_bounds(1024), vec![0, 1024]);
    }

    #[test]
    fn rejects_tiny_runs() {
        let sys = System::new(1, 3, PotentialSpec::harmonic());
        let g = TimeGrid::new(4).unwrap();
        assert!(estimate_partition(&sys, &g, 1.0, 1, 0).is_err());
        assert!(convergence_sweep(&sys, &g, 1.0, &[64, 32], 0).is_err());
    }

    #[test]
    fn single_particle_harmonic() {
        let sys = System::new(1, 3, PotentialSpec::harmonic());
        let g = TimeGrid::from_dt(1.0, 0.05).unwrap();
        let (z, h) = estimate_both(&sys, &g, 1.0, 1 << 14, 17, Regularization::default()).unwrap();
        let z1 = ((-0.5f64).exp() / (1.0 - (-1.0f64).exp())).powi(3);
        let h1 = 3.0 * (0.5 + 1.0 / (std::f64::consts::E - 1.0));
        assert!(z.within_ci(z1, 3.0), "{z:?} vs {z1}");
        assert!(h.within_ci(h1, 3.0), "{h:?} vs {h1}");
    }
}
