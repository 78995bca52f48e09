//! Reference values: the exact harmonic-trap recursion and the brute-force
//! permutation sum over bridges.

use crate::determinant::Quadrature;
use crate::error::{Error, Result};
use crate::estimators::{fill_meta, meanfield_report, partition_report, run_pairs};
use crate::grid::TimeGrid;
use crate::paths::{check_dim, norm2, sub, BridgeSample, ImportanceDensity, Point};
use crate::perm::Permutations;
use crate::potentials::{pair_term, PotentialSpec};
use crate::determinant::SamplePair;
use crate::report::{EstimateReport, Statistics};
use crate::statistics::{pilot_size, RegularizedRatio, DEFAULT_EPS_FRACTION};
use crate::system::System;
use std::time::Instant;

pub const TENSOR_MAX_N: usize = 8;

/// Z₁(β) for the unit-frequency trap in `d` dimensions.
pub fn single_particle_z(beta: f64, d: usize) -> f64 {
    ((-0.5 * beta).exp() / (1.0 - (-beta).exp())).powi(d as i32)
}

/// Memoized Z_k(β), k = 0..=n, and Z₁(kβ), k = 1..=n.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionTable {
    pub beta: f64,
    pub d: usize,
    pub z1: Vec<f64>,
    pub z: Vec<f64>,
    /// Same recursion without signs; bounds the rounding error of `z`.
    pub z_abs: Vec<f64>,
}

impl RecursionTable {
    pub fn new(n: usize, beta: f64, d: usize, statistics: Statistics) -> Self {
        let z1: Vec<f64> = (0..=n).map(|k| if k == 0 { 0.0 } else { single_particle_z(k as f64 * beta, d) }).collect();
        let mut z = vec![1.0; n + 1];
        let mut z_abs = vec![1.0; n + 1];
        for m in 1..=n {
            let (mut s, mut sa) = (0.0, 0.0);
            for k in 1..=m {
                let sign = match statistics {
                    Statistics::Fermion if k % 2 == 0 => -1.0,
                    _ => 1.0,
                };
                s += sign * z1[k] * z[m - k];
                sa += z1[k] * z_abs[m - k];
            }
            z[m] = s / m as f64;
            z_abs[m] = sa / m as f64;
        }
        if statistics == Statistics::Distinguishable {
            for m in 0..=n {
                z[m] = z1[1].powi(m as i32);
                z_abs[m] = z[m];
            }
        }
        Self { beta, d, z1, z, z_abs }
    }

    /// Rough relative rounding error of Z_n.
    pub fn relative_error_bound(&self, n: usize) -> f64 {
        f64::EPSILON * (n.max(1) as f64) * self.z_abs[n] / self.z[n].abs()
    }
}

/// log of the n-th elementary symmetric polynomial of the single-particle
/// Boltzmann factors, summed level by level. All terms are positive.
fn fermion_log_partition_levels(n: usize, beta: f64, d: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let degeneracy = |level: usize| -> f64 {
        match d {
            1 => 1.0,
            2 => (level + 1) as f64,
            _ => ((level + 1) * (level + 2) / 2) as f64,
        }
    };
    let mut filled = 0.0;
    let mut fermi = 0;
    while filled < n as f64 {
        filled += degeneracy(fermi);
        fermi += 1;
    }
    let last = fermi + (60.0 / beta).ceil() as usize + 8;
    // Coefficients scaled by e^{β·(lowest excitation of j particles)} to stay in range.
    let mut ground = vec![0.0; n + 1];
    {
        let (mut j, mut level, mut used) = (0, 0usize, 0.0);
        while j < n {
            if used >= degeneracy(level) {
                level += 1;
                used = 0.0;
                continue;
            }
            ground[j + 1] = ground[j] + level as f64;
            used += 1.0;
            j += 1;
        }
    }
    let mut coef = vec![0.0; n + 1];
    coef[0] = 1.0;
    for level in 0..=last {
        let g = degeneracy(level);
        // (1 + t y)^g truncated at degree n, with y = e^{−β·level}.
        let mut next = vec![0.0; n + 1];
        for (i, &c) in coef.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut binom = 1.0;
            for j in 0..=(n - i) {
                if j as f64 > g {
                    break;
                }
                if j > 0 {
                    binom *= (g - (j - 1) as f64) / j as f64;
                }
                let shift = beta * (ground[i + j] - ground[i] - (j * level) as f64);
                next[i + j] += c * binom * shift.exp();
            }
        }
        coef = next;
    }
    coef[n].ln() - beta * ground[n] - n as f64 * beta * d as f64 / 2.0
}

/// log Z_n for the unit trap under the given statistics.
pub fn exact_ho_log_partition(n: usize, beta: f64, d: usize, statistics: Statistics) -> Result<f64> {
    check_dim(d)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let t = RecursionTable::new(n, beta, d, statistics);
    let z = t.z[n];
    if statistics == Statistics::Fermion && !(z > 0.0 && z.is_finite() && t.relative_error_bound(n) < 1e-12) {
        return Ok(fermion_log_partition_levels(n, beta, d));
    }
    if z > 0.0 && z.is_finite() {
        Ok(z.ln())
    } else if statistics == Statistics::Distinguishable {
        Ok(n as f64 * single_particle_z(beta, d).ln())
    } else {
        Err(Error::Numeric(format!("recursion left the floating range at n={n}, beta={beta}")))
    }
}

/// Z_n for n fermions in the unit trap, with Z₀ = 1.
pub fn exact_ho_partition(n: usize, beta: f64, d: usize) -> Result<f64> {
    let lz = exact_ho_log_partition(n, beta, d, Statistics::Fermion)?;
    let z = lz.exp();
    if z == 0.0 || !z.is_finite() {
        return Err(Error::Numeric(format!("Z_n is not representable; log Z_n = {lz}")));
    }
    Ok(z)
}

pub fn exact_ho_partition_with(n: usize, beta: f64, d: usize, statistics: Statistics) -> Result<f64> {
    Ok(exact_ho_log_partition(n, beta, d, statistics)?.exp())
}

/// −∂β log Z_n by central differences with a shrinking step.
pub fn exact_ho_meanfield_with(n: usize, beta: f64, d: usize, tolerance: f64, statistics: Statistics) -> Result<f64> {
    if !(tolerance > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let f = |b: f64| exact_ho_log_partition(n, b, d, statistics);
    let mut step = 0.05 * beta;
    let mut prev = -(f(beta + step)? - f(beta - step)?) / (2.0 * step);
    for _ in 0..20 {
        step *= 0.5;
        let cur = -(f(beta + step)? - f(beta - step)?) / (2.0 * step);
        if (cur - prev).abs() < tolerance {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Precision(format!("central differences did not settle to {tolerance:e} within 20 halvings")))
}

pub fn exact_ho_meanfield(n: usize, beta: f64, d: usize, tolerance: f64) -> Result<f64> {
    exact_ho_meanfield_with(n, beta, d, tolerance, Statistics::Fermion)
}

/// c₂ = 2 and c_m = Σ_{m'<m} 1/m' for m ≥ 3.
pub fn cycle_coefficient(m: usize) -> Result<f64> {
    match m {
        0 | 1 => Err(Error::Domain(format!("cycle length must be at least 2, got {m}"))),
        2 => Ok(2.0),
        _ => Ok((1..m).map(|k| 1.0 / k as f64).sum()),
    }
}

/// Permutations with their weight sign under `statistics`, restricted to
/// spin-preserving ones when spins are given.
pub fn permutation_set(n: usize, statistics: Statistics, spins: Option<&[f64]>) -> Result<Vec<(Vec<usize>, f64)>> {
    if n > TENSOR_MAX_N {
        return Err(Error::TooManyParticles { n, max: TENSOR_MAX_N });
    }
    if let Some(s) = spins {
        crate::determinant::spin_groups(s, n)?;
    }
    Ok(Permutations::new(n)
        .filter(|(p, _)| spins.is_none_or(|s| p.iter().enumerate().all(|(k, &j)| s[k] == s[j])))
        .filter(|(p, _)| statistics != Statistics::Distinguishable || p.iter().enumerate().all(|(k, &j)| k == j))
        .map(|(p, sgn)| (p, if statistics == Statistics::Fermion { sgn } else { 1.0 }))
        .collect())
}

/// Per-sample permutation sum sharing the determinant module's bridges and
/// trapezoid weights.
pub(crate) struct TensorEvaluator {
    spec: PotentialSpec,
    q: Quadrature,
    beta: f64,
    density: ImportanceDensity,
    perms: Vec<(Vec<usize>, f64)>,
    with_derivative: bool,
}

impl TensorEvaluator {
    pub fn new(system: &System, grid: &TimeGrid, beta: f64, statistics: Statistics, with_derivative: bool) -> Result<Self> {
        system.validate_shape()?;
        Ok(Self {
            spec: system.potential.clone(),
            q: Quadrature::new(grid),
            beta,
            density: system.density(beta),
            perms: permutation_set(system.n, statistics, system.spins.as_deref())?,
            with_derivative,
        })
    }

    pub fn eval(&self, s: &BridgeSample) -> SamplePair {
        self.try_eval(s).unwrap_or_else(|_| SamplePair::degenerate())
    }

    fn try_eval(&self, s: &BridgeSample) -> Result<SamplePair> {
        let n = s.n;
        let m1 = s.steps + 1;
        let beta = self.beta;
        let sb = beta.sqrt();
        let lam = self.spec.coupling();
        let q = &self.q;
        // Paths x̄_k^ℓ for every (k, ℓ), with their external integrals.
        let mut paths = vec![[0.0; 3]; n * n * m1];
        let mut ext = vec![(0.0, 0.0); n * n];
        for k in 0..n {
            let b = s.bridge_of(k);
            for l in 0..n {
                let (xk, xl) = (&s.x0[k], &s.x0[l]);
                let base = (k * n + l) * m1;
                let (mut v, mut g) = (0.0, 0.0);
                for m in 0..m1 {
                    let t = q.nodes[m];
                    let y: Point = std::array::from_fn(|c| sb * b[m][c] + (1.0 - t) * xk[c] + t * xl[c]);
                    let (e, grad) = self.spec.external_with_gradient(&y)?;
                    v += q.weights[m] * e;
                    g += q.weights[m] * (b[m][0] * grad[0] + b[m][1] * grad[1] + b[m][2] * grad[2]);
                    paths[base + m] = y;
                }
                ext[k * n + l] = (v, g);
            }
        }
        // Pair integrals keyed by (k, σk, j, σj), filled on demand.
        let mut pair_memo: Vec<Option<(f64, f64)>> = vec![None; if lam != 0.0 { n * n * n * n } else { 0 }];
        let mut pair = |k: usize, a: usize, j: usize, c: usize| -> Result<(f64, f64)> {
            let key = ((k * n + a) * n + j) * n + c;
            if let Some(v) = pair_memo[key] {
                return Ok(v);
            }
            let (pk, pj) = ((k * n + a) * m1, (j * n + c) * m1);
            let (bk, bj) = (s.bridge_of(k), s.bridge_of(j));
            let (mut v, mut g) = (0.0, 0.0);
            for m in 0..m1 {
                // Full 1/|·| for the unordered pair.
                let (pv, pg) = pair_term(2.0 * lam, &paths[pk + m], &paths[pj + m])?;
                let db = sub(&bk[m], &bj[m]);
                v += q.weights[m] * pv;
                g += q.weights[m] * (pg[0] * db[0] + pg[1] * db[1] + pg[2] * db[2]);
            }
            pair_memo[key] = Some((v, g));
            Ok((v, g))
        };
        let mut logs = Vec::with_capacity(self.perms.len());
        for (p, sign) in &self.perms {
            let mut d2 = 0.0;
            let (mut v, mut g) = (0.0, 0.0);
            for k in 0..n {
                d2 += norm2(&sub(&s.x0[k], &s.x0[p[k]]));
                let (ev, eg) = ext[k * n + p[k]];
                v += ev;
                g += eg;
                if lam != 0.0 {
                    for j in k + 1..n {
                        let (pv, pg) = pair(k, p[k], j, p[j])?;
                        v += pv;
                        g += pg;
                    }
                }
            }
            let log_w = -d2 / (2.0 * beta) - beta * v;
            let rate = d2 / (2.0 * beta * beta) - (v + 0.5 * sb * g);
            logs.push((log_w, rate, *sign));
        }
        let top = logs.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
        let (mut sum, mut dsum) = (0.0, 0.0);
        for (lw, rate, sign) in &logs {
            let w = sign * (lw - top).exp();
            sum += w;
            dsum += w * rate;
        }
        let log_p = self.density.log_value(&s.x0)?;
        let scale = (top - log_p).exp();
        let dn = (s.d * n) as f64;
        let b_value = sum * scale;
        let a_value = if self.with_derivative { -(dsum - dn / (2.0 * beta) * sum) * scale } else { 0.0 };
        if !(a_value.is_finite() && b_value.is_finite()) {
            return Ok(SamplePair::degenerate());
        }
        Ok(SamplePair { a_value, b_value, degenerate: false })
    }
}

/// Per-sample permutation-sum pair, for path-by-path comparisons.
pub fn tensor_sample_pair(sample: &BridgeSample, system: &System, grid: &TimeGrid, beta: f64, statistics: Statistics) -> Result<SamplePair> {
    Ok(TensorEvaluator::new(system, grid, beta, statistics, true)?.eval(sample))
}

/// Monte Carlo estimate of (Z, h) from the full permutation sum.
pub fn tensor_estimate(
    system: &System,
    grid: &TimeGrid,
    beta: f64,
    m_x: u64,
    seed: u64,
    statistics: Statistics,
) -> Result<(EstimateReport, EstimateReport)> {
    let started = Instant::now();
    if system.n > TENSOR_MAX_N {
        return Err(Error::TooManyParticles { n: system.n, max: TENSOR_MAX_N });
    }
    if m_x < 2 {
        return Err(Error::Config("M_x must be at least 2".into()));
    }
    let ev = TensorEvaluator::new(system, grid, beta, statistics, true)?;
    let eval = |s: &BridgeSample| [ev.eval(s)];
    let [pilot] = run_pairs(system, grid, beta, pilot_size(m_x), seed, eval)?;
    let reg = RegularizedRatio::from_pilot(pilot.mean_b(), DEFAULT_EPS_FRACTION);
    let [acc] = run_pairs(system, grid, beta, m_x, seed, eval)?;
    let log_comb = if statistics == Statistics::Distinguishable { 0.0 } else { system.log_combinatorial() };
    let log_pref = system.potential.nuclei_factor(beta).log_value - log_comb + system.log_free_normalization(beta);
    let mut z = partition_report(&acc, log_pref)?;
    let mut h = meanfield_report(&acc, Some(reg), system.potential.nuclear_repulsion())?;
    for r in [&mut z, &mut h] {
        fill_meta(r, &acc, grid, beta, seed, started);
        r.statistics = statistics;
    }
    if statistics == Statistics::Distinguishable {
        z.notes.push("distinguishable normalization: no 1/n! factor".into());
    }
    Ok((z, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recursion_small_cases() {
        assert_eq!(exact_ho_partition(0, 1.3, 3).unwrap(), 1.0);
        let (b, d) = (0.8, 2);
        let z1 = single_particle_z(b, d);
        let z2 = (z1 * z1 - single_particle_z(2.0 * b, d)) / 2.0;
        assert!((exact_ho_partition(2, b, d).unwrap() / z2 - 1.0).abs() < 1e-13);
        let zb = (z1 * z1 + single_particle_z(2.0 * b, d)) / 2.0;
        assert!((exact_ho_partition_with(2, b, d, Statistics::Boson).unwrap() / zb - 1.0).abs() < 1e-13);
    }

    #[test]
    fn level_sum_agrees_with_recursion() {
        for (n, beta, d) in [(6, 1.0, 3), (3, 0.5, 1), (10, 0.3, 2), (5, 2.0, 3)] {
            let t = RecursionTable::new(n, beta, d, Statistics::Fermion);
            let lv = fermion_log_partition_levels(n, beta, d);
            assert!((t.z[n].ln() - lv).abs() < 1e-10, "n={n} beta={beta} d={d}: {} vs {lv}", t.z[n].ln());
        }
    }

    #[test]
    fn cycle_values() {
        assert_eq!(cycle_coefficient(2).unwrap(), 2.0);
        assert!((cycle_coefficient(3).unwrap() - 1.5).abs() < 1e-15);
        assert!((cycle_coefficient(4).unwrap() - 11.0 / 6.0).abs() < 1e-15);
        assert!((cycle_coefficient(5).unwrap() - 25.0 / 12.0).abs() < 1e-15);
        assert!((cycle_coefficient(10).unwrap() - 7129.0 / 2520.0).abs() < 1e-14);
        assert!(cycle_coefficient(1).is_err());
    }

    #[test]
    fn permutation_sets() {
        assert_eq!(permutation_set(4, Statistics::Fermion, None).unwrap().len(), 24);
        assert_eq!(permutation_set(4, Statistics::Distinguishable, None).unwrap().len(), 1);
        let spins = [0.5, -0.5, 0.5];
        assert_eq!(permutation_set(3, Statistics::Fermion, Some(&spins)).unwrap().len(), 2);
        assert!(matches!(permutation_set(9, Statistics::Fermion, None), Err(Error::TooManyParticles { .. })));
        let signs: f64 = permutation_set(5, Statistics::Fermion, None).unwrap().iter().map(|p| p.1).sum();
        assert_eq!(signs, 0.0);
    }

    #[test]
    fn tensor_refuses_large_n() {
        let sys = System::new(9, 3, PotentialSpec::harmonic());
        let g = TimeGrid::new(4).unwrap();
        let r = tensor_estimate(&sys, &g, 1.0, 16, 0, Statistics::Fermion);
        assert!(matches!(r, Err(Error::TooManyParticles { n: 9, .. })));
    }
}
