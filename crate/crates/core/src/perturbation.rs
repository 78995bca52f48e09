//! Error indicator from ξ-perturbed partner paths.
//!
//! Each interaction factor of 𝒲 is replaced by its average over random
//! shifts s·√(β/c*)·ξ_j of the partner paths. The perturbed partition
//! function is evaluated at β ± Δβ with shared bridges and shifts, and its
//! log central difference gives h̄_perturb.

use crate::determinant::{sample_pair_with, Quadrature, SamplePair};
use crate::error::{Error, Result};
use crate::estimators::{fill_meta, meanfield_report, run_pairs};
use crate::grid::TimeGrid;
use crate::linalg::{det, Mat};
use crate::paths::{norm2, sub, BridgeSample, Point};
use crate::potentials::{PotentialSpec, SINGULAR_DISTANCE};
use crate::report::{EstimateReport, Quantity};
use crate::rng::{stream_key, substream, Domain, SampleRng};
use crate::statistics::{pilot_size, RegularizedRatio, DEFAULT_EPS_FRACTION, Z95};
use crate::system::System;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum XiSharing {
    /// One panel per sample, reused by every matrix entry.
    #[default]
    PerSample,
    /// A fresh panel for every matrix entry.
    PerEntry,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub c_star: f64,
    pub n_xi: usize,
    pub delta_beta: f64,
    #[serde(default)]
    pub sharing: XiSharing,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self { c_star: 2.0, n_xi: 100, delta_beta: 0.01, sharing: XiSharing::PerSample }
    }
}

impl PerturbationConfig {
    /// Hard errors, plus warnings for c* outside [0.6, 2].
    pub fn validate(&self, beta: f64) -> Result<Vec<String>> {
        if !(self.c_star > 0.0) || self.n_xi == 0 || !(self.delta_beta > 0.0) {
            return Err(Error::Config("perturbation needs c_star > 0, n_xi >= 1 and delta_beta > 0".into()));
        }
        if self.delta_beta >= beta / 10.0 {
            return Err(Error::Config(format!("delta_beta {} must be below beta/10 = {}", self.delta_beta, beta / 10.0)));
        }
        let mut warn = Vec::new();
        if !(0.6..=2.0).contains(&self.c_star) {
            warn.push(format!("c_star = {} lies outside the tested range [0.6, 2]", self.c_star));
        }
        Ok(warn)
    }
}

/// n_xi draws of n standard normal vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct XiPanel {
    pub n: usize,
    pub draws: Vec<Point>,
}

impl XiPanel {
    pub fn zeros(n: usize) -> Self {
        Self { n, draws: vec![[0.0; 3]; n] }
    }

    pub fn len(&self) -> usize {
        self.draws.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn draw(rng: &mut SampleRng, n_xi: usize, n: usize, d: usize) -> Self {
        let mut draws = vec![[0.0; 3]; n_xi * n];
        for p in draws.iter_mut() {
            for c in p.iter_mut().take(d) {
                *c = rng.sample(StandardNormal);
            }
        }
        Self { n, draws }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> &Point {
        &self.draws[i * self.n + j]
    }
}

/// Panels for one sample under a sharing mode.
pub struct XiSource {
    panels: Vec<XiPanel>,
    per_entry: bool,
    n: usize,
}

impl XiSource {
    pub fn new(xi_seed: u64, sample: &BridgeSample, config: &PerturbationConfig) -> Self {
        let n = sample.n;
        match config.sharing {
            XiSharing::PerSample => {
                let mut rng = substream(xi_seed, Domain::Xi, sample.index);
                Self { panels: vec![XiPanel::draw(&mut rng, config.n_xi, n, sample.d)], per_entry: false, n }
            }
            XiSharing::PerEntry => {
                let key = stream_key(xi_seed, Domain::Xi, sample.index);
                let panels = (0..n * n)
                    .map(|e| XiPanel::draw(&mut substream(key, Domain::Xi, e as u64), config.n_xi, n, sample.d))
                    .collect();
                Self { panels, per_entry: true, n }
            }
        }
    }

    pub fn fixed(panel: XiPanel) -> Self {
        let n = panel.n;
        Self { panels: vec![panel], per_entry: false, n }
    }

    fn panel(&self, k: usize, l: usize) -> &XiPanel {
        if self.per_entry {
            &self.panels[k * self.n + l]
        } else {
            &self.panels[0]
        }
    }
}

/// log 𝒲̃_{kℓ} for all entries.
pub fn perturbed_log_w(sample: &BridgeSample, spec: &PotentialSpec, grid: &TimeGrid, beta: f64, c_star: f64, xi: &XiSource) -> Result<Mat> {
    perturbed_log_w_with(sample, spec, &Quadrature::new(grid), beta, c_star, xi)
}

fn perturbed_log_w_with(sample: &BridgeSample, spec: &PotentialSpec, q: &Quadrature, beta: f64, c_star: f64, xi: &XiSource) -> Result<Mat> {
    let n = sample.n;
    let m1 = sample.steps + 1;
    let sb = beta.sqrt();
    let shift = (beta / c_star).sqrt();
    let lam = spec.coupling();
    let mut out = Mat::zeros(n);
    let mut y = vec![[0.0; 3]; m1];
    let mut partners = vec![[0.0; 3]; m1 * n];
    let mut logs = Vec::new();
    for k in 0..n {
        for l in 0..n {
            let (xk, xl) = (sample.x0[k], sample.x0[l]);
            let mut ext = 0.0;
            for m in 0..m1 {
                let s = q.nodes[m];
                let b = sample.at(k, m);
                y[m] = std::array::from_fn(|c| sb * b[c] + (1.0 - s) * xk[c] + s * xl[c]);
                ext += q.weights[m] * spec.external_term(&y[m])?;
            }
            let mut log_entry = -norm2(&sub(&xk, &xl)) / (2.0 * beta) - beta * ext;
            if lam != 0.0 {
                for j in (0..n).filter(|&j| j != k) {
                    let target = if j == l { k } else { j };
                    let xj = sample.x0[j];
                    let xt = sample.x0[target];
                    for m in 0..m1 {
                        let s = q.nodes[m];
                        let b = sample.at(j, m);
                        partners[j * m1 + m] = std::array::from_fn(|c| sb * b[c] + (1.0 - s) * xj[c] + s * xt[c]);
                    }
                }
                let panel = xi.panel(k, l);
                logs.clear();
                for i in 0..panel.len() {
                    let mut v = 0.0;
                    for j in (0..n).filter(|&j| j != k) {
                        let z = panel.get(i, j);
                        let mut vj = 0.0;
                        for m in 0..m1 {
                            let s = q.nodes[m] * shift;
                            let p = &partners[j * m1 + m];
                            let r = [y[m][0] - p[0] - s * z[0], y[m][1] - p[1] - s * z[1], y[m][2] - p[2] - s * z[2]];
                            let dist = norm2(&r).sqrt();
                            if dist < SINGULAR_DISTANCE {
                                return Err(Error::Singular { distance: dist });
                            }
                            vj += q.weights[m] / dist;
                        }
                        v += vj;
                    }
                    logs.push(-beta * 0.5 * lam * v);
                }
                let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mean = logs.iter().map(|l| (l - top).exp()).sum::<f64>() / logs.len() as f64;
                log_entry += top + mean.ln();
            }
            out.set(k, l, log_entry);
        }
    }
    if !out.is_finite() {
        return Err(Error::Numeric("non-finite perturbed matrix exponent".into()));
    }
    Ok(out)
}

/// 𝒲̃ with ξ panels drawn from `xi_seed` and the sample index.
pub fn perturbed_w(sample: &BridgeSample, spec: &PotentialSpec, grid: &TimeGrid, beta: f64, config: &PerturbationConfig, xi_seed: u64) -> Result<Mat> {
    let xi = XiSource::new(xi_seed, sample, config);
    let mut m = perturbed_log_w(sample, spec, grid, beta, config.c_star, &xi)?;
    m.data.iter_mut().for_each(|v| *v = v.exp());
    Ok(m)
}

/// det 𝒲̃ as (mantissa, log scale).
fn scaled_det(log_w: &Mat) -> (f64, f64) {
    let top = log_w.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w = Mat { n: log_w.n, data: log_w.data.iter().map(|v| (v - top).exp()).collect() };
    (det(&w), top * log_w.n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub h_nu: EstimateReport,
    pub h_perturb: EstimateReport,
    /// |h̄_perturb − h̄_ν|.
    pub indicator: f64,
    /// indicator / |h̄_ν|.
    pub rel_indicator: f64,
    pub config: PerturbationConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Per-sample values: (B̃(β+Δβ), B̃(β−Δβ)) and the unperturbed (A, B) at β.
pub(crate) fn perturbed_sample(
    s: &BridgeSample,
    system: &System,
    q: &Quadrature,
    beta: f64,
    config: &PerturbationConfig,
    xi_seed: u64,
) -> [SamplePair; 2] {
    let density = system.density(beta);
    let base = sample_pair_with(s, &system.potential, q, beta, &density, true);
    let Ok(log_p) = density.log_value(&s.x0) else {
        return [SamplePair::degenerate(), base];
    };
    let xi = XiSource::new(xi_seed, s, config);
    let mut vals = [0.0; 2];
    for (slot, b) in vals.iter_mut().zip([beta + config.delta_beta, beta - config.delta_beta]) {
        match perturbed_log_w_with(s, &system.potential, q, b, config.c_star, &xi) {
            Ok(lw) => {
                let (d, log_scale) = scaled_det(&lw);
                *slot = d * (log_scale - log_p).exp();
            }
            Err(_) => return [SamplePair::degenerate(), base],
        }
    }
    if !vals.iter().all(|v| v.is_finite()) {
        return [SamplePair::degenerate(), base];
    }
    [SamplePair { a_value: vals[0], b_value: vals[1], degenerate: false }, base]
}

/// h̄_perturb from log central differences of Z̃, alongside h̄_ν on the same samples.
pub fn perturbed_meanfield(system: &System, grid: &TimeGrid, beta: f64, m_x: u64, seed: u64, config: &PerturbationConfig) -> Result<PerturbationReport> {
    let started = Instant::now();
    let warnings = config.validate(beta)?;
    system.validate()?;
    if system.spins.is_some() {
        return Err(Error::Unsupported("the perturbation indicator is defined for spinless systems".into()));
    }
    if m_x < 2 {
        return Err(Error::Config("M_x must be at least 2".into()));
    }
    let q = Quadrature::new(grid);
    let xi_seed = seed;
    let [pert, base] = run_pairs(system, grid, beta, m_x, seed, |s| perturbed_sample(s, system, &q, beta, config, xi_seed))?;
    let density = system.density(beta);
    let [pilot] = run_pairs(system, grid, beta, pilot_size(m_x), seed, |s| [sample_pair_with(s, &system.potential, &q, beta, &density, true)])?;
    let mut h_nu = meanfield_report(&base, Some(RegularizedRatio::from_pilot(pilot.mean_b(), DEFAULT_EPS_FRACTION)), system.potential.nuclear_repulsion())?;
    fill_meta(&mut h_nu, &base, grid, beta, seed, started);

    let n = pert.count();
    let (bp, bm) = (pert.mean_a(), pert.mean_b());
    if !(bp > 0.0 && bm > 0.0) {
        return Err(Error::SignDominated { mean: bp.min(bm), std_error: (pert.var_a().max(pert.var_b()) / n as f64).sqrt() });
    }
    let db = config.delta_beta;
    let log_z = |mean: f64, b: f64| {
        mean.ln() + system.potential.nuclei_factor(b).log_value - system.log_combinatorial() + system.log_free_normalization(b)
    };
    let h = -(log_z(bp, beta + db) - log_z(bm, beta - db)) / (2.0 * db);
    let var_log = (pert.var_a() / (bp * bp) + pert.var_b() / (bm * bm) - 2.0 * pert.cov_ab() / (bp * bm)).max(0.0) / n as f64;
    let se = var_log.sqrt() / (2.0 * db);
    let mut h_perturb = EstimateReport::new(Quantity::PerturbedMeanField, h, se, Z95 * se / h.abs());
    fill_meta(&mut h_perturb, &pert, grid, beta, seed, started);
    let indicator = (h - h_nu.estimate).abs();
    Ok(PerturbationReport { rel_indicator: indicator / h_nu.estimate.abs(), h_nu, h_perturb, indicator, config: *config, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::determinant::build_w;
    use crate::paths::{sample_bridge, ImportanceDensity};

    fn sample(n: usize, seed: u64) -> (BridgeSample, TimeGrid) {
        let g = TimeGrid::new(10).unwrap();
        (sample_bridge(seed, 3, n, 3, &g, &ImportanceDensity::new(1.0, 3 * n)).unwrap(), g)
    }

    #[test]
    fn zero_shift_recovers_w() {
        let (s, g) = sample(3, 8);
        let spec = PotentialSpec::harmonic_coulomb(0.5);
        let lw = perturbed_log_w(&s, &spec, &g, 1.0, 2.0, &XiSource::fixed(XiPanel::zeros(3))).unwrap();
        let ev = build_w(&s, &spec, &g, 1.0, false).unwrap();
        for i in 0..9 {
            assert!((lw.data[i] - ev.log_w.data[i]).abs() < 1e-12 * ev.log_w.data[i].abs().max(1.0));
        }
    }

    #[test]
    fn no_coupling_ignores_xi() {
        let (s, g) = sample(3, 9);
        let spec = PotentialSpec::harmonic();
        let w = perturbed_w(&s, &spec, &g, 1.0, &PerturbationConfig::default(), 4).unwrap();
        let ev = build_w(&s, &spec, &g, 1.0, false).unwrap();
        for k in 0..3 {
            for l in 0..3 {
                assert!((w.get(k, l) / ev.entry(k, l) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn config_checks() {
        assert!(PerturbationConfig::default().validate(1.0).unwrap().is_empty());
        assert_eq!(PerturbationConfig { c_star: 5.0, ..Default::default() }.validate(1.0).unwrap().len(), 1);
        assert!(PerturbationConfig::default().validate(0.05).is_err());
    }

    #[test]
    fn per_entry_panels_differ() {
        let (s, _) = sample(2, 1);
        let cfg = PerturbationConfig { sharing: XiSharing::PerEntry, n_xi: 4, ..Default::default() };
        let src = XiSource::new(5, &s, &cfg);
        assert_ne!(src.panel(0, 1), src.panel(1, 0));
        let shared = XiSource::new(5, &s, &PerturbationConfig { n_xi: 4, ..Default::default() });
        assert_eq!(shared.panel(0, 1), shared.panel(1, 0));
    }
}
