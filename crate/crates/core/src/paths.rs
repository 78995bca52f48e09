//! Discrete Brownian bridges on the unit interval and the importance density
//! for initial positions.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::rng::{substream, Domain, SampleRng};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Points always carry three slots; unused dimensions stay zero.
pub type Point = [f64; 3];

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn norm2(a: &Point) -> f64 {
    dot(a, a)
}

pub fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::Config(format!("spatial dimension must be 1, 2 or 3, got {d}")))
    }
}

/// Equal-weight mixture of N(0, β I) and N(0, β⁻¹ I) in R^{dn}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImportanceDensity {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub dim: usize,
}

impl ImportanceDensity {
    pub fn new(beta: f64, dim: usize) -> Self {
        Self { sigma1_sq: beta, sigma2_sq: 1.0 / beta, dim }
    }

    fn log_component(&self, var: f64, r2: f64) -> f64 {
        -0.5 * self.dim as f64 * (2.0 * std::f64::consts::PI * var).ln() - r2 / (2.0 * var)
    }

    pub fn log_value_r2(&self, r2: f64) -> f64 {
        let a = self.log_component(self.sigma1_sq, r2);
        let b = self.log_component(self.sigma2_sq, r2);
        let m = a.max(b);
        m + (0.5 * ((a - m).exp() + (b - m).exp())).ln()
    }

    /// Log density at the stacked configuration `x`.
    pub fn log_value(&self, x: &[Point]) -> Result<f64> {
        let mut r2 = 0.0;
        for p in x {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::Domain("non-finite coordinate in density argument".into()));
            }
            r2 += norm2(p);
        }
        Ok(self.log_value_r2(r2))
    }

    /// Draws one configuration of `n` points with `d` live coordinates each.
    pub fn sample_into(&self, rng: &mut SampleRng, n: usize, d: usize, out: &mut Vec<Point>) {
        let var = if rng.random::<f64>() < 0.5 { self.sigma1_sq } else { self.sigma2_sq };
        let sd = var.sqrt();
        out.clear();
        for _ in 0..n {
            let mut p = [0.0; 3];
            for c in p.iter_mut().take(d) {
                let z: f64 = rng.sample(StandardNormal);
                *c = sd * z;
            }
            out.push(p);
        }
    }
}

pub fn density_value(density: &ImportanceDensity, x0: &[Point]) -> Result<f64> {
    Ok(density.log_value(x0)?.exp())
}

/// One Monte Carlo draw: initial positions plus a standard bridge per particle.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeSample {
    pub n: usize,
    pub d: usize,
    pub steps: usize,
    pub x0: Vec<Point>,
    /// Row-major (particle, node).
    pub bridge: Vec<Point>,
    pub seed: u64,
    pub index: u64,
}

impl BridgeSample {
    #[inline]
    pub fn bridge_of(&self, k: usize) -> &[Point] {
        let m1 = self.steps + 1;
        &self.bridge[k * m1..(k + 1) * m1]
    }

    #[inline]
    pub fn at(&self, k: usize, m: usize) -> &Point {
        &self.bridge[k * (self.steps + 1) + m]
    }

    /// Same draw restricted to every `factor`-th node.
    pub fn coarsen(&self, factor: usize) -> Result<BridgeSample> {
        if factor == 0 || self.steps % factor != 0 {
            return Err(Error::Config(format!("cannot coarsen {} steps by {factor}", self.steps)));
        }
        let steps = self.steps / factor;
        let mut bridge = Vec::with_capacity(self.n * (steps + 1));
        for k in 0..self.n {
            let b = self.bridge_of(k);
            bridge.extend((0..=steps).map(|m| b[m * factor]));
        }
        Ok(BridgeSample { steps, bridge, x0: self.x0.clone(), ..*self })
    }

    /// New particle `i` is old particle `perm[i]`; a shorter list selects a subset.
    pub fn permuted(&self, perm: &[usize]) -> BridgeSample {
        let x0 = perm.iter().map(|&p| self.x0[p]).collect();
        let bridge = perm.iter().flat_map(|&p| self.bridge_of(p).iter().copied()).collect();
        BridgeSample { n: perm.len(), x0, bridge, ..*self }
    }
}

/// Writes a standard bridge for `d` coordinates into `out[0..=M]`.
pub fn fill_bridge(rng: &mut SampleRng, d: usize, grid: &TimeGrid, out: &mut [Point]) {
    let steps = grid.steps();
    let ds = grid.delta_s();
    let sd = ds.sqrt();
    let mut w = [0.0f64; 3];
    out[0] = [0.0; 3];
    for slot in out[1..=steps].iter_mut() {
        for c in w[..d].iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *c += sd * z;
        }
        *slot = w;
    }
    let end = w;
    for (m, slot) in out[1..steps].iter_mut().enumerate() {
        let s = (m + 1) as f64 * ds;
        slot[0] -= s * end[0];
        slot[1] -= s * end[1];
        slot[2] -= s * end[2];
    }
    out[steps] = [0.0; 3];
}

pub fn sample_bridge(
    seed: u64,
    index: u64,
    n: usize,
    d: usize,
    grid: &TimeGrid,
    density: &ImportanceDensity,
) -> Result<BridgeSample> {
    check_dim(d)?;
    if n == 0 {
        return Err(Error::Config("need at least one particle".into()));
    }
    let mut s = BridgeSample {
        n,
        d,
        steps: grid.steps(),
        x0: Vec::with_capacity(n),
        bridge: vec![[0.0; 3]; n * grid.nodes()],
        seed,
        index,
    };
    resample(&mut s, seed, index, grid, density);
    Ok(s)
}

/// Regenerates `sample` in place for a new (seed, index) with unchanged shape.
pub fn resample(sample: &mut BridgeSample, seed: u64, index: u64, grid: &TimeGrid, density: &ImportanceDensity) {
    debug_assert_eq!(sample.steps, grid.steps());
    let mut rng = substream(seed, Domain::Bridge, index);
    density.sample_into(&mut rng, sample.n, sample.d, &mut sample.x0);
    let m1 = grid.nodes();
    for k in 0..sample.n {
        fill_bridge(&mut rng, sample.d, grid, &mut sample.bridge[k * m1..(k + 1) * m1]);
    }
    sample.seed = seed;
    sample.index = index;
}

/// √β·B̄_k(s_m) + (1 − s_m)·x_k + s_m·x_ℓ.
#[inline]
pub fn bridge_path_point(sample: &BridgeSample, k: usize, ell: usize, m: usize, grid: &TimeGrid, beta: f64) -> Point {
    let s = grid.node(m);
    let sb = beta.sqrt();
    let b = sample.at(k, m);
    let xk = &sample.x0[k];
    let xl = &sample.x0[ell];
    let mut p = [0.0; 3];
    for c in 0..3 {
        p[c] = sb * b[c] + (1.0 - s) * xk[c] + s * xl[c];
    }
    p
}
