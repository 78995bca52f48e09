//! The matrix 𝒲 of bridge weights, its β-derivative, and the per-sample
//! numerator/denominator pair fed to the estimators.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{det_and_adjugate, Mat};
use crate::paths::{norm2, sub, BridgeSample, ImportanceDensity, Point};
use crate::potentials::{pair_term, PotentialSpec};
use serde::{Deserialize, Serialize};

/// Partner index for particle `j` inside entry (k, ℓ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NuMap {
    pub k: usize,
    pub ell: usize,
}

impl NuMap {
    #[inline]
    pub fn nu(&self, j: usize) -> usize {
        if j == self.ell {
            self.k
        } else {
            j
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WEvaluation {
    /// Entries divided by e^{log_scale}.
    pub w: Mat,
    /// Element-wise β-derivative, same scaling as `w`.
    pub dw_dbeta: Option<Mat>,
    pub log_scale: f64,
    /// Unscaled log 𝒲_{kℓ}.
    pub log_w: Mat,
}

impl WEvaluation {
    /// Unscaled entry.
    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.log_w.get(k, l).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SamplePair {
    pub a_value: f64,
    pub b_value: f64,
    pub degenerate: bool,
}

impl SamplePair {
    pub fn degenerate() -> Self {
        Self { a_value: 0.0, b_value: 0.0, degenerate: true }
    }
}

/// γ_{kℓ} and ∂βγ_{kℓ} for one entry.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Gamma {
    pub gamma: f64,
    pub dgamma: f64,
}

/// Quadrature data shared by all entries of one evaluation.
pub(crate) struct Quadrature {
    pub weights: Vec<f64>,
    pub nodes: Vec<f64>,
    c00: f64,
    c11: f64,
    c01: f64,
}

impl Quadrature {
    pub fn new(grid: &TimeGrid) -> Self {
        let weights = grid.weights();
        let nodes = grid.node_values();
        let (mut c00, mut c11, mut c01) = (0.0, 0.0, 0.0);
        for (w, s) in weights.iter().zip(&nodes) {
            c00 += w * (1.0 - s) * (1.0 - s);
            c11 += w * s * s;
            c01 += w * s * (1.0 - s);
        }
        Self { weights, nodes, c00, c11, c01 }
    }
}

/// Bridge moments used by the quadratic-trap shortcut.
struct BridgeMoments {
    s0: Vec<Point>,
    u: Vec<Point>,
    v: Vec<Point>,
}

fn bridge_moments(sample: &BridgeSample, q: &Quadrature) -> BridgeMoments {
    let n = sample.n;
    let mut out = BridgeMoments { s0: vec![[0.0; 3]; n], u: vec![[0.0; 3]; n], v: vec![[0.0; 3]; n] };
    for k in 0..n {
        let b = sample.bridge_of(k);
        let (s0, u, v) = (&mut out.s0[k], &mut out.u[k], &mut out.v[k]);
        for ((p, w), s) in b.iter().zip(&q.weights).zip(&q.nodes) {
            let wl = w * (1.0 - s);
            let wr = w * s;
            for c in 0..3 {
                s0[c] += w * p[c] * p[c];
                u[c] += wl * p[c];
                v[c] += wr * p[c];
            }
        }
    }
    out
}

fn quadratic_gamma(axes: &Point, mom: &BridgeMoments, q: &Quadrature, x0: &[Point], k: usize, l: usize, beta: f64) -> Gamma {
    let sb = beta.sqrt();
    let (xk, xl) = (&x0[k], &x0[l]);
    let (s0, u, v) = (&mom.s0[k], &mom.u[k], &mom.v[k]);
    let mut ext = 0.0;
    let mut bgrad = 0.0;
    for c in 0..3 {
        let w2 = axes[c];
        if w2 == 0.0 {
            continue;
        }
        let sq = beta * s0[c]
            + q.c00 * xk[c] * xk[c]
            + q.c11 * xl[c] * xl[c]
            + 2.0 * q.c01 * xk[c] * xl[c]
            + 2.0 * sb * (xk[c] * u[c] + xl[c] * v[c]);
        ext += 0.5 * w2 * sq;
        bgrad += w2 * (sb * s0[c] + xk[c] * u[c] + xl[c] * v[c]);
    }
    Gamma { gamma: beta * ext, dgamma: ext + 0.5 * sb * bgrad }
}

/// Diagonal paths x̄_j^j(s_m), row-major (particle, node).
fn diagonal_paths(sample: &BridgeSample, beta: f64) -> Vec<Point> {
    let sb = beta.sqrt();
    let mut out = Vec::with_capacity(sample.bridge.len());
    for j in 0..sample.n {
        let x = sample.x0[j];
        for b in sample.bridge_of(j) {
            out.push([sb * b[0] + x[0], sb * b[1] + x[1], sb * b[2] + x[2]]);
        }
    }
    out
}

#[inline]
fn path_point(b: &Point, xk: &Point, xl: &Point, s: f64, sb: f64) -> Point {
    [
        sb * b[0] + (1.0 - s) * xk[0] + s * xl[0],
        sb * b[1] + (1.0 - s) * xk[1] + s * xl[1],
        sb * b[2] + (1.0 - s) * xk[2] + s * xl[2],
    ]
}

#[allow(clippy::too_many_arguments)]
fn general_gamma(
    spec: &PotentialSpec,
    sample: &BridgeSample,
    q: &Quadrature,
    diag: &[Point],
    k: usize,
    l: usize,
    beta: f64,
    with_derivative: bool,
) -> Result<Gamma> {
    let n = sample.n;
    let m1 = sample.steps + 1;
    let sb = beta.sqrt();
    let lam = spec.coupling();
    let bk = sample.bridge_of(k);
    let bl = sample.bridge_of(l);
    let (xk, xl) = (&sample.x0[k], &sample.x0[l]);
    let mut vint = 0.0;
    let mut gint = 0.0;
    for m in 0..m1 {
        let s = q.nodes[m];
        let y = path_point(&bk[m], xk, xl, s, sb);
        let (mut v, grad) = spec.external_with_gradient(&y)?;
        let mut g = if with_derivative { bk[m][0] * grad[0] + bk[m][1] * grad[1] + bk[m][2] * grad[2] } else { 0.0 };
        if lam != 0.0 {
            for j in 0..n {
                if j == k {
                    continue;
                }
                let partner = if j == l { path_point(&bl[m], xl, xk, s, sb) } else { diag[j * m1 + m] };
                let (pv, pg) = pair_term(lam, &y, &partner)?;
                v += pv;
                if with_derivative {
                    let bj = sample.at(j, m);
                    let db = sub(&bk[m], bj);
                    g += pg[0] * db[0] + pg[1] * db[1] + pg[2] * db[2];
                }
            }
        }
        let w = q.weights[m];
        vint += w * v;
        gint += w * g;
    }
    Ok(Gamma { gamma: beta * vint, dgamma: vint + 0.5 * sb * gint })
}

/// Evaluates 𝒲 (and optionally ∂β𝒲) for one sample.
pub(crate) fn build_w_with(
    sample: &BridgeSample,
    spec: &PotentialSpec,
    q: &Quadrature,
    beta: f64,
    with_derivative: bool,
) -> Result<WEvaluation> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let n = sample.n;
    let mut log_w = Mat::zeros(n);
    let mut rate = Mat::zeros(n);
    let two_beta = 2.0 * beta;
    let mut eval = |gamma_of: &mut dyn FnMut(usize, usize) -> Result<Gamma>| -> Result<()> {
        for k in 0..n {
            for l in 0..n {
                let d2 = norm2(&sub(&sample.x0[k], &sample.x0[l]));
                let g = gamma_of(k, l)?;
                log_w.set(k, l, -d2 / two_beta - g.gamma);
                rate.set(k, l, d2 / (two_beta * beta) - g.dgamma);
            }
        }
        Ok(())
    };
    if let Some(axes) = spec.quadratic_axes() {
        let mom = bridge_moments(sample, q);
        eval(&mut |k, l| Ok(quadratic_gamma(&axes, &mom, q, &sample.x0, k, l, beta)))?;
    } else {
        let diag = diagonal_paths(sample, beta);
        eval(&mut |k, l| general_gamma(spec, sample, q, &diag, k, l, beta, with_derivative))?;
    }
    if !log_w.is_finite() {
        return Err(Error::Numeric("non-finite matrix exponent".into()));
    }
    let log_scale = log_w.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w = Mat { n, data: log_w.data.iter().map(|e| (e - log_scale).exp()).collect() };
    let dw_dbeta = with_derivative.then(|| Mat { n, data: w.data.iter().zip(&rate.data).map(|(a, r)| a * r).collect() });
    Ok(WEvaluation { w, dw_dbeta, log_scale, log_w })
}

pub fn build_w(sample: &BridgeSample, spec: &PotentialSpec, grid: &TimeGrid, beta: f64, with_derivative: bool) -> Result<WEvaluation> {
    check_shape(sample, grid)?;
    build_w_with(sample, spec, &Quadrature::new(grid), beta, with_derivative)
}

fn check_shape(sample: &BridgeSample, grid: &TimeGrid) -> Result<()> {
    if sample.steps != grid.steps() {
        return Err(Error::Config(format!("sample has {} steps but grid has {}", sample.steps, grid.steps())));
    }
    Ok(())
}

/// det, Tr(adj·∂β𝒲) and the log scale of one block.
pub(crate) struct BlockValue {
    pub det: f64,
    pub trace: f64,
    pub log_scale: f64,
    pub n: usize,
}

pub(crate) fn block_value(sample: &BridgeSample, spec: &PotentialSpec, q: &Quadrature, beta: f64, with_derivative: bool) -> Result<BlockValue> {
    let ev = build_w_with(sample, spec, q, beta, with_derivative)?;
    let (det, trace) = match &ev.dw_dbeta {
        Some(dw) => {
            let (det, adj) = det_and_adjugate(&ev.w)?;
            (det, adj.trace_product(dw))
        }
        None => (crate::linalg::det(&ev.w), 0.0),
    };
    Ok(BlockValue { det, trace, log_scale: ev.log_scale, n: sample.n })
}

pub(crate) fn pair_from_blocks(blocks: &[BlockValue], log_p: f64, dn: f64, beta: f64) -> SamplePair {
    let mut det = 1.0;
    let mut dsum = 0.0;
    let mut log_scale = -log_p;
    for (i, b) in blocks.iter().enumerate() {
        det *= b.det;
        let others: f64 = blocks.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, o)| o.det).product();
        dsum += b.trace * others;
        log_scale += b.n as f64 * b.log_scale;
    }
    let scale = log_scale.exp();
    let b_value = det * scale;
    let a_value = -(dsum - dn / (2.0 * beta) * det) * scale;
    if !(a_value.is_finite() && b_value.is_finite()) {
        return SamplePair::degenerate();
    }
    SamplePair { a_value, b_value, degenerate: false }
}

pub(crate) fn sample_pair_with(
    sample: &BridgeSample,
    spec: &PotentialSpec,
    q: &Quadrature,
    beta: f64,
    density: &ImportanceDensity,
    with_derivative: bool,
) -> SamplePair {
    let Ok(log_p) = density.log_value(&sample.x0) else {
        return SamplePair::degenerate();
    };
    match block_value(sample, spec, q, beta, with_derivative) {
        Ok(b) => pair_from_blocks(&[b], log_p, (sample.d * sample.n) as f64, beta),
        Err(_) => SamplePair::degenerate(),
    }
}

/// B = det 𝒲 / p(x₀) and A = −[Tr(adj 𝒲 ∂β𝒲) − dn/(2β) det 𝒲] / p(x₀).
pub fn sample_pair(sample: &BridgeSample, spec: &PotentialSpec, grid: &TimeGrid, beta: f64, density: &ImportanceDensity) -> SamplePair {
    if check_shape(sample, grid).is_err() {
        return SamplePair::degenerate();
    }
    sample_pair_with(sample, spec, &Quadrature::new(grid), beta, density, true)
}

/// Particle index lists for the +½ and −½ groups.
pub fn spin_groups(spins: &[f64], n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if spins.len() != n {
        return Err(Error::Config(format!("{} spins given for {n} particles", spins.len())));
    }
    let mut up = Vec::new();
    let mut down = Vec::new();
    for (i, &s) in spins.iter().enumerate() {
        if s == 0.5 {
            up.push(i);
        } else if s == -0.5 {
            down.push(i);
        } else {
            return Err(Error::Config(format!("spin of particle {i} must be +0.5 or -0.5, got {s}")));
        }
    }
    Ok((up, down))
}

pub(crate) fn spin_pair_with(
    sample: &BridgeSample,
    spec: &PotentialSpec,
    q: &Quadrature,
    beta: f64,
    density: &ImportanceDensity,
    groups: &(Vec<usize>, Vec<usize>),
    with_derivative: bool,
) -> SamplePair {
    let Ok(log_p) = density.log_value(&sample.x0) else {
        return SamplePair::degenerate();
    };
    let mut blocks = Vec::with_capacity(2);
    for g in [&groups.0, &groups.1] {
        if g.is_empty() {
            continue;
        }
        match block_value(&sample.permuted(g), spec, q, beta, with_derivative) {
            Ok(b) => blocks.push(b),
            Err(_) => return SamplePair::degenerate(),
        }
    }
    pair_from_blocks(&blocks, log_p, (sample.d * sample.n) as f64, beta)
}

/// Product of per-spin determinants; the n₊!·n₋! normalization is applied
/// by the estimators together with the other constants.
pub fn spin_split_pair(
    sample: &BridgeSample,
    spec: &PotentialSpec,
    grid: &TimeGrid,
    beta: f64,
    density: &ImportanceDensity,
    spins: &[f64],
) -> Result<SamplePair> {
    if !spec.is_separable() {
        return Err(Error::Unsupported("spin-split determinants need a particle-wise separable potential".into()));
    }
    check_shape(sample, grid)?;
    let groups = spin_groups(spins, sample.n)?;
    Ok(spin_pair_with(sample, spec, &Quadrature::new(grid), beta, density, &groups, true))
}
