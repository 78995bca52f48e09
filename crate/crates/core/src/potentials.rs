//! Model potentials: harmonic trap, pairwise Coulomb repulsion and fixed
//! nuclei. Energies carry the physical sign.

use crate::error::{Error, Result};
use crate::paths::{dot, norm2, sub, Point};
use serde::{Deserialize, Serialize};

/// Distances below this are treated as coincident.
pub const SINGULAR_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialKind {
    Harmonic,
    HarmonicCoulomb,
    MolecularCoulomb,
    CustomSeparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nucleus {
    pub position: Point,
    pub charge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nuclei: Vec<Nucleus>,
    /// Per-axis trap frequencies for `CustomSeparable`.
    #[serde(default = "unit_omega")]
    pub omega: Point,
    /// Coefficient of |y|⁴ for `CustomSeparable`.
    #[serde(default)]
    pub quartic: f64,
}

fn unit_omega() -> Point {
    [1.0; 3]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NucleiFactor {
    pub log_value: f64,
    pub value: f64,
}

impl PotentialSpec {
    fn base(kind: PotentialKind, lambda: f64) -> Self {
        Self { kind, lambda, nuclei: Vec::new(), omega: unit_omega(), quartic: 0.0 }
    }

    /// ½|y|² trap.
    pub fn harmonic() -> Self {
        Self::base(PotentialKind::Harmonic, 0.0)
    }

    /// ½|y|² trap plus λ/|y_k − y_j| repulsion.
    pub fn harmonic_coulomb(lambda: f64) -> Self {
        Self::base(PotentialKind::HarmonicCoulomb, lambda)
    }

    pub fn molecular(lambda: f64, nuclei: Vec<Nucleus>) -> Self {
        Self { nuclei, ..Self::base(PotentialKind::MolecularCoulomb, lambda) }
    }

    pub fn custom(omega: Point, quartic: f64) -> Self {
        Self { omega, quartic, ..Self::base(PotentialKind::CustomSeparable, 0.0) }
    }

    /// V ≡ 0.
    pub fn free() -> Self {
        Self::custom([0.0; 3], 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.quartic >= 0.0 && self.quartic.is_finite()) || !self.omega.iter().all(|w| w.is_finite()) {
            return Err(Error::Config("custom trap parameters must be finite with quartic >= 0".into()));
        }
        for (i, a) in self.nuclei.iter().enumerate() {
            if !(a.charge > 0.0 && a.charge.is_finite()) || !a.position.iter().all(|v| v.is_finite()) {
                return Err(Error::Config(format!("nucleus {i} needs a finite position and positive charge")));
            }
            for b in &self.nuclei[i + 1..] {
                if norm2(&sub(&a.position, &b.position)).sqrt() < SINGULAR_DISTANCE {
                    return Err(Error::Config("nuclei positions must be pairwise distinct".into()));
                }
            }
        }
        Ok(())
    }

    /// Coupling actually used; separable kinds ignore `lambda`.
    #[inline]
    pub fn coupling(&self) -> f64 {
        match self.kind {
            PotentialKind::Harmonic | PotentialKind::CustomSeparable => 0.0,
            _ => self.lambda,
        }
    }

    pub fn is_separable(&self) -> bool {
        self.coupling() == 0.0
    }

    /// Per-axis ω² when the whole potential is a quadratic trap.
    pub fn quadratic_axes(&self) -> Option<Point> {
        if !self.is_separable() || !self.nuclei.is_empty() {
            return None;
        }
        match self.kind {
            PotentialKind::Harmonic | PotentialKind::HarmonicCoulomb => Some([1.0; 3]),
            PotentialKind::MolecularCoulomb => Some([0.0; 3]),
            PotentialKind::CustomSeparable if self.quartic == 0.0 => {
                Some([self.omega[0] * self.omega[0], self.omega[1] * self.omega[1], self.omega[2] * self.omega[2]])
            }
            PotentialKind::CustomSeparable => None,
        }
    }

    /// External energy and its gradient at `y`.
    #[inline]
    pub fn external_with_gradient(&self, y: &Point) -> Result<(f64, Point)> {
        let (mut v, mut g) = match self.kind {
            PotentialKind::Harmonic | PotentialKind::HarmonicCoulomb => (0.5 * norm2(y), *y),
            PotentialKind::MolecularCoulomb => (0.0, [0.0; 3]),
            PotentialKind::CustomSeparable => {
                let w = &self.omega;
                let r2 = norm2(y);
                let q = self.quartic;
                let mut g = [0.0; 3];
                let mut v = q * r2 * r2;
                for c in 0..3 {
                    let w2 = w[c] * w[c];
                    v += 0.5 * w2 * y[c] * y[c];
                    g[c] = w2 * y[c] + 4.0 * q * r2 * y[c];
                }
                (v, g)
            }
        };
        for nuc in &self.nuclei {
            let r = sub(y, &nuc.position);
            let d2 = norm2(&r);
            let d = d2.sqrt();
            if d < SINGULAR_DISTANCE {
                return Err(Error::Singular { distance: d });
            }
            let inv = 1.0 / d;
            v -= nuc.charge * inv;
            let f = nuc.charge * inv * inv * inv;
            for c in 0..3 {
                g[c] += f * r[c];
            }
        }
        Ok((v, g))
    }

    pub fn external_term(&self, y: &Point) -> Result<f64> {
        Ok(self.external_with_gradient(y)?.0)
    }

    pub fn interaction_term(&self, y_k: &Point, others: &[Point]) -> Result<f64> {
        let lam = self.coupling();
        if lam == 0.0 {
            return Ok(0.0);
        }
        let mut v = 0.0;
        for y in others {
            let d = norm2(&sub(y_k, y)).sqrt();
            if d < SINGULAR_DISTANCE {
                return Err(Error::Singular { distance: d });
            }
            v += lam / (2.0 * d);
        }
        Ok(v)
    }

    /// Gradient with respect to `y_k` of the external plus interaction terms.
    pub fn gradient_terms(&self, y_k: &Point, others: &[Point]) -> Result<Point> {
        let (_, mut g) = self.external_with_gradient(y_k)?;
        let lam = self.coupling();
        if lam != 0.0 {
            for y in others {
                let r = sub(y_k, y);
                let d = norm2(&r).sqrt();
                if d < SINGULAR_DISTANCE {
                    return Err(Error::Singular { distance: d });
                }
                let f = -lam / (2.0 * d * d * d);
                for c in 0..3 {
                    g[c] += f * r[c];
                }
            }
        }
        Ok(g)
    }

    /// ½ Σ_i Σ_{j≠i} Z_i Z_j / |X_i − X_j|.
    pub fn nuclear_repulsion(&self) -> f64 {
        let mut e = 0.0;
        for (i, a) in self.nuclei.iter().enumerate() {
            for b in &self.nuclei[i + 1..] {
                e += a.charge * b.charge / norm2(&sub(&a.position, &b.position)).sqrt();
            }
        }
        e
    }

    pub fn nuclei_factor(&self, beta: f64) -> NucleiFactor {
        let log_value = -beta * self.nuclear_repulsion();
        NucleiFactor { log_value, value: log_value.exp() }
    }

    /// Total potential of a configuration, each unordered pair counted once.
    pub fn total_energy(&self, ys: &[Point]) -> Result<f64> {
        let mut e = 0.0;
        for (k, y) in ys.iter().enumerate() {
            e += self.external_term(y)?;
            let others: Vec<Point> = ys.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, p)| *p).collect();
            e += self.interaction_term(y, &others)?;
        }
        Ok(e)
    }
}

#[inline]
pub(crate) fn pair_term(lam: f64, y: &Point, partner: &Point) -> Result<(f64, Point)> {
    let r = sub(y, partner);
    let d2 = dot(&r, &r);
    let d = d2.sqrt();
    if d < SINGULAR_DISTANCE {
        return Err(Error::Singular { distance: d });
    }
    let inv = 1.0 / d;
    let f = -0.5 * lam * inv * inv * inv;
    Ok((0.5 * lam * inv, [f * r[0], f * r[1], f * r[2]]))
}
