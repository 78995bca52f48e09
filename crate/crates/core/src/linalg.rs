//! Small dense matrices: pivoted LU, determinant and adjugate.

use crate::error::{Error, Result};

/// Condition number beyond which the adjugate is rebuilt from cofactors.
pub const COND_LIMIT: f64 = 1e12;
pub const COFACTOR_MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self { n, data: rows.concat() }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Tr(self · other).
    pub fn trace_product(&self, other: &Mat) -> f64 {
        let n = self.n;
        let mut t = 0.0;
        for i in 0..n {
            for k in 0..n {
                t += self.get(i, k) * other.get(k, i);
            }
        }
        t
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n).map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn minor(&self, row: usize, col: usize) -> Mat {
        let n = self.n;
        let mut data = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != row) {
            for j in (0..n).filter(|&j| j != col) {
                data.push(self.get(i, j));
            }
        }
        Mat { n: n - 1, data }
    }
}

/// In-place LU with partial pivoting. Returns the permutation sign, or None
/// when a zero pivot shows up.
struct Lu {
    lu: Vec<f64>,
    piv: Vec<usize>,
    sign: f64,
    singular: bool,
}

fn factor(a: &Mat) -> Lu {
    let n = a.n;
    let mut lu = a.data.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut singular = false;
    for k in 0..n {
        let mut p = k;
        let mut best = lu[k * n + k].abs();
        for i in k + 1..n {
            let v = lu[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            singular = true;
            continue;
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            piv.swap(k, p);
            sign = -sign;
        }
        let d = lu[k * n + k];
        for i in k + 1..n {
            let f = lu[i * n + k] / d;
            lu[i * n + k] = f;
            if f != 0.0 {
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
    }
    Lu { lu, piv, sign, singular }
}

impl Lu {
    fn det(&self, n: usize) -> f64 {
        if self.singular {
            return 0.0;
        }
        (0..n).fold(self.sign, |acc, i| acc * self.lu[i * n + i])
    }

    fn inverse(&self, n: usize) -> Mat {
        let mut inv = Mat::zeros(n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            for i in 0..n {
                col[i] = if self.piv[i] == j { 1.0 } else { 0.0 };
            }
            for i in 0..n {
                let mut s = col[i];
                for k in 0..i {
                    s -= self.lu[i * n + k] * col[k];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for k in i + 1..n {
                    s -= self.lu[i * n + k] * col[k];
                }
                col[i] = s / self.lu[i * n + i];
            }
            for i in 0..n {
                inv.data[i * n + j] = col[i];
            }
        }
        inv
    }
}

pub fn det(a: &Mat) -> f64 {
    if a.n == 0 {
        return 1.0;
    }
    factor(a).det(a.n)
}

fn cofactor_adjugate(a: &Mat) -> Mat {
    let n = a.n;
    let mut adj = Mat::zeros(n);
    if n == 1 {
        adj.data[0] = 1.0;
        return adj;
    }
    for i in 0..n {
        for j in 0..n {
            let sgn = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj.set(j, i, sgn * det(&a.minor(i, j)));
        }
    }
    adj
}

/// Determinant and adjugate, with adj(A)·A = det(A)·I.
pub fn det_and_adjugate(a: &Mat) -> Result<(f64, Mat)> {
    if !a.is_finite() {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let n = a.n;
    if n == 0 {
        return Ok((1.0, Mat::zeros(0)));
    }
    let lu = factor(a);
    let d = lu.det(n);
    if !lu.singular && d != 0.0 {
        let inv = lu.inverse(n);
        let cond = a.norm1() * inv.norm1();
        if cond.is_finite() && (cond <= COND_LIMIT || n > COFACTOR_MAX_N) {
            let mut adj = inv;
            adj.data.iter_mut().for_each(|v| *v *= d);
            return Ok((d, adj));
        }
    }
    Ok((d, cofactor_adjugate(a)))
}

/// Σ_σ sgn(σ) Π_k A_{k σ(k)} by brute force.
pub fn permutation_det(a: &Mat) -> f64 {
    crate::perm::Permutations::new(a.n)
        .map(|(p, sgn)| p.iter().enumerate().fold(sgn, |acc, (k, &j)| acc * a.get(k, j)))
        .sum()
}
