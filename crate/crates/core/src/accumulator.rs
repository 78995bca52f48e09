//! Mergeable one-pass moment accumulators.

use serde::{Deserialize, Serialize};

/// Count, mean and central sums M2..M4 of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub count: f64,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl Moments {
    pub fn single(x: f64) -> Self {
        Self { count: 1.0, mean: x, ..Default::default() }
    }

    pub fn merge(&self, o: &Moments) -> Moments {
        if self.count == 0.0 {
            return *o;
        }
        if o.count == 0.0 {
            return *self;
        }
        let (na, nb) = (self.count, o.count);
        let n = na + nb;
        let d = o.mean - self.mean;
        let d_n = d / n;
        let mean = self.mean + d_n * nb;
        let t = d * d_n * na * nb;
        let m2 = self.m2 + o.m2 + t;
        let m3 = self.m3 + o.m3 + t * d_n * (na - nb) + 3.0 * d_n * (na * o.m2 - nb * self.m2);
        let m4 = self.m4
            + o.m4
            + t * d_n * d_n * (na * na - na * nb + nb * nb)
            + 6.0 * d_n * d_n * (na * na * o.m2 + nb * nb * self.m2)
            + 4.0 * d_n * (na * o.m3 - nb * self.m3);
        Moments { count: n, mean, m2, m3, m4 }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2.0 {
            0.0
        } else {
            self.m2 / (self.count - 1.0)
        }
    }

    /// Central moment of order `k` (2..=4) with 1/N normalization.
    pub fn central(&self, k: u32) -> f64 {
        if self.count == 0.0 {
            return 0.0;
        }
        match k {
            2 => self.m2 / self.count,
            3 => self.m3 / self.count,
            4 => self.m4 / self.count,
            _ => panic!("central moment order {k} not tracked"),
        }
    }

    pub fn skewness(&self) -> f64 {
        let v = self.central(2);
        if v > 0.0 {
            self.central(3) / v.powf(1.5)
        } else {
            0.0
        }
    }

    pub fn excess_kurtosis(&self) -> f64 {
        let v = self.central(2);
        if v > 0.0 {
            self.central(4) / (v * v) - 3.0
        } else {
            0.0
        }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        tree_reduce(&xs.iter().map(|&x| Moments::single(x)).collect::<Vec<_>>(), Moments::merge).unwrap_or_default()
    }
}

/// Running statistics of per-sample pairs (A_i, B_i).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PairAccumulator {
    pub a: Moments,
    pub b: Moments,
    /// Σ (A − Ā)(B − B̄).
    pub cab: f64,
    pub degenerate: u64,
}

impl PairAccumulator {
    pub fn push(&mut self, a: f64, b: f64) {
        *self = self.merge(&PairAccumulator { a: Moments::single(a), b: Moments::single(b), cab: 0.0, degenerate: 0 });
    }

    pub fn push_degenerate(&mut self) {
        self.push(0.0, 0.0);
        self.degenerate += 1;
    }

    pub fn merge(&self, o: &PairAccumulator) -> PairAccumulator {
        let n = self.a.count + o.a.count;
        let cab = if self.a.count == 0.0 {
            o.cab
        } else if o.a.count == 0.0 {
            self.cab
        } else {
            let da = o.a.mean - self.a.mean;
            let db = o.b.mean - self.b.mean;
            self.cab + o.cab + da * db * self.a.count * o.a.count / n
        };
        PairAccumulator { a: self.a.merge(&o.a), b: self.b.merge(&o.b), cab, degenerate: self.degenerate + o.degenerate }
    }

    pub fn count(&self) -> u64 {
        self.a.count as u64
    }

    pub fn mean_a(&self) -> f64 {
        self.a.mean
    }

    pub fn mean_b(&self) -> f64 {
        self.b.mean
    }

    pub fn sum_a(&self) -> f64 {
        self.a.mean * self.a.count
    }

    pub fn sum_b(&self) -> f64 {
        self.b.mean * self.b.count
    }

    pub fn sum_a2(&self) -> f64 {
        self.a.m2 + self.a.count * self.a.mean * self.a.mean
    }

    pub fn sum_b2(&self) -> f64 {
        self.b.m2 + self.b.count * self.b.mean * self.b.mean
    }

    pub fn sum_ab(&self) -> f64 {
        self.cab + self.a.count * self.a.mean * self.b.mean
    }

    pub fn var_a(&self) -> f64 {
        self.a.variance()
    }

    pub fn var_b(&self) -> f64 {
        self.b.variance()
    }

    pub fn cov_ab(&self) -> f64 {
        if self.a.count < 2.0 {
            0.0
        } else {
            self.cab / (self.a.count - 1.0)
        }
    }
}

/// Balanced pairwise reduction. Splitting at the largest power of two below
/// the length makes every power-of-two prefix reduce to the same value it
/// would have on its own.
pub fn tree_reduce<T: Copy>(items: &[T], merge: impl Fn(&T, &T) -> T + Copy) -> Option<T> {
    match items.len() {
        0 => None,
        1 => Some(items[0]),
        len => {
            let mid = len.next_power_of_two() / 2;
            let left = tree_reduce(&items[..mid], merge)?;
            let right = tree_reduce(&items[mid..], merge)?;
            Some(merge(&left, &right))
        }
    }
}

pub fn tree_merge(accs: &[PairAccumulator]) -> PairAccumulator {
    tree_reduce(accs, PairAccumulator::merge).unwrap_or_default()
}
