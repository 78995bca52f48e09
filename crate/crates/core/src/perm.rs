//! Lexicographic permutation enumeration with running parity.

pub struct Permutations {
    cur: Vec<usize>,
    sign: f64,
    done: bool,
}

impl Permutations {
    pub fn new(n: usize) -> Self {
        Self { cur: (0..n).collect(), sign: 1.0, done: false }
    }
}

impl Iterator for Permutations {
    type Item = (Vec<usize>, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out = (self.cur.clone(), self.sign);
        let p = &mut self.cur;
        let n = p.len();
        let mut i = n.saturating_sub(1);
        while i > 0 && p[i - 1] >= p[i] {
            i -= 1;
        }
        if i == 0 {
            self.done = true;
        } else {
            let mut j = n - 1;
            while p[j] <= p[i - 1] {
                j -= 1;
            }
            p.swap(i - 1, j);
            p[i..].reverse();
            let swaps = 1 + (n - i) / 2;
            if swaps % 2 == 1 {
                self.sign = -self.sign;
            }
        }
        Some(out)
    }
}

/// Parity of a permutation by cycle decomposition.
pub fn parity(p: &[usize]) -> f64 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1.0;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}
