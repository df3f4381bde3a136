//! Naive reference simulator over an explicit fitness vector. Every channel
//! (one per individual for mutation, one per ordered pair for resampling and
//! for selection) is enumerated on each step, with no histogram or caching.

use rand::Rng;

pub struct Brute {
    pub x: Vec<i64>,
    mu: f64,
    q: f64,
    gamma: f64,
}

impl Brute {
    pub fn new(n: usize, mu: f64, q: f64, gamma: f64) -> Self {
        Self {
            x: vec![0; n],
            mu,
            q,
            gamma,
        }
    }

    fn channels(&self) -> Vec<(f64, usize, Option<usize>, bool)> {
        let n = self.x.len();
        let nf = n as f64;
        let mut out = Vec::with_capacity(n + 2 * n * n);
        for i in 0..n {
            out.push((self.mu * self.q, i, None, true));
            out.push((self.mu * (1.0 - self.q), i, None, false));
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                // i is replaced by a copy of j.
                out.push((1.0 / nf, i, Some(j), false));
                let gap = (self.x[j] - self.x[i]).max(0) as f64;
                out.push((self.gamma * gap / nf, i, Some(j), false));
            }
        }
        out
    }

    /// Runs to `horizon` and returns the final vector.
    pub fn run<R: Rng>(&mut self, horizon: f64, rng: &mut R) -> &[i64] {
        let mut t = 0.0;
        loop {
            let ch = self.channels();
            let total: f64 = ch.iter().map(|c| c.0).sum();
            let u: f64 = rng.random();
            t += -(1.0 - u).ln() / total;
            if t > horizon {
                return &self.x;
            }
            let mut v = rng.random::<f64>() * total;
            let mut pick = ch.len() - 1;
            for (k, c) in ch.iter().enumerate() {
                if v < c.0 {
                    pick = k;
                    break;
                }
                v -= c.0;
            }
            let (_, i, j, up) = ch[pick];
            match j {
                Some(j) => self.x[i] = self.x[j],
                None => self.x[i] += if up { 1 } else { -1 },
            }
        }
    }
}
