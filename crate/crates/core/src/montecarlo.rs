//! Seeding, Haar-random orthogonal matrices, radial proposals and running
//! mean/variance accumulators.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::fmath::{exp, lgamma, ln, sqrt};

/// One SplitMix64 step, used to derive independent stream seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x5EED)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A Haar-distributed element of `O(k)`: Gram–Schmidt on Gaussian columns.
pub fn haar_orthogonal<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<Vec<f64>> {
    loop {
        let mut cols: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..k).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        let mut ok = true;
        for j in 0..k {
            for i in 0..j {
                let d: f64 = cols[j].iter().zip(&cols[i]).map(|(a, b)| a * b).sum();
                let ci = cols[i].clone();
                for (x, y) in cols[j].iter_mut().zip(&ci) {
                    *x -= d * y;
                }
            }
            let norm = sqrt(cols[j].iter().map(|x| x * x).sum());
            if norm < 1e-10 {
                ok = false;
                break;
            }
            for x in cols[j].iter_mut() {
                *x /= norm;
            }
        }
        if ok {
            let mut m = vec![vec![0.0; k]; k];
            for (j, c) in cols.iter().enumerate() {
                for (i, v) in c.iter().enumerate() {
                    m[i][j] = *v;
                }
            }
            return m;
        }
    }
}

/// Importance proposal `w ~ Gamma(shape, rate)` for integrals against
/// `w^{p} dw` on `(0, ∞)`.
#[derive(Clone, Copy, Debug)]
pub struct RadialProposal {
    shape: f64,
    rate: f64,
    log_norm: f64,
    gamma: Gamma<f64>,
}

impl RadialProposal {
    pub fn new(shape: f64, rate: f64) -> Self {
        RadialProposal {
            shape,
            rate,
            log_norm: lgamma(shape) - shape * ln(rate),
            gamma: Gamma::new(shape, 1.0 / rate).expect("positive shape and rate"),
        }
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.gamma.sample(rng)
    }

    /// `w^p / density(w)`, so that `E[F(w)·weight(w)] = ∫ F(w) w^p dw`.
    pub fn weight(&self, w: f64, p: f64) -> f64 {
        exp(self.log_norm + (p - (self.shape - 1.0)) * ln(w) + self.rate * w)
    }
}

/// Welford mean and variance, mergeable across blocks.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulator {
    pub n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Accumulator) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64) * (o.n as f64) / n as f64;
        self.n = n;
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        self.m2 / (self.n - 1) as f64
    }

    pub fn stderr(&self) -> f64 {
        sqrt(self.variance() / self.n as f64)
    }
}

/// A Monte Carlo estimate in the shape emitted by the CLI.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn from_acc(acc: &Accumulator, samples: u64, seed: u64) -> Self {
        Estimate {
            value: acc.mean(),
            stderr: acc.stderr(),
            samples,
            seed,
        }
    }

    pub fn z_score(&self) -> f64 {
        if self.stderr > 0.0 {
            self.value / self.stderr
        } else if self.value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_orthogonal() {
        let mut r = rng(1);
        let q = haar_orthogonal(&mut r, 5);
        for i in 0..5 {
            for j in 0..5 {
                let d: f64 = (0..5).map(|k| q[k][i] * q[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn proposal_weight_integrates() {
        // ∫ e^{-w} w^3 dw = 6
        let p = RadialProposal::new(2.0, 1.0);
        let mut r = rng(7);
        let mut acc = Accumulator::default();
        for _ in 0..200_000 {
            let w = p.sample(&mut r);
            acc.push(exp(-w) * p.weight(w, 3.0));
        }
        assert!((acc.mean() - 6.0).abs() < 4.0 * acc.stderr());
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut all = Accumulator::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Accumulator::default(), Accumulator::default());
        xs[..30].iter().for_each(|&x| a.push(x));
        xs[30..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean() - all.mean()).abs() < 1e-14);
        assert!((a.variance() - all.variance()).abs() < 1e-12);
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(derive_seed(0, 0), derive_seed(0, 1));
        assert_ne!(derive_seed(0, 0), derive_seed(1, 0));
        assert_eq!(derive_seed(5, 9), derive_seed(5, 9));
    }
}
