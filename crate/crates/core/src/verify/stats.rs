use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Pairwise summation in index order; the result depends only on the slice.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(x) / x.len() as f64
}

/// Standard error of the mean, `s/√n`.
pub fn stderr(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(x);
    let dev: Vec<f64> = x.iter().map(|v| (v - m) * (v - m)).collect();
    (pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
}

/// Linear-interpolated quantile of unsorted data.
pub fn quantile(x: &[f64], p: f64) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let h = p.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

/// Mean with its standard error and a percentile-bootstrap 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

impl Estimate {
    pub fn of(x: &[f64], seed: u64) -> Self {
        let (ci_low, ci_high) = bootstrap_ci(x, mean, 200, 0.95, seed);
        Self { mean: mean(x), stderr: stderr(x), ci_low, ci_high, n: x.len() }
    }

    pub fn is_finite(&self) -> bool {
        self.mean.is_finite() && (self.n < 2 || self.stderr.is_finite())
    }
}

/// Percentile bootstrap interval of `stat` at the given level.
pub fn bootstrap_ci(x: &[f64], stat: impl Fn(&[f64]) -> f64, resamples: usize, level: f64, seed: u64) -> (f64, f64) {
    if x.len() < 2 {
        let v = stat(x);
        return (v, v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![0.0; x.len()];
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = x[rng.random_range(0..x.len())];
            }
            stat(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let a = 0.5 * (1.0 - level);
    (quantile(&stats, a), quantile(&stats, 1.0 - a))
}

/// Proportion with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Proportion {
    pub p: f64,
    pub stderr: f64,
    pub hits: usize,
    pub n: usize,
}

impl Proportion {
    pub fn new(hits: usize, n: usize) -> Self {
        let p = if n == 0 { f64::NAN } else { hits as f64 / n as f64 };
        Self { p, stderr: (p * (1.0 - p) / n.max(1) as f64).sqrt(), hits, n }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_rms: f64,
}

impl AffineFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    pub fn is_finite(&self) -> bool {
        self.slope.is_finite() && self.intercept.is_finite()
    }
}

/// Ordinary least squares `y ≈ a + b x`.
pub fn fit_affine(x: &[f64], y: &[f64]) -> AffineFit {
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    AffineFit { slope, intercept, r_squared, residual_rms: (ss_res / x.len().max(1) as f64).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summaries() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&x), 2.5);
        assert!((stderr(&x) - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(quantile(&x, 0.5), 2.5);
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 1.0), 3.0);
        let big: Vec<f64> = (0..1000).map(|i| i as f64 * 0.1).collect();
        assert!((pairwise_sum(&big) - 49950.0).abs() < 1e-9);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 + 0.5 * v).collect();
        let f = fit_affine(&x, &y);
        assert!((f.slope - 0.5).abs() < 1e-14 && (f.intercept - 3.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bootstrap_brackets_mean() {
        let x: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64).collect();
        let e = Estimate::of(&x, 1);
        assert!(e.ci_low < e.mean && e.mean < e.ci_high);
        assert!((e.ci_high - e.ci_low) < 6.0 * e.stderr);
        assert_eq!(Estimate::of(&x, 1), e);
    }
}
