//! Bootstrap standard errors and least-squares lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Resamples used for every bootstrap estimate.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Bootstrap standard error of `statistic` over `BOOTSTRAP_RESAMPLES`
/// resamples drawn with a generator seeded by `seed`.
pub fn bootstrap_se(xs: &[f64], seed: u64, statistic: impl Fn(&[f64]) -> f64) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![0.0; n];
    let stats: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.random_range(0..n)];
            }
            statistic(&buf)
        })
        .collect();
    let m = mean(&stats);
    (stats.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (stats.len() - 1) as f64).sqrt()
}

pub fn bootstrap_mean_se(xs: &[f64], seed: u64) -> f64 {
    bootstrap_se(xs, seed, mean)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`. `None` for fewer than
/// two points or constant `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LineFit { slope, intercept, r_squared })
}
