//! Observed linear rates from `||q_k - q*||` trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_WINDOW: usize = 50;
pub const MIN_R_SQUARED: f64 = 0.999;

/// Log-linear fit `log d_k ~ a + k log(rate)` over `onset..end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    pub onset: usize,
    /// One past the last index used; points at or below the floor are cut.
    pub end: usize,
    pub r_squared: f64,
}

/// Running sums of `k`, `y`, `k^2`, `y^2`, `k y`.
struct Prefix {
    s: Vec<[f64; 5]>,
}

impl Prefix {
    fn new(y: &[f64]) -> Self {
        let mut s = Vec::with_capacity(y.len() + 1);
        let mut acc = [0.0; 5];
        s.push(acc);
        for (k, &v) in y.iter().enumerate() {
            let k = k as f64;
            acc[0] += k;
            acc[1] += v;
            acc[2] += k * k;
            acc[3] += v * v;
            acc[4] += k * v;
            s.push(acc);
        }
        Self { s }
    }

    /// `(slope, r_squared)` of the least-squares line over `a..b`.
    fn fit(&self, a: usize, b: usize) -> Option<(f64, f64)> {
        let n = (b - a) as f64;
        let d: Vec<f64> = (0..5).map(|i| self.s[b][i] - self.s[a][i]).collect();
        let sxx = d[2] - d[0] * d[0] / n;
        let syy = d[3] - d[1] * d[1] / n;
        let sxy = d[4] - d[0] * d[1] / n;
        if sxx <= 0.0 || syy <= 1e-300 {
            return None;
        }
        let slope = sxy / sxx;
        Some((slope, (sxy * sxy / (sxx * syy)).min(1.0)))
    }
}

/// Fits the asymptotic linear rate of a distance sequence `d_k`.
///
/// The sequence is cut at the first entry at or below `floor` (round-off
/// makes anything below it noise). The onset is the smallest `K` such that
/// `log d_k` over `K..end` has at least [`MIN_WINDOW`] points, a decreasing
/// fit and `R^2 >= MIN_R_SQUARED`, i.e. the longest log-linear tail. The
/// first [`MIN_WINDOW`] points of the tail must pass the same test on their
/// own, which keeps a short pre-asymptotic stretch out of a long tail.
pub fn observed_rate(distances: &[f64], floor: f64) -> Result<RateFit> {
    let end = distances
        .iter()
        .position(|&d| !(d > floor) || !d.is_finite())
        .unwrap_or(distances.len());
    if end < MIN_WINDOW {
        return Err(Error::NoLinearRegime(format!(
            "only {end} points above the noise floor {floor:e}, need {MIN_WINDOW}"
        )));
    }
    let logs: Vec<f64> = distances[..end].iter().map(|d| d.ln()).collect();
    let prefix = Prefix::new(&logs);
    for onset in 0..=end - MIN_WINDOW {
        // Prefix sums lose accuracy on very long sequences; refit exactly.
        if let Some((_, r2)) = prefix.fit(onset, end) {
            if r2 < MIN_R_SQUARED - 1e-9 {
                continue;
            }
            let (head_slope, head_r2) = exact_fit(&logs[onset..onset + MIN_WINDOW]);
            if head_slope >= 0.0 || head_r2 < MIN_R_SQUARED {
                continue;
            }
            let (slope, r2) = exact_fit(&logs[onset..end]);
            // A stalled sequence can fit a line with a negligible slope.
            let drop = -slope * (end - onset - 1) as f64;
            if slope < 0.0 && r2 >= MIN_R_SQUARED && drop > 1e-6 {
                return Ok(RateFit {
                    rate: slope.exp(),
                    onset,
                    end,
                    r_squared: r2,
                });
            }
        }
    }
    Err(Error::NoLinearRegime(format!(
        "no window of {MIN_WINDOW}+ points ending at {end} is log-linear with R^2 >= {MIN_R_SQUARED}"
    )))
}

/// Two-pass least squares of `y_k` against `k`.
fn exact_fit(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let kbar = (n - 1.0) / 2.0;
    let ybar = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (k, &v) in y.iter().enumerate() {
        let dk = k as f64 - kbar;
        let dy = v - ybar;
        sxx += dk * dk;
        sxy += dk * dy;
        syy += dy * dy;
    }
    if syy == 0.0 {
        return (0.0, 0.0);
    }
    (sxy / sxx, sxy * sxy / (sxx * syy))
}

/// Default floor for `||q_k - q*||`: relative round-off of the compute path.
pub fn noise_floor(q_star_norm: f64, tolerance_scale: f64) -> f64 {
    1e-10 * tolerance_scale * q_star_norm.max(f64::MIN_POSITIVE)
}
