//! Theoretical local rate bounds and the consolidated rate report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::VectorField;
use crate::problems::mask::SamplingMask;

use super::angles::{intersection_check, spectral_norm_h_lambda, IntersectionReport};
use super::observed::{observed_rate, RateFit};
use super::support::{detect_support, min_support_magnitude, DEFAULT_SUPPORT_EPS};

/// `||H~^lambda||_2 + 2 tau lambda / min_mag`. With `lambda = 1` this is
/// `cos theta_1 + 2 tau / min_mag`.
pub fn rate_bound(cos_theta1: f64, min_mag: f64, tau: f64, lambda: f64) -> Result<f64> {
    if !(min_mag > 0.0) || !min_mag.is_finite() {
        return Err(Error::Degenerate(format!(
            "smallest support magnitude {min_mag} must be positive (empty support?)"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau = {tau} must be positive")));
    }
    Ok(spectral_norm_h_lambda(cos_theta1, lambda)? + 2.0 * tau * lambda / min_mag)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub cos_theta1: f64,
    pub theta1: f64,
    pub min_mag: f64,
    pub tau: f64,
    pub lambda: f64,
    pub h_lambda_norm: f64,
    pub bound: f64,
    pub observed_rate: Option<f64>,
    pub onset_k: Option<usize>,
    pub fit_r_squared: Option<f64>,
    pub support_count: usize,
    pub zero_count: usize,
    pub intersection: IntersectionReport,
    pub warnings: Vec<String>,
}

impl RateReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Builds the rate report for a converged split field `v*`.
///
/// `distances` are `||q_k - q*||` along a run; without them the observed
/// rate is left empty. Shared directions between the subspaces are excluded
/// from `cos theta_1` and reported as a warning.
pub fn rate_report(
    mask: &SamplingMask,
    v_star: &VectorField<f64>,
    tau: f64,
    lambda: f64,
    distances: Option<(&[f64], f64)>,
) -> Result<RateReport> {
    let support = detect_support(v_star, DEFAULT_SUPPORT_EPS)?;
    let min_mag = min_support_magnitude(v_star, &support)?;
    let intersection = intersection_check(mask, &support)?;
    let mut warnings = Vec::new();
    if intersection.intersection_dim > 0 {
        warnings.push(format!(
            "K Kernel(A) and Kernel(B~) share {} direction(s); cos theta_1 is taken over the rest",
            intersection.intersection_dim
        ));
    }
    if !intersection.converged {
        warnings.push("power iteration for cos theta_1 did not converge".into());
    }
    let cos = intersection.cos_theta1.ok_or(Error::IntersectionFillsSpace {
        count: intersection.intersection_dim,
    })?;
    let h = spectral_norm_h_lambda(cos, lambda)?;
    let bound = rate_bound(cos, min_mag, tau, lambda)?;
    if bound >= 1.0 {
        let msg = format!("rate bound {bound:.6} is not below 1; it certifies no contraction at tau = {tau}");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let fit: Option<RateFit> = match distances {
        Some((d, floor)) => match observed_rate(d, floor) {
            Ok(f) => Some(f),
            Err(e) => {
                warnings.push(e.to_string());
                None
            }
        },
        None => None,
    };
    Ok(RateReport {
        cos_theta1: cos,
        theta1: cos.acos(),
        min_mag,
        tau,
        lambda,
        h_lambda_norm: h,
        bound,
        observed_rate: fit.map(|f| f.rate),
        onset_k: fit.map(|f| f.onset),
        fit_r_squared: fit.map(|f| f.r_squared),
        support_count: support.support_count(),
        zero_count: support.zero_count(),
        intersection,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_cases() {
        assert!((rate_bound(0.9, 1.0, 0.01, 1.0).unwrap() - 0.92).abs() < 1e-15);
        assert!((rate_bound(0.9, 1.0, 1e-14, 1.0).unwrap() - 0.9).abs() < 1e-12);
        assert!(rate_bound(0.9, 0.0, 0.01, 1.0).is_err());
        assert!(rate_bound(0.9, 1.0, 1.0, 1.0).unwrap() >= 1.0);
    }
}
