//! Observed DRS rates across relaxation parameters next to the predicted
//! `||H~^lambda||`.

use tvcs::analysis::angles::{intersection_check, spectral_norm_h_lambda};
use tvcs::analysis::observed::{noise_floor, observed_rate};
use tvcs::analysis::support::{detect_support, DEFAULT_SUPPORT_EPS};
use tvcs::analysis::trajectory::{distance_trajectory, reference_solution};
use tvcs::problems::mask::sample_mask;
use tvcs::problems::phantom::staircase;
use tvcs::prox::ProxParams;
use tvcs::solvers::{Method, SolverConfig};
use tvcs::{Real, Result};

/// `(lambda, predicted, observed)` per point.
pub fn run_example() -> Result<Vec<(f64, f64, Option<f64>)>> {
    let phantom = staircase(64, 6, 0)?;
    let mask = sample_mask(phantom.image.shape(), 0.3, 0, true)?.measure(&phantom.image)?;
    let tau = 0.01;
    let mut rows = Vec::new();
    for lambda in [0.6, 1.0, 1.4, 1.8] {
        let mut cfg = SolverConfig::new(Method::Drs, tau, 1_500)?;
        cfg.params = ProxParams::new(tau, lambda, None)?;
        let mut ref_cfg = cfg.clone();
        ref_cfg.max_iters = 20_000;
        ref_cfg.tol = 1e-15;
        let reference = reference_solution(&mask, &ref_cfg)?;
        let support = detect_support(&reference.v, DEFAULT_SUPPORT_EPS)?;
        let cos = intersection_check(&mask, &support)?.cos_theta1.unwrap_or(1.0);
        let predicted = spectral_norm_h_lambda(cos, lambda)?;
        let (d, _) = distance_trajectory::<f64>(&mask, &cfg, &reference.q)?;
        let observed = observed_rate(&d, noise_floor(reference.q.norm(), f64::TOLERANCE_SCALE))
            .ok()
            .map(|f| f.rate);
        println!("lambda {lambda:.1}: ||H~|| {predicted:.5}, observed {observed:?}");
        rows.push((lambda, predicted, observed));
    }
    Ok(rows)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
