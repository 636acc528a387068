//! Local linear rate of DRS on a 1D staircase: fixed-point certificate,
//! principal angle, rate bound and the observed contraction.

use tvcs::analysis::certificate::verify_fixed_point;
use tvcs::analysis::observed::noise_floor;
use tvcs::analysis::rate::{rate_report, RateReport};
use tvcs::analysis::trajectory::{distance_trajectory, reference_solution};
use tvcs::problems::mask::sample_mask;
use tvcs::problems::phantom::staircase;
use tvcs::prox::ConstraintSet;
use tvcs::solvers::{Method, SolverConfig};
use tvcs::{Real, Result};

pub fn run_example() -> Result<RateReport> {
    let phantom = staircase(64, 6, 0)?;
    let mask = sample_mask(phantom.image.shape(), 0.3, 0, true)?.measure(&phantom.image)?;
    let tau = 0.01;

    let mut ref_cfg = SolverConfig::new(Method::Drs, tau, 20_000)?;
    ref_cfg.tol = 1e-15;
    let reference = reference_solution(&mask, &ref_cfg)?;
    println!(
        "reference: {} iterations, error vs phantom {:.2e}",
        reference.iterations,
        reference.u.relative_error(&phantom.image)
    );

    let set = ConstraintSet::<f64>::new(&mask);
    let cert = verify_fixed_point(&reference.q, &reference.v, tau, &set, 1e-6)?;
    println!("certificate passed: {}, fixed point {:?}", cert.all_passed(), cert.kind);

    let (distances, _) = distance_trajectory::<f64>(&mask, &SolverConfig::new(Method::Drs, tau, 1_000)?, &reference.q)?;
    let floor = noise_floor(reference.q.norm(), f64::TOLERANCE_SCALE);
    let report = rate_report(&mask, &reference.v, tau, 1.0, Some((&distances, floor)))?;
    println!(
        "cos theta1 {:.5}, bound {:.4}, observed {:?} from k = {:?}",
        report.cos_theta1, report.bound, report.observed_rate, report.onset_k
    );
    for w in &report.warnings {
        println!("  warning: {w}");
    }
    Ok(report)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
