//! Exact recovery of a 64x64 Shepp-Logan phantom from 30% of its Fourier
//! coefficients with G-prox PDHG.

use tvcs::problems::mask::sample_mask;
use tvcs::problems::phantom::shepp_logan;
use tvcs::solvers::{run, Method, SolverConfig};
use tvcs::{GridShape, Result};

/// Final relative error against the phantom.
pub fn run_example() -> Result<f64> {
    let shape = GridShape::d2(64, 64)?;
    let phantom = shepp_logan(&shape)?;
    let mask = sample_mask(&shape, 0.3, 1, true)?.measure(&phantom.image)?;
    println!("observed {} of {} coefficients", mask.len(), shape.len());

    let mut cfg = SolverConfig::from_gamma(Method::Pdhg, 100.0, 10_000)?;
    cfg.log_every = 100;
    let out = run::<f64>(&mask, Some(&phantom.image), &cfg)?;
    for r in &out.log.records {
        println!("  iter {:>5}  rel_err {:.3e}  tv {:.4}", r.iter, r.rel_err.unwrap_or(f64::NAN), r.tv);
    }
    let err = out.state.primal().relative_error(&phantom.image);
    println!("{:?} after {} iterations, relative error {err:.2e}", out.stop, out.state.iteration());
    Ok(err)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
