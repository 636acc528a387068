//! ADMM in single and double precision on the same problem.

use std::time::Instant;

use tvcs::prox::ConstraintSet;
use tvcs::problems::mask::sample_mask;
use tvcs::problems::phantom::shepp_logan;
use tvcs::solvers::{initial_state, Method, SolverConfig};
use tvcs::{GridShape, Result};

/// Largest relative gap between the f32 and f64 iterates.
pub fn run_example() -> Result<f64> {
    let shape = GridShape::d3(16, 16, 16)?;
    let phantom = shepp_logan(&shape)?;
    let mask = sample_mask(&shape, 0.3, 1, true)?.measure(&phantom.image)?;
    let cfg = SolverConfig::from_gamma(Method::Admm, 1.0 / 22.0, 100)?;

    let set64 = ConstraintSet::<f64>::new(&mask);
    let set32 = ConstraintSet::<f32>::new(&mask);
    let mut a = initial_state(Method::Admm, &set64.zero_filled()?);
    let mut b = initial_state(Method::Admm, &set32.zero_filled()?);
    let (mut t64, mut t32) = (0.0, 0.0);
    let mut worst = 0.0f64;
    for k in 1..=cfg.max_iters {
        let t = Instant::now();
        a = a.step(&set64, &cfg.params)?;
        t64 += t.elapsed().as_secs_f64();
        let t = Instant::now();
        b = b.step(&set32, &cfg.params)?;
        t32 += t.elapsed().as_secs_f64();
        let gap = b.primal().cast::<f64>().relative_error(a.primal());
        worst = worst.max(gap);
        if k % 25 == 0 {
            println!(
                "iter {k:>4}: error f64 {:.3e}, f32 {:.3e}, f32 vs f64 {gap:.1e}",
                a.primal().relative_error(&phantom.image),
                b.primal().cast::<f64>().relative_error(&phantom.image)
            );
        }
    }
    println!("wall time f64 {t64:.2}s, f32 {t32:.2}s");
    Ok(worst)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
