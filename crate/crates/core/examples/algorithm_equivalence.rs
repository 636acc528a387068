//! ADMM, Douglas-Rachford and G-prox PDHG started from equivalent states
//! produce the same sequence.

use tvcs::cli::{compare_methods, CompareReport};
use tvcs::problems::bundle::ProblemBundle;
use tvcs::problems::mask::sample_mask;
use tvcs::problems::phantom::staircase;
use tvcs::Result;

pub fn run_example() -> Result<CompareReport> {
    let phantom = staircase(32, 4, 2)?;
    let mask = sample_mask(phantom.image.shape(), 0.3, 2, true)?.measure(&phantom.image)?;
    let problem = ProblemBundle::new(mask, Some(phantom))?;
    let report = compare_methods(&problem, 0.05, 200)?;
    println!(
        "over {} iterations the largest relative mismatch is q {:.1e}, K u {:.1e}, v {:.1e}",
        report.iterations, report.max_q_mismatch, report.max_primal_mismatch, report.max_split_mismatch
    );
    for (m, err) in &report.final_rel_err {
        println!("  {m}: relative error {:.3e}", err.unwrap_or(f64::NAN));
    }
    Ok(report)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
