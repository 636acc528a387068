//! Writing and reading problem and solution bundles, including loading an
//! f64 solution as f32.

use tvcs::problems::bundle::{ProblemBundle, SolutionBundle};
use tvcs::problems::mask::sample_mask;
use tvcs::problems::phantom::shepp_logan;
use tvcs::solvers::{run, Method, SolverConfig};
use tvcs::{GridShape, Result};

/// The narrowing error of the cross-precision load.
pub fn run_example() -> Result<f64> {
    let dir = std::env::temp_dir().join(format!("tvcs-bundle-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let shape = GridShape::d2(16, 16)?;
    let phantom = shepp_logan(&shape)?;
    let mask = sample_mask(&shape, 0.3, 3, true)?.measure(&phantom.image)?;
    let problem = ProblemBundle::new(mask, Some(phantom))?;
    let problem_path = dir.join("problem.tvcs");
    problem.save(&problem_path)?;
    let loaded = ProblemBundle::load(&problem_path)?;
    println!("problem round trip exact: {}", loaded == problem);

    let cfg = SolverConfig::new(Method::Drs, 0.05, 200)?;
    let out = run::<f64>(&loaded.mask, None, &cfg)?;
    let solution = SolutionBundle { config: cfg, state: out.state, stop: out.stop, problem_sha256: None };
    let solution_path = dir.join("drs.solution.tvcs");
    solution.save(&solution_path)?;
    let (narrow, n) = SolutionBundle::<f32>::load(&solution_path)?;
    println!(
        "loaded as f32 at iteration {}, narrowing error {:.2e}, residual {:.2e}",
        narrow.state.iteration(),
        n.max_error,
        narrow.residual(&loaded)?
    );
    std::fs::remove_dir_all(&dir)?;
    Ok(n.max_error)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
