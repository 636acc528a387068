//! Reference fixed points and `||q_k - q*||` trajectories.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::grid::{Image, VectorField};
use crate::problems::mask::SamplingMask;
use crate::prox::ConstraintSet;
use crate::real::Real;
use crate::solvers::{initial_state, run_with, SolverConfig, SolverState, StopReason};

use super::subspace::{block_rows, SubspacePair};

/// A long run's final state standing in for the exact fixed point.
#[derive(Debug, Clone)]
pub struct Reference {
    pub state: SolverState<f64>,
    pub q: VectorField<f64>,
    pub v: VectorField<f64>,
    pub u: Image<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    /// Relative change of `q` at the last step.
    pub final_change: f64,
}

/// Runs `config` (in f64, from the zero-filled image) to convergence or the
/// iteration cap.
pub fn reference_solution(mask: &SamplingMask, config: &SolverConfig) -> Result<Reference> {
    let set = ConstraintSet::<f64>::new(mask);
    let init = initial_state(config.method, &set.zero_filled()?);
    let out = run_with(&set, init, None, config, |_, _| Ok(()), None)?;
    let tau = config.tau();
    Ok(Reference {
        q: out.state.q_equivalent(tau),
        v: out.state.split_field(tau),
        u: out.state.primal().clone(),
        iterations: out.state.iteration(),
        stop: out.stop,
        final_change: out.final_change,
        state: out.state,
    })
}

/// `||q_k - q*||` for `k = 0..=max_iters` of a run from the zero-filled
/// image, plus the final state. Convergence stopping is disabled so the
/// sequence has a fixed length.
pub fn distance_trajectory<T: Real>(
    mask: &SamplingMask,
    config: &SolverConfig,
    q_star: &VectorField<f64>,
) -> Result<(Vec<f64>, SolverState<T>)> {
    let set = ConstraintSet::<T>::new(mask);
    let init = initial_state(config.method, &set.zero_filled()?);
    let mut cfg = config.clone();
    cfg.tol = 0.0;
    cfg.log_every = cfg.max_iters.max(1);
    let mut out = Vec::with_capacity(cfg.max_iters + 1);
    let run = run_with(
        &set,
        init,
        None,
        &cfg,
        |_, q| {
            out.push(q.cast::<f64>().distance(q_star));
            Ok(())
        },
        None,
    )?;
    Ok((out, run.state))
}

/// Orthonormal basis of the fixed-point freedom subspace together with the
/// flat row indices of the zero blocks it lives on.
pub struct FreedomProjector {
    basis: DMatrix<f64>,
    rows: Vec<usize>,
}

impl FreedomProjector {
    pub fn new(pair: &SubspacePair) -> Self {
        Self {
            basis: pair.fixed_point_freedom(),
            rows: block_rows(pair.support.shape(), &pair.support.zero_indices()),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Norm of the projection of `diff` onto the subspace.
    pub fn component(&self, diff: &VectorField<f64>) -> f64 {
        if self.basis.ncols() == 0 {
            return 0.0;
        }
        let flat = diff.to_flat();
        let restricted = DVector::from_iterator(self.rows.len(), self.rows.iter().map(|&r| flat[r]));
        (self.basis.transpose() * restricted).norm()
    }
}
