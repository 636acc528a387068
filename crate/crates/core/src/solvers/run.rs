use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Image, VectorField};
use crate::problems::mask::SamplingMask;
use crate::prox::ConstraintSet;
use crate::real::Real;
use crate::spectral::{gradient, tv_norm};

use super::log::{ConvergenceLog, LogRecord, LogWriter};
const EARLY_STEPS: usize = 10;

use super::{AdmmState, DrsState, Method, PdhgState, SolverConfig, SolverState, DIVERGENCE_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct RunOutcome<T: Real = f64> {
    pub state: SolverState<T>,
    pub log: ConvergenceLog,
    pub stop: StopReason,
    /// `||q_k - q_{k-1}|| / ||q_k||` at the last iteration.
    pub final_change: f64,
    pub seconds: f64,
}

/// The mutually consistent starting point of all three methods from the
/// image `u0`: `v = w = 0` for PDHG, `(x, y, z) = (u0, K u0, 0)` for ADMM,
/// `q = v = K u0` with zero history for DRS.
pub fn initial_state<T: Real>(method: Method, u0: &Image<T>) -> SolverState<T> {
    let shape = u0.shape();
    let ku = gradient(u0);
    match method {
        Method::Pdhg => SolverState::Pdhg(PdhgState {
            u: u0.clone(),
            v: VectorField::zeros(shape),
            w: VectorField::zeros(shape),
            iter: 0,
        }),
        Method::Admm => SolverState::Admm(AdmmState {
            x: u0.clone(),
            y: ku,
            z: VectorField::zeros(shape),
            y_prev: None,
            iter: 0,
        }),
        Method::Drs => SolverState::Drs(DrsState {
            q: ku.clone(),
            v: ku,
            u: u0.clone(),
            prev: Some((VectorField::zeros(shape), VectorField::zeros(shape))),
            iter: 0,
        }),
    }
}

/// Runs `config.method` from the zero-filled reconstruction `F* M^T b`.
pub fn run<T: Real>(
    mask: &SamplingMask,
    reference: Option<&Image<f64>>,
    config: &SolverConfig,
) -> Result<RunOutcome<T>> {
    config.validate()?;
    let set = ConstraintSet::<T>::new(mask);
    let init = initial_state(config.method, &set.zero_filled()?);
    run_with(&set, init, reference, config, |_, _| Ok(()), None)
}

/// Iterates from `init`. `observer` sees every state (including the initial
/// one) together with its `q` equivalent; records go to `writer` as they are
/// made.
pub fn run_with<T: Real>(
    set: &ConstraintSet<T>,
    init: SolverState<T>,
    reference: Option<&Image<f64>>,
    config: &SolverConfig,
    mut observer: impl FnMut(&SolverState<T>, &VectorField<T>) -> Result<()>,
    mut writer: Option<&mut LogWriter>,
) -> Result<RunOutcome<T>> {
    config.validate()?;
    if init.method() != config.method {
        return Err(Error::InvalidParameter(format!(
            "initial state is {} but the configuration asks for {}",
            init.method(),
            config.method
        )));
    }
    if let Some(r) = reference {
        set.shape().check_same(r.shape(), "reference image")?;
    }
    let tau = config.tau();
    let start = Instant::now();
    let mut log = ConvergenceLog::default();
    let record = |state: &SolverState<T>, log: &mut ConvergenceLog, writer: &mut Option<&mut LogWriter>| -> Result<()> {
        let u = state.primal();
        let rec = LogRecord {
            iter: state.iteration(),
            rel_err: reference.map(|r| u.cast::<f64>().relative_error(r)),
            q_dist: None,
            tv: tv_norm(u),
            residual: set.residual(u)?,
            seconds: start.elapsed().as_secs_f64(),
        };
        if let Some(w) = writer.as_deref_mut() {
            w.append(&rec)?;
        }
        log.push(rec);
        Ok(())
    };

    let mut state = init;
    let mut q_prev = state.q_equivalent(tau);
    observer(&state, &q_prev)?;
    record(&state, &mut log, &mut writer)?;
    let mut early_max = 0.0f64;
    let mut final_change = f64::NAN;
    let mut stop = StopReason::MaxIters;

    for k in 1..=config.max_iters {
        state = state.step(set, &config.params)?;
        let q = state.q_equivalent(tau);
        if !q.is_finite() {
            return Err(Error::NonFinite(format!("q at iteration {k}")));
        }
        let change = q.distance(&q_prev);
        let norm = q.norm();
        final_change = if norm > 0.0 { change / norm } else { change };
        // Divergence is judged against the largest early step; the first
        // step from the default initial state has length zero.
        if k <= EARLY_STEPS {
            early_max = early_max.max(change);
        } else if change > DIVERGENCE_FACTOR * early_max {
            return Err(Error::Diverged(format!(
                "step length {change:e} at iteration {k} is over {DIVERGENCE_FACTOR:e} times the early maximum {early_max:e}"
            )));
        }
        observer(&state, &q)?;
        // From the default initial state the first step only moves v, not q.
        let converged = k > 1 && config.tol > 0.0 && final_change <= config.tol;
        if converged {
            stop = StopReason::Converged;
        }
        if k % config.log_every == 0 || converged || k == config.max_iters {
            record(&state, &mut log, &mut writer)?;
        }
        if converged {
            break;
        }
        q_prev = q;
    }

    Ok(RunOutcome {
        state,
        log,
        stop,
        final_change,
        seconds: start.elapsed().as_secs_f64(),
    })
}
