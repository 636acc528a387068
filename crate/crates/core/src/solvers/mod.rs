//! Iteration engines and the variable translation between them.
//!
//! All three methods are run with the coupling `gamma = sigma = 1 / tau`,
//! under which they generate the same sequence up to a change of variables.
//! The common currency is the DRS auxiliary field `q`: every state exposes its
//! `q` equivalent, which drives stopping, logging and rate measurement.

mod admm;
mod drs;
pub mod log;
mod pdhg;
mod run;
mod translate;

use serde::{Deserialize, Serialize};

pub use admm::{admm_step, AdmmState};
pub use drs::{drs_step, DrsState};
pub use log::{ConvergenceLog, LogRecord, LogWriter};
pub use pdhg::{pdhg_step, PdhgState};
pub use run::{initial_state, run, run_with, RunOutcome, StopReason};
pub use translate::translate_state;

use crate::error::{Error, Result};
use crate::grid::{Image, VectorField};
use crate::prox::{ConstraintSet, ProxParams};
use crate::real::{Precision, Real};
use crate::spectral::gradient;

/// Default stopping tolerance on `||q_k - q_{k-1}|| / ||q_k||`.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Growth of the step size over its first value that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Admm,
    Drs,
    Pdhg,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Admm, Method::Drs, Method::Pdhg];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Admm => "admm",
            Method::Drs => "drs",
            Method::Pdhg => "pdhg",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "admm" => Ok(Method::Admm),
            "drs" => Ok(Method::Drs),
            "pdhg" => Ok(Method::Pdhg),
            other => Err(format!("unknown method `{other}` (expected admm, drs or pdhg)")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub params: ProxParams,
    pub max_iters: usize,
    /// Stop once `||q_k - q_{k-1}|| / ||q_k||` falls to this value. Zero
    /// disables the test.
    pub tol: f64,
    pub precision: Precision,
    /// Record every `log_every`-th iteration (the last one is always kept).
    pub log_every: usize,
}

impl SolverConfig {
    pub fn new(method: Method, tau: f64, max_iters: usize) -> Result<Self> {
        let cfg = Self {
            method,
            params: ProxParams::with_tau(tau)?,
            max_iters,
            tol: DEFAULT_TOL,
            precision: Precision::F64,
            log_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Configuration from the ADMM/PDHG step `gamma`; `tau = 1 / gamma`.
    pub fn from_gamma(method: Method, gamma: f64, max_iters: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
        }
        Self::new(method, 1.0 / gamma, max_iters)
    }

    pub fn tau(&self) -> f64 {
        self.params.tau
    }

    pub fn gamma(&self) -> f64 {
        1.0 / self.params.tau
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.method != Method::Drs && (self.params.lambda != 1.0 || self.params.alpha.is_some()) {
            return Err(Error::InvalidParameter(format!(
                "relaxation and regularization are only implemented for drs, not {}",
                self.method
            )));
        }
        if self.log_every == 0 {
            return Err(Error::InvalidParameter("log_every must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} is negative", self.tol)));
        }
        Ok(())
    }
}

/// State of any of the three methods.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverState<T: Real = f64> {
    Admm(AdmmState<T>),
    Drs(DrsState<T>),
    Pdhg(PdhgState<T>),
}

impl<T: Real> SolverState<T> {
    pub fn method(&self) -> Method {
        match self {
            SolverState::Admm(_) => Method::Admm,
            SolverState::Drs(_) => Method::Drs,
            SolverState::Pdhg(_) => Method::Pdhg,
        }
    }

    pub fn iteration(&self) -> usize {
        match self {
            SolverState::Admm(s) => s.iter,
            SolverState::Drs(s) => s.iter,
            SolverState::Pdhg(s) => s.iter,
        }
    }

    /// Current primal image (`x`, `u`, or the DRS reconstruction).
    pub fn primal(&self) -> &Image<T> {
        match self {
            SolverState::Admm(s) => &s.x,
            SolverState::Drs(s) => &s.u,
            SolverState::Pdhg(s) => &s.u,
        }
    }

    /// The DRS auxiliary field equivalent to this state.
    pub fn q_equivalent(&self, tau: f64) -> VectorField<T> {
        let t = T::of(tau);
        match self {
            SolverState::Drs(s) => s.q.clone(),
            SolverState::Admm(s) => s.y.add_scaled(t, &s.z),
            SolverState::Pdhg(s) => {
                let two_v_minus_w = s.v.map2(&s.w, |v, w| v + v - w);
                gradient(&s.u).add_scaled(t, &two_v_minus_w)
            }
        }
    }

    /// The split variable `v = prox_f(q)`, i.e. ADMM's `y`: the sparse
    /// gradient estimate.
    pub fn split_field(&self, tau: f64) -> VectorField<T> {
        let t = T::of(tau);
        match self {
            SolverState::Drs(s) => s.v.clone(),
            SolverState::Admm(s) => s.y.clone(),
            SolverState::Pdhg(s) => gradient(&s.u).add_scaled(t, &s.v.sub(&s.w)),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            SolverState::Admm(s) => s.x.is_finite() && s.y.is_finite() && s.z.is_finite(),
            SolverState::Drs(s) => s.q.is_finite() && s.v.is_finite() && s.u.is_finite(),
            SolverState::Pdhg(s) => s.u.is_finite() && s.v.is_finite() && s.w.is_finite(),
        }
    }

    /// One iteration of the state's own method.
    pub fn step(&self, set: &ConstraintSet<T>, params: &ProxParams) -> Result<Self> {
        Ok(match self {
            SolverState::Admm(s) => SolverState::Admm(admm_step(s, set, params)?),
            SolverState::Drs(s) => SolverState::Drs(drs_step(s, set, params)?),
            SolverState::Pdhg(s) => SolverState::Pdhg(pdhg_step(s, set, params)?),
        })
    }

    /// Converts every array to another precision.
    pub fn cast<U: Real>(&self) -> SolverState<U> {
        match self {
            SolverState::Admm(s) => SolverState::Admm(AdmmState {
                x: s.x.cast(),
                y: s.y.cast(),
                z: s.z.cast(),
                y_prev: s.y_prev.as_ref().map(|y| y.cast()),
                iter: s.iter,
            }),
            SolverState::Drs(s) => SolverState::Drs(DrsState {
                q: s.q.cast(),
                v: s.v.cast(),
                u: s.u.cast(),
                prev: s.prev.as_ref().map(|(q, v)| (q.cast(), v.cast())),
                iter: s.iter,
            }),
            SolverState::Pdhg(s) => SolverState::Pdhg(PdhgState {
                u: s.u.cast(),
                v: s.v.cast(),
                w: s.w.cast(),
                iter: s.iter,
            }),
        }
    }
}

pub(crate) fn check_finite(what: &str, ok: bool, iter: usize) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} at iteration {iter}")))
    }
}
