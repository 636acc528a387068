//! Dual-certificate checks on a DRS fixed point `q* = v* + tau eta`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::VectorField;
use crate::prox::{shrink, ConstraintSet, ProxParams};
use crate::solvers::{drs_step, DrsState};

use super::support::{detect_support, SupportSet, DEFAULT_SUPPORT_EPS};

/// Fixed points whose margins (relative to `tau`) do not exceed this are
/// classified as boundary.
pub const INTERIOR_MARGIN: f64 = 1e-6;

/// `H_tau(q)` with `v = shrink(q)`, the plain (unrelaxed) DRS operator.
pub fn drs_operator(q: &VectorField<f64>, set: &ConstraintSet<f64>, tau: f64) -> Result<VectorField<f64>> {
    let state = DrsState {
        q: q.clone(),
        v: shrink(q, tau),
        u: crate::grid::Image::zeros(q.shape()),
        prev: None,
        iter: 0,
    };
    Ok(drs_step(&state, set, &ProxParams::with_tau(tau)?)?.q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub residual: f64,
    pub passed: bool,
}

impl Check {
    fn new(residual: f64, tol: f64) -> Self {
        Self { residual, passed: residual <= tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    Interior,
    Boundary,
}

/// Per-condition results of [`verify_fixed_point`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub tau: f64,
    pub tol: f64,
    pub support_count: usize,
    pub zero_count: usize,
    /// `max_j ||eta_j - v*_j / ||v*_j|| ||` over the support.
    pub subgradient_on_support: Check,
    /// `max(0, max_j ||eta_j|| - 1)` over the zero set.
    pub subgradient_off_support: Check,
    /// Norm of the off-mask spectrum of `K* eta`.
    pub range_condition: Check,
    /// `||H_tau(q*) - q*|| / (1 + ||q*||)`.
    pub stationarity: Check,
    /// `min_{j in zero set} (tau - ||q*_j||)`; `+inf` when the zero set is empty.
    pub off_margin: f64,
    /// `min_{j in support} (||q*_j|| - tau)`.
    pub on_margin: f64,
    pub kind: FixedPointKind,
}

impl CertificateReport {
    pub fn all_passed(&self) -> bool {
        self.subgradient_on_support.passed
            && self.subgradient_off_support.passed
            && self.range_condition.passed
            && self.stationarity.passed
    }

    pub fn is_interior(&self) -> bool {
        self.kind == FixedPointKind::Interior
    }
}

/// Checks that `eta = (q* - v*)/tau` is a dual certificate for `v*` and
/// classifies `q*` as interior or boundary. The support of `v*` is detected
/// with the default relative threshold.
pub fn verify_fixed_point(
    q: &VectorField<f64>,
    v: &VectorField<f64>,
    tau: f64,
    set: &ConstraintSet<f64>,
    tol: f64,
) -> Result<CertificateReport> {
    let support = detect_support(v, DEFAULT_SUPPORT_EPS)?;
    verify_with_support(q, v, tau, set, tol, &support)
}

pub fn verify_with_support(
    q: &VectorField<f64>,
    v: &VectorField<f64>,
    tau: f64,
    set: &ConstraintSet<f64>,
    tol: f64,
    support: &SupportSet,
) -> Result<CertificateReport> {
    set.shape().check_same(q.shape(), "certificate q*")?;
    set.shape().check_same(v.shape(), "certificate v*")?;
    let eta = q.sub(v).scaled(1.0 / tau);

    let mut on = 0.0f64;
    let mut off = 0.0f64;
    let mut off_margin = f64::INFINITY;
    let mut on_margin = f64::INFINITY;
    for j in 0..q.shape().len() {
        let qn = q.block_norm(j);
        if support.is_zero(j) {
            off = off.max(eta.block_norm(j) - 1.0);
            off_margin = off_margin.min(tau - qn);
        } else {
            let vj = v.block(j);
            let vn = v.block_norm(j);
            let ej = eta.block(j);
            let gap: f64 = vj.iter().zip(&ej).map(|(a, e)| (e - a / vn).powi(2)).sum();
            on = on.max(gap.sqrt());
            on_margin = on_margin.min(qn - tau);
        }
    }

    let range = set.range_residual(&eta)?;
    let stationarity = drs_operator(q, set, tau)?.distance(q) / (1.0 + q.norm());
    let interior = off_margin > INTERIOR_MARGIN * tau && on_margin > INTERIOR_MARGIN * tau;
    Ok(CertificateReport {
        tau,
        tol,
        support_count: support.support_count(),
        zero_count: support.zero_count(),
        subgradient_on_support: Check::new(on, tol),
        subgradient_off_support: Check::new(off.max(0.0), tol),
        range_condition: Check::new(range, tol),
        stationarity: Check::new(stationarity, tol),
        off_margin,
        on_margin,
        kind: if interior { FixedPointKind::Interior } else { FixedPointKind::Boundary },
    })
}
