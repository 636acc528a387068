use crate::error::Result;
use crate::grid::{Image, VectorField};
use crate::prox::{shrink, ConstraintSet, ProxParams};
use crate::real::Real;
use crate::spectral::gradient;

use super::check_finite;

/// ADMM iterate `(x, y, z)` with `z` the multiplier of `K x = y`.
///
/// `y_prev` is kept only so the state can be translated to DRS with its full
/// history; the iteration never reads it.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState<T: Real = f64> {
    pub x: Image<T>,
    pub y: VectorField<T>,
    pub z: VectorField<T>,
    pub y_prev: Option<VectorField<T>>,
    pub iter: usize,
}

/// One ADMM iteration at `gamma = 1 / tau`:
///
/// ```text
/// x+ = argmin_{A x = b} ||K x - y + tau z||^2
/// y+ = S_tau(K x+ + tau z)
/// z+ = z + (K x+ - y+) / tau
/// ```
pub fn admm_step<T: Real>(state: &AdmmState<T>, set: &ConstraintSet<T>, params: &ProxParams) -> Result<AdmmState<T>> {
    let tau = T::of(params.tau);
    let inv_tau = T::of(1.0 / params.tau);
    let target = state.y.add_scaled(-tau, &state.z);
    let x = set.feasible_primal(&target)?;
    let kx = gradient(&x);
    let y = shrink(&kx.add_scaled(tau, &state.z), params.tau);
    let z = state.z.add_scaled(inv_tau, &kx.sub(&y));
    let iter = state.iter + 1;
    check_finite("admm iterate", x.is_finite() && z.is_finite(), iter)?;
    Ok(AdmmState {
        x,
        y_prev: Some(state.y.clone()),
        y,
        z,
        iter,
    })
}
