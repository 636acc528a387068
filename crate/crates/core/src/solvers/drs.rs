use crate::error::Result;
use crate::grid::{Image, VectorField};
use crate::prox::{ConstraintSet, ProxParams};
use crate::real::Real;
use crate::spectral::gradient;

use super::check_finite;

/// Douglas-Rachford iterate on the double dual.
///
/// `v` is `prox_f(q)` for every state produced by [`drs_step`]; an initial
/// state may carry any `v`. `u` is the primal image reconstructed in the last
/// step, and `prev` the previous `(q, v)` pair, which only the translation
/// to the other methods needs.
#[derive(Debug, Clone, PartialEq)]
pub struct DrsState<T: Real = f64> {
    pub q: VectorField<T>,
    pub v: VectorField<T>,
    pub u: Image<T>,
    pub prev: Option<(VectorField<T>, VectorField<T>)>,
    pub iter: usize,
}

/// One step of `H^lambda_tau = (1 - lambda) I + lambda (I + refl_h refl_f) / 2`:
///
/// ```text
/// g  = prox_h(2 v - q)
/// q+ = (1 - lambda) q + lambda (g + q - v)
/// v+ = prox_f(q+)
/// ```
///
/// With `params.alpha` set, `prox_f` is the regularized prox.
pub fn drs_step<T: Real>(state: &DrsState<T>, set: &ConstraintSet<T>, params: &ProxParams) -> Result<DrsState<T>> {
    let reflected = state.v.map2(&state.q, |v, q| v + v - q);
    let u = set.feasible_primal(&reflected)?;
    let g = gradient(&u);
    let full = g.add(&state.q).sub(&state.v);
    let q = if params.lambda == 1.0 {
        full
    } else {
        let lambda = T::of(params.lambda);
        let keep = T::of(1.0 - params.lambda);
        state.q.map2(&full, |a, b| keep * a + lambda * b)
    };
    let v = params.prox_f(&q);
    let iter = state.iter + 1;
    check_finite("drs iterate", q.is_finite() && u.is_finite(), iter)?;
    Ok(DrsState {
        prev: Some((state.q.clone(), state.v.clone())),
        q,
        v,
        u,
        iter,
    })
}
