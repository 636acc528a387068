use crate::error::Result;
use crate::grid::{Image, VectorField};
use crate::prox::{ball_projection, ConstraintSet, ProxParams};
use crate::real::Real;
use crate::spectral::gradient;

use super::check_finite;

/// G-prox PDHG iterate: primal `u`, dual `v` in the unit ball, and the
/// extrapolated dual `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdhgState<T: Real = f64> {
    pub u: Image<T>,
    pub v: VectorField<T>,
    pub w: VectorField<T>,
    pub iter: usize,
}

/// One G-prox PDHG iteration with `sigma = 1 / tau`:
///
/// ```text
/// uhat+ = b on the mask,  uhat - tau sum_i conj(lambda^i) what^i / sum_i |lambda^i|^2 off it
/// v+    = P_ball(v + K u+ / tau)
/// w+    = 2 v+ - v
/// ```
pub fn pdhg_step<T: Real>(state: &PdhgState<T>, set: &ConstraintSet<T>, params: &ProxParams) -> Result<PdhgState<T>> {
    let u = set.pdhg_primal(&state.u, &state.w, params.tau)?;
    let sigma = T::of(1.0 / params.tau);
    let v = ball_projection(&state.v.add_scaled(sigma, &gradient(&u)));
    let w = v.map2(&state.v, |a, b| a + a - b);
    let iter = state.iter + 1;
    check_finite("pdhg iterate", u.is_finite() && v.is_finite(), iter)?;
    Ok(PdhgState { u, v, w, iter })
}
