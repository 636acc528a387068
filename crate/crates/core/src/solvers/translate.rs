use crate::error::{Error, Result};
use crate::grid::VectorField;
use crate::prox::ConstraintSet;
use crate::real::Real;
use crate::spectral::gradient;

use super::{AdmmState, DrsState, Method, PdhgState, SolverState};

/// Maps a state to the equivalent state of another method at step `tau`.
///
/// The correspondences, with `d = q_{k-1} - v_{k-1}`:
///
/// | quantity      | ADMM                     | DRS            | PDHG |
/// |---------------|--------------------------|----------------|------|
/// | primal        | `K x_k`                  | `q_k - d`      | `K u_k` |
/// | dual          | `z_k`                    | `(q_k - v_k)/tau` | `v_k` |
/// | extragradient | `(K x_k + tau z_k - y_k)/tau` | `(2 q_k - d - 2 v_k)/tau` | `w_k` |
///
/// DRS states need their previous pair to leave DRS. A DRS state built from
/// ADMM or PDHG carries the history `(d + y_{k-1}, y_{k-1})` when the
/// previous split variable is known and `(d, 0)` otherwise, which leaves `d`
/// (the only thing the table uses) exact.
pub fn translate_state<T: Real>(
    state: &SolverState<T>,
    to: Method,
    tau: f64,
    set: &ConstraintSet<T>,
) -> Result<SolverState<T>> {
    if state.method() == to {
        return Ok(state.clone());
    }
    let t = T::of(tau);
    let inv_t = T::of(1.0 / tau);
    match state {
        SolverState::Drs(s) => {
            let (q_prev, v_prev) = s.prev.as_ref().ok_or(Error::MissingHistory)?;
            let d = q_prev.sub(v_prev);
            let x = set.feasible_primal(&s.q.sub(&d))?;
            let z = s.q.sub(&s.v).scaled(inv_t);
            match to {
                Method::Admm => Ok(SolverState::Admm(AdmmState {
                    x,
                    y: s.v.clone(),
                    z,
                    y_prev: Some(v_prev.clone()),
                    iter: s.iter,
                })),
                Method::Pdhg => {
                    // (2 q - d - 2 v) / tau
                    let twice_gap = s.q.map2(&s.v, |q, v| (q - v) + (q - v));
                    let w = twice_gap.sub(&d).scaled(inv_t);
                    Ok(SolverState::Pdhg(PdhgState { u: x, v: z, w, iter: s.iter }))
                }
                Method::Drs => unreachable!(),
            }
        }
        SolverState::Admm(s) => match to {
            Method::Drs => {
                let q = s.y.add_scaled(t, &s.z);
                let d = q.sub(&gradient(&s.x));
                let prev = match &s.y_prev {
                    Some(y_prev) => (d.add(y_prev), y_prev.clone()),
                    None => (d, VectorField::zeros(q.shape())),
                };
                Ok(SolverState::Drs(DrsState {
                    v: s.y.clone(),
                    q,
                    u: s.x.clone(),
                    prev: Some(prev),
                    iter: s.iter,
                }))
            }
            Method::Pdhg => {
                let kx = gradient(&s.x);
                let w = kx.add_scaled(t, &s.z).sub(&s.y).scaled(inv_t);
                Ok(SolverState::Pdhg(PdhgState {
                    u: s.x.clone(),
                    v: s.z.clone(),
                    w,
                    iter: s.iter,
                }))
            }
            Method::Admm => unreachable!(),
        },
        SolverState::Pdhg(s) => {
            let ku = gradient(&s.u);
            // y = K u + tau (v - w)
            let y = ku.add_scaled(t, &s.v.sub(&s.w));
            match to {
                Method::Admm => Ok(SolverState::Admm(AdmmState {
                    x: s.u.clone(),
                    y,
                    z: s.v.clone(),
                    y_prev: None,
                    iter: s.iter,
                })),
                Method::Drs => {
                    let q = y.add_scaled(t, &s.v);
                    let d = q.sub(&ku);
                    Ok(SolverState::Drs(DrsState {
                        q,
                        v: y,
                        u: s.u.clone(),
                        prev: Some((d, VectorField::zeros(ku.shape()))),
                        iter: s.iter,
                    }))
                }
                Method::Pdhg => unreachable!(),
            }
        }
    }
}
