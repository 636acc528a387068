//! Local linear-rate machinery: supports, subspaces, principal angles, rate
//! bounds, fixed-point certificates and observed rates.

pub mod angles;
pub mod certificate;
pub mod observed;
pub mod rate;
pub mod subspace;
pub mod support;
pub mod trajectory;
