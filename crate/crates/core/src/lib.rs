//! Isotropic total-variation compressed sensing from partial Fourier data.
//!
//! Solves `min ||K u||_{1,2}` subject to `A u = b` where `K` is the periodic
//! forward-difference gradient and `A` selects observed frequencies of the
//! unitary DFT. Three equivalent first-order methods are provided (ADMM,
//! Douglas-Rachford on the double dual, and G-prox PDHG) together with tools
//! for analysing their local linear rate.

pub mod analysis;
pub mod cli;
pub mod dense;
pub mod error;
pub mod grid;
pub mod problems;
pub mod prox;
pub mod real;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{GridShape, Image, VectorField};
pub use real::{Precision, Real};
