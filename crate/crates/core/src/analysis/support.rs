use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridShape, VectorField};
use crate::real::Real;

/// Default relative threshold below which a block counts as zero.
pub const DEFAULT_SUPPORT_EPS: f64 = 1e-8;

/// Partition of the spatial indices into zero blocks (rows of the selector
/// `B`) and the support `S`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    shape: GridShape,
    zero: Vec<bool>,
}

impl SupportSet {
    /// Builds the partition from a per-index "is zero" flag.
    pub fn from_zero_flags(shape: &GridShape, zero: Vec<bool>) -> Result<Self> {
        if zero.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} flags for N = {}",
                zero.len(),
                shape.len()
            )));
        }
        Ok(Self {
            shape: shape.clone(),
            zero,
        })
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn is_zero(&self, j: usize) -> bool {
        self.zero[j]
    }

    pub fn zero_flags(&self) -> &[bool] {
        &self.zero
    }

    /// Indices `j_1 < ... < j_r` of the zero blocks.
    pub fn zero_indices(&self) -> Vec<usize> {
        (0..self.zero.len()).filter(|&j| self.zero[j]).collect()
    }

    /// The support `S`.
    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.zero.len()).filter(|&j| !self.zero[j]).collect()
    }

    /// `r`, the number of zero blocks.
    pub fn zero_count(&self) -> usize {
        self.zero.iter().filter(|&&z| z).count()
    }

    pub fn support_count(&self) -> usize {
        self.zero.len() - self.zero_count()
    }
}

/// Blocks with `||v_j|| <= eps * max_j ||v_j||` are zero. `eps = 0` only
/// catches exact zeros, which converged floating-point iterates rarely have.
pub fn detect_support<T: Real>(v: &VectorField<T>, eps: f64) -> Result<SupportSet> {
    if eps < 0.0 {
        return Err(Error::InvalidParameter(format!("support eps {eps} is negative")));
    }
    let mags = v.magnitudes();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::Degenerate("field is identically zero, support is empty".into()));
    }
    let threshold = eps * max;
    SupportSet::from_zero_flags(v.shape(), mags.iter().map(|&m| m <= threshold).collect())
}

/// Smallest block norm over the support.
pub fn min_support_magnitude<T: Real>(v: &VectorField<T>, support: &SupportSet) -> Result<f64> {
    support
        .support_indices()
        .into_iter()
        .map(|j| v.block_norm(j))
        .reduce(f64::min)
        .ok_or_else(|| Error::Degenerate("support is empty".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Image;
    use crate::spectral::gradient;

    #[test]
    fn sparse_field_zero_set_is_exact() {
        let shape = GridShape::d2(3, 1).unwrap();
        let v = VectorField::new(shape, vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
        let s = detect_support(&v, 0.5).unwrap();
        assert_eq!(s.zero_indices(), vec![0, 2]);
        assert_eq!(s.support_indices(), vec![1]);
    }

    #[test]
    fn staircase_support_is_the_jumps() {
        let shape = GridShape::d1(8).unwrap();
        let u = Image::new(shape, vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let s = detect_support(&gradient(&u), 1e-8).unwrap();
        assert_eq!(s.support_indices(), vec![1, 3]);
    }

    #[test]
    fn eps_zero_keeps_tiny_blocks() {
        let shape = GridShape::d1(3).unwrap();
        let v = VectorField::new(shape, vec![vec![1e-100, 1.0, 0.0]]).unwrap();
        assert_eq!(detect_support(&v, 0.0).unwrap().zero_indices(), vec![2]);
        assert!(detect_support(&VectorField::<f64>::zeros(&GridShape::d1(3).unwrap()), 0.1).is_err());
    }
}
