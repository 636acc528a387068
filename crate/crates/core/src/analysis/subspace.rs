//! Bases of the two subspaces that govern the local rate: `K Kernel(A)` and
//! `Kernel(B~)`, the fields vanishing on the zero blocks of `v*`.

use nalgebra::DMatrix;

use crate::dense;
use crate::error::{Error, Result};
use crate::grid::{GridShape, Image};
use crate::problems::mask::SamplingMask;
use crate::spectral::gradient;

use super::support::SupportSet;

/// Frequencies `l` with neither `l` nor `-l` observed, one representative per
/// conjugate pair, with a flag telling whether the pair is a single
/// self-conjugate frequency.
pub fn unobserved_pairs(mask: &SamplingMask) -> Vec<(usize, bool)> {
    let shape = mask.shape();
    let member = mask.membership();
    let mut out = Vec::new();
    for l in 0..shape.len() {
        let c = shape.conjugate_index(l);
        if member[l] || member[c] || c < l {
            continue;
        }
        out.push((l, c == l));
    }
    out
}

/// Real cosine (`sine = false`) or sine wave at frequency `l`.
fn fourier_wave(shape: &GridShape, l: usize, sine: bool) -> Image<f64> {
    let k = shape.unravel(l);
    Image::from_fn(shape, |j| {
        let c = shape.unravel(j);
        let phase: f64 = (0..shape.ndim())
            .map(|a| (k[a] * c[a]) as f64 / shape.dims()[a] as f64)
            .sum();
        let angle = 2.0 * std::f64::consts::PI * phase;
        if sine {
            angle.sin()
        } else {
            angle.cos()
        }
    })
}

/// Orthonormal basis (as columns of an `Nd x k` matrix) of `K Kernel(A)`.
///
/// `Kernel(A)` over the reals is spanned by the cosine and sine waves of the
/// frequencies outside `Omega U -Omega`. The gradient keeps distinct
/// frequencies orthogonal and, because `|lambda^i_l| = |lambda^i_{-l}|`, the
/// cosine and sine of one frequency too, so normalising the columns suffices.
pub fn kernel_basis(mask: &SamplingMask) -> Result<DMatrix<f64>> {
    let shape = mask.shape();
    let pairs = unobserved_pairs(mask);
    if pairs.is_empty() {
        return Err(Error::Degenerate("every frequency is observed, Kernel(A) is trivial".into()));
    }
    let n = shape.len();
    let d = shape.ndim();
    let cols: usize = pairs.iter().map(|&(_, selfc)| if selfc { 1 } else { 2 }).sum();
    let mut c0 = DMatrix::zeros(n * d, cols);
    let mut col = 0;
    for &(l, self_conjugate) in &pairs {
        let waves: &[bool] = if self_conjugate { &[false] } else { &[false, true] };
        for &sine in waves {
            let g = gradient(&fourier_wave(shape, l, sine)).to_flat();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (r, x) in g.iter().enumerate() {
                c0[(r, col)] = x / norm;
            }
            col += 1;
        }
    }
    Ok(c0)
}

/// Row indices (in the component-major flattening) of the given spatial
/// indices, all `d` components each.
pub fn block_rows(shape: &GridShape, indices: &[usize]) -> Vec<usize> {
    let n = shape.len();
    (0..shape.ndim())
        .flat_map(|axis| indices.iter().map(move |&j| axis * n + j))
        .collect()
}

pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)])
}

/// `C0` together with the support partition defining `B0`.
///
/// `B0` is the coordinate basis of the support blocks, so `C0^T B0` is just
/// `C0` restricted to the support rows and is never formed explicitly.
#[derive(Debug, Clone)]
pub struct SubspacePair {
    pub c0: DMatrix<f64>,
    pub support: SupportSet,
}

impl SubspacePair {
    pub fn new(mask: &SamplingMask, support: &SupportSet) -> Result<Self> {
        mask.shape().check_same(support.shape(), "subspace pair")?;
        Ok(Self {
            c0: kernel_basis(mask)?,
            support: support.clone(),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.c0.nrows()
    }

    /// `dim K Kernel(A)` counted over the reals.
    pub fn kernel_dim(&self) -> usize {
        self.c0.ncols()
    }

    /// `dim Kernel(B~) = d * |S|`.
    pub fn b0_dim(&self) -> usize {
        self.support.support_count() * self.support.shape().ndim()
    }

    /// `C0` restricted to the support rows, i.e. `C0^T B0` transposed.
    pub fn c0_support(&self) -> DMatrix<f64> {
        select_rows(&self.c0, &block_rows(self.support.shape(), &self.support.support_indices()))
    }

    /// `C0` restricted to the zero-block rows.
    pub fn c0_zero(&self) -> DMatrix<f64> {
        select_rows(&self.c0, &block_rows(self.support.shape(), &self.support.zero_indices()))
    }

    /// Orthonormal basis, in zero-block coordinates, of
    /// `Range(B~^T) ∩ (K*)^{-1}[Range(A*)]`: fields on the zero blocks that are
    /// orthogonal to every column of `C0`.
    pub fn fixed_point_freedom(&self) -> DMatrix<f64> {
        let cz = self.c0_zero();
        if cz.nrows() == 0 {
            return DMatrix::zeros(0, 0);
        }
        dense::null_space(&cz.transpose(), 1e-10)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::mask::sample_mask;
    use crate::prox::ConstraintSet;
    use crate::real::Real;

    #[test]
    fn only_mean_observed_leaves_n_minus_one() {
        let shape = GridShape::d1(4).unwrap();
        let mask = SamplingMask::new(shape, vec![0], vec![num_complex::Complex64::new(0.0, 0.0)], 0.25, 0, true).unwrap();
        let c0 = kernel_basis(&mask).unwrap();
        assert_eq!(c0.ncols(), 3);
        // Each column is K e with e mean-free; K e itself sums to zero.
        for c in c0.column_iter() {
            assert!(c.sum().abs() < 1e-12);
        }
    }

    #[test]
    fn columns_are_orthonormal_and_off_the_mask() {
        for dims in [vec![16usize], vec![6, 5], vec![4, 3, 4]] {
            let shape = GridShape::new(&dims).unwrap();
            let mask = sample_mask(&shape, 0.3, 7, true).unwrap();
            let c0 = kernel_basis(&mask).unwrap();
            let gram = c0.transpose() * &c0;
            assert!((gram - DMatrix::identity(c0.ncols(), c0.ncols())).norm() < 1e-10);
            // Each column is the gradient of some u with A u = 0.
            let set = ConstraintSet::<f64>::new(&mask);
            for c in c0.column_iter() {
                let field = crate::grid::VectorField::from_flat(&shape, c.as_slice()).unwrap();
                let u = set.feasible_primal(&field).unwrap();
                assert!(gradient(&u).distance(&field) < 1e-8);
                assert!(set.residual(&u).unwrap() < 1e-12);
            }
            let complex_count = shape.len() - mask.len();
            assert_eq!(c0.ncols(), complex_count, "symmetric masks count the same over R and C");
            let _ = f64::PRECISION;
        }
    }

    #[test]
    fn full_mask_has_no_kernel() {
        let shape = GridShape::d1(8).unwrap();
        let mask = sample_mask(&shape, 1.0, 0, true).unwrap();
        assert!(kernel_basis(&mask).is_err());
    }
}
