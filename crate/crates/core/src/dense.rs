//! Dense matrix versions of the operators, for small grids only.
//!
//! These are brute-force references: every matrix is built entry by entry and
//! every subproblem is solved with an SVD. Used as oracles by the tests and
//! by the dense branch of the subspace analysis.

use nalgebra::{DMatrix, DVector};

use crate::grid::GridShape;
use crate::problems::mask::SamplingMask;

/// The `Nd x N` matrix of the gradient, rows ordered component-major.
pub fn gradient_matrix(shape: &GridShape) -> DMatrix<f64> {
    let n = shape.len();
    let d = shape.ndim();
    let mut k = DMatrix::zeros(n * d, n);
    for axis in 0..d {
        for j in 0..n {
            let mut c = shape.unravel(j);
            c[axis] = (c[axis] + 1) % shape.dims()[axis];
            let next = shape.ravel(&c[..d]);
            k[(axis * n + j, j)] -= 1.0;
            k[(axis * n + j, next)] += 1.0;
        }
    }
    k
}

/// Real and imaginary parts of the unitary DFT row for frequency `l`.
pub fn dft_row(shape: &GridShape, l: usize) -> (Vec<f64>, Vec<f64>) {
    let n = shape.len();
    let k = shape.unravel(l);
    let scale = 1.0 / (n as f64).sqrt();
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for j in 0..n {
        let c = shape.unravel(j);
        let phase: f64 = (0..shape.ndim())
            .map(|a| (k[a] * c[a]) as f64 / shape.dims()[a] as f64)
            .sum();
        let angle = -2.0 * std::f64::consts::PI * phase;
        re[j] = scale * angle.cos();
        im[j] = scale * angle.sin();
    }
    (re, im)
}

/// Real form of `A = M F`: rows `Re F_l` then `Im F_l` for every observed `l`,
/// with the matching right-hand side `[Re b_l, Im b_l]`.
pub fn measurement_matrix(mask: &SamplingMask) -> (DMatrix<f64>, DVector<f64>) {
    let shape = mask.shape();
    let n = shape.len();
    let m = mask.len();
    let mut a = DMatrix::zeros(2 * m, n);
    let mut rhs = DVector::zeros(2 * m);
    for (row, (&l, b)) in mask.indices().iter().zip(mask.data()).enumerate() {
        let (re, im) = dft_row(shape, l);
        for j in 0..n {
            a[(2 * row, j)] = re[j];
            a[(2 * row + 1, j)] = im[j];
        }
        rhs[2 * row] = b.re;
        rhs[2 * row + 1] = b.im;
    }
    (a, rhs)
}

/// Orthonormal basis of the null space of `a`, singular values below `tol`
/// (relative to the largest) counted as zero.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let cols = a.ncols();
    // Pad with zero rows so the SVD returns a full right basis.
    let rows = a.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| svd.singular_values[i] <= tol * smax.max(1.0))
        .collect();
    let mut basis = DMatrix::zeros(cols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        basis.set_column(c, &v_t.row(i).transpose());
    }
    basis
}

/// Orthonormal basis of the column space of `a`.
pub fn range_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol * smax.max(f64::MIN_POSITIVE))
        .collect();
    let mut basis = DMatrix::zeros(a.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        basis.set_column(c, &u.column(i));
    }
    basis
}

/// Least-squares solve through the SVD pseudo-inverse.
pub fn pinv_solve(a: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(rhs, 1e-12 * smax.max(f64::MIN_POSITIVE))
        .expect("SVD has both factors")
}

/// `argmin ||K u - target||^2` subject to `A u = b`, solved from the explicit
/// KKT normal equations `[2 K^T K, A^T; A, 0] [u; mu] = [2 K^T target; b]`.
pub fn constrained_least_squares(mask: &SamplingMask, target: &[f64]) -> Vec<f64> {
    let shape = mask.shape();
    let n = shape.len();
    let k = gradient_matrix(shape);
    let (a, b) = measurement_matrix(mask);
    let rows = a.nrows();
    let mut kkt = DMatrix::zeros(n + rows, n + rows);
    let ktk = k.transpose() * &k * 2.0;
    kkt.view_mut((0, 0), (n, n)).copy_from(&ktk);
    kkt.view_mut((0, n), (n, rows)).copy_from(&a.transpose());
    kkt.view_mut((n, 0), (rows, n)).copy_from(&a);
    let t = DVector::from_column_slice(target);
    let mut rhs = DVector::zeros(n + rows);
    rhs.rows_mut(0, n).copy_from(&(k.transpose() * t * 2.0));
    rhs.rows_mut(n, rows).copy_from(&b);
    let sol = pinv_solve(&kkt, &rhs);
    sol.rows(0, n).iter().cloned().collect()
}

/// Euclidean projection of a flat field onto `K{u : A u = b}`.
pub fn project_onto_gradient_set(mask: &SamplingMask, q: &[f64]) -> Vec<f64> {
    let u = constrained_least_squares(mask, q);
    let k = gradient_matrix(mask.shape());
    (k * DVector::from_vec(u)).iter().cloned().collect()
}
