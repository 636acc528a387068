//! Unitary DFT and the Fourier diagonalization of periodic forward differences.
//!
//! Convention: `F[l, j] = exp(-2 pi i <l, j / n>) / sqrt(N)` applied along every
//! axis, so `dft` and `idft` are exact inverses and both preserve the 2-norm.
//! Frequency `l = 0` is stored at flat index 0.
//!
//! The forward difference along one axis of length `n` is the circulant
//!
//! ```text
//!   (K u)_j = u_{j+1 mod n} - u_j
//! ```
//!
//! whose first column is `[-1, 0, ..., 0, 1]`. For a circulant `C` with first
//! column `c` and the unitary `F` above, `F C F* = diag(sqrt(n) F c)`. The
//! eigenvalue table is computed exactly that way, which makes it consistent
//! with `dft` by construction: `lambda_k = exp(2 pi i k / n) - 1`.

use std::sync::Arc;

use num_complex::{Complex, Complex64};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{GridShape, Image, VectorField};
use crate::real::Real;

/// Relative bound on the imaginary part `idft` may discard.
pub const IMAGINARY_GUARD: f64 = 1e-8;

/// Planned unitary multi-dimensional DFT on a fixed grid.
#[derive(Clone)]
pub struct Dft<T: Real> {
    shape: GridShape,
    forward: Vec<Arc<dyn Fft<T>>>,
    inverse: Vec<Arc<dyn Fft<T>>>,
    scale: T,
}

impl<T: Real> std::fmt::Debug for Dft<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("shape", &self.shape).finish()
    }
}

impl<T: Real> Dft<T> {
    pub fn new(shape: &GridShape) -> Self {
        let mut planner = FftPlanner::<T>::new();
        let forward = shape.dims().iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.dims().iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self {
            shape: shape.clone(),
            forward,
            inverse,
            scale: T::of(1.0 / (shape.len() as f64).sqrt()),
        }
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn transform(&self, data: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>]) {
        let n_total = self.shape.len();
        for (axis, plan) in plans.iter().enumerate() {
            let n = self.shape.dims()[axis];
            if n == 1 {
                continue;
            }
            let stride = self.shape.stride(axis);
            if stride == 1 {
                plan.process(data);
                continue;
            }
            // Gather each line along `axis` into a contiguous buffer.
            let mut line = vec![Complex::new(T::zero(), T::zero()); n];
            let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
            let block = stride * n;
            for outer in (0..n_total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, value) in line.iter().enumerate() {
                        data[base + k * stride] = *value;
                    }
                }
            }
        }
        for x in data.iter_mut() {
            *x = *x * self.scale;
        }
    }

    /// In-place forward transform of a complex array.
    pub fn forward_inplace(&self, data: &mut [Complex<T>]) {
        assert_eq!(data.len(), self.shape.len(), "dft length mismatch");
        self.transform(data, &self.forward);
    }

    /// In-place inverse transform of a complex array.
    pub fn inverse_inplace(&self, data: &mut [Complex<T>]) {
        assert_eq!(data.len(), self.shape.len(), "idft length mismatch");
        self.transform(data, &self.inverse);
    }

    /// Forward transform of a real array.
    pub fn forward_real(&self, values: &[T]) -> Vec<Complex<T>> {
        let mut data: Vec<Complex<T>> = values.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.forward_inplace(&mut data);
        data
    }

    /// Inverse transform returning the real part. Fails when the discarded
    /// imaginary part exceeds [`IMAGINARY_GUARD`] times the input norm.
    pub fn inverse_real(&self, spectrum: Vec<Complex<T>>) -> Result<Vec<T>> {
        let input_norm = complex_norm(&spectrum);
        let mut data = spectrum;
        self.inverse_inplace(&mut data);
        let residual = data.iter().map(|c| c.im.f64() * c.im.f64()).sum::<f64>().sqrt();
        let allowed = T::tol(IMAGINARY_GUARD) * input_norm;
        if residual > allowed {
            return Err(Error::ImaginaryResidual { residual, allowed });
        }
        Ok(data.into_iter().map(|c| c.re).collect())
    }

    pub fn dft(&self, u: &Image<T>) -> Result<Vec<Complex<T>>> {
        self.shape.check_same(u.shape(), "dft")?;
        Ok(self.forward_real(u.data()))
    }

    pub fn idft(&self, spectrum: Vec<Complex<T>>) -> Result<Image<T>> {
        if spectrum.len() != self.shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "spectrum has {} entries, grid {} has {}",
                spectrum.len(),
                self.shape,
                self.shape.len()
            )));
        }
        Image::new(self.shape.clone(), self.inverse_real(spectrum)?)
    }
}

pub(crate) fn complex_norm<T: Real>(values: &[Complex<T>]) -> f64 {
    values
        .iter()
        .map(|c| c.re.f64() * c.re.f64() + c.im.f64() * c.im.f64())
        .sum::<f64>()
        .sqrt()
}

/// Eigenvalues of the `n x n` periodic forward-difference circulant, indexed
/// by DFT frequency. Entry 0 is exactly zero.
pub fn difference_eigenvalues(n: usize) -> Vec<Complex64> {
    assert!(n >= 1, "difference_eigenvalues needs n >= 1");
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    column[0] += -1.0;
    column[n - 1] += 1.0;
    let dft = Dft::<f64>::new(&GridShape::d1(n).expect("n >= 1"));
    dft.forward_inplace(&mut column);
    let root_n = (n as f64).sqrt();
    let mut eig: Vec<Complex64> = column.into_iter().map(|c| c * root_n).collect();
    eig[0] = Complex64::new(0.0, 0.0);
    eig
}

/// Per-axis eigenvalue tables of the gradient on a grid, plus
/// `denom(l) = sum_i |lambda^i_l|^2`.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    shape: GridShape,
    eig: Vec<Vec<Complex64>>,
    denom: Vec<f64>,
}

impl SpectralOperator {
    pub fn new(shape: &GridShape) -> Self {
        let n = shape.len();
        let per_axis: Vec<Vec<Complex64>> =
            shape.dims().iter().map(|&m| difference_eigenvalues(m)).collect();
        let mut eig = vec![vec![Complex64::new(0.0, 0.0); n]; shape.ndim()];
        for l in 0..n {
            let k = shape.unravel(l);
            for axis in 0..shape.ndim() {
                eig[axis][l] = per_axis[axis][k[axis]];
            }
        }
        let denom = (0..n)
            .map(|l| eig.iter().map(|t| t[l].norm_sqr()).sum())
            .collect();
        Self {
            shape: shape.clone(),
            eig,
            denom,
        }
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    /// Table `lambda^i` for axis `i`, indexed by flat frequency.
    pub fn eigentable(&self, axis: usize) -> &[Complex64] {
        &self.eig[axis]
    }

    pub fn denom(&self) -> &[f64] {
        &self.denom
    }

    /// Applies axis-`i` differencing through the Fourier path.
    pub fn apply_axis_spectral<T: Real>(&self, dft: &Dft<T>, u: &Image<T>, axis: usize) -> Result<Vec<T>> {
        let mut spec = dft.dft(u)?;
        for (s, e) in spec.iter_mut().zip(&self.eig[axis]) {
            let z = Complex64::new(s.re.f64(), s.im.f64()) * e;
            *s = Complex::new(T::of(z.re), T::of(z.im));
        }
        dft.inverse_real(spec)
    }
}

/// `K u`: component `i` is the periodic forward difference along axis `i`.
pub fn gradient<T: Real>(u: &Image<T>) -> VectorField<T> {
    let shape = u.shape();
    let data = u.data();
    let n = shape.len();
    let comps = (0..shape.ndim())
        .map(|axis| {
            let len = shape.dims()[axis];
            let stride = shape.stride(axis);
            let mut out = vec![T::zero(); n];
            for (j, o) in out.iter_mut().enumerate() {
                let k = (j / stride) % len;
                let next = if k + 1 == len { j + stride - len * stride } else { j + stride };
                *o = data[next] - data[j];
            }
            out
        })
        .collect();
    VectorField::new(shape.clone(), comps).expect("gradient keeps the shape")
}

/// `K* p`, the exact adjoint of [`gradient`] (the negative divergence).
pub fn divergence<T: Real>(p: &VectorField<T>) -> Image<T> {
    let shape = p.shape();
    let n = shape.len();
    let mut out = vec![T::zero(); n];
    for axis in 0..shape.ndim() {
        let len = shape.dims()[axis];
        let stride = shape.stride(axis);
        let comp = p.comp(axis);
        for (j, o) in out.iter_mut().enumerate() {
            let k = (j / stride) % len;
            let prev = if k == 0 { j + len * stride - stride } else { j - stride };
            *o = *o + comp[prev] - comp[j];
        }
    }
    Image::new(shape.clone(), out).expect("divergence keeps the shape")
}

/// Isotropic TV norm `||K u||_{1,2}`.
pub fn tv_norm<T: Real>(u: &Image<T>) -> f64 {
    gradient(u).l12_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(shape: &GridShape, rng: &mut ChaCha8Rng) -> Image<f64> {
        Image::from_fn(shape, |_| rng.random_range(-1.0..1.0))
    }

    fn random_field(shape: &GridShape, rng: &mut ChaCha8Rng) -> VectorField<f64> {
        let comps = (0..shape.ndim())
            .map(|_| (0..shape.len()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        VectorField::new(shape.clone(), comps).unwrap()
    }

    fn dense_k(n: usize) -> Vec<Vec<f64>> {
        let mut k = vec![vec![0.0; n]; n];
        for j in 0..n {
            k[j][j] -= 1.0;
            k[j][(j + 1) % n] += 1.0;
        }
        k
    }

    #[test]
    fn constant_image_has_only_a_zero_frequency() {
        let shape = GridShape::d2(4, 3).unwrap();
        let dft = Dft::<f64>::new(&shape);
        let spec = dft.dft(&Image::constant(&shape, 2.5)).unwrap();
        assert_abs_diff_eq!(spec[0].re, 2.5 * 12f64.sqrt(), epsilon = 1e-12);
        for s in &spec[1..] {
            assert!(s.norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shape = GridShape::d2(8, 8).unwrap();
        let dft = Dft::<f64>::new(&shape);
        for _ in 0..100 {
            let u = random_image(&shape, &mut rng);
            let spec = dft.dft(&u).unwrap();
            assert_abs_diff_eq!(complex_norm(&spec), u.norm(), epsilon = 1e-12 * u.norm());
            let back = dft.idft(spec).unwrap();
            assert!(back.relative_error(&u) < 1e-12);
        }
    }

    #[test]
    fn dft_inner_product_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let shape = GridShape::d3(4, 2, 3).unwrap();
        let dft = Dft::<f64>::new(&shape);
        let u = random_image(&shape, &mut rng);
        let v = random_image(&shape, &mut rng);
        let (uh, vh) = (dft.dft(&u).unwrap(), dft.dft(&v).unwrap());
        let inner: Complex64 = uh.iter().zip(&vh).map(|(a, b)| a * b.conj()).sum();
        assert_abs_diff_eq!(inner.re, u.dot(&v), epsilon = 1e-12);
        assert!(inner.im.abs() < 1e-12);
    }

    #[test]
    fn idft_rejects_non_hermitian_spectra() {
        let shape = GridShape::d1(8).unwrap();
        let dft = Dft::<f64>::new(&shape);
        let mut spec = vec![Complex64::new(0.0, 0.0); 8];
        spec[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(dft.idft(spec), Err(Error::ImaginaryResidual { .. })));
    }

    #[test]
    fn eigenvalues_small_cases() {
        assert_eq!(difference_eigenvalues(1), vec![Complex64::new(0.0, 0.0)]);
        let two = difference_eigenvalues(2);
        assert_eq!(two[0], Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(two[1].re, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(two[1].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn eigenvalues_diagonalize_dense_k() {
        // F K F* must be diagonal with the table on the diagonal.
        for n in 1..=16 {
            let k = dense_k(n);
            let dft = Dft::<f64>::new(&GridShape::d1(n).unwrap());
            let eig = difference_eigenvalues(n);
            for col in 0..n {
                // K F* e_col, then F of that.
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                e[col] = Complex64::new(1.0, 0.0);
                dft.inverse_inplace(&mut e);
                let mut ke: Vec<Complex64> = (0..n)
                    .map(|r| (0..n).map(|c| e[c] * k[r][c]).sum())
                    .collect();
                dft.forward_inplace(&mut ke);
                for (row, value) in ke.iter().enumerate() {
                    let expected = if row == col { eig[col] } else { Complex64::new(0.0, 0.0) };
                    assert!((value - expected).norm() < 1e-12, "n={n} ({row},{col})");
                }
            }
            for (k, e) in eig.iter().enumerate() {
                let closed = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64) - 1.0;
                assert!((e - closed).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn gradient_and_divergence_hand_cases() {
        let shape = GridShape::d1(4).unwrap();
        let u = Image::new(shape.clone(), vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(gradient(&u).comp(0), &[1.0, -1.0, 0.0, 0.0]);
        let p = VectorField::new(shape.clone(), vec![vec![1.0, -1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(divergence(&p).data(), &[-1.0, 2.0, -1.0, 0.0]);
        assert_eq!(tv_norm(&u), 2.0);
        let c = Image::constant(&GridShape::d3(3, 2, 4).unwrap(), 1.5);
        assert_eq!(gradient(&c).norm(), 0.0);
        assert_eq!(divergence(&VectorField::<f64>::zeros(&shape)).norm(), 0.0);
    }

    #[test]
    fn gradient_is_adjoint_to_divergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dims in [vec![8usize], vec![8, 8], vec![3, 4, 5]] {
            let shape = GridShape::new(&dims).unwrap();
            for _ in 0..20 {
                let u = random_image(&shape, &mut rng);
                let p = random_field(&shape, &mut rng);
                let lhs = gradient(&u).dot(&p);
                let rhs = u.dot(&divergence(&p));
                assert!((lhs - rhs).abs() <= 1e-12 * u.norm() * p.norm());
            }
        }
    }

    #[test]
    fn fourier_path_agrees_with_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for dims in [vec![16usize], vec![6, 8], vec![4, 3, 5]] {
            let shape = GridShape::new(&dims).unwrap();
            let dft = Dft::<f64>::new(&shape);
            let op = SpectralOperator::new(&shape);
            let u = random_image(&shape, &mut rng);
            let g = gradient(&u);
            for axis in 0..shape.ndim() {
                let via = op.apply_axis_spectral(&dft, &u, axis).unwrap();
                let diff: f64 = via.iter().zip(g.comp(axis)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let norm: f64 = g.comp(axis).iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!(diff <= 1e-10 * norm);
            }
            assert_eq!(op.denom()[0], 0.0);
            assert!(op.denom()[1..].iter().all(|&d| d > 0.0));
        }
    }

    #[test]
    fn div_grad_is_denominator_multiplier() {
        let shape = GridShape::d1(8).unwrap();
        let dft = Dft::<f64>::new(&shape);
        let op = SpectralOperator::new(&shape);
        for l in 0..8 {
            // Real basis vector: cosine at frequency l.
            let u = Image::from_fn(&shape, |j| (2.0 * std::f64::consts::PI * (l * j) as f64 / 8.0).cos());
            let lap = divergence(&gradient(&u));
            let expected = u.scaled(op.denom()[l]);
            assert!(lap.sub(&expected).norm() < 1e-12);
            let spec = dft.dft(&lap).unwrap();
            let base = dft.dft(&u).unwrap();
            for (s, b) in spec.iter().zip(&base) {
                assert!((s - b * op.denom()[l]).norm() < 1e-12);
            }
        }
    }
}
