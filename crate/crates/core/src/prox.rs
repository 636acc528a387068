//! Proximal operators of the TV problem.
//!
//! `f = ||.||_{1,2}` on vector fields, `h` = indicator of the affine set
//! `K{u : A u = b}`. The projection onto that set is diagonal in Fourier
//! space, see [`ConstraintSet`].

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::analysis::support::SupportSet;
use crate::error::{Error, Result};
use crate::grid::{GridShape, Image, VectorField};
use crate::problems::mask::SamplingMask;
use crate::real::Real;
use crate::spectral::{gradient, Dft, SpectralOperator};

/// Step size, relaxation and optional regularization of a splitting run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxParams {
    pub tau: f64,
    pub lambda: f64,
    pub alpha: Option<f64>,
}

impl ProxParams {
    pub fn new(tau: f64, lambda: f64, alpha: Option<f64>) -> Result<Self> {
        let p = Self { tau, lambda, alpha };
        p.validate()?;
        Ok(p)
    }

    /// Plain parameters: `lambda = 1`, no regularization.
    pub fn with_tau(tau: f64) -> Result<Self> {
        Self::new(tau, 1.0, None)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau = {} must be positive", self.tau)));
        }
        if !(self.lambda > 0.0 && self.lambda < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "relaxation lambda = {} must lie in (0, 2)",
                self.lambda
            )));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidParameter(format!("alpha = {a} must be positive")));
            }
        }
        Ok(())
    }

    /// `prox_f` at step `tau`, regularized when `alpha` is set.
    pub fn prox_f<T: Real>(&self, q: &VectorField<T>) -> VectorField<T> {
        match self.alpha {
            Some(alpha) => prox_f_regularized(q, self.tau, alpha),
            None => shrink(q, self.tau),
        }
    }
}

/// `q_j - tau * q_j / ||q_j||` on one block, shared by [`shrink`] and
/// [`shrink_factored`] so the two agree to the last bit.
#[inline]
fn shrunk_component<T: Real>(x: T, norm: f64, tau: f64) -> T {
    x - T::of(tau) * T::of(x.f64() / norm)
}

/// Blockwise soft thresholding `S_tau`, the prox of `||.||_{1,2}`.
pub fn shrink<T: Real>(q: &VectorField<T>, tau: f64) -> VectorField<T> {
    let mut out = VectorField::zeros(q.shape());
    let d = q.ndim();
    for j in 0..q.shape().len() {
        let norm = q.block_norm(j);
        if norm > tau {
            for i in 0..d {
                out.comps_mut()[i][j] = shrunk_component(q.comp(i)[j], norm, tau);
            }
        }
    }
    out
}

/// `N(q)_j = q_j / ||q_j||`, and `0` where `q_j = 0`.
pub fn normal_field<T: Real>(q: &VectorField<T>) -> VectorField<T> {
    let mut out = VectorField::zeros(q.shape());
    for j in 0..q.shape().len() {
        let norm = q.block_norm(j);
        if norm > 0.0 {
            for i in 0..q.ndim() {
                out.comps_mut()[i][j] = T::of(q.comp(i)[j].f64() / norm);
            }
        }
    }
    out
}

/// Shrinkage written as `(I - B~+ B~)(q - tau N(q))`.
///
/// Fails with [`Error::OutsideShrinkageSet`] unless every zero block of
/// `support` has `||q_j|| <= tau` and every support block has `||q_j|| > tau`.
pub fn shrink_factored<T: Real>(q: &VectorField<T>, tau: f64, support: &SupportSet) -> Result<VectorField<T>> {
    q.shape().check_same(support.shape(), "shrink_factored")?;
    let mut out = VectorField::zeros(q.shape());
    for j in 0..q.shape().len() {
        let norm = q.block_norm(j);
        if support.is_zero(j) {
            if norm > tau {
                return Err(Error::OutsideShrinkageSet(format!(
                    "zero block {j} has norm {norm:e} > tau = {tau:e}"
                )));
            }
        } else {
            if norm <= tau {
                return Err(Error::OutsideShrinkageSet(format!(
                    "support block {j} has norm {norm:e} <= tau = {tau:e}"
                )));
            }
            for i in 0..q.ndim() {
                out.comps_mut()[i][j] = shrunk_component(q.comp(i)[j], norm, tau);
            }
        }
    }
    Ok(out)
}

/// Prox of `||v||_{1,2} + ||v||^2 / (2 alpha)` at step `tau`:
/// `S_{alpha tau/(alpha+tau)}(alpha q / (alpha + tau))`.
pub fn prox_f_regularized<T: Real>(q: &VectorField<T>, tau: f64, alpha: f64) -> VectorField<T> {
    let scale = T::of(alpha / (alpha + tau));
    shrink(&q.scaled(scale), alpha * tau / (alpha + tau))
}

/// Projection onto the `||.||_{inf,2}` unit ball: `v_j / max(1, ||v_j||)`.
/// This is the prox of the conjugate of `||.||_{1,2}`.
pub fn ball_projection<T: Real>(v: &VectorField<T>) -> VectorField<T> {
    let mut out = v.clone();
    for j in 0..v.shape().len() {
        let norm = v.block_norm(j);
        if norm > 1.0 {
            for i in 0..v.ndim() {
                out.comps_mut()[i][j] = T::of(v.comp(i)[j].f64() / norm);
            }
        }
    }
    out
}

/// `refl = 2 prox - I`.
pub fn reflect<T: Real>(
    q: &VectorField<T>,
    prox: impl FnOnce(&VectorField<T>) -> Result<VectorField<T>>,
) -> Result<VectorField<T>> {
    let p = prox(q)?;
    Ok(p.map2(q, |a, b| a + a - b))
}

/// The affine constraint `A u = b` with everything needed to solve the
/// Fourier-diagonal subproblems of all three methods.
#[derive(Debug, Clone)]
pub struct ConstraintSet<T: Real> {
    mask: SamplingMask,
    dft: Dft<T>,
    spectral: SpectralOperator,
    member: Vec<bool>,
    data: Vec<Complex64>,
}

impl<T: Real> ConstraintSet<T> {
    pub fn new(mask: &SamplingMask) -> Self {
        let shape = mask.shape();
        Self {
            dft: Dft::new(shape),
            spectral: SpectralOperator::new(shape),
            member: mask.membership(),
            data: mask.scattered(),
            mask: mask.clone(),
        }
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn shape(&self) -> &GridShape {
        self.mask.shape()
    }

    pub fn dft(&self) -> &Dft<T> {
        &self.dft
    }

    pub fn spectral(&self) -> &SpectralOperator {
        &self.spectral
    }

    pub fn is_observed(&self, l: usize) -> bool {
        self.member[l]
    }

    /// Widened DFT of every component of a field.
    ///
    /// Two real components share one complex transform: with
    /// `Z = F(a + i b)`, `F a = (Z(l) + conj Z(-l)) / 2` and
    /// `F b = (Z(l) - conj Z(-l)) / 2i`.
    pub fn field_spectrum(&self, q: &VectorField<T>) -> Vec<Vec<Complex64>> {
        let shape = self.shape();
        let n = shape.len();
        let mut out = Vec::with_capacity(q.ndim());
        let mut axis = 0;
        while axis < q.ndim() {
            if axis + 1 < q.ndim() {
                let (a, b) = (q.comp(axis), q.comp(axis + 1));
                let mut z: Vec<Complex<T>> = a.iter().zip(b).map(|(&x, &y)| Complex::new(x, y)).collect();
                self.dft.forward_inplace(&mut z);
                let z: Vec<Complex64> = z.iter().map(widen).collect();
                let mut fa = Vec::with_capacity(n);
                let mut fb = Vec::with_capacity(n);
                for l in 0..n {
                    let zc = z[shape.conjugate_index(l)].conj();
                    fa.push((z[l] + zc) * 0.5);
                    fb.push((z[l] - zc) * Complex64::new(0.0, -0.5));
                }
                out.push(fa);
                out.push(fb);
                axis += 2;
            } else {
                out.push(self.dft.forward_real(q.comp(axis)).iter().map(widen).collect());
                axis += 1;
            }
        }
        out
    }

    /// `sum_i conj(lambda^i_l) qhat^i_l / denom_l` at one frequency off the mask.
    #[inline]
    fn back_projected(&self, spectra: &[Vec<Complex64>], l: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (axis, s) in spectra.iter().enumerate() {
            acc += self.spectral.eigentable(axis)[l].conj() * s[l];
        }
        acc / self.spectral.denom()[l]
    }

    /// Inverse DFT to a real image. Symmetric masks keep the spectrum
    /// Hermitian, so the imaginary guard applies; otherwise the real part is
    /// taken as is.
    fn to_image(&self, spec: Vec<Complex64>) -> Result<Image<T>> {
        let narrowed: Vec<Complex<T>> = spec.iter().map(|c| Complex::new(T::of(c.re), T::of(c.im))).collect();
        if self.mask.is_symmetric() {
            self.dft.idft(narrowed)
        } else {
            let mut data = narrowed;
            self.dft.inverse_inplace(&mut data);
            Image::new(self.shape().clone(), data.into_iter().map(|c| c.re).collect())
        }
    }

    /// The `u` with `A u = b` whose gradient is closest to `q`:
    /// `uhat = b` on the mask, `sum_i conj(lambda^i) qhat^i / denom` off it.
    pub fn feasible_primal(&self, q: &VectorField<T>) -> Result<Image<T>> {
        self.shape().check_same(q.shape(), "feasible_primal")?;
        let spectra = self.field_spectrum(q);
        let spec = (0..self.shape().len())
            .map(|l| if self.member[l] { self.data[l] } else { self.back_projected(&spectra, l) })
            .collect();
        self.to_image(spec)
    }

    /// `prox_h(q)`: projection of `q` onto `K{u : A u = b}`.
    pub fn prox_h(&self, q: &VectorField<T>) -> Result<VectorField<T>> {
        Ok(gradient(&self.feasible_primal(q)?))
    }

    /// The G-prox PDHG primal step:
    /// `uhat = b` on the mask, `uhat - tau sum_i conj(lambda^i) what^i / denom` off it.
    pub fn pdhg_primal(&self, u: &Image<T>, w: &VectorField<T>, tau: f64) -> Result<Image<T>> {
        self.shape().check_same(u.shape(), "pdhg_primal")?;
        let u_hat: Vec<Complex64> = self.dft.dft(u)?.iter().map(widen).collect();
        let spectra = self.field_spectrum(w);
        let spec = (0..self.shape().len())
            .map(|l| {
                if self.member[l] {
                    self.data[l]
                } else {
                    u_hat[l] - self.back_projected(&spectra, l) * tau
                }
            })
            .collect();
        self.to_image(spec)
    }

    /// Zero-filled `F* M^T b`.
    pub fn zero_filled(&self) -> Result<Image<T>> {
        self.to_image(self.data.clone())
    }

    /// `||A u - b||`.
    pub fn residual(&self, u: &Image<T>) -> Result<f64> {
        let spec = self.dft.dft(u)?;
        Ok(self
            .mask
            .indices()
            .iter()
            .map(|&l| (widen(&spec[l]) - self.data[l]).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Largest deviation `|uhat(l) - b_l|` over the mask.
    pub fn max_observed_deviation(&self, u: &Image<T>) -> Result<f64> {
        let spec = self.dft.dft(u)?;
        Ok(self
            .mask
            .indices()
            .iter()
            .map(|&l| (widen(&spec[l]) - self.data[l]).norm())
            .fold(0.0, f64::max))
    }

    /// Spectrum of `K* eta` restricted to the unobserved frequencies, as a
    /// norm. Zero exactly when `K* eta` lies in `Range(A*)`.
    pub fn range_residual(&self, eta: &VectorField<T>) -> Result<f64> {
        let spectra = self.field_spectrum(eta);
        let mut acc = 0.0;
        for l in 0..self.shape().len() {
            if self.member[l] {
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (axis, sp) in spectra.iter().enumerate() {
                s += self.spectral.eigentable(axis)[l].conj() * sp[l];
            }
            acc += s.norm_sqr();
        }
        Ok(acc.sqrt())
    }
}

#[inline]
pub(crate) fn widen<T: Real>(c: &Complex<T>) -> Complex64 {
    Complex64::new(c.re.f64(), c.im.f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense;
    use crate::problems::mask::sample_mask;
    use crate::spectral::divergence;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(shape: &GridShape, rng: &mut ChaCha8Rng, scale: f64) -> VectorField<f64> {
        let comps = (0..shape.ndim())
            .map(|_| (0..shape.len()).map(|_| rng.random_range(-scale..scale)).collect())
            .collect();
        VectorField::new(shape.clone(), comps).unwrap()
    }

    fn block(q: &[f64]) -> VectorField<f64> {
        let shape = GridShape::d2(1, 1).unwrap();
        VectorField::new(shape, q.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn shrink_hand_cases() {
        assert_eq!(shrink(&block(&[3.0, 4.0]), 1.0).block(0), vec![2.4, 3.2]);
        assert_eq!(shrink(&block(&[0.6, 0.8]), 1.0).block(0), vec![0.0, 0.0]);
        assert_eq!(shrink(&block(&[0.0, 0.0]), 0.3).block(0), vec![0.0, 0.0]);
    }

    #[test]
    fn normal_field_hand_cases() {
        assert_eq!(normal_field(&block(&[3.0, 4.0])).block(0), vec![0.6, 0.8]);
        assert_eq!(normal_field(&block(&[0.0, 0.0])).block(0), vec![0.0, 0.0]);
    }

    #[test]
    fn regularized_prox_hand_case_and_limit() {
        let r = prox_f_regularized(&block(&[3.0, 4.0]), 1.0, 1.0).block(0);
        assert!((r[0] - 1.2).abs() < 1e-15 && (r[1] - 1.6).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = field(&GridShape::d2(6, 6).unwrap(), &mut rng, 2.0);
        let limit = prox_f_regularized(&q, 0.5, 1e8);
        assert!(limit.distance(&shrink(&q, 0.5)) < 1e-6);
    }

    #[test]
    fn regularized_prox_minimizes_its_objective() {
        // Objective on one 2-block: ||v|| + |v|^2/(2 alpha) + |v - q|^2/(2 tau).
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let q = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let tau = rng.random_range(0.1..2.0);
            let alpha = rng.random_range(0.1..5.0);
            let obj = |v: [f64; 2]| {
                (v[0] * v[0] + v[1] * v[1]).sqrt()
                    + (v[0] * v[0] + v[1] * v[1]) / (2.0 * alpha)
                    + ((v[0] - q[0]).powi(2) + (v[1] - q[1]).powi(2)) / (2.0 * tau)
            };
            // The minimizer is parallel to q, so a 1-d search over the radius
            // along q/|q| is a complete oracle. Bisect on the slope of the
            // objective along that ray.
            let nq = (q[0] * q[0] + q[1] * q[1]).sqrt();
            let dir = [q[0] / nq, q[1] / nq];
            let h = 1e-7;
            let slope = |t: f64| (obj([(t + h) * dir[0], (t + h) * dir[1]]) - obj([(t - h) * dir[0], (t - h) * dir[1]])) / (2.0 * h);
            let exact_slope = |t: f64| 1.0 + t / alpha + (t - nq) / tau;
            assert!((slope(nq * 0.5) - exact_slope(nq * 0.5)).abs() < 1e-5);
            let (mut a, mut b) = (0.0, nq);
            if exact_slope(0.0) >= 0.0 {
                b = 0.0;
            }
            for _ in 0..200 {
                let c = 0.5 * (a + b);
                if exact_slope(c) > 0.0 {
                    b = c;
                } else {
                    a = c;
                }
            }
            let t = 0.5 * (a + b);
            let got = prox_f_regularized(&block(&q), tau, alpha).block(0);
            assert!((got[0] - t * dir[0]).abs() < 1e-10 && (got[1] - t * dir[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn shrink_factored_matches_shrink_on_q_set() {
        let shape = GridShape::d2(8, 8).unwrap();
        let tau = 0.5;
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = field(&shape, &mut rng, 1.0);
            let zero = (0..shape.len()).map(|j| q.block_norm(j) <= tau).collect();
            let support = SupportSet::from_zero_flags(&shape, zero).unwrap();
            assert_eq!(shrink_factored(&q, tau, &support).unwrap(), shrink(&q, tau));
            let flipped = SupportSet::from_zero_flags(
                &shape,
                (0..shape.len()).map(|j| !support.is_zero(j)).collect(),
            )
            .unwrap();
            assert!(matches!(
                shrink_factored(&q, tau, &flipped),
                Err(Error::OutsideShrinkageSet(_))
            ));
        }
    }

    #[test]
    fn moreau_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let shape = GridShape::d2(8, 8).unwrap();
        for _ in 0..100 {
            let x = field(&shape, &mut rng, 3.0);
            let gamma = rng.random_range(0.05..2.0);
            let sum = shrink(&x, gamma).add(&ball_projection(&x.scaled(1.0 / gamma)).scaled(gamma));
            assert!(sum.distance(&x) <= 1e-12 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn prox_h_matches_dense_projection() {
        for dims in [vec![4usize], vec![3, 4], vec![2, 2, 3]] {
            let shape = GridShape::new(&dims).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let u_true = Image::from_fn(&shape, |_| rng.random_range(0.0..1.0));
            let mask = sample_mask(&shape, 0.4, 2, true).unwrap().measure(&u_true).unwrap();
            let set = ConstraintSet::<f64>::new(&mask);
            let q = field(&shape, &mut rng, 1.0);
            let fast = set.prox_h(&q).unwrap();
            let brute = dense::project_onto_gradient_set(&mask, &q.to_flat());
            let err: f64 = fast.to_flat().iter().zip(&brute).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err < 1e-10, "{dims:?}: {err:e}");
            // A feasible gradient is left alone.
            let g = gradient(&u_true);
            assert!(set.prox_h(&g).unwrap().distance(&g) < 1e-12);
            // Idempotence.
            assert!(set.prox_h(&fast).unwrap().distance(&fast) < 1e-10);
        }
    }

    #[test]
    fn full_observation_collapses_to_data() {
        let shape = GridShape::d1(4).unwrap();
        let u_true = Image::new(shape.clone(), vec![0.2, 0.9, -0.4, 1.3]).unwrap();
        let mask = sample_mask(&shape, 1.0, 0, true).unwrap().measure(&u_true).unwrap();
        let set = ConstraintSet::<f64>::new(&mask);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = field(&shape, &mut rng, 5.0);
        assert!(set.prox_h(&q).unwrap().distance(&gradient(&u_true)) < 1e-12);
    }

    #[test]
    fn reflection_through_affine_projection_is_involution() {
        let shape = GridShape::d1(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u_true = Image::from_fn(&shape, |_| rng.random_range(0.0..1.0));
        let mask = sample_mask(&shape, 0.5, 1, true).unwrap().measure(&u_true).unwrap();
        let set = ConstraintSet::<f64>::new(&mask);
        let q = field(&shape, &mut rng, 1.0);
        let once = reflect(&q, |x| set.prox_h(x)).unwrap();
        let twice = reflect(&once, |x| set.prox_h(x)).unwrap();
        assert!(twice.distance(&q) < 1e-10);
        assert_eq!(reflect(&q, |x| Ok(x.clone())).unwrap(), q);
    }

    #[test]
    fn range_residual_vanishes_for_data_range() {
        // K* eta in Range(A*) iff its spectrum lives on the mask.
        let shape = GridShape::d2(4, 4).unwrap();
        let mask = sample_mask(&shape, 0.3, 4, true).unwrap();
        let set = ConstraintSet::<f64>::new(&mask);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let eta = field(&shape, &mut rng, 1.0);
        let r = set.range_residual(&eta).unwrap();
        let spec = set.dft().dft(&divergence(&eta)).unwrap();
        let off: f64 = (0..16).filter(|&l| !set.is_observed(l)).map(|l| spec[l].norm_sqr()).sum::<f64>().sqrt();
        assert!((r - off).abs() < 1e-12);
    }
}
