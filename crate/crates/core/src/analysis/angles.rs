//! Principal angles between `K Kernel(A)` and `Kernel(B~)`, and the norm of
//! the linearised (relaxed) DRS operator they determine.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::VectorField;
use crate::problems::mask::SamplingMask;
use crate::prox::ConstraintSet;

use super::subspace::SubspacePair;
use super::support::SupportSet;

/// Singular values at or above `1 - INTERSECTION_THRESHOLD` are treated as
/// directions shared by both subspaces.
pub const INTERSECTION_THRESHOLD: f64 = 1e-6;

/// Largest ambient dimension `Nd` handled with dense factorizations.
pub const DENSE_LIMIT: usize = 4096;

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITERS: usize = 10_000;

/// Principal angles, smallest first.
///
/// Cosines and sines come from separate SVDs so that tiny angles keep full
/// relative accuracy (`acos` of a cosine near one does not).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSpectrum {
    pub cosines: Vec<f64>,
    pub sines: Vec<f64>,
    pub angles: Vec<f64>,
    /// Number of cosines at or above the intersection threshold.
    pub intersection_dim: usize,
    /// Largest cosine below the threshold, if any.
    pub cos_theta1: Option<f64>,
}

impl AngleSpectrum {
    /// `cos_desc` and `sin_asc` hold at least `p` values each.
    fn pair(mut cos_desc: Vec<f64>, mut sin_asc: Vec<f64>, p: usize) -> Self {
        cos_desc.sort_by(|a, b| b.total_cmp(a));
        sin_asc.sort_by(|a, b| a.total_cmp(b));
        cos_desc.truncate(p);
        sin_asc.truncate(p);
        let angles = cos_desc
            .iter()
            .zip(&sin_asc)
            .map(|(&c, &s)| s.atan2(c))
            .collect();
        let intersection_dim = cos_desc
            .iter()
            .take_while(|&&c| c >= 1.0 - INTERSECTION_THRESHOLD)
            .count();
        let cos_theta1 = cos_desc.get(intersection_dim).copied();
        Self {
            cosines: cos_desc,
            sines: sin_asc,
            angles,
            intersection_dim,
            cos_theta1,
        }
    }

    /// Smallest angle, intersections included.
    pub fn theta1(&self) -> f64 {
        self.angles.first().copied().unwrap_or(std::f64::consts::FRAC_PI_2)
    }

    /// `cos theta_1`, or an error when every direction is shared.
    pub fn require_cos_theta1(&self) -> Result<f64> {
        self.cos_theta1.ok_or(Error::IntersectionFillsSpace {
            count: self.intersection_dim,
        })
    }
}

fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.singular_values().iter().copied().collect()
}

fn padded(mut values: Vec<f64>, len: usize) -> Vec<f64> {
    values.resize(len.max(values.len()), 0.0);
    values
}

/// Angle spectrum between the column spans of two orthonormal bases.
pub fn angle_spectrum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<AngleSpectrum> {
    if a.nrows() != b.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "bases live in dimensions {} and {}",
            a.nrows(),
            b.nrows()
        )));
    }
    if a.ncols() == 0 || b.ncols() == 0 {
        return Err(Error::Degenerate("principal angles need two nonempty bases".into()));
    }
    let (a, b) = if a.ncols() <= b.ncols() { (a, b) } else { (b, a) };
    let p = a.ncols();
    let cross = a.transpose() * b;
    let residual = a - b * &cross.transpose();
    Ok(AngleSpectrum::pair(singular_values(&cross), padded(singular_values(&residual), p), p))
}

/// Like [`angle_spectrum`], failing when the subspaces share every direction.
pub fn principal_angles(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<AngleSpectrum> {
    let s = angle_spectrum(a, b)?;
    s.require_cos_theta1()?;
    Ok(s)
}

/// Angles between `C0` and the coordinate subspace `B0`. Rows of `C0` on the
/// support give the cosines, rows on the zero set the sines.
pub fn pair_angles(pair: &SubspacePair) -> Result<AngleSpectrum> {
    let k = pair.kernel_dim();
    let b = pair.b0_dim();
    if b == 0 {
        return Err(Error::Degenerate("support is empty, Kernel(B~) is trivial".into()));
    }
    let p = k.min(b);
    let cos = padded(singular_values(&pair.c0_support()), k);
    let sin = padded(singular_values(&pair.c0_zero()), k);
    Ok(AngleSpectrum::pair(cos, sin, p))
}

/// Result of [`intersection_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub theta1: f64,
    pub cos_theta1: Option<f64>,
    pub intersection_dim: usize,
    /// `dim K Kernel(A)` over the reals.
    pub kernel_dim_real: usize,
    /// The complex count `N - m`.
    pub kernel_dim_complex: usize,
    pub b0_dim: usize,
    pub method: String,
    pub iterations: usize,
    pub converged: bool,
}

impl IntersectionReport {
    /// Whether the check certifies a trivial intersection.
    pub fn trivial(&self) -> bool {
        self.intersection_dim == 0 && self.theta1 > 0.0
    }
}

/// Smallest principal angle between `K Kernel(A)` and `Kernel(B~)`: dense SVD
/// up to [`DENSE_LIMIT`], power iteration on `P_B P_C P_B` above it.
pub fn intersection_check(mask: &SamplingMask, support: &SupportSet) -> Result<IntersectionReport> {
    mask.shape().check_same(support.shape(), "intersection check")?;
    let shape = mask.shape();
    let nd = shape.len() * shape.ndim();
    let kernel_dim_complex = shape.len() - mask.len();
    let b0_dim = support.support_count() * shape.ndim();
    if nd <= DENSE_LIMIT {
        let pair = SubspacePair::new(mask, support)?;
        let s = pair_angles(&pair)?;
        return Ok(IntersectionReport {
            theta1: s.theta1(),
            cos_theta1: s.cos_theta1,
            intersection_dim: s.intersection_dim,
            kernel_dim_real: pair.kernel_dim(),
            kernel_dim_complex,
            b0_dim,
            method: "dense-svd".into(),
            iterations: 0,
            converged: true,
        });
    }
    let power = largest_cosine_power(mask, support, 0)?;
    let c = power.cosine.min(1.0);
    let shared = c >= 1.0 - INTERSECTION_THRESHOLD;
    Ok(IntersectionReport {
        theta1: c.acos(),
        cos_theta1: if shared { None } else { Some(c) },
        intersection_dim: usize::from(shared),
        kernel_dim_real: super::subspace::unobserved_pairs(mask)
            .iter()
            .map(|&(_, selfc)| if selfc { 1 } else { 2 })
            .sum(),
        kernel_dim_complex,
        b0_dim,
        method: "power-iteration".into(),
        iterations: power.iterations,
        converged: power.converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerResult {
    pub cosine: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn restrict(q: &mut VectorField<f64>, support: &SupportSet) {
    for j in support.zero_indices() {
        for c in q.comps_mut() {
            c[j] = 0.0;
        }
    }
}

/// Largest cosine between `K Kernel(A)` and `Kernel(B~)` by power iteration
/// on `P_B P_C P_B`, with `P_C` the homogeneous `prox_h`. Matrix free.
pub fn largest_cosine_power(mask: &SamplingMask, support: &SupportSet, seed: u64) -> Result<PowerResult> {
    if support.support_count() == 0 {
        return Err(Error::Degenerate("support is empty, Kernel(B~) is trivial".into()));
    }
    let set = ConstraintSet::<f64>::new(&mask.homogeneous());
    let shape = mask.shape();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let flat: Vec<f64> = (0..shape.len() * shape.ndim())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let mut x = VectorField::from_flat(shape, &flat)?;
    restrict(&mut x, support);
    x = x.scaled(1.0 / x.norm());
    let mut mu = 0.0;
    for it in 1..=POWER_MAX_ITERS {
        let mut y = set.prox_h(&x)?;
        restrict(&mut y, support);
        let next = x.dot(&y);
        let norm = y.norm();
        if norm == 0.0 {
            return Ok(PowerResult { cosine: 0.0, iterations: it, converged: true });
        }
        x = y.scaled(1.0 / norm);
        if (next - mu).abs() <= POWER_TOL * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(PowerResult { cosine: next.max(0.0).sqrt(), iterations: it, converged: true });
        }
        mu = next;
    }
    log::warn!("power iteration for cos theta_1 hit the {POWER_MAX_ITERS} iteration cap");
    Ok(PowerResult { cosine: mu.max(0.0).sqrt(), iterations: POWER_MAX_ITERS, converged: false })
}

/// `||H~^lambda||_2 = sqrt(lambda (2 - lambda) cos^2 theta_1 + (1 - lambda)^2)`.
pub fn spectral_norm_h_lambda(cos_theta1: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 2.0) {
        return Err(Error::InvalidParameter(format!("relaxation {lambda} is outside (0, 2)")));
    }
    if !(0.0..=1.0 + 1e-12).contains(&cos_theta1) {
        return Err(Error::InvalidParameter(format!("cos theta_1 = {cos_theta1} is outside [0, 1]")));
    }
    if lambda == 1.0 {
        return Ok(cos_theta1);
    }
    let c2 = cos_theta1 * cos_theta1;
    Ok((lambda * (2.0 - lambda) * c2 + (1.0 - lambda).powi(2)).sqrt())
}

fn projector(basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis * basis.transpose()
}

/// `(1 - lambda) I + lambda (P_U P_V + P_U^perp P_V^perp)`.
pub fn assemble_h_lambda(u: &DMatrix<f64>, v: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let n = u.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let (pu, pv) = (projector(u), projector(v));
    let h = &pu * &pv + (&id - &pu) * (&id - &pv);
    id * (1.0 - lambda) + h * lambda
}

/// Two `p`-dimensional subspaces of `R^{2p}` with principal angles `thetas`,
/// hidden behind a random rotation.
pub fn synthetic_pair(thetas: &[f64], seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let p = thetas.len();
    let n = 2 * p;
    let mut u = DMatrix::zeros(n, p);
    let mut v = DMatrix::zeros(n, p);
    for (i, &t) in thetas.iter().enumerate() {
        u[(2 * i, i)] = 1.0;
        v[(2 * i, i)] = t.cos();
        v[(2 * i + 1, i)] = t.sin();
    }
    let q = random_orthogonal(n, seed);
    (&q * u, q * v)
}

pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    g.qr().q()
}

/// Orthonormal basis of a random `k`-dimensional subspace containing `shared`.
pub fn random_basis_containing(shared: &DVector<f64>, k: usize, seed: u64) -> DMatrix<f64> {
    let n = shared.len();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut m = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
    m.set_column(0, shared);
    m.qr().q()
}
