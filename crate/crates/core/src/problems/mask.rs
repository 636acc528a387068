//! Random Fourier sampling masks and measurement synthesis.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridShape, Image};
use crate::real::Real;
use crate::spectral::Dft;

/// Relative tolerance for Hermitian consistency of supplied data.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Observed frequency set `Omega` with data `b` on it.
///
/// Frequencies are flat DFT indices; index 0 is the zero frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingMask {
    shape: GridShape,
    indices: Vec<usize>,
    data: Vec<Complex64>,
    fraction: f64,
    seed: u64,
    symmetric: bool,
}

impl SamplingMask {
    /// Validates and builds a mask. `indices` are sorted and deduplicated;
    /// `data` must be aligned with the sorted indices.
    pub fn new(
        shape: GridShape,
        indices: Vec<usize>,
        data: Vec<Complex64>,
        fraction: f64,
        seed: u64,
        symmetric: bool,
    ) -> Result<Self> {
        let n = shape.len();
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("mask indices must be strictly increasing".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::InvalidParameter(format!("mask index {last} out of range for N = {n}")));
            }
        }
        if indices.first() != Some(&0) {
            return Err(Error::ZeroFrequencyMissing);
        }
        if data.len() != indices.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} data values for {} observed frequencies",
                data.len(),
                indices.len()
            )));
        }
        let mask = Self {
            shape,
            indices,
            data,
            fraction,
            seed,
            symmetric,
        };
        if symmetric {
            mask.check_hermitian()?;
        }
        Ok(mask)
    }

    fn check_hermitian(&self) -> Result<()> {
        let scale = self.data.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for (pos, &l) in self.indices.iter().enumerate() {
            let partner = self.shape.conjugate_index(l);
            match self.indices.binary_search(&partner) {
                Ok(p) => {
                    let mismatch = (self.data[p] - self.data[pos].conj()).norm();
                    if mismatch > HERMITIAN_TOL * scale {
                        return Err(Error::HermitianInconsistent { index: l, mismatch });
                    }
                }
                Err(_) => {
                    return Err(Error::InvalidParameter(format!(
                        "symmetric mask contains frequency {l} but not its conjugate {partner}"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Observed data `b`, aligned with [`indices`](Self::indices).
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Requested sampling fraction (the realised one is `len / N`).
    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Whether `Omega = -Omega` is enforced.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `m = |Omega|`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.shape.len()
    }

    /// Same frequencies with `b = 0`, i.e. the constraint `A u = 0`.
    pub fn homogeneous(&self) -> SamplingMask {
        Self {
            data: vec![Complex64::new(0.0, 0.0); self.data.len()],
            ..self.clone()
        }
    }

    /// Membership table over all `N` frequencies.
    pub fn membership(&self) -> Vec<bool> {
        let mut member = vec![false; self.shape.len()];
        for &l in &self.indices {
            member[l] = true;
        }
        member
    }

    /// `M^T b`: the data scattered to a length-`N` spectrum, zero off `Omega`.
    pub fn scattered(&self) -> Vec<Complex64> {
        let mut full = vec![Complex64::new(0.0, 0.0); self.shape.len()];
        for (&l, &b) in self.indices.iter().zip(&self.data) {
            full[l] = b;
        }
        full
    }

    /// Replaces the data with `M F u`.
    pub fn measure<T: Real>(&self, u: &Image<T>) -> Result<SamplingMask> {
        self.shape.check_same(u.shape(), "measure")?;
        let dft = Dft::<f64>::new(&self.shape);
        let spec = dft.forward_real(&u.cast::<f64>().into_data());
        let data = self
            .indices
            .iter()
            .map(|&l| {
                if !self.symmetric {
                    return spec[l];
                }
                // Average with the conjugate partner so b is exactly Hermitian.
                let partner = spec[self.shape.conjugate_index(l)].conj();
                (spec[l] + partner) * 0.5
            })
            .collect();
        Ok(SamplingMask {
            data,
            ..self.clone()
        })
    }

    /// `A u - b` norm, i.e. the data misfit of `u`.
    pub fn residual<T: Real>(&self, u: &Image<T>) -> Result<f64> {
        let dft = Dft::<f64>::new(&self.shape);
        self.residual_with(&dft, u)
    }

    pub(crate) fn residual_with<T: Real>(&self, dft: &Dft<f64>, u: &Image<T>) -> Result<f64> {
        self.shape.check_same(u.shape(), "residual")?;
        let spec = dft.forward_real(&u.cast::<f64>().into_data());
        Ok(self
            .indices
            .iter()
            .zip(&self.data)
            .map(|(&l, &b)| (spec[l] - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Zero-filled reconstruction `F* M^T b`.
    pub fn zero_filled<T: Real>(&self) -> Result<Image<T>> {
        let dft = Dft::<f64>::new(&self.shape);
        let values = if self.symmetric {
            dft.inverse_real(self.scattered())?
        } else {
            let mut spec = self.scattered();
            dft.inverse_inplace(&mut spec);
            spec.into_iter().map(|c| c.re).collect()
        };
        Ok(Image::new(self.shape.clone(), values)?.cast())
    }
}

/// Draws a random frequency set of size at least `ceil(fraction * N)`.
///
/// Indices are visited in a seeded uniform shuffle. With `symmetric` each
/// accepted frequency brings its conjugate along, so the set closes under
/// negation and the count may overshoot the target by one. The zero
/// frequency is always included. Data starts at zero; see
/// [`SamplingMask::measure`].
pub fn sample_mask(shape: &GridShape, fraction: f64, seed: u64, symmetric: bool) -> Result<SamplingMask> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sampling fraction {fraction} outside (0, 1]"
        )));
    }
    let n = shape.len();
    let target = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut member = vec![false; n];
    member[0] = true;
    let mut count = 1;
    let mut order: Vec<usize> = (1..n).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    for l in order {
        if count >= target {
            break;
        }
        if member[l] {
            continue;
        }
        member[l] = true;
        count += 1;
        if symmetric {
            let partner = shape.conjugate_index(l);
            if !member[partner] {
                member[partner] = true;
                count += 1;
            }
        }
    }
    let indices: Vec<usize> = (0..n).filter(|&l| member[l]).collect();
    let data = vec![Complex64::new(0.0, 0.0); indices.len()];
    SamplingMask::new(shape.clone(), indices, data, fraction, seed, symmetric)
}
