//! Shepp-Logan phantoms.
//!
//! 2D: the classical ten-ellipse table of Shepp and Logan (intensities
//! 2, -0.98, -0.02, -0.02, 0.01 x 6). The "modified" contrast-enhanced table
//! is not used: its skull is so bright relative to the interior that the
//! image is visibly lopsided after rasterization at desk sizes.
//!
//! 3D: the ellipsoid geometry popularised by `phantom3d` (same in-plane
//! ellipses, added z semi-axes and centres), with the classical intensities
//! and rotations about the z axis only.
//!
//! Pixel centres sit on `[-1, 1]`: axis 1 runs along `x` left to right, axis 2
//! along `y` top to bottom, axis 3 along `z` bottom to top. After summing, the
//! image is divided by its maximum so values lie in `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridShape, Image};

/// `(intensity, a, b, x0, y0, phi_degrees)`
const ELLIPSES: [[f64; 6]; 10] = [
    [2.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.98, 0.6624, 0.874, 0.0, -0.0184, 0.0],
    [-0.02, 0.11, 0.31, 0.22, 0.0, -18.0],
    [-0.02, 0.16, 0.41, -0.22, 0.0, 18.0],
    [0.01, 0.21, 0.25, 0.0, 0.35, 0.0],
    [0.01, 0.046, 0.046, 0.0, 0.1, 0.0],
    [0.01, 0.046, 0.046, 0.0, -0.1, 0.0],
    [0.01, 0.046, 0.023, -0.08, -0.605, 0.0],
    [0.01, 0.023, 0.023, 0.0, -0.606, 0.0],
    [0.01, 0.023, 0.046, 0.06, -0.605, 0.0],
];

/// `(c, z0)` completing each ellipse to an ellipsoid.
const Z_EXTENT: [[f64; 2]; 10] = [
    [0.81, 0.0],
    [0.78, 0.0],
    [0.22, 0.0],
    [0.28, 0.0],
    [0.41, -0.15],
    [0.05, 0.25],
    [0.05, 0.25],
    [0.05, 0.0],
    [0.02, 0.0],
    [0.02, 0.0],
];

/// A generated image plus a description of how it was made.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub image: Image<f64>,
    pub meta: PhantomMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomMeta {
    pub name: String,
    pub variant: String,
    pub shape: GridShape,
    /// Raw maximum before rescaling to `[0, 1]`.
    pub raw_max: f64,
}

fn centre(j: usize, n: usize) -> f64 {
    -1.0 + (2 * j + 1) as f64 / n as f64
}

/// Shepp-Logan phantom on a 2D or 3D grid.
pub fn shepp_logan(shape: &GridShape) -> Result<Phantom> {
    let d = shape.ndim();
    if d != 2 && d != 3 {
        return Err(Error::InvalidGrid(format!(
            "Shepp-Logan is defined for 2 or 3 axes, got {d}"
        )));
    }
    let dims = shape.dims();
    let mut raw = vec![0.0; shape.len()];
    for (j, value) in raw.iter_mut().enumerate() {
        let c = shape.unravel(j);
        let x = centre(c[0], dims[0]);
        let y = -centre(c[1], dims[1]);
        let z = if d == 3 { centre(c[2], dims[2]) } else { 0.0 };
        for (e, ext) in ELLIPSES.iter().zip(&Z_EXTENT) {
            let [amp, a, b, x0, y0, phi] = *e;
            let (s, co) = phi.to_radians().sin_cos();
            let (dx, dy) = (x - x0, y - y0);
            let xr = dx * co + dy * s;
            let yr = -dx * s + dy * co;
            let mut r = (xr / a).powi(2) + (yr / b).powi(2);
            if d == 3 {
                r += ((z - ext[1]) / ext[0]).powi(2);
            }
            if r <= 1.0 {
                *value += amp;
            }
        }
    }
    let raw_max = raw.iter().cloned().fold(f64::MIN, f64::max);
    let image = Image::new(shape.clone(), raw.iter().map(|v| v / raw_max).collect())?;
    Ok(Phantom {
        image,
        meta: PhantomMeta {
            name: "shepp-logan".into(),
            variant: if d == 2 {
                "classical ten-ellipse table, intensities divided by max".into()
            } else {
                "phantom3d ellipsoid geometry, classical intensities, z-axis rotations only, divided by max".into()
            },
            shape: shape.clone(),
            raw_max,
        },
    })
}

/// Seeded 1D piecewise-constant signal with `jumps` jumps at distinct
/// positions and levels drawn from `[0, 1]`, then rescaled to `[0, 1]`.
pub fn staircase(n: usize, jumps: usize, seed: u64) -> Result<Phantom> {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    if jumps == 0 || jumps >= n {
        return Err(Error::InvalidParameter(format!("{jumps} jumps do not fit a signal of length {n}")));
    }
    let shape = GridShape::d1(n)?;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let mut positions: Vec<usize> = (1..n).collect();
    positions.shuffle(&mut rng);
    let mut cuts = positions[..jumps].to_vec();
    cuts.sort_unstable();
    let mut raw = vec![0.0; n];
    let mut level: f64 = rng.random_range(0.0..1.0);
    let mut next = cuts.iter().peekable();
    for (j, value) in raw.iter_mut().enumerate() {
        if next.peek() == Some(&&j) {
            next.next();
            // Keep consecutive levels apart so every cut is a real jump.
            level = (level + rng.random_range(0.2..0.8)) % 1.0;
        }
        *value = level;
    }
    let (lo, hi) = raw.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let image = Image::new(shape.clone(), raw.iter().map(|v| (v - lo) / (hi - lo)).collect())?;
    Ok(Phantom {
        image,
        meta: PhantomMeta {
            name: "staircase".into(),
            variant: format!("{jumps} jumps, seed {seed}, rescaled to [0, 1]"),
            shape,
            raw_max: hi,
        },
    })
}

/// Left-right mirror (`j1 -> n1 - 1 - j1`).
pub fn mirror_x(u: &Image<f64>) -> Image<f64> {
    let shape = u.shape();
    let n1 = shape.dims()[0];
    Image::from_fn(shape, |j| {
        let mut c = shape.unravel(j);
        c[0] = n1 - 1 - c[0];
        u.data()[shape.ravel(&c[..shape.ndim()])]
    })
}
