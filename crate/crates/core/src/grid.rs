//! Grids, images and vector fields.
//!
//! An image of size `n1 x n2 x ... x nd` is stored as a flat vector of length
//! `N = n1 * ... * nd` with **axis 1 varying fastest**. For a 2x2 image
//!
//! ```text
//!            j1 = 0   j1 = 1
//!   j2 = 0    u[0]     u[1]
//!   j2 = 1    u[2]     u[3]
//! ```
//!
//! the flat index is `j1 + n1 * j2`, i.e. the column-major `vec(U)` of the
//! matrix `U[j1, j2]`. Under this ordering the forward difference along axis
//! `i` is the Kronecker product `I(n_d) x ... x K(n_i) x ... x I(n_1)`: the
//! factor for axis 1 sits rightmost.
//!
//! A [`VectorField`] stacks `d` images. Its value at spatial index `j` is the
//! d-vector `(v^1_j, ..., v^d_j)`, which is the unit that the isotropic TV norm
//! and shrinkage act on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Dimensions of a 1-, 2- or 3-dimensional periodic grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GridShape {
    dims: Vec<usize>,
}

impl GridShape {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "{} axes requested, only 1 to 3 are supported",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidGrid(format!("zero-length axis in {dims:?}")));
        }
        Ok(Self {
            dims: dims.to_vec(),
        })
    }

    pub fn d1(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn d2(n1: usize, n2: usize) -> Result<Self> {
        Self::new(&[n1, n2])
    }

    pub fn d3(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        Self::new(&[n1, n2, n3])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of axes `d`.
    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Total number of grid points `N`.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Distance in the flat vector between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.dims[..axis].iter().product()
    }

    /// Splits a flat index into per-axis coordinates.
    pub fn unravel(&self, mut index: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for (axis, &n) in self.dims.iter().enumerate() {
            out[axis] = index % n;
            index /= n;
        }
        out
    }

    pub fn ravel(&self, coords: &[usize]) -> usize {
        let mut index = 0;
        for axis in (0..self.ndim()).rev() {
            index = index * self.dims[axis] + coords[axis] % self.dims[axis];
        }
        index
    }

    /// Index of the frequency `-l`, the Hermitian partner of `l`.
    pub fn conjugate_index(&self, index: usize) -> usize {
        let c = self.unravel(index);
        let mut neg = [0; 3];
        for (axis, &n) in self.dims.iter().enumerate() {
            neg[axis] = (n - c[axis]) % n;
        }
        self.ravel(&neg[..self.ndim()])
    }

    /// Parses `64x64`, `32x32x32` or `16`.
    pub fn parse(text: &str) -> Result<Self> {
        let dims = text
            .split(['x', 'X', ','])
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidGrid(format!("cannot parse `{text}` as a shape")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&dims)
    }

    pub fn check_same(&self, other: &GridShape, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch(format!(
                "{what}: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for GridShape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        GridShape::new(&dims)
    }
}

impl From<GridShape> for Vec<usize> {
    fn from(shape: GridShape) -> Self {
        shape.dims
    }
}

impl std::fmt::Display for GridShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|n| n.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

/// A real d-dimensional image, flattened with axis 1 fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T = f64> {
    shape: GridShape,
    data: Vec<T>,
}

impl<T: Real> Image<T> {
    pub fn new(shape: GridShape, data: Vec<T>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "image data has {} values, shape {} needs {}",
                data.len(),
                shape,
                shape.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &GridShape) -> Self {
        Self {
            data: vec![T::zero(); shape.len()],
            shape: shape.clone(),
        }
    }

    pub fn constant(shape: &GridShape, value: T) -> Self {
        Self {
            data: vec![value; shape.len()],
            shape: shape.clone(),
        }
    }

    pub fn from_fn(shape: &GridShape, f: impl FnMut(usize) -> T) -> Self {
        Self {
            data: (0..shape.len()).map(f).collect(),
            shape: shape.clone(),
        }
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// `||self - other|| / ||other||`, or the absolute distance when `other` is zero.
    pub fn relative_error(&self, reference: &Self) -> f64 {
        let diff = self
            .data
            .iter()
            .zip(&reference.data)
            .map(|(&a, &b)| {
                let d = a.f64() - b.f64();
                d * d
            })
            .sum::<f64>()
            .sqrt();
        let base = reference.norm();
        if base > 0.0 {
            diff / base
        } else {
            diff
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn cast<U: Real>(&self) -> Image<U> {
        Image {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| U::of(x.f64())).collect(),
        }
    }
}

/// `d` stacked real arrays of length `N`, addressed per spatial index as a
/// d-vector.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T = f64> {
    shape: GridShape,
    comps: Vec<Vec<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn new(shape: GridShape, comps: Vec<Vec<T>>) -> Result<Self> {
        if comps.len() != shape.ndim() {
            return Err(Error::ShapeMismatch(format!(
                "field has {} components, shape {} needs {}",
                comps.len(),
                shape,
                shape.ndim()
            )));
        }
        if comps.iter().any(|c| c.len() != shape.len()) {
            return Err(Error::ShapeMismatch(format!(
                "field component length differs from N = {}",
                shape.len()
            )));
        }
        Ok(Self { shape, comps })
    }

    pub fn zeros(shape: &GridShape) -> Self {
        Self {
            comps: vec![vec![T::zero(); shape.len()]; shape.ndim()],
            shape: shape.clone(),
        }
    }

    /// Builds a field from its `N*d` flat representation (component-major).
    pub fn from_flat(shape: &GridShape, flat: &[T]) -> Result<Self> {
        let n = shape.len();
        if flat.len() != n * shape.ndim() {
            return Err(Error::ShapeMismatch(format!(
                "flat field has {} values, expected {}",
                flat.len(),
                n * shape.ndim()
            )));
        }
        Ok(Self {
            comps: flat.chunks(n).map(|c| c.to_vec()).collect(),
            shape: shape.clone(),
        })
    }

    /// Component-major flattening, the `R^{Nd}` view used by the analysis.
    pub fn to_flat(&self) -> Vec<T> {
        self.comps.concat()
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[Vec<T>] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.comps
    }

    pub fn comp(&self, axis: usize) -> &[T] {
        &self.comps[axis]
    }

    /// The d-vector at spatial index `j`.
    pub fn block(&self, j: usize) -> Vec<T> {
        self.comps.iter().map(|c| c[j]).collect()
    }

    pub fn set_block(&mut self, j: usize, value: &[T]) {
        for (c, &x) in self.comps.iter_mut().zip(value) {
            c[j] = x;
        }
    }

    /// Euclidean norm of the block at spatial index `j`.
    pub fn block_norm(&self, j: usize) -> f64 {
        self.comps
            .iter()
            .map(|c| {
                let x = c[j].f64();
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }

    /// The length-`N` map `|v|` of per-index block norms.
    pub fn magnitudes(&self) -> Vec<f64> {
        (0..self.shape.len()).map(|j| self.block_norm(j)).collect()
    }

    /// `||v||_{inf,2}`.
    pub fn max_block_norm(&self) -> f64 {
        (0..self.shape.len())
            .map(|j| self.block_norm(j))
            .fold(0.0, f64::max)
    }

    /// `||v||_{1,2}`.
    pub fn l12_norm(&self) -> f64 {
        (0..self.shape.len()).map(|j| self.block_norm(j)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| c.iter().map(|&x| x.f64() * x.f64()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| dot(a, b))
            .sum()
    }

    pub fn map2(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            shape: self.shape.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            shape: self.shape.clone(),
            comps: self
                .comps
                .iter()
                .map(|a| a.iter().map(|&x| f(x)).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.map2(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.map2(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: T) -> Self {
        self.map(|a| a * c)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: T, other: &Self) -> Self {
        self.map2(other, |a, b| a + c * b)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(&x, &y)| {
                        let d = x.f64() - y.f64();
                        d * d
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|x| x.is_finite()))
    }

    pub fn cast<U: Real>(&self) -> VectorField<U> {
        VectorField {
            shape: self.shape.clone(),
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|&x| U::of(x.f64())).collect())
                .collect(),
        }
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x.f64() * y.f64()).sum()
}

pub(crate) fn norm2<T: Real>(a: &[T]) -> f64 {
    a.iter().map(|&x| x.f64() * x.f64()).sum::<f64>().sqrt()
}
