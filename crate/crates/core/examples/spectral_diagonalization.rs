//! The periodic gradient is diagonalized by the DFT: applying `K` through
//! FFTs agrees with the explicit sparse difference matrix.

use nalgebra::DVector;
use tvcs::dense::gradient_matrix;
use tvcs::problems::phantom::shepp_logan;
use tvcs::spectral::{difference_eigenvalues, gradient, Dft, SpectralOperator};
use tvcs::{GridShape, Result};

/// Returns the largest gap between the spectral and the dense gradient.
pub fn run_example() -> Result<f64> {
    let shape = GridShape::d2(16, 16)?;
    let u = shepp_logan(&shape)?.image;

    let lambdas = difference_eigenvalues(8);
    println!("eigenvalues of the n=8 periodic difference:");
    for (k, l) in lambdas.iter().enumerate() {
        println!("  k={k}: {:+.4} {:+.4}i", l.re, l.im);
    }

    let dft = Dft::<f64>::new(&shape);
    let op = SpectralOperator::new(&shape);
    let direct = gradient(&u);
    let dense = gradient_matrix(&shape) * DVector::from_column_slice(u.data());
    let mut gap = 0.0f64;
    for axis in 0..shape.ndim() {
        let spectral = op.apply_axis_spectral(&dft, &u, axis)?;
        for (j, s) in spectral.iter().enumerate() {
            gap = gap.max((s - direct.comp(axis)[j]).abs());
            gap = gap.max((s - dense[axis * shape.len() + j]).abs());
        }
    }
    println!("max |K_fft u - K_dense u| on 16x16 Shepp-Logan: {gap:.2e}");
    Ok(gap)
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
