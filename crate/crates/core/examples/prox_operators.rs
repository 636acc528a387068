//! Shrinkage, its Moreau partner and the projection onto the feasible
//! gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tvcs::problems::mask::sample_mask;
use tvcs::problems::phantom::shepp_logan;
use tvcs::prox::{ball_projection, shrink, ConstraintSet};
use tvcs::{GridShape, Result, VectorField};

pub struct ProxSummary {
    pub moreau_gap: f64,
    pub idempotence_gap: f64,
    pub residual: f64,
}

pub fn run_example() -> Result<ProxSummary> {
    let shape = GridShape::d2(16, 16)?;
    let phantom = shepp_logan(&shape)?;
    let mask = sample_mask(&shape, 0.3, 4, true)?.measure(&phantom.image)?;
    let set = ConstraintSet::<f64>::new(&mask);

    let mut rng = ChaCha20Rng::seed_from_u64(0);
    let flat: Vec<f64> = (0..2 * shape.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let q = VectorField::from_flat(&shape, &flat)?;
    let tau = 0.3;

    let s = shrink(&q, tau);
    let zeroed = (0..shape.len()).filter(|&j| s.block_norm(j) == 0.0).count();
    println!("shrink at tau={tau} zeroes {zeroed} of {} blocks", shape.len());

    let moreau = s.add(&ball_projection(&q.scaled(1.0 / tau)).scaled(tau));
    let moreau_gap = moreau.distance(&q);
    println!("Moreau decomposition gap: {moreau_gap:.2e}");

    let h = set.prox_h(&q)?;
    let idempotence_gap = set.prox_h(&h)?.distance(&h);
    let residual = set.residual(&set.feasible_primal(&q)?)?;
    println!("prox_h idempotence gap {idempotence_gap:.2e}, ||A u - b|| of its primal {residual:.2e}");
    Ok(ProxSummary { moreau_gap, idempotence_gap, residual })
}

fn main() -> Result<()> {
    run_example()?;
    Ok(())
}
