// shared between test targets; each target uses a subset
#![allow(dead_code)]

use quasiprob::gaussian::PhysicalGaussianState;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Valid normal form: beta free in [0.35, 2.4], alpha pushed above both
/// beta (ordering) and 1/beta (uncertainty).
pub fn random_alpha_beta(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let beta: f64 = rng.gen_range(0.35..2.4);
    let alpha = beta.max(1.0 / beta) * rng.gen_range(1.0..2.2);
    (alpha.min(4.0), beta)
}

pub fn random_state(rng: &mut ChaCha8Rng) -> PhysicalGaussianState {
    let (alpha, beta) = random_alpha_beta(rng);
    PhysicalGaussianState::from_alpha_beta(alpha, beta).unwrap()
}

pub fn random_classical_state(rng: &mut ChaCha8Rng) -> PhysicalGaussianState {
    let beta: f64 = rng.gen_range(1.0..2.2);
    let alpha = beta * rng.gen_range(1.0..2.0);
    PhysicalGaussianState::from_alpha_beta(alpha.min(4.0), beta).unwrap()
}
