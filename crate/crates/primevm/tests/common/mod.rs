#![allow(dead_code)]

use primevm::attractors::{generate_supported, train_self_connection, SpaceParams, TrainConfig, TrainedRegister};
use primevm::substrate::SynapseMask;
use primevm::Pattern;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub const N: usize = 2000;
pub const ACTIVE: usize = 20;
pub const KAPPA: usize = 600;

/// Desk-scale register trained on `count` supported symbols `s0`, `s1`, ...
pub fn desk_register(count: usize, seed: u64) -> (TrainedRegister, Arc<SynapseMask>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = Arc::new(SynapseMask::random(N, N, KAPPA, &mut rng));
    let names: Vec<String> = (0..count).map(|i| format!("s{i}")).collect();
    let params = SpaceParams { size: N, active: ACTIVE, seed: seed + 1 };
    let space = Arc::new(generate_supported(params, &names, &mask).unwrap());
    let reg = train_self_connection(space, Arc::clone(&mask), &TrainConfig::default()).unwrap();
    (reg, mask)
}

/// Uniform exact-size random pattern.
pub fn random_pattern<R: rand::Rng>(size: usize, active: usize, rng: &mut R) -> Pattern {
    let v = rand::seq::index::sample(rng, size, active).into_iter().map(|i| i as u32).collect();
    Pattern::from_unsorted(size, v).unwrap()
}

pub fn scaled(p: &Pattern, s: f32) -> Vec<f32> {
    p.to_dense().iter().map(|x| x * s).collect()
}
