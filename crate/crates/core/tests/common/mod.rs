//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use qjam::hamiltonians::ModelParams;
use qjam::lattice::SpeciesSequence;
use qjam::operators::DiagonalOperatorSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `..., (1,0,0,1), (1,0,0,1_0), (0,0,1,1), (0,0,1,1), ...`
pub fn eq19() -> SpeciesSequence {
    SpeciesSequence::from_pattern(2, &[1, 0, 0, 1], 3, 0).unwrap()
}

/// Random `(Delta, g, V)` with `J = 1`.
pub fn draws(count: usize, seed: u64) -> Vec<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| ModelParams::new(1.0, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
        .collect()
}

/// Class I density summed over the sites of the fragment `up down^n`,
/// evaluated on `up down^n up` followed by spins down.
pub fn class1_fragment(op: &DiagonalOperatorSpec, n: i64) -> i64 {
    let spin = |s: i64| s == 0 || s == n + 1;
    (0..=n).map(|start| op.eval_at(spin, start)).sum()
}

/// Class II density with its up projector on the middle particle of
/// `up down^{n_-} up down^{n_+} up`, surrounded by spins down.
pub fn class2_fragment(op: &DiagonalOperatorSpec, n_minus: i64, n_plus: i64) -> i64 {
    let j = n_minus + 1;
    let spin = |s: i64| s == 0 || s == j || s == j + n_plus + 1;
    let up_at = op.pattern.iter().position(|f| *f == qjam::operators::Factor::Up).unwrap() as i64;
    op.eval_at(spin, j - up_at)
}

/// `J_n(x) = (1/pi) int_0^pi cos(n tau - x sin tau) dtau` by the periodic
/// trapezoid rule.
pub fn bessel_integral(n: i64, x: f64) -> f64 {
    let m = 4096;
    let h = 2.0 * PI / m as f64;
    (0..m).map(|i| (n as f64 * i as f64 * h - x * (i as f64 * h).sin()).cos()).sum::<f64>() / m as f64
}
