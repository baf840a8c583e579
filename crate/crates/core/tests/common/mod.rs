#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nhlab_core::jet::JetPoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize, half_width: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-half_width..half_width)).collect()
}

/// Rod jet point from `(x, y, θ)`, primes and dots.
pub fn rod_point(fields: [f64; 3], primes: [f64; 3], dots: [f64; 3]) -> JetPoint {
    let mut jet1 = DMatrix::zeros(3, 2);
    for a in 0..3 {
        jet1[(a, 0)] = primes[a];
        jet1[(a, 1)] = dots[a];
    }
    JetPoint::new(
        DVector::from_vec(vec![0.1, 0.2]),
        DVector::from_row_slice(&fields),
        jet1,
    )
    .unwrap()
}

/// Random jet point with a symmetric second jet.
pub fn random_point(rng: &mut ChaCha8Rng, n_fields: usize, n_base: usize, w: f64) -> JetPoint {
    let base = DVector::from_vec(uniform(rng, n_base, w));
    let fields = DVector::from_vec(uniform(rng, n_fields, w));
    let jet1 = DMatrix::from_vec(n_fields, n_base, uniform(rng, n_fields * n_base, w));
    let jet2 = (0..n_fields)
        .map(|_| {
            let m = DMatrix::from_vec(n_base, n_base, uniform(rng, n_base * n_base, w));
            (&m + m.transpose()) * 0.5
        })
        .collect();
    JetPoint::new(base, fields, jet1)
        .unwrap()
        .with_jet2(jet2)
        .unwrap()
}
