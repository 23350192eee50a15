use rand::Rng as _;

use super::linalg::Matrix;
use crate::rng::rng_from;

/// Glorot-uniform weights on ±sqrt(6 / (fan_in + fan_out)).
pub fn xavier_init(fan_in: usize, fan_out: usize, seed: u64) -> Matrix {
    assert!(fan_in > 0 && fan_out > 0, "fans must be positive");
    let bound = xavier_bound(fan_in, fan_out);
    let mut rng = rng_from(seed);
    let data = (0..fan_in * fan_out)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    Matrix::from_vec(fan_out, fan_in, data).expect("sized by construction")
}

pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}
