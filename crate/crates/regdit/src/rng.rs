//! Seeded RNG streams. Every stochastic quantity in the library is drawn
//! from a stream derived from (base seed, purpose tag, indices), never from
//! shared mutable RNG state, so results are independent of execution order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::{Scalar, Tensor};

/// splitmix64 finalizer; good avalanche for combining seed material.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive an independent stream from a base seed, a purpose tag, and indices.
pub fn stream(seed: u64, tag: &str, indices: &[u64]) -> ChaCha8Rng {
    let mut h = mix(seed);
    for b in tag.bytes() {
        h = mix(h ^ b as u64);
    }
    for &i in indices {
        h = mix(h ^ i);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Standard normal via Box-Muller (cached second variate dropped to keep the
/// draw count per call fixed).
pub fn normal(rng: &mut impl RngCore) -> f64 {
    loop {
        let u1: f64 = rng.gen::<f64>();
        if u1 > 1e-300 {
            let u2: f64 = rng.gen::<f64>();
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

pub fn normal_tensor<T: Scalar>(rng: &mut impl RngCore, shape: Vec<usize>) -> Tensor<T> {
    let n = shape.iter().product();
    let data = (0..n).map(|_| T::from_f64(normal(rng))).collect();
    Tensor::from_vec(shape, data)
}

/// Normal with standard deviation `std`.
pub fn normal_tensor_scaled<T: Scalar>(
    rng: &mut impl RngCore,
    shape: Vec<usize>,
    std: f64,
) -> Tensor<T> {
    let n = shape.iter().product();
    let data = (0..n).map(|_| T::from_f64(normal(rng) * std)).collect();
    Tensor::from_vec(shape, data)
}
