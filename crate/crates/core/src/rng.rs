//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator (`rand_chacha::ChaCha8Rng`) seeded
//! from a 64-bit seed; the output is identical on every platform. Sub-streams
//! for individuals, views or children are derived by mixing a parent seed
//! with tags through SplitMix64.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{Mat3, Vec3};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the sub-stream identified by `tags` under `seed`.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, t| splitmix64(acc ^ splitmix64(*t)))
}

pub fn derived(seed: u64, tags: &[u64]) -> Rng {
    seeded(derive_seed(seed, tags))
}

/// Rotation drawn uniformly (Haar measure) from SO(3) via Shoemake's
/// uniform unit quaternion.
pub fn uniform_rotation<R: rand::Rng + ?Sized>(rng: &mut R) -> Mat3<f64> {
    use std::f64::consts::TAU;
    let u1: f64 = rng.random();
    let (u2, u3): (f64, f64) = (rng.random::<f64>() * TAU, rng.random::<f64>() * TAU);
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    Mat3::from_quaternion(b * u3.cos(), a * u2.sin(), a * u2.cos(), b * u3.sin())
}

/// Unit vector uniform over the spherical cap of half-angle `max_angle`
/// around `+z`.
pub fn uniform_cap<R: rand::Rng + ?Sized>(rng: &mut R, max_angle: f64) -> Vec3<f64> {
    let cos_max = max_angle.cos();
    let z = 1.0 - rng.random::<f64>() * (1.0 - cos_max);
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

pub fn uniform_in<R: rand::Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}
