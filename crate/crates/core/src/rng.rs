//! Seeded Gaussian streams.
//!
//! Every random object is drawn from its own ChaCha stream keyed by
//! `(seed, tag)`, so the order in which objects or trials are generated never
//! changes the values they receive.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit key for `(seed, tag)`.
pub fn substream_seed(seed: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in tag.bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(splitmix64(seed) ^ h)
}

/// Child seed for a path of integer indices, e.g. `(rho_index, trial_index)`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &i| splitmix64(acc ^ splitmix64(i.wrapping_add(0x632b_e59b_d9b4_e019))))
}

pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, tag: &str) -> Self {
        GaussianStream {
            rng: ChaCha8Rng::seed_from_u64(substream_seed(seed, tag)),
            spare: None,
        }
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let radius = (-2.0 * self.uniform().ln()).sqrt();
        let angle = std::f64::consts::TAU * self.uniform();
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn fill(&mut self, out: &mut [f64], scale: f64) {
        for x in out.iter_mut() {
            *x = scale * self.gaussian();
        }
    }

    pub fn vector(&mut self, len: usize, scale: f64) -> Vec<f64> {
        let mut v = vec![0.0; len];
        self.fill(&mut v, scale);
        v
    }

    /// Uniform point on the unit sphere in `dim` dimensions.
    pub fn unit_sphere(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let mut v = self.vector(dim, 1.0);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
                return v;
            }
        }
    }
}
