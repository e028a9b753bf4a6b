//! Portable random streams: xoshiro256** seeded through SplitMix64, with
//! standard normals from the Marsaglia polar method.
//!
//! Everything here is specified down to the bit so that a seed reproduces
//! the same noise on any platform.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    core: Xoshiro256StarStar,
    spare: Option<u64>,
}

impl Rng {
    /// The xoshiro256** state is the first four SplitMix64 outputs of `seed`.
    pub fn seed(seed: u64) -> Self {
        Rng { core: Xoshiro256StarStar::seed_from_u64(seed), spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via the polar method. Each accepted pair yields two
    /// variates; the second is cached (as raw bits) for the next call.
    pub fn normal(&mut self) -> f64 {
        if let Some(bits) = self.spare.take() {
            return f64::from_bits(bits);
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some((v * m).to_bits());
                return u * m;
            }
        }
    }

    /// Half-normal draw: standard normals are drawn until one is nonnegative.
    pub fn positive_normal(&mut self) -> f64 {
        loop {
            let z = self.normal();
            if z >= 0.0 {
                return z;
            }
        }
    }
}
