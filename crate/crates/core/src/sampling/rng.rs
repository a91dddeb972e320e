use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream identifiers. Every consumer of randomness draws from its own ChaCha8 stream so that
/// adding draws in one place never shifts the sequence seen by another.
pub mod streams {
    pub const RAYS: u64 = 1;
    pub const SYMMETRY_PAIRS: u64 = 2;
    pub const SURFACE_ORIGINS: u64 = 3;
    pub const INIT: u64 = 4;
    pub const SHUFFLE: u64 = 5;
    pub const PAIR_SHUFFLE: u64 = 6;
    pub const PYRAMID_NOISE: u64 = 7;
    pub const POSES: u64 = 8;
    pub const EVAL: u64 = 9;
}

/// Counter-based generator: ChaCha with 8 rounds, keyed by `seed` (expanded with the PCG32 scheme
/// of `rand_core::SeedableRng::seed_from_u64`) and with `stream` as the 64-bit nonce.
///
/// Derived draws are fully specified:
/// * `uniform`: `(next_u64 >> 11) · 2⁻⁵³`, in `[0, 1)`;
/// * `normal`: Box–Muller cosine branch on `(1 − uniform, uniform)`; the sine branch is discarded;
/// * `below(n)`: rejection sampling on `next_u64` against the largest multiple of `n`.
#[derive(Debug, Clone)]
pub struct RayRng {
    inner: ChaCha8Rng,
}

impl RayRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Fisher–Yates, from the back.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }

    /// Uniform direction on the unit sphere from a normalized isotropic Gaussian.
    pub fn unit_vector(&mut self) -> [f64; 3] {
        loop {
            let v = [self.normal(), self.normal(), self.normal()];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-12 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }
}
