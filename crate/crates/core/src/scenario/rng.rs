//! Seeded random streams.
//!
//! Every run derives independent ChaCha20 streams from one `u64` seed, one per
//! noise source, so adding draws to one source never shifts another. Standard
//! normals use the Box–Muller transform.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub const GENERATOR: &str = "chacha20";
pub const GAUSSIAN_TRANSFORM: &str = "box-muller";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    ProcessNoise = 0,
    MeasurementNoise = 1,
    Disturbance = 2,
    Particles = 3,
}

/// Standard-normal source over a dedicated stream.
#[derive(Clone, Debug)]
pub struct NormalStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64, stream: Stream) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream as u64);
        NormalStream { rng, spare: None }
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_vector(&mut self, n: usize) -> DVector<f64> {
        DVector::from_iterator(n, (0..n).map(|_| self.normal()))
    }

    /// Draw from `N(0, S Sᵀ)` given a square root `S`.
    pub fn correlated(&mut self, sqrt_cov: &DMatrix<f64>) -> DVector<f64> {
        let z = self.standard_vector(sqrt_cov.ncols());
        sqrt_cov * z
    }
}
