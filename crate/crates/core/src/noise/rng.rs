use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NoiseError;

/// Identifies the increment stream of one sample path.
///
/// The ChaCha key is `(master_seed, path)`, the ChaCha stream id is the
/// step index, and mode `n` always reads the same word position, so every
/// increment is a pure function of `(master_seed, path, step, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoiseStream {
    pub master_seed: u64,
    pub path: u64,
}

impl NoiseStream {
    pub fn new(master_seed: u64, path: u64) -> Self {
        Self { master_seed, path }
    }

    pub fn at(&self, step: u64) -> StreamKey {
        StreamKey { stream: *self, step }
    }

    fn generator(&self, step: u64) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&self.path.to_le_bytes());
        seed[16..24].copy_from_slice(b"wiener\0\0");
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(step);
        rng
    }

    /// Standard normals for modes `0..count` at `step`.
    pub fn normals(&self, step: u64, count: usize) -> Vec<f64> {
        let mut rng = self.generator(step);
        let mut out = Vec::with_capacity(count + 1);
        while out.len() < count {
            let (a, b) = box_muller(rng.next_u64(), rng.next_u64());
            out.push(a);
            out.push(b);
        }
        out.truncate(count);
        out
    }
}

/// A stream positioned at one time step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    pub stream: NoiseStream,
    pub step: u64,
}

fn unit_open(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn box_muller(x: u64, y: u64) -> (f64, f64) {
    let r = (-2.0 * unit_open(x).ln()).sqrt();
    let theta = std::f64::consts::TAU * unit_open(y);
    (r * theta.cos(), r * theta.sin())
}

/// Increments of the truncated cylindrical Brownian motion over one step.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerIncrement {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl WienerIncrement {
    pub fn zero(dt: f64, modes: usize) -> Self {
        Self { dt, values: vec![0.0; modes] }
    }

    /// Unit vector in mode `n`, used to read off single diffusion modes.
    pub fn unit(n: usize, modes: usize) -> Self {
        let mut values = vec![0.0; modes];
        values[n] = 1.0;
        Self { dt: 1.0, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Concatenation in time of two consecutive increments.
    pub fn merged(&self, next: &WienerIncrement) -> Self {
        Self {
            dt: self.dt + next.dt,
            values: self.values.iter().zip(&next.values).map(|(a, b)| a + b).collect(),
        }
    }
}

/// `M` independent `N(0, dt)` increments for the keyed step.
pub fn sample_increments(key: &StreamKey, dt: f64, modes: usize) -> Result<WienerIncrement, NoiseError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(NoiseError::NonPositiveDt(dt));
    }
    let s = dt.sqrt();
    let values = key.stream.normals(key.step, modes).into_iter().map(|z| z * s).collect();
    Ok(WienerIncrement { dt, values })
}
