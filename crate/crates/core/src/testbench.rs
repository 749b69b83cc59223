//! Benchmark signals, noise injection and output scoring.
//!
//! The four test signals use the Donoho–Johnstone closed forms sampled on
//! `t = (1..=n)/n` and rescaled so that their sample standard deviation is 7.
//! Noise comes from a ChaCha20 stream seeded with `seed_from_u64(seed)` and
//! shaped by the ziggurat sampler of `rand_distr::StandardNormal`, so a
//! `(clean, snr, seed)` triple always yields the same noisy record.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Signal, MIN_SIGNAL_LEN};

/// Standard deviation every generated test signal is scaled to.
pub const TARGET_STD: f64 = 7.0;

const JUMP_POS: [f64; 11] = [
    0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81,
];
const BLOCKS_HGT: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];
const BUMPS_HGT: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
const BUMPS_WTH: [f64; 11] = [
    0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestSignal {
    Blocks,
    Bumps,
    HeavySine,
    Doppler,
}

impl TestSignal {
    pub const ALL: [TestSignal; 4] = [
        TestSignal::Blocks,
        TestSignal::Bumps,
        TestSignal::HeavySine,
        TestSignal::Doppler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestSignal::Blocks => "blocks",
            TestSignal::Bumps => "bumps",
            TestSignal::HeavySine => "heavysine",
            TestSignal::Doppler => "doppler",
        }
    }

    /// Unscaled closed form at `t`.
    pub fn raw(self, t: f64) -> f64 {
        match self {
            TestSignal::Blocks => JUMP_POS
                .iter()
                .zip(BLOCKS_HGT)
                .map(|(&p, h)| if t >= p { h } else { 0.0 })
                .sum(),
            TestSignal::Bumps => JUMP_POS
                .iter()
                .zip(BUMPS_HGT.iter().zip(BUMPS_WTH))
                .map(|(&p, (&h, w))| h * (1.0 + ((t - p) / w).abs()).powi(-4))
                .sum(),
            TestSignal::HeavySine => {
                4.0 * (4.0 * PI * t).sin() - signum0(t - 0.3) - signum0(0.72 - t)
            }
            TestSignal::Doppler => (t * (1.0 - t)).sqrt() * (2.1 * PI / (t + 0.05)).sin(),
        }
    }
}

/// `sign` with `sign(0) = 0`.
fn signum0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl fmt::Display for TestSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestSignal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "blocks" => Ok(TestSignal::Blocks),
            "bumps" => Ok(TestSignal::Bumps),
            "heavysine" => Ok(TestSignal::HeavySine),
            "doppler" => Ok(TestSignal::Doppler),
            _ => Err(Error::UnknownSignal(s.to_string())),
        }
    }
}

/// Samples `name` on `t = (1..=n)/n` and rescales to standard deviation 7.
pub fn generate(name: TestSignal, n: usize) -> Result<Signal> {
    if n < MIN_SIGNAL_LEN {
        return Err(Error::TooShort {
            len: n,
            min: MIN_SIGNAL_LEN,
        });
    }
    let raw: Vec<f64> = (1..=n).map(|i| name.raw(i as f64 / n as f64)).collect();
    let sd = sample_std(&raw);
    let scale = if sd > 0.0 { TARGET_STD / sd } else { 1.0 };
    Signal::new(raw.into_iter().map(|v| v * scale).collect())
}

pub(crate) fn sample_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyPair {
    pub clean: Signal,
    pub noisy: Signal,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl NoisyPair {
    pub fn noise(&self) -> Vec<f64> {
        self.noisy
            .samples()
            .iter()
            .zip(self.clean.samples())
            .map(|(y, x)| y - x)
            .collect()
    }
}

/// Noise standard deviation giving `input_snr_db` against a signal of the
/// given mean power.
pub fn noise_sigma_for(mean_power: f64, input_snr_db: f64) -> f64 {
    (mean_power * 10f64.powf(-input_snr_db / 10.0)).sqrt()
}

/// `n` i.i.d. standard normal draws keyed by `seed`.
pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn add_noise(clean: &Signal, input_snr_db: f64, seed: u64) -> Result<NoisyPair> {
    if !input_snr_db.is_finite() {
        return Err(Error::param("input_snr_db", "must be finite"));
    }
    let power = clean.mean_power();
    if power <= 0.0 {
        return Err(Error::param("clean", "signal is all zeros"));
    }
    let sigma = noise_sigma_for(power, input_snr_db);
    let noisy = clean
        .samples()
        .iter()
        .zip(white_noise(clean.len(), seed))
        .map(|(x, w)| x + sigma * w)
        .collect();
    Ok(NoisyPair {
        clean: clean.clone(),
        noisy: Signal::new(noisy)?,
        noise_sigma: sigma,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// `f64::INFINITY` when the reconstruction is exact.
    pub snr_db: f64,
    pub mse: f64,
}

pub fn score(clean: &Signal, denoised: &Signal) -> Result<ScoreReport> {
    if clean.len() != denoised.len() {
        return Err(Error::LengthMismatch {
            left: clean.len(),
            right: denoised.len(),
        });
    }
    let err: f64 = clean
        .samples()
        .iter()
        .zip(denoised.samples())
        .map(|(x, xh)| (x - xh).powi(2))
        .sum();
    let snr_db = if err == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (clean.energy() / err).log10()
    };
    Ok(ScoreReport {
        snr_db,
        mse: err / clean.len() as f64,
    })
}
