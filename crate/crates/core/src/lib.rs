//! Data-driven denoising of 1-D signals.
//!
//! A noisy record is split into band-limited modes by variational mode
//! decomposition ([`vmd`]). Modes whose sample distribution drifts furthest
//! from that of the record are treated as noise ([`modesel`]); their local
//! window EDFs give an empirical noise CDF and a threshold table
//! ([`noisest`]). The remaining modes are screened sample by sample with a
//! local Cramér–von Mises test ([`gof`]) and summed back ([`denoiser`]).
//! [`testbench`] holds the synthetic benchmark signals and scoring.

pub mod denoiser;
pub mod error;
pub mod gof;
pub mod io;
pub mod modesel;
pub mod noisest;
pub mod signal;
pub mod testbench;
pub mod vmd;

pub use denoiser::{denoise, denoise_detailed, DenoiseConfig, DenoiseReport, Denoised};
pub use error::{Error, Result};
pub use gof::{cvm_distance, edf_of, gof_decide, Cdf, CvmStatistic, Edf, GofDecision, StepCdf};
pub use modesel::{mode_distances, partition, ModePartition};
pub use noisest::{
    calibrate_thresholds, estimate_noise_cdf, lookup_threshold, pfa_schedule, NoiseModel,
    ThresholdTable,
};
pub use signal::Signal;
pub use testbench::{add_noise, generate, score, NoisyPair, ScoreReport, TestSignal};
pub use vmd::{decompose, ModeSet, OmegaInit, VmdConfig};
