//! Local goodness-of-fit thresholding of the relevant modes and the full
//! denoising pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gof::cvm_sorted;
use crate::modesel::{mode_distances, partition, ModePartition};
use crate::noisest::{
    calibrate_thresholds, estimate_noise_cdf, lookup_threshold, pfa_schedule, NoiseModel,
    ThresholdTable, DEFAULT_GRID_SIZE,
};
use crate::signal::Signal;
use crate::vmd::{decompose, ModeSet, VmdConfig};

/// Default local window length (`L + 1` with `L = 32`).
pub const DEFAULT_WINDOW: usize = 33;
pub const MIN_WINDOW: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseConfig {
    pub vmd: VmdConfig,
    /// Odd local window length `L + 1`.
    pub window: usize,
    pub grid_size: usize,
    /// Per-mode false-alarm targets replacing `exp(1 - k)`; modes beyond the
    /// end of the list fall back to the schedule.
    #[serde(default)]
    pub pfa_override: Option<Vec<f64>>,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        DenoiseConfig {
            vmd: VmdConfig::default(),
            window: DEFAULT_WINDOW,
            grid_size: DEFAULT_GRID_SIZE,
            pfa_override: None,
        }
    }
}

impl DenoiseConfig {
    pub fn validate(&self) -> Result<()> {
        self.vmd.validate()?;
        if self.window < MIN_WINDOW || self.window.is_multiple_of(2) {
            return Err(Error::param(
                "window",
                format!("must be odd and at least {MIN_WINDOW}, got {}", self.window),
            ));
        }
        if self.grid_size < 2 {
            return Err(Error::param("grid_size", "must be at least 2"));
        }
        if let Some(p) = &self.pfa_override {
            if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::param("pfa_override", "targets must lie in [0, 1]"));
            }
        }
        if self.vmd.k_modes < 3 {
            return Err(Error::param(
                "k_modes",
                "mode selection needs at least 3 modes",
            ));
        }
        Ok(())
    }

    /// Target false-alarm probability for mode `k` (1-based).
    pub fn target_pfa(&self, k: usize) -> Result<f64> {
        match self.pfa_override.as_ref().and_then(|p| p.get(k - 1)) {
            Some(&p) => Ok(p),
            None => pfa_schedule(k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseModelSummary {
    pub segment_len: usize,
    pub segments_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseReport {
    pub partition: ModePartition,
    pub noise_model_summary: NoiseModelSummary,
    /// Threshold of each relevant mode, in mode order.
    pub per_mode_lambda: Vec<f64>,
    pub per_mode_target_pfa: Vec<f64>,
    pub per_mode_kept_fraction: Vec<f64>,
    pub center_freqs: Vec<f64>,
    pub vmd_iterations: usize,
    pub vmd_converged: bool,
    pub output: Signal,
    /// Keep masks of the relevant modes.
    #[serde(skip)]
    pub masks: Vec<Vec<bool>>,
}

/// Every intermediate product of a pipeline run.
#[derive(Debug, Clone)]
pub struct Denoised {
    pub modes: ModeSet,
    pub noise_model: NoiseModel,
    pub thresholds: ThresholdTable,
    pub report: DenoiseReport,
}

fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    // half-sample symmetric: x[-1] = x[0], x[n] = x[n-1]
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

/// Local CVM distance of the centered window around every sample of `u`
/// from the noise model.
pub fn local_distances(u: &[f64], model: &NoiseModel, window: usize) -> Result<Vec<f64>> {
    if window.is_multiple_of(2) || window < 3 {
        return Err(Error::param("window", "must be odd and at least 3"));
    }
    if window > u.len() {
        return Err(Error::param(
            "window",
            format!("{window} exceeds mode length {}", u.len()),
        ));
    }
    if let Some(i) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let half = (window / 2) as isize;
    let n = u.len();
    let mut buf = vec![0.0; window];
    Ok((0..n as isize)
        .map(|t| {
            for (slot, off) in buf.iter_mut().zip(-half..=half) {
                *slot = u[reflect(t + off, n)];
            }
            buf.sort_by(f64::total_cmp);
            cvm_sorted(&buf, &model.cdf).delta
        })
        .collect())
}

/// Keep mask of `u`: true where the local window does not fit the noise
/// model (`delta > lambda`).
pub fn threshold_mask(
    u: &[f64],
    model: &NoiseModel,
    lambda: f64,
    window: usize,
) -> Result<Vec<bool>> {
    Ok(local_distances(u, model, window)?
        .into_iter()
        .map(|d| d > lambda)
        .collect())
}

/// Zeroes every sample of `u` whose local window close-fits the noise model.
pub fn threshold_mode(
    u: &[f64],
    model: &NoiseModel,
    lambda: f64,
    window: usize,
) -> Result<Vec<f64>> {
    let mask = threshold_mask(u, model, lambda, window)?;
    Ok(u.iter()
        .zip(mask)
        .map(|(&v, keep)| if keep { v } else { 0.0 })
        .collect())
}

pub fn denoise(y: &Signal, cfg: &DenoiseConfig) -> Result<(Signal, DenoiseReport)> {
    let d = denoise_detailed(y, cfg)?;
    Ok((d.report.output.clone(), d.report))
}

pub fn denoise_detailed(y: &Signal, cfg: &DenoiseConfig) -> Result<Denoised> {
    cfg.validate()?;
    let min = 8 * cfg.window;
    if y.len() < min {
        return Err(Error::TooShort { len: y.len(), min });
    }

    let modes = decompose(y, &cfg.vmd)?;
    let distances = mode_distances(y, &modes)?;
    let part = partition(&distances)?;

    let rejected: Vec<&[f64]> = modes.modes[part.k2..].iter().map(Vec::as_slice).collect();
    let noise_model = estimate_noise_cdf(&rejected, cfg.window, cfg.grid_size)?;
    let thresholds = calibrate_thresholds(&rejected, &noise_model, cfg.window)?;

    let mut output = vec![0.0; y.len()];
    let mut lambdas = Vec::with_capacity(part.k2);
    let mut targets = Vec::with_capacity(part.k2);
    let mut kept = Vec::with_capacity(part.k2);
    let mut masks = Vec::with_capacity(part.k2);
    for (idx, u) in modes.modes[..part.k2].iter().enumerate() {
        let target = cfg.target_pfa(idx + 1)?;
        let lambda = lookup_threshold(&thresholds, target);
        let mask = threshold_mask(u, &noise_model, lambda, cfg.window)?;
        let mut n_kept = 0usize;
        for ((o, &v), &keep) in output.iter_mut().zip(u).zip(&mask) {
            if keep {
                *o += v;
                n_kept += 1;
            }
        }
        targets.push(target);
        lambdas.push(lambda);
        kept.push(n_kept as f64 / u.len() as f64);
        masks.push(mask);
    }

    let report = DenoiseReport {
        noise_model_summary: NoiseModelSummary {
            segment_len: noise_model.segment_len,
            segments_used: noise_model.segments_used,
        },
        per_mode_lambda: lambdas,
        per_mode_target_pfa: targets,
        per_mode_kept_fraction: kept,
        center_freqs: modes.center_freqs.clone(),
        vmd_iterations: modes.iterations_used,
        vmd_converged: modes.converged,
        output: Signal::new(output)?,
        partition: part,
        masks,
    };
    Ok(Denoised {
        modes,
        noise_model,
        thresholds,
        report,
    })
}
