//! Empirical noise model built from the rejected modes.
//!
//! Each rejected mode is cut into non-overlapping windows (a trailing partial
//! window is dropped). The window EDFs are averaged on a shared grid to give
//! the reference CDF, and the CVM distances of the same windows from that
//! reference give the threshold-versus-false-alarm table.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gof::{cvm_sorted, StepCdf};
use crate::io;

/// Fewest windows a noise model may be estimated from.
pub const MIN_SEGMENTS: usize = 8;
pub const DEFAULT_GRID_SIZE: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub cdf: StepCdf,
    pub segment_len: usize,
    pub segments_used: usize,
}

/// Sorted non-overlapping windows of every mode.
fn sorted_windows<'a>(
    modes: &'a [&'a [f64]],
    window: usize,
) -> impl Iterator<Item = Result<Vec<f64>>> + 'a {
    modes.iter().flat_map(move |m| {
        m.chunks_exact(window).map(|c| {
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            let mut v = c.to_vec();
            v.sort_by(f64::total_cmp);
            Ok(v)
        })
    })
}

fn check_inputs(rejected: &[&[f64]], window: usize) -> Result<usize> {
    if rejected.is_empty() {
        return Err(Error::Empty(
            "no rejected modes; a mode partition always leaves at least one",
        ));
    }
    if window < 2 {
        return Err(Error::param("window", "must be at least 2"));
    }
    let segments: usize = rejected.iter().map(|m| m.len() / window).sum();
    if segments < MIN_SEGMENTS {
        return Err(Error::TooFewSegments {
            segments,
            min: MIN_SEGMENTS,
        });
    }
    Ok(segments)
}

/// Ensemble average of the window EDFs of `rejected`, tabulated on
/// `grid_size` points spanning the range of the windowed samples.
pub fn estimate_noise_cdf(
    rejected: &[&[f64]],
    window: usize,
    grid_size: usize,
) -> Result<NoiseModel> {
    let segments = check_inputs(rejected, window)?;
    if grid_size < 2 {
        return Err(Error::param("grid_size", "must be at least 2"));
    }
    let windows = sorted_windows(rejected, window).collect::<Result<Vec<_>>>()?;

    let lo = windows.iter().map(|w| w[0]).fold(f64::INFINITY, f64::min);
    let hi = windows
        .iter()
        .map(|w| w[w.len() - 1])
        .fold(f64::NEG_INFINITY, f64::max);
    let grid: Vec<f64> = if hi > lo {
        let step = (hi - lo) / (grid_size - 1) as f64;
        let mut g: Vec<f64> = (0..grid_size).map(|i| lo + step * i as f64).collect();
        g[grid_size - 1] = hi;
        g
    } else {
        vec![lo]
    };

    // sum over windows of #(samples <= z), i.e. (L+1) times the EDF sum
    let mut counts = vec![0u64; grid.len()];
    for w in &windows {
        let mut idx = 0;
        for (c, &z) in counts.iter_mut().zip(&grid) {
            while idx < w.len() && w[idx] <= z {
                idx += 1;
            }
            *c += idx as u64;
        }
    }
    let denom = (segments * window) as f64;
    let values = counts.iter().map(|&c| c as f64 / denom).collect();

    Ok(NoiseModel {
        cdf: StepCdf::new(grid, values)?,
        segment_len: window,
        segments_used: segments,
    })
}

impl NoiseModel {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.cdf.write_csv(writer)
    }
}

/// Empirical false-alarm probability as a function of the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    /// Ascending; `0` followed by the distinct window distances.
    pub lambdas: Vec<f64>,
    /// Fraction of noise windows with distance strictly above each lambda.
    pub pfa: Vec<f64>,
    pub windows: usize,
}

impl ThresholdTable {
    /// Builds the exact exceedance curve of a set of window distances.
    pub fn from_deltas(mut deltas: Vec<f64>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::Empty("no window distances"));
        }
        if let Some(i) = deltas.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::NonFinite(i));
        }
        deltas.sort_by(f64::total_cmp);
        let total = deltas.len();
        let mut lambdas = vec![0.0];
        let mut pfa = vec![deltas.iter().filter(|&&d| d > 0.0).count() as f64 / total as f64];
        for (i, &d) in deltas.iter().enumerate() {
            let last_of_run = deltas.get(i + 1).is_none_or(|&next| next != d);
            if last_of_run && d > 0.0 {
                lambdas.push(d);
                pfa.push((total - (i + 1)) as f64 / total as f64);
            }
        }
        Ok(ThresholdTable {
            lambdas,
            pfa,
            windows: total,
        })
    }

    /// Empirical exceedance fraction at an arbitrary threshold.
    pub fn pfa_at(&self, lambda: f64) -> f64 {
        match self.lambdas.partition_point(|&l| l <= lambda) {
            0 => 1.0,
            i => self.pfa[i - 1],
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        io::write_columns(writer, &["lambda", "pfa"], &[&self.lambdas, &self.pfa])
    }
}

/// CVM distance of each non-overlapping window of each rejected mode from the
/// model CDF.
pub fn window_distances(rejected: &[&[f64]], model: &NoiseModel) -> Result<Vec<f64>> {
    sorted_windows(rejected, model.segment_len)
        .map(|w| w.map(|w| cvm_sorted(&w, &model.cdf).delta))
        .collect()
}

pub fn calibrate_thresholds(
    rejected: &[&[f64]],
    model: &NoiseModel,
    window: usize,
) -> Result<ThresholdTable> {
    if window != model.segment_len {
        return Err(Error::WindowMismatch {
            window,
            expected: model.segment_len,
        });
    }
    check_inputs(rejected, window)?;
    ThresholdTable::from_deltas(window_distances(rejected, model)?)
}

/// Smallest tabulated lambda whose false-alarm rate does not exceed
/// `target_pfa`.
pub fn lookup_threshold(table: &ThresholdTable, target_pfa: f64) -> f64 {
    let last = table.lambdas[table.lambdas.len() - 1];
    if target_pfa.is_nan() {
        return last;
    }
    table
        .pfa
        .iter()
        .position(|&p| p <= target_pfa)
        .map_or(last, |i| table.lambdas[i])
}

/// Target false-alarm probability of mode `k` (1-based): `exp(1 - k)`.
pub fn pfa_schedule(k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::param("k", "mode index starts at 1"));
    }
    Ok((1.0 - k as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gof::edf_of;
    use proptest::prelude::*;

    #[test]
    fn schedule_values() {
        assert_eq!(pfa_schedule(1).unwrap(), 1.0);
        assert!((pfa_schedule(2).unwrap() - 0.3678794412).abs() < 1e-10);
        assert!((pfa_schedule(3).unwrap() - 0.1353352832).abs() < 1e-10);
        assert!(pfa_schedule(0).is_err());
    }

    #[test]
    fn repeated_pattern_equals_single_segment_edf() {
        let pattern = [0.3, -1.2, 0.8, 2.0, -0.1, 0.5, -0.7, 1.1];
        let mode: Vec<f64> = pattern.iter().cycle().take(8 * 12).copied().collect();
        let model = estimate_noise_cdf(&[&mode], 8, 64).unwrap();
        assert_eq!(model.segments_used, 12);
        let seg = edf_of(&pattern).unwrap();
        for (&z, &v) in model.cdf.grid().iter().zip(model.cdf.values()) {
            assert!((v - seg.evaluate(z)).abs() < 1e-15);
        }
    }

    #[test]
    fn point_masses_give_two_step_cdf() {
        let low = vec![-1.0; 64];
        let high = vec![1.0; 64];
        let model = estimate_noise_cdf(&[&low, &high], 8, 16).unwrap();
        let cdf = &model.cdf;
        assert_eq!(cdf.evaluate(-1.5), 0.0);
        assert_eq!(cdf.evaluate(-1.0), 0.5);
        assert_eq!(cdf.evaluate(0.0), 0.5);
        assert_eq!(cdf.evaluate(0.999), 0.5);
        assert_eq!(cdf.evaluate(1.0), 1.0);
    }

    #[test]
    fn trailing_partial_window_is_dropped() {
        let mut mode = vec![0.0; 80];
        mode.extend([100.0; 5]);
        let model = estimate_noise_cdf(&[&mode], 10, 32).unwrap();
        assert_eq!(model.segments_used, 8);
        assert_eq!(*model.cdf.grid().last().unwrap(), 0.0);
    }

    #[test]
    fn refuses_coarse_models() {
        let mode = vec![0.5; 7 * 32];
        assert!(matches!(
            estimate_noise_cdf(&[&mode], 32, 512),
            Err(Error::TooFewSegments { segments: 7, .. })
        ));
        assert!(matches!(
            estimate_noise_cdf(&[], 32, 512),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn calibration_rejects_window_mismatch() {
        let mode: Vec<f64> = (0..256).map(|i| (i as f64 * 0.37).sin()).collect();
        let model = estimate_noise_cdf(&[&mode], 16, 64).unwrap();
        assert!(matches!(
            calibrate_thresholds(&[&mode], &model, 17),
            Err(Error::WindowMismatch { .. })
        ));
    }

    fn synthetic_table() -> (Vec<f64>, ThresholdTable) {
        // 101 distinct distances
        let deltas: Vec<f64> = (0..101)
            .map(|i| 0.01 + 0.003 * ((i * 37) % 101) as f64)
            .collect();
        let table = ThresholdTable::from_deltas(deltas.clone()).unwrap();
        (deltas, table)
    }

    #[test]
    fn exceedance_endpoints_and_median() {
        let (mut deltas, table) = synthetic_table();
        assert_eq!(table.lambdas[0], 0.0);
        assert_eq!(table.pfa[0], 1.0);
        assert_eq!(table.lambdas.len(), 102);
        assert_eq!(*table.pfa.last().unwrap(), 0.0);

        deltas.sort_by(f64::total_cmp);
        let median = deltas[50];
        let above = deltas.iter().filter(|&&d| d > median).count();
        assert_eq!(above, 50);
        assert_eq!(table.pfa_at(median), 50.0 / 101.0);
        assert_eq!(table.pfa_at(median), (101.0 - 1.0) / (2.0 * 101.0));
    }

    #[test]
    fn lookup_examples() {
        let (mut deltas, table) = synthetic_table();
        deltas.sort_by(f64::total_cmp);
        assert_eq!(lookup_threshold(&table, 1.0), 0.0);
        assert_eq!(lookup_threshold(&table, 0.0), deltas[100]);
        // counting oracle: smallest order statistic with at most
        // floor(101 / e) = 37 values strictly above it
        let target = (-1.0f64).exp();
        let oracle = deltas
            .iter()
            .find(|&&d| (deltas.iter().filter(|&&x| x > d).count() as f64) / 101.0 <= target)
            .copied()
            .unwrap();
        assert_eq!(oracle, deltas[63]);
        assert_eq!(lookup_threshold(&table, target), oracle);
        assert_eq!(lookup_threshold(&table, f64::NAN), deltas[100]);
        assert_eq!(lookup_threshold(&table, 2.0), 0.0);
    }

    #[test]
    fn table_csv_header() {
        let (_, table) = synthetic_table();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"lambda,pfa\n"));
    }

    proptest! {
        #[test]
        fn table_is_monotone_and_lookup_conservative(
            deltas in prop::collection::vec(0.001f64..1.0, 1..300),
            target in 0.0f64..=1.0,
        ) {
            let table = ThresholdTable::from_deltas(deltas.clone()).unwrap();
            prop_assert!(table.lambdas.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(table.pfa.windows(2).all(|w| w[0] >= w[1]));
            let lambda = lookup_threshold(&table, target);
            let realized = deltas.iter().filter(|&&d| d > lambda).count() as f64 / deltas.len() as f64;
            prop_assert!(realized <= target);
            for (&l, &p) in table.lambdas.iter().zip(&table.pfa) {
                let count = deltas.iter().filter(|&&d| d > l).count() as f64 / deltas.len() as f64;
                prop_assert_eq!(p, count);
            }
        }

        #[test]
        fn noise_cdf_is_a_valid_cdf_and_matches_pooled_edf(
            data in prop::collection::vec(-4.0f64..4.0, 64..400),
            window in 4usize..12,
        ) {
            prop_assume!(data.len() / window >= MIN_SEGMENTS);
            let model = estimate_noise_cdf(&[&data], window, 128).unwrap();
            let v = model.cdf.values();
            prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!((v[v.len() - 1] - 1.0).abs() < 1e-12);
            let used = &data[..model.segments_used * window];
            let pooled = edf_of(used).unwrap();
            for &z in model.cdf.grid() {
                prop_assert!((model.cdf.evaluate(z) - pooled.evaluate(z)).abs() < 1e-12);
            }
        }
    }
}
