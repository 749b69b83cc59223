//! Empirical distribution functions and the one-sample Cramér–von Mises
//! statistic.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

/// A cumulative distribution function usable as a goodness-of-fit reference.
pub trait Cdf {
    fn cdf(&self, z: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Cdf for F {
    fn cdf(&self, z: f64) -> f64 {
        self(z)
    }
}

fn sort_finite(mut v: Vec<f64>) -> Result<Vec<f64>> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Empirical distribution function of a finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Edf {
    sorted: Vec<f64>,
}

impl Edf {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Number of samples `<= z`.
    pub fn count_le(&self, z: f64) -> usize {
        self.sorted.partition_point(|&s| s <= z)
    }

    pub fn evaluate(&self, z: f64) -> f64 {
        self.count_le(z) as f64 / self.sorted.len() as f64
    }

    /// The EDF as a step CDF over its distinct sample values.
    pub fn to_step_cdf(&self) -> StepCdf {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        let n = self.sorted.len() as f64;
        for (i, &s) in self.sorted.iter().enumerate() {
            let last_of_run = self.sorted.get(i + 1).is_none_or(|&next| next != s);
            if last_of_run {
                grid.push(s);
                values.push((i + 1) as f64 / n);
            }
        }
        StepCdf { grid, values }
    }
}

impl Cdf for Edf {
    fn cdf(&self, z: f64) -> f64 {
        self.evaluate(z)
    }
}

pub fn edf_of(samples: &[f64]) -> Result<Edf> {
    if samples.is_empty() {
        return Err(Error::Empty("EDF needs at least one sample"));
    }
    Ok(Edf {
        sorted: sort_finite(samples.to_vec())?,
    })
}

/// Right-continuous step function: `values[i]` on `[grid[i], grid[i+1])`,
/// zero left of `grid[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepCdfRaw")]
pub struct StepCdf {
    grid: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct StepCdfRaw {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<StepCdfRaw> for StepCdf {
    type Error = Error;

    fn try_from(raw: StepCdfRaw) -> Result<Self> {
        StepCdf::new(raw.grid, raw.values)
    }
}

impl StepCdf {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Empty("step CDF needs at least one grid point"));
        }
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        if grid.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::param("step_cdf", "non-finite entry"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("grid", "must be strictly ascending"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::param("values", "must be nondecreasing"));
        }
        if values[0] < 0.0 || values[values.len() - 1] > 1.0 {
            return Err(Error::param("values", "must lie in [0, 1]"));
        }
        Ok(StepCdf { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn evaluate(&self, z: f64) -> f64 {
        match self.grid.partition_point(|&g| g <= z) {
            0 => 0.0,
            i => self.values[i - 1],
        }
    }

    /// Two-column CSV `z,E0`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        io::write_columns(writer, &["z", "E0"], &[&self.grid, &self.values])
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = io::read_table(reader, &["z", "E0"], true)?;
        let mut cols = io::transpose(&rows, 2);
        let values = cols.pop().unwrap_or_default();
        let grid = cols.pop().unwrap_or_default();
        StepCdf::new(grid, values)
    }
}

impl Cdf for StepCdf {
    fn cdf(&self, z: f64) -> f64 {
        self.evaluate(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvmStatistic {
    pub delta: f64,
    pub n: usize,
}

/// Squared-form Cramér–von Mises distance of `data` from `reference`:
/// `1/(12L) + sum_t (E0(z_(t)) - (2t-1)/(2L))^2` over the order statistics.
pub fn cvm_distance<C: Cdf + ?Sized>(data: &[f64], reference: &C) -> Result<CvmStatistic> {
    if data.len() < 2 {
        return Err(Error::TooShort {
            len: data.len(),
            min: 2,
        });
    }
    let sorted = sort_finite(data.to_vec())?;
    Ok(cvm_sorted(&sorted, reference))
}

/// [`cvm_distance`] for data already sorted ascending.
pub(crate) fn cvm_sorted<C: Cdf + ?Sized>(sorted: &[f64], reference: &C) -> CvmStatistic {
    let l = sorted.len() as f64;
    let two_l = 2.0 * l;
    let sum: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let d = reference.cdf(z) - (2 * i + 1) as f64 / two_l;
            d * d
        })
        .sum();
    CvmStatistic {
        delta: 1.0 / (12.0 * l) + sum,
        n: sorted.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GofDecision {
    CloseFit,
    NoFit,
}

/// `CloseFit` iff `delta <= lambda`.
pub fn gof_decide(stat: CvmStatistic, lambda: f64) -> GofDecision {
    if stat.delta <= lambda {
        GofDecision::CloseFit
    } else {
        GofDecision::NoFit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stat(delta: f64) -> CvmStatistic {
        CvmStatistic { delta, n: 4 }
    }

    #[test]
    fn edf_counts() {
        let e = edf_of(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(e.evaluate(2.0), 2.0 / 3.0);
        assert_eq!(e.evaluate(0.5), 0.0);
        assert_eq!(e.evaluate(3.0), 1.0);

        let e = edf_of(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(e.evaluate(5.0), 1.0);
        assert_eq!(e.evaluate(4.999), 0.0);
    }

    #[test]
    fn edf_rejects_empty_and_nan() {
        assert!(matches!(edf_of(&[]), Err(Error::Empty(_))));
        assert!(matches!(edf_of(&[1.0, f64::NAN]), Err(Error::NonFinite(1))));
    }

    #[test]
    fn step_cdf_is_right_continuous() {
        let c = StepCdf::new(vec![0.0, 1.0, 2.0], vec![0.25, 0.5, 1.0]).unwrap();
        assert_eq!(c.evaluate(-0.1), 0.0);
        assert_eq!(c.evaluate(0.0), 0.25);
        assert_eq!(c.evaluate(0.999), 0.25);
        assert_eq!(c.evaluate(1.0), 0.5);
        assert_eq!(c.evaluate(5.0), 1.0);
    }

    #[test]
    fn step_cdf_validation() {
        assert!(StepCdf::new(vec![], vec![]).is_err());
        assert!(StepCdf::new(vec![0.0, 0.0], vec![0.5, 1.0]).is_err());
        assert!(StepCdf::new(vec![0.0, 1.0], vec![0.6, 0.5]).is_err());
        assert!(StepCdf::new(vec![0.0, 1.0], vec![0.5, 1.5]).is_err());
        assert!(StepCdf::new(vec![0.0], vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn step_cdf_csv_round_trip() {
        let c = StepCdf::new(vec![-1.0, 0.1, 3.0], vec![0.1, 0.7, 1.0]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"z,E0\n"));
        assert_eq!(StepCdf::read_csv(buf.as_slice()).unwrap(), c);
    }

    #[test]
    fn midpoint_quantiles_give_floor() {
        // Uniform(0,1) reference; data are its (2t-1)/8 quantiles.
        let uniform = |z: f64| z.clamp(0.0, 1.0);
        let data = [1.0 / 8.0, 3.0 / 8.0, 5.0 / 8.0, 7.0 / 8.0];
        let s = cvm_distance(&data, &uniform).unwrap();
        assert!((s.delta - 1.0 / 48.0).abs() < 1e-15);
        assert_eq!(s.n, 4);
    }

    #[test]
    fn tied_data_at_median() {
        let uniform = |z: f64| z.clamp(0.0, 1.0);
        let s = cvm_distance(&[0.5; 4], &uniform).unwrap();
        let expected = 1.0 / 48.0 + (9.0 + 1.0 + 1.0 + 9.0) / 64.0;
        assert!((s.delta - expected).abs() < 1e-15);
        assert!((expected - (1.0 / 48.0 + 0.3125)).abs() < 1e-15);
    }

    #[test]
    fn cvm_rejects_short_input() {
        let uniform = |z: f64| z;
        assert!(cvm_distance(&[0.3], &uniform).is_err());
        assert!(cvm_distance(&[0.3, f64::INFINITY], &uniform).is_err());
    }

    #[test]
    fn saturation_limits() {
        let data: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let reference = edf_of(&data).unwrap();
        let l = data.len();
        let tail: f64 = (1..=l)
            .map(|t| ((2 * t - 1) as f64 / (2 * l) as f64).powi(2))
            .sum();
        let tail_hi: f64 = (1..=l)
            .map(|t| (1.0 - (2 * t - 1) as f64 / (2 * l) as f64).powi(2))
            .sum();
        let floor = 1.0 / (12.0 * l as f64);

        let below: Vec<f64> = data.iter().map(|v| v - 10.0).collect();
        let above: Vec<f64> = data.iter().map(|v| v + 10.0).collect();
        let lo = cvm_distance(&below, &reference).unwrap().delta;
        let hi = cvm_distance(&above, &reference).unwrap().delta;
        assert!((lo - (floor + tail)).abs() < 1e-12);
        assert!((hi - (floor + tail_hi)).abs() < 1e-12);
    }

    #[test]
    fn decisions() {
        assert_eq!(gof_decide(stat(0.1), 0.1), GofDecision::CloseFit);
        assert_eq!(gof_decide(stat(0.2), 0.1), GofDecision::NoFit);
        assert_eq!(gof_decide(stat(0.0), 0.0), GofDecision::CloseFit);
        assert_eq!(gof_decide(stat(1e9), f64::INFINITY), GofDecision::CloseFit);
    }

    proptest! {
        #[test]
        fn edf_is_monotone_with_exact_counts(
            v in prop::collection::vec(-20i32..20, 1..60),
            probes in prop::collection::vec(-25i32..25, 1..20),
        ) {
            let data: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            let e = edf_of(&data).unwrap();
            let mut probes = probes;
            probes.sort();
            let mut prev = 0.0;
            for p in probes {
                let count = v.iter().filter(|&&x| x <= p).count();
                let val = e.evaluate(p as f64);
                prop_assert_eq!(val, count as f64 / v.len() as f64);
                prop_assert!(val >= prev);
                prev = val;
            }
        }

        #[test]
        fn cvm_is_permutation_invariant_and_bounded(
            v in prop::collection::vec(-3.0f64..3.0, 2..80),
            seed in any::<u64>(),
        ) {
            let reference = |z: f64| 1.0 / (1.0 + (-z).exp());
            let a = cvm_distance(&v, &reference).unwrap();
            let mut shuffled = v.clone();
            // deterministic Fisher-Yates from the seed
            let mut s = seed | 1;
            for i in (1..shuffled.len()).rev() {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                shuffled.swap(i, (s % (i as u64 + 1)) as usize);
            }
            let b = cvm_distance(&shuffled, &reference).unwrap();
            prop_assert!((a.delta - b.delta).abs() <= 1e-15);
            prop_assert!(a.delta >= 1.0 / (12.0 * v.len() as f64) - 1e-15);
        }

        #[test]
        fn self_fit_is_small(v in prop::collection::vec(-5.0f64..5.0, 2..100)) {
            let mut v = v;
            v.sort_by(f64::total_cmp);
            v.dedup();
            prop_assume!(v.len() >= 2);
            let l = v.len() as f64;
            let step = edf_of(&v).unwrap().to_step_cdf();
            let d = cvm_distance(&v, &step).unwrap().delta;
            prop_assert!(d <= 1.0 / (12.0 * l) + l * (1.0 / l).powi(2) + 1e-12);
        }
    }
}
