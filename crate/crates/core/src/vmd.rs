//! Variational mode decomposition.
//!
//! The record is mirror-extended by half its length on each side and moved
//! to the frequency domain once. Modes, center frequencies and the Lagrange
//! multiplier are then updated on the nonnegative half of the spectrum by
//! alternating-direction sweeps:
//!
//! ```text
//! u_k(f) <- (y(f) - sum_{i != k} u_i(f) + g(f)/2) / (1 + 2 alpha (f - w_k)^2)
//! w_k    <- sum_f f |u_k(f)|^2 / sum_f |u_k(f)|^2
//! g(f)   <- g(f) + tau (y(f) - sum_k u_k(f))
//! ```
//!
//! Each mode is returned to the time domain from its one-sided spectrum
//! completed by Hermitian symmetry, and cropped back to the original span.

use std::io::Write;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmegaInit {
    /// Every center frequency starts at DC.
    Zero,
    /// `w_k = 0.5 (k - 1/2) / K`.
    UniformSpread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmdConfig {
    pub k_modes: usize,
    /// Bandwidth penalty.
    pub alpha: f64,
    /// Dual ascent rate; 0 relaxes the reconstruction constraint.
    pub tau: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub init: OmegaInit,
}

impl Default for VmdConfig {
    fn default() -> Self {
        VmdConfig {
            k_modes: 10,
            alpha: 2000.0,
            tau: 0.0,
            tol: 1e-7,
            max_iters: 500,
            init: OmegaInit::UniformSpread,
        }
    }
}

impl VmdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_modes < 2 {
            return Err(Error::param("k_modes", "must be at least 2"));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::param("alpha", "must be positive and finite"));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::param("tau", "must be nonnegative and finite"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::param("tol", "must lie in (0, 1)"));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        Ok(())
    }
}

/// Band-limited modes ordered by ascending center frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub modes: Vec<Vec<f64>>,
    /// Center frequencies in cycles per sample, within `[0, 0.5]`.
    pub center_freqs: Vec<f64>,
    /// `y - sum_k u_k`.
    pub residual: Vec<f64>,
    pub iterations_used: usize,
    /// False when the sweep stopped at `max_iters` without meeting `tol`.
    pub converged: bool,
}

impl ModeSet {
    pub fn k(&self) -> usize {
        self.modes.len()
    }

    pub fn len(&self) -> usize {
        self.residual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residual.is_empty()
    }

    /// Sum of all modes, residual excluded.
    pub fn reconstruct(&self) -> Result<Signal> {
        let mut out = vec![0.0; self.len()];
        for m in &self.modes {
            for (o, v) in out.iter_mut().zip(m) {
                *o += v;
            }
        }
        Signal::new(out)
    }

    /// CSV with header `u1..uK,residual`, one row per sample.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let names: Vec<String> = (1..=self.k())
            .map(|k| format!("u{k}"))
            .chain(std::iter::once("residual".to_string()))
            .collect();
        let header: Vec<&str> = names.iter().map(String::as_str).collect();
        let cols: Vec<&[f64]> = self
            .modes
            .iter()
            .map(Vec::as_slice)
            .chain(std::iter::once(self.residual.as_slice()))
            .collect();
        io::write_columns(writer, &header, &cols)
    }
}

/// Half-length mirror extension: `rev(y[..h]) ++ y ++ rev(y[h..])`, length `2N`.
fn mirror_extend(y: &[f64]) -> Vec<f64> {
    let h = y.len() / 2;
    let mut ext = Vec::with_capacity(2 * y.len());
    ext.extend(y[..h].iter().rev());
    ext.extend_from_slice(y);
    ext.extend(y[h..].iter().rev());
    ext
}

pub fn decompose(y: &Signal, cfg: &VmdConfig) -> Result<ModeSet> {
    cfg.validate()?;
    let n = y.len();
    let k_modes = cfg.k_modes;
    if n < 2 * k_modes {
        return Err(Error::TooShort {
            len: n,
            min: 2 * k_modes,
        });
    }

    let ext = mirror_extend(y.samples());
    let t_len = ext.len();
    let half = t_len / 2;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(t_len);
    let inv = planner.plan_fft_inverse(t_len);

    let mut spectrum: Vec<Complex64> = ext.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut spectrum);
    // one-sided: DC through the last bin below Nyquist
    let y_hat: Vec<Complex64> = spectrum[..half].to_vec();
    let freqs: Vec<f64> = (0..half).map(|j| j as f64 / t_len as f64).collect();

    let mut omega: Vec<f64> = match cfg.init {
        OmegaInit::Zero => vec![0.0; k_modes],
        OmegaInit::UniformSpread => (0..k_modes)
            .map(|k| 0.5 * (k as f64 + 0.5) / k_modes as f64)
            .collect(),
    };

    let zero = Complex64::new(0.0, 0.0);
    let mut u_hat = vec![vec![zero; half]; k_modes];
    let mut total = vec![zero; half];
    let mut gamma = vec![zero; half];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iters {
        iterations += 1;
        let mut udiff = 0.0;
        for k in 0..k_modes {
            let wk = omega[k];
            let mode = &mut u_hat[k];
            let mut diff_sq = 0.0;
            let mut prev_sq = 0.0;
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..half {
                let old = mode[j];
                let others = total[j] - old;
                let df = freqs[j] - wk;
                let new = (y_hat[j] - others + gamma[j] * 0.5) / (1.0 + 2.0 * cfg.alpha * df * df);
                mode[j] = new;
                total[j] = others + new;
                diff_sq += (new - old).norm_sqr();
                prev_sq += old.norm_sqr();
                let p = new.norm_sqr();
                num += freqs[j] * p;
                den += p;
            }
            if den > 0.0 {
                omega[k] = num / den;
            }
            udiff += if prev_sq > 0.0 {
                diff_sq / prev_sq
            } else if diff_sq == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
        }
        if cfg.tau > 0.0 {
            for j in 0..half {
                gamma[j] += (y_hat[j] - total[j]) * cfg.tau;
            }
        }
        if udiff < cfg.tol {
            converged = true;
            break;
        }
    }

    let mut order: Vec<usize> = (0..k_modes).collect();
    order.sort_by(|&a, &b| omega[a].total_cmp(&omega[b]).then(a.cmp(&b)));

    let lead = n / 2;
    let scale = 1.0 / t_len as f64;
    let mut buf = vec![zero; t_len];
    let mut modes = Vec::with_capacity(k_modes);
    for &k in &order {
        buf.fill(zero);
        buf[0] = Complex64::new(u_hat[k][0].re, 0.0);
        for j in 1..half {
            buf[j] = u_hat[k][j];
            buf[t_len - j] = u_hat[k][j].conj();
        }
        inv.process(&mut buf);
        modes.push(
            buf[lead..lead + n]
                .iter()
                .map(|c| c.re * scale)
                .collect::<Vec<f64>>(),
        );
    }

    let residual = y
        .samples()
        .iter()
        .enumerate()
        .map(|(t, &v)| v - modes.iter().map(|m| m[t]).sum::<f64>())
        .collect();

    Ok(ModeSet {
        center_freqs: order.iter().map(|&k| omega[k]).collect(),
        modes,
        residual,
        iterations_used: iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cosine(n: usize, f: f64) -> Vec<f64> {
        (0..n).map(|t| (2.0 * PI * f * t as f64).cos()).collect()
    }

    #[test]
    fn mirror_extension_layout() {
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(
            mirror_extend(&y),
            vec![2.0, 1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 5.0, 4.0, 3.0]
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = VmdConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.k_modes = 1;
        assert!(cfg.validate().is_err());
        let cfg = VmdConfig {
            tol: 1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = VmdConfig {
            max_iters: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = VmdConfig {
            alpha: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = VmdConfig {
            tau: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_record_shorter_than_two_k() {
        let y = Signal::new(cosine(19, 0.1)).unwrap();
        let cfg = VmdConfig::default();
        assert!(matches!(
            decompose(&y, &cfg),
            Err(Error::TooShort { min: 20, .. })
        ));
    }

    #[test]
    fn zero_input_is_a_fixed_point() {
        let y = Signal::zeros(64).unwrap();
        let m = decompose(
            &y,
            &VmdConfig {
                k_modes: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(m.converged);
        assert_eq!(m.iterations_used, 1);
        assert!(m.modes.iter().flatten().all(|&v| v == 0.0));
        assert!(m.residual.iter().all(|&v| v == 0.0));
        assert!(m.reconstruct().unwrap().samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn odd_length_is_supported() {
        let y = Signal::new(cosine(301, 0.1)).unwrap();
        let m = decompose(
            &y,
            &VmdConfig {
                k_modes: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(m.len(), 301);
        assert!(m.modes.iter().all(|u| u.len() == 301));
    }

    #[test]
    fn non_convergence_is_flagged() {
        let y = Signal::new(cosine(256, 0.1)).unwrap();
        let cfg = VmdConfig {
            k_modes: 3,
            max_iters: 2,
            ..Default::default()
        };
        let m = decompose(&y, &cfg).unwrap();
        assert_eq!(m.iterations_used, 2);
        assert!(!m.converged);
    }

    #[test]
    fn residual_closes_the_sum_exactly() {
        let y: Vec<f64> = cosine(200, 0.05)
            .iter()
            .zip(cosine(200, 0.3))
            .map(|(a, b)| a + 0.3 * b)
            .collect();
        let y = Signal::new(y).unwrap();
        let m = decompose(
            &y,
            &VmdConfig {
                k_modes: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let recon = m.reconstruct().unwrap();
        for t in 0..y.len() {
            let total: f64 = m.modes.iter().map(|u| u[t]).sum();
            assert_eq!(recon.samples()[t], total);
            assert!((recon.samples()[t] + m.residual[t] - y.samples()[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_shape() {
        let y = Signal::new(cosine(64, 0.1)).unwrap();
        let m = decompose(
            &y,
            &VmdConfig {
                k_modes: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("u1,u2,residual"));
        assert_eq!(lines.clone().count(), 64);
        assert!(lines.all(|l| l.split(',').count() == 3));
    }
}
