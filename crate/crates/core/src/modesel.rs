//! Relevant-mode selection from the curve of mode-to-signal CVM distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gof::{cvm_distance, edf_of};
use crate::signal::Signal;
use crate::vmd::ModeSet;

/// CVM distance of every mode's samples from the EDF of `y`.
pub fn mode_distances(y: &Signal, modes: &ModeSet) -> Result<Vec<f64>> {
    if modes.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: modes.len(),
        });
    }
    let reference = edf_of(y.samples())?;
    modes
        .modes
        .iter()
        .map(|u| {
            if u.len() != y.len() {
                return Err(Error::LengthMismatch {
                    left: y.len(),
                    right: u.len(),
                });
            }
            cvm_distance(u, &reference).map(|s| s.delta)
        })
        .collect()
}

/// Split of the mode indices (1-based) into relevant `1..=k2` and rejected
/// `k2+1..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRaw")]
pub struct ModePartition {
    pub distances: Vec<f64>,
    /// `slopes[k] = |distances[k+1] - distances[k]|`.
    pub slopes: Vec<f64>,
    pub k1: usize,
    pub k2: usize,
}

#[derive(Deserialize)]
struct PartitionRaw {
    distances: Vec<f64>,
    #[allow(dead_code)]
    slopes: Vec<f64>,
    k1: usize,
    k2: usize,
}

impl TryFrom<PartitionRaw> for ModePartition {
    type Error = Error;

    fn try_from(raw: PartitionRaw) -> Result<Self> {
        let p = partition(&raw.distances)?;
        if p.k1 != raw.k1 || p.k2 != raw.k2 {
            return Err(Error::param(
                "partition",
                format!(
                    "indices ({}, {}) inconsistent with distances, expected ({}, {})",
                    raw.k1, raw.k2, p.k1, p.k2
                ),
            ));
        }
        Ok(p)
    }
}

impl ModePartition {
    pub fn k(&self) -> usize {
        self.distances.len()
    }

    pub fn relevant(&self) -> Vec<usize> {
        (1..=self.k2).collect()
    }

    pub fn rejected(&self) -> Vec<usize> {
        (self.k2 + 1..=self.k()).collect()
    }
}

/// First index of the maximum, 1-based, over `slopes[from-1..]`.
fn argmax_from(slopes: &[f64], from: usize) -> usize {
    let mut best = from;
    for k in from + 1..=slopes.len() {
        if slopes[k - 1] > slopes[best - 1] {
            best = k;
        }
    }
    best
}

pub fn partition(distances: &[f64]) -> Result<ModePartition> {
    let k = distances.len();
    if k < 3 {
        return Err(Error::param(
            "distances",
            format!("need at least 3 modes, got {k}"),
        ));
    }
    if let Some(i) = distances.iter().position(|d| !d.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let slopes: Vec<f64> = distances.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let k1 = argmax_from(&slopes, 1);
    let k2 = if k1 == k - 1 {
        k1
    } else {
        argmax_from(&slopes, k1 + 1)
    };
    Ok(ModePartition {
        distances: distances.to_vec(),
        slopes,
        k1,
        k2,
    })
}
