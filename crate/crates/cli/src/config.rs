//! Run configuration: command-line flags layered over an optional JSON file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use vmdcvm::{DenoiseConfig, OmegaInit, TestSignal, VmdConfig};

use crate::error::{CliError, Result};

pub const DEFAULT_N: usize = 4096;
pub const DEFAULT_SNRS_DB: [f64; 4] = [-5.0, 0.0, 5.0, 10.0];
pub const DEFAULT_REALIZATIONS: usize = 20;

/// Every tunable, all optional. Used both for flags and for the JSON config
/// file; the benchmark manifest embeds one, so a manifest is itself a valid
/// config file.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    /// Named synthetic signal (blocks, bumps, heavysine, doppler).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal: Option<String>,

    /// Single-column CSV input.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    /// Length of the synthetic signal.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,

    /// Add white Gaussian noise at this input SNR to the synthetic signal.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_modes: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,

    /// `zero` or `uniform` center-frequency initialization.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,

    /// Local window length, odd (L + 1).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,

    /// Comma-separated per-mode false-alarm targets.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pfa: Option<Vec<f64>>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,

    /// Benchmark realizations per cell (J).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,

    /// Benchmark signals, comma-separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signals: Option<Vec<String>>,

    /// Benchmark input SNRs in dB, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snrs_db: Option<Vec<f64>>,

    /// Benchmark signal lengths, comma-separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<usize>>,
}

macro_rules! layer {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        Settings { $($f: $hi.$f.clone().or_else(|| $lo.$f.clone()),)* }
    };
}

impl Settings {
    /// `self` wins over `lower` field by field.
    pub fn over(&self, lower: &Settings) -> Settings {
        layer!(
            self,
            lower,
            signal,
            input,
            n,
            snr_db,
            seed,
            k_modes,
            alpha,
            tau,
            tol,
            max_iters,
            init,
            window,
            grid_size,
            pfa,
            out_dir,
            realizations,
            signals,
            snrs_db,
            lengths
        )
    }

    /// Reads a JSON config. A benchmark manifest is accepted as well; its
    /// `config` member is used.
    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = fs::read_to_string(path).map_err(|e| CliError::File {
            path: path.display().to_string(),
            source: e.into(),
        })?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::File {
            path: path.display().to_string(),
            source: e.into(),
        })?;
        let value = match value.get("config") {
            Some(inner) if value.get("manifest_version").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| CliError::File {
            path: path.display().to_string(),
            source: e.into(),
        })
    }

    /// Defaults overlaid with the given fields; validation is left to the
    /// caller since `decompose` accepts configs the denoiser does not.
    pub fn denoise_config(&self) -> Result<DenoiseConfig> {
        let base = DenoiseConfig::default();
        let init = match self.init.as_deref() {
            None => base.vmd.init,
            Some("zero") => OmegaInit::Zero,
            Some("uniform") | Some("uniform-spread") => OmegaInit::UniformSpread,
            Some(other) => {
                return Err(CliError::usage(format!(
                    "--init must be `zero` or `uniform`, got `{other}`"
                )))
            }
        };
        let cfg = DenoiseConfig {
            vmd: VmdConfig {
                k_modes: self.k_modes.unwrap_or(base.vmd.k_modes),
                alpha: self.alpha.unwrap_or(base.vmd.alpha),
                tau: self.tau.unwrap_or(base.vmd.tau),
                tol: self.tol.unwrap_or(base.vmd.tol),
                max_iters: self.max_iters.unwrap_or(base.vmd.max_iters),
                init,
            },
            window: self.window.unwrap_or(base.window),
            grid_size: self.grid_size.unwrap_or(base.grid_size),
            pfa_override: self.pfa.clone(),
        };
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Decompose,
    Denoise,
    Calibrate,
    Benchmark,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Input(PathBuf),
    Synthetic {
        signal: TestSignal,
        n: usize,
        snr_db: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub signals: Vec<TestSignal>,
    pub snrs_db: Vec<f64>,
    pub lengths: Vec<usize>,
    pub realizations: usize,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub source: Option<Source>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub denoise: DenoiseConfig,
    pub sweep: Option<Sweep>,
    /// The layered settings this was resolved from.
    pub settings: Settings,
}

fn parse_signal(name: &str) -> Result<TestSignal> {
    name.parse()
        .map_err(|_| CliError::usage(format!("unknown signal `{name}`")))
}

impl RunConfig {
    pub fn resolve(subcommand: Subcommand, settings: Settings) -> Result<RunConfig> {
        let denoise = settings.denoise_config()?;
        match subcommand {
            Subcommand::Decompose => denoise.vmd.validate()?,
            _ => denoise.validate()?,
        }
        let seed = settings.seed.unwrap_or(0);
        let output_dir = settings
            .out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out"));

        let (source, sweep) = if subcommand == Subcommand::Benchmark {
            let names = settings
                .signals
                .clone()
                .or_else(|| settings.signal.clone().map(|s| vec![s]))
                .ok_or_else(|| CliError::usage("benchmark needs --signals"))?;
            let signals = names
                .iter()
                .map(|s| parse_signal(s))
                .collect::<Result<Vec<_>>>()?;
            let snrs_db = settings
                .snrs_db
                .clone()
                .or_else(|| settings.snr_db.map(|s| vec![s]))
                .unwrap_or_else(|| DEFAULT_SNRS_DB.to_vec());
            let lengths = settings
                .lengths
                .clone()
                .or_else(|| settings.n.map(|n| vec![n]))
                .unwrap_or_else(|| vec![DEFAULT_N]);
            let realizations = settings.realizations.unwrap_or(DEFAULT_REALIZATIONS);
            if realizations == 0 {
                return Err(CliError::usage("--realizations must be positive"));
            }
            if signals.is_empty() || snrs_db.is_empty() || lengths.is_empty() {
                return Err(CliError::usage("benchmark sweep lists must be nonempty"));
            }
            if snrs_db.iter().any(|s| !s.is_finite()) {
                return Err(CliError::usage("benchmark SNRs must be finite"));
            }
            let sweep = Sweep {
                signals,
                snrs_db,
                lengths,
                realizations,
            };
            (None, Some(sweep))
        } else {
            let source = match (&settings.input, &settings.signal) {
                (Some(_), Some(_)) => {
                    return Err(CliError::usage("give either --input or --signal, not both"))
                }
                (Some(path), None) => Source::Input(path.clone()),
                (None, Some(name)) => Source::Synthetic {
                    signal: parse_signal(name)?,
                    n: settings.n.unwrap_or(DEFAULT_N),
                    snr_db: settings.snr_db,
                },
                (None, None) => {
                    return Err(CliError::usage(
                        "an --input file or a --signal name is required",
                    ))
                }
            };
            (Some(source), None)
        };

        Ok(RunConfig {
            subcommand,
            source,
            output_dir,
            seed,
            denoise,
            sweep,
            settings,
        })
    }
}
