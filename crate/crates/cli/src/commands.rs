use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use vmdcvm::{
    add_noise, calibrate_thresholds, decompose, denoise_detailed, estimate_noise_cdf, generate, io,
    mode_distances, partition, score, ScoreReport, Signal,
};

use crate::config::{RunConfig, Source};
use crate::error::{CliError, Result};

/// The record to process and, for synthetic inputs, its clean reference.
pub struct Loaded {
    pub noisy: Signal,
    pub clean: Option<Signal>,
}

pub fn load_source(run: &RunConfig) -> Result<Loaded> {
    match run.source.as_ref() {
        Some(Source::Input(path)) => {
            let noisy = io::read_signal_file(path).map_err(|e| CliError::File {
                path: path.display().to_string(),
                source: e,
            })?;
            Ok(Loaded { noisy, clean: None })
        }
        Some(Source::Synthetic { signal, n, snr_db }) => {
            let clean = generate(*signal, *n)?;
            match snr_db {
                Some(snr) => {
                    let pair = add_noise(&clean, *snr, run.seed)?;
                    Ok(Loaded {
                        noisy: pair.noisy,
                        clean: Some(clean),
                    })
                }
                None => Ok(Loaded {
                    noisy: clean.clone(),
                    clean: Some(clean),
                }),
            }
        }
        None => Err(CliError::usage("no input given")),
    }
}

fn create(dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> Result<File> {
    let path = dir.join(name);
    let f = File::create(&path)?;
    written.push(path);
    Ok(f)
}

fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    let mut w = BufWriter::new(create(dir, name, written)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_distances(dir: &Path, distances: &[f64], written: &mut Vec<PathBuf>) -> Result<()> {
    let ks: Vec<f64> = (1..=distances.len()).map(|k| k as f64).collect();
    io::write_columns(
        create(dir, "mode_distances.csv", written)?,
        &["k", "distance"],
        &[&ks, distances],
    )?;
    Ok(())
}

fn write_inputs(dir: &Path, loaded: &Loaded, written: &mut Vec<PathBuf>) -> Result<()> {
    if let Some(clean) = &loaded.clean {
        io::write_signal(create(dir, "clean.csv", written)?, clean.samples())?;
        if clean != &loaded.noisy {
            io::write_signal(create(dir, "noisy.csv", written)?, loaded.noisy.samples())?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct DecomposeSummary<'a> {
    center_freqs: &'a [f64],
    iterations_used: usize,
    converged: bool,
}

pub fn run_decompose(run: &RunConfig) -> Result<Vec<PathBuf>> {
    let loaded = load_source(run)?;
    let modes = decompose(&loaded.noisy, &run.denoise.vmd)?;
    if !modes.converged {
        eprintln!(
            "warning: decomposition stopped at the {}-iteration cap before reaching tol",
            modes.iterations_used
        );
    }
    fs::create_dir_all(&run.output_dir)?;
    let mut written = Vec::new();
    modes.write_csv(create(&run.output_dir, "modes.csv", &mut written)?)?;
    let summary = DecomposeSummary {
        center_freqs: &modes.center_freqs,
        iterations_used: modes.iterations_used,
        converged: modes.converged,
    };
    write_json(&run.output_dir, "decompose.json", &summary, &mut written)?;
    write_inputs(&run.output_dir, &loaded, &mut written)?;
    Ok(written)
}

pub fn run_calibrate(run: &RunConfig) -> Result<Vec<PathBuf>> {
    let loaded = load_source(run)?;
    let cfg = &run.denoise;
    let modes = decompose(&loaded.noisy, &cfg.vmd)?;
    let part = partition(&mode_distances(&loaded.noisy, &modes)?)?;
    let rejected: Vec<&[f64]> = modes.modes[part.k2..].iter().map(Vec::as_slice).collect();
    let model = estimate_noise_cdf(&rejected, cfg.window, cfg.grid_size)?;
    let table = calibrate_thresholds(&rejected, &model, cfg.window)?;

    fs::create_dir_all(&run.output_dir)?;
    let mut written = Vec::new();
    write_json(&run.output_dir, "partition.json", &part, &mut written)?;
    write_distances(&run.output_dir, &part.distances, &mut written)?;
    model.write_csv(create(&run.output_dir, "noise_cdf.csv", &mut written)?)?;
    table.write_csv(create(&run.output_dir, "thresholds.csv", &mut written)?)?;
    Ok(written)
}

pub struct DenoiseOutcome {
    pub written: Vec<PathBuf>,
    pub score: Option<ScoreReport>,
    pub k2: usize,
    pub k_modes: usize,
}

pub fn run_denoise(run: &RunConfig) -> Result<DenoiseOutcome> {
    let loaded = load_source(run)?;
    let d = denoise_detailed(&loaded.noisy, &run.denoise)?;
    if !d.report.vmd_converged {
        eprintln!(
            "warning: decomposition stopped at the {}-iteration cap before reaching tol",
            d.report.vmd_iterations
        );
    }
    let score = loaded
        .clean
        .as_ref()
        .map(|c| score(c, &d.report.output))
        .transpose()?;

    fs::create_dir_all(&run.output_dir)?;
    let dir = &run.output_dir;
    let mut written = Vec::new();
    io::write_signal(
        create(dir, "denoised.csv", &mut written)?,
        d.report.output.samples(),
    )?;
    write_json(dir, "report.json", &d.report, &mut written)?;
    write_distances(dir, &d.report.partition.distances, &mut written)?;
    d.thresholds
        .write_csv(create(dir, "thresholds.csv", &mut written)?)?;
    d.noise_model
        .write_csv(create(dir, "noise_cdf.csv", &mut written)?)?;
    if let Some(s) = &score {
        #[derive(Serialize)]
        struct ScoreOut {
            snr_db: Option<f64>,
            mse: f64,
        }
        let out = ScoreOut {
            snr_db: s.snr_db.is_finite().then_some(s.snr_db),
            mse: s.mse,
        };
        write_json(dir, "score.json", &out, &mut written)?;
    }
    write_inputs(dir, &loaded, &mut written)?;
    Ok(DenoiseOutcome {
        written,
        score,
        k2: d.report.partition.k2,
        k_modes: d.report.partition.k(),
    })
}
