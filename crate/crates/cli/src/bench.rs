//! Seeded benchmark sweeps over (signal, length, input SNR) cells.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use vmdcvm::io::fmt_f64;
use vmdcvm::{add_noise, denoise, generate, score, DenoiseConfig, TestSignal};

use crate::config::{RunConfig, Settings, Sweep};
use crate::error::{CliError, Result};

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULTS_HEADER: &str = "signal,n,input_snr_db,mean_out_snr_db,std_out_snr_db,mean_mse";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub signal: TestSignal,
    pub n: usize,
    pub input_snr_db: f64,
    pub mean_out_snr_db: f64,
    pub std_out_snr_db: f64,
    pub mean_mse: f64,
    pub out_snr_db: Vec<f64>,
    /// Realizations whose decomposition stopped at the iteration cap.
    pub vmd_nonconverged: usize,
}

/// Seed of realization `j` (0-based).
pub fn realization_seed(master: u64, j: usize) -> u64 {
    master.wrapping_add(j as u64)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

pub fn run_cell(
    signal: TestSignal,
    n: usize,
    input_snr_db: f64,
    realizations: usize,
    seed: u64,
    cfg: &DenoiseConfig,
) -> Result<CellResult> {
    if realizations == 0 {
        return Err(CliError::usage("realizations must be positive"));
    }
    let clean = generate(signal, n)?;
    let runs = (0..realizations)
        .into_par_iter()
        .map(|j| {
            let pair = add_noise(&clean, input_snr_db, realization_seed(seed, j))?;
            let (out, report) = denoise(&pair.noisy, cfg)?;
            let s = score(&clean, &out)?;
            Ok((s.snr_db, s.mse, !report.vmd_converged))
        })
        .collect::<vmdcvm::Result<Vec<_>>>()?;
    let snrs: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mses: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let (mean_snr, std_snr) = mean_std(&snrs);
    Ok(CellResult {
        signal,
        n,
        input_snr_db,
        mean_out_snr_db: mean_snr,
        std_out_snr_db: std_snr,
        mean_mse: mean_std(&mses).0,
        out_snr_db: snrs,
        vmd_nonconverged: runs.iter().filter(|r| r.2).count(),
    })
}

/// Every cell of the sweep, in signal-major, then length, then SNR order.
pub fn run_benchmark(sweep: &Sweep, cfg: &DenoiseConfig, seed: u64) -> Result<Vec<CellResult>> {
    if sweep.realizations == 0 {
        return Err(CliError::usage("realizations must be positive"));
    }
    let cells: Vec<(TestSignal, usize, f64)> = sweep
        .signals
        .iter()
        .flat_map(|&s| {
            sweep
                .lengths
                .iter()
                .flat_map(move |&n| sweep.snrs_db.iter().map(move |&snr| (s, n, snr)))
        })
        .collect();
    cells
        .par_iter()
        .map(|&(s, n, snr)| run_cell(s, n, snr, sweep.realizations, seed, cfg))
        .collect()
}

pub fn write_results<W: Write>(writer: W, cells: &[CellResult]) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{RESULTS_HEADER}")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            c.signal,
            c.n,
            fmt_f64(c.input_snr_db),
            fmt_f64(c.mean_out_snr_db),
            fmt_f64(c.std_out_snr_db),
            fmt_f64(c.mean_mse)
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ManifestCell<'a> {
    signal: TestSignal,
    n: usize,
    input_snr_db: f64,
    realization_seeds: Vec<u64>,
    out_snr_db: &'a [f64],
    vmd_nonconverged: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    tool: &'static str,
    version: &'static str,
    rng: &'static str,
    subcommand: &'static str,
    /// Layered settings; feeding the manifest back through `--config`
    /// reproduces the run.
    config: Settings,
    resolved: &'a DenoiseConfig,
    seed: u64,
    sweep: &'a Sweep,
    results_file: &'static str,
    cells: Vec<ManifestCell<'a>>,
}

pub const RNG_DESCRIPTION: &str =
    "ChaCha20 (rand_chacha 0.3) seeded with seed_from_u64, standard normal by ziggurat (rand_distr 0.4)";

#[derive(Debug)]
pub struct BenchmarkOutcome {
    pub cells: Vec<CellResult>,
    pub results_path: PathBuf,
    pub manifest_path: PathBuf,
}

pub fn run_benchmark_to_dir(run: &RunConfig) -> Result<BenchmarkOutcome> {
    let sweep = run
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::usage("benchmark needs a sweep"))?;
    let cells = run_benchmark(sweep, &run.denoise, run.seed)?;

    fs::create_dir_all(&run.output_dir)?;
    let results_path = run.output_dir.join(RESULTS_FILE);
    write_results(File::create(&results_path)?, &cells)?;

    let mut config = run.settings.clone();
    config.seed = Some(run.seed);
    config.out_dir = None;
    let manifest = Manifest {
        manifest_version: 1,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        rng: RNG_DESCRIPTION,
        subcommand: "benchmark",
        config,
        resolved: &run.denoise,
        seed: run.seed,
        sweep,
        results_file: RESULTS_FILE,
        cells: cells
            .iter()
            .map(|c| ManifestCell {
                signal: c.signal,
                n: c.n,
                input_snr_db: c.input_snr_db,
                realization_seeds: (0..sweep.realizations)
                    .map(|j| realization_seed(run.seed, j))
                    .collect(),
                out_snr_db: &c.out_snr_db,
                vmd_nonconverged: c.vmd_nonconverged,
            })
            .collect(),
    };
    let manifest_path = run.output_dir.join(MANIFEST_FILE);
    let mut w = BufWriter::new(File::create(&manifest_path)?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    w.flush()?;

    Ok(BenchmarkOutcome {
        cells,
        results_path,
        manifest_path,
    })
}
