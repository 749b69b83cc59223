use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand as ClapSubcommand};
use vmdcvm_cli::bench::run_benchmark_to_dir;
use vmdcvm_cli::commands::{run_calibrate, run_decompose, run_denoise};
use vmdcvm_cli::{CliError, RunConfig, Settings, Subcommand};

#[derive(Parser)]
#[command(
    name = "vmdcvm",
    version,
    about = "VMD + Cramér–von Mises signal denoising"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON config mirroring the flags; flags win on conflict.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    settings: Settings,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Split a signal into band-limited modes (modes.csv).
    Decompose(Common),
    /// Denoise a signal and write diagnostics.
    Denoise(Common),
    /// Estimate the noise CDF and threshold table only.
    Calibrate(Common),
    /// Run a seeded sweep and write results.csv plus manifest.json.
    Benchmark(Common),
}

struct Style {
    on: bool,
}

impl Style {
    fn detect() -> Self {
        Style {
            on: std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal(),
        }
    }

    fn bold(&self, s: &str) -> String {
        if self.on {
            format!("\x1b[1m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (sub, common) = match cli.command {
        Command::Decompose(c) => (Subcommand::Decompose, c),
        Command::Denoise(c) => (Subcommand::Denoise, c),
        Command::Calibrate(c) => (Subcommand::Calibrate, c),
        Command::Benchmark(c) => (Subcommand::Benchmark, c),
    };
    let file = match &common.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let run = RunConfig::resolve(sub, common.settings.over(&file))?;
    let style = Style::detect();

    let written = match sub {
        Subcommand::Decompose => run_decompose(&run)?,
        Subcommand::Calibrate => run_calibrate(&run)?,
        Subcommand::Denoise => {
            let out = run_denoise(&run)?;
            println!("relevant modes: 1..={} of {}", out.k2, out.k_modes);
            if let Some(s) = out.score {
                println!(
                    "{} {:.2} dB, mse {:.6}",
                    style.bold("output snr"),
                    s.snr_db,
                    s.mse
                );
            }
            out.written
        }
        Subcommand::Benchmark => {
            let out = run_benchmark_to_dir(&run)?;
            for c in &out.cells {
                println!(
                    "{:<10} n={:<6} in={:>6.2} dB  {} {:>6.2} ± {:.2} dB  mse {:.4}",
                    c.signal.name(),
                    c.n,
                    c.input_snr_db,
                    style.bold("out"),
                    c.mean_out_snr_db,
                    c.std_out_snr_db,
                    c.mean_mse
                );
                if c.vmd_nonconverged > 0 {
                    eprintln!(
                        "warning: {} of {} decompositions hit the iteration cap",
                        c.vmd_nonconverged,
                        c.out_snr_db.len()
                    );
                }
            }
            vec![out.results_path, out.manifest_path]
        }
    };
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
