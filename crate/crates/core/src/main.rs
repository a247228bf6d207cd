use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use tractvar::cli::{self, AngleUnit, RunConfig};

#[derive(Parser)]
#[command(name = "tractvar", version, about = "Pellet trajectories to tract variables")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build anatomy and compute TVs for every utterance in a manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write angles in degrees instead of radians.
        #[arg(long)]
        degrees: bool,
        /// Clamp tongue-body clearance at zero.
        #[arg(long)]
        clamp_tbcd: bool,
        /// Output sample rate (Hz).
        #[arg(long, default_value_t = tractvar::ingest::DEFAULT_RATE_HZ)]
        rate: f64,
        /// Also write SVG plots.
        #[arg(long)]
        plots: bool,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
    },
    /// Correlate two TV files column by column.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Write the report as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Build anatomy only and plot the extended palate.
    Anatomy {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TRACTVAR_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let args = Args::parse();
    let code = match args.command {
        Command::Run {
            manifest,
            out,
            degrees,
            clamp_tbcd,
            rate,
            plots,
            parallelism,
        } => {
            let config = RunConfig {
                manifest_path: manifest,
                output_dir: out,
                angle_unit: if degrees { AngleUnit::Degrees } else { AngleUnit::Radians },
                clamp_tbcd,
                target_rate: rate,
                emit_plots: plots,
                parallelism,
            };
            match cli::run_pipeline(&config) {
                Ok(summary) => {
                    eprintln!(
                        "{} anatomies, {} utterances written, {} speaker failures, {} utterance failures",
                        summary.anatomies.len(),
                        summary.utterances.len(),
                        summary.speaker_failures.len(),
                        summary.utterance_failures.len()
                    );
                    summary.exit_code()
                }
                Err(e) => {
                    error!("{e}");
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Command::Anatomy { manifest, out } => match cli::run_anatomy(&manifest, &out) {
            Ok(summary) => summary.exit_code(),
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Command::Compare { a, b, json } => match cli::compare_tvs(&a, &b) {
            Ok(report) => {
                println!("{report}");
                match json.map(|path| {
                    let text = serde_json::to_string_pretty(&report).expect("report serializes");
                    std::fs::write(&path, text + "\n").map_err(|e| (path, e))
                }) {
                    Some(Err((path, e))) => {
                        eprintln!("error: {}: {e}", path.display());
                        1
                    }
                    _ => 0,
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                if e.is_io() {
                    1
                } else {
                    2
                }
            }
        },
    };
    ExitCode::from(code as u8)
}
