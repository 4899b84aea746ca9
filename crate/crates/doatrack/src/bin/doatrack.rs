//! Command-line front end: scene synthesis, estimation, metrics and a
//! throughput benchmark.
//!
//! Exit codes: 2 unreadable WAV, 3 invalid config/scene, 4 too few
//! channels, 5 no overlapping active frames, 1 other errors.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use doatrack::config::RunConfig;
use doatrack::error::Error;
use doatrack::{Pipeline, io, metrics, scenegen};

#[derive(Parser)]
#[command(
    name = "doatrack",
    version,
    about = "Binaural-array azimuth estimation and tracking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the estimation pipeline on a multichannel WAV file and emit
    /// a trajectory CSV.
    Estimate {
        /// Input WAV (>= 4 channels, PCM 16/24/32-bit or 32-bit float).
        wav: PathBuf,
        /// TOML run configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render a synthetic scene to a WAV file plus ground-truth CSV.
    Synth {
        /// Scene specification (TOML).
        scene: PathBuf,
        /// Output WAV path.
        #[arg(long)]
        output: PathBuf,
        /// Ground-truth CSV path; defaults to the output path with a
        /// `_truth.csv` suffix.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Overrides the seed in the scene spec.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score a trajectory CSV against a ground-truth CSV; prints a JSON
    /// summary.
    Metrics {
        trajectory: PathBuf,
        ground_truth: PathBuf,
    },
    /// Measure pipeline throughput on a WAV file (real-time factor).
    Bench {
        wav: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::WavRead { .. } => 2,
        Error::InvalidConfig(_) | Error::InvalidScene(_) => 3,
        Error::ChannelCount { .. } => 4,
        Error::NoOverlap => 5,
        _ => 1,
    }
}

fn load_config(path: &Option<PathBuf>) -> doatrack::Result<RunConfig> {
    match path {
        Some(p) => RunConfig::from_path(p),
        None => Ok(RunConfig::default()),
    }
}

fn estimate(
    wav: &Path,
    config: &Option<PathBuf>,
) -> doatrack::Result<Vec<doatrack::TrajectoryRecord>> {
    let cfg = load_config(config)?;
    let block = io::read_wav(wav)?;
    let mut pipeline = Pipeline::new(cfg)?;
    pipeline.process_block(&block)
}

fn run(cli: Cli) -> doatrack::Result<()> {
    match cli.command {
        Command::Estimate {
            wav,
            config,
            output,
        } => {
            let records = estimate(&wav, &config)?;
            match output {
                Some(path) => {
                    let file = std::fs::File::create(&path)?;
                    io::write_trajectory_csv(file, &records)?;
                }
                None => io::write_trajectory_csv(std::io::stdout().lock(), &records)?,
            }
        }
        Command::Synth {
            scene,
            output,
            truth,
            seed,
        } => {
            let text = std::fs::read_to_string(&scene)
                .map_err(|e| Error::InvalidScene(format!("{}: {e}", scene.display())))?;
            let mut spec = scenegen::SceneSpec::from_toml(&text)?;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let rendered = scenegen::render_scene(&spec)?;
            io::write_wav(&output, &rendered.audio)?;
            let truth_path = truth.unwrap_or_else(|| {
                let mut p = output.clone();
                p.set_extension("");
                PathBuf::from(format!("{}_truth.csv", p.display()))
            });
            let file = std::fs::File::create(&truth_path)?;
            io::write_ground_truth_csv(file, &rendered.ground_truth)?;
        }
        Command::Metrics {
            trajectory,
            ground_truth,
        } => {
            let traj = io::read_trajectory_csv(&trajectory)?;
            let truth = io::read_ground_truth_csv(&ground_truth)?;
            let summary = metrics::compute_metrics(&traj, &truth)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("serializable")
            );
        }
        Command::Bench { wav, config } => {
            let cfg = load_config(&config)?;
            let block = io::read_wav(&wav)?;
            let audio_seconds = block.duration_s();
            let mut pipeline = Pipeline::new(cfg)?;
            let start = Instant::now();
            let records = pipeline.process_block(&block)?;
            let wall = start.elapsed().as_secs_f64();
            let report = serde_json::json!({
                "audio_seconds": audio_seconds,
                "wall_seconds": wall,
                "real_time_factor": audio_seconds / wall,
                "frames": records.len(),
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("serializable")
            );
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
