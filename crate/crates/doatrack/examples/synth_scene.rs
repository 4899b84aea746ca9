//! Renders a synthetic scene to a 4-channel WAV plus ground-truth CSV.
//!
//! Usage: cargo run --example synth_scene [output.wav]

use doatrack::scenegen::{TrajectoryPoint, render_scene, single_source_scene};
use doatrack::{Result, io};
use std::path::PathBuf;

fn main() -> Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| "scene.wav".into());

    // A speech-band noise source sweeping from 30 to -60 degrees over
    // 4 seconds, 10 dB above a 64-wave diffuse floor.
    let spec = single_source_scene(
        vec![
            TrajectoryPoint {
                time_s: 0.0,
                azimuth_deg: 30.0,
            },
            TrajectoryPoint {
                time_s: 4.0,
                azimuth_deg: -60.0,
            },
        ],
        -20.0,
        Some(-30.0),
        4.0,
        7,
    );
    let rendered = render_scene(&spec)?;
    io::write_wav(&out, &rendered.audio)?;

    let truth_path = out.with_extension("truth.csv");
    let file = std::fs::File::create(&truth_path)?;
    io::write_ground_truth_csv(file, &rendered.ground_truth)?;

    println!(
        "wrote {} ({:.1} s, {} channels) and {}",
        out.display(),
        rendered.audio.duration_s(),
        rendered.audio.channels.len(),
        truth_path.display()
    );
    Ok(())
}
