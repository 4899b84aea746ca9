//! Tracks a source crossing the +-180 degree wrap point. The wrapped
//! Kalman filter keeps the trajectory continuous on the circle: no
//! 360-degree jumps appear even though the reported angle changes sign.
//!
//! Usage: cargo run --example wrapped_tracking

use doatrack::angle::degrees_between;
use doatrack::scenegen::{TrajectoryPoint, azimuth_at, render_scene, single_source_scene};
use doatrack::{Pipeline, Result, RunConfig};

fn main() -> Result<()> {
    let traj = vec![
        TrajectoryPoint {
            time_s: 0.0,
            azimuth_deg: 170.0,
        },
        TrajectoryPoint {
            time_s: 4.0,
            azimuth_deg: -170.0,
        },
    ];
    let spec = single_source_scene(traj.clone(), -20.0, None, 4.0, 3);
    let rendered = render_scene(&spec)?;
    let mut pipeline = Pipeline::new(RunConfig::default())?;
    let records = pipeline.process_block(&rendered.audio)?;

    println!("  time   truth   tracked   step");
    let mut prev: Option<f64> = None;
    let mut max_step: f64 = 0.0;
    for r in &records {
        let Some(tracked) = r.azimuth_tracked_deg else {
            continue;
        };
        let step = prev
            .map(|p| degrees_between(tracked, p).abs())
            .unwrap_or(0.0);
        max_step = max_step.max(step);
        prev = Some(tracked);
        if (r.time_s * 1000.0).round() as i64 % 400 < 4 {
            println!(
                "{:5.2} s {:7.1} {:8.1} {:6.2}",
                r.time_s,
                azimuth_at(&traj, r.time_s),
                tracked,
                step
            );
        }
    }
    println!("\nmax wrapped frame-to-frame step: {max_step:.2} deg");
    Ok(())
}
