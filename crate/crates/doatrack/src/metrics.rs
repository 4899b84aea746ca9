//! Accuracy metrics of a trajectory against ground truth.
//!
//! Deviations are measured on the circle (wrapped to [-180, 180)), over
//! frames where the ground truth marks the source active, matching each
//! estimation frame to the nearest ground-truth sample within half a
//! frame hop.

use serde::{Deserialize, Serialize};

use crate::Result;
use crate::angle::degrees_between;
use crate::error::Error;
use crate::pipeline::TrajectoryRecord;
use crate::scenegen::GroundTruthRecord;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricsSummary {
    /// Circular mean absolute deviation over active frames, degrees.
    pub mad_deg: f64,
    /// Standard deviation of the absolute deviations, degrees.
    pub std_deg: f64,
    /// Percentage of estimation frames with a usable estimate.
    pub frames_valid_pct: f64,
    /// Number of (frame, truth) pairs entering the deviation stats.
    pub frames_compared: usize,
}

/// Nearest ground-truth record by time, if within `max_dt` seconds.
fn nearest(truth: &[GroundTruthRecord], time_s: f64, max_dt: f64) -> Option<&GroundTruthRecord> {
    let idx = truth.partition_point(|r| r.time_s < time_s);
    let candidates = [idx.checked_sub(1), Some(idx)];
    candidates
        .into_iter()
        .flatten()
        .filter_map(|i| truth.get(i))
        .min_by(|a, b| {
            (a.time_s - time_s)
                .abs()
                .partial_cmp(&(b.time_s - time_s).abs())
                .unwrap()
        })
        .filter(|r| (r.time_s - time_s).abs() <= max_dt)
}

/// Scores the tracked azimuth against ground truth. `truth` must be
/// sorted by time.
pub fn compute_metrics(
    trajectory: &[TrajectoryRecord],
    truth: &[GroundTruthRecord],
) -> Result<MetricsSummary> {
    // Half a hop, inferred from the frame cadence.
    let max_dt = match trajectory {
        [a, b, ..] => (b.time_s - a.time_s) / 2.0,
        _ => 0.05,
    };
    let mut deviations = Vec::new();
    for rec in trajectory {
        let Some(est) = rec.azimuth_tracked_deg else {
            continue;
        };
        let Some(gt) = nearest(truth, rec.time_s, max_dt) else {
            continue;
        };
        if !gt.active {
            continue;
        }
        deviations.push(degrees_between(est, gt.azimuth_deg).abs());
    }
    if deviations.is_empty() {
        return Err(Error::NoOverlap);
    }
    let n = deviations.len() as f64;
    let mad = deviations.iter().sum::<f64>() / n;
    let var = deviations.iter().map(|d| (d - mad).powi(2)).sum::<f64>() / n;
    let valid = trajectory.iter().filter(|r| r.active).count();
    Ok(MetricsSummary {
        mad_deg: mad,
        std_deg: var.sqrt(),
        frames_valid_pct: 100.0 * valid as f64 / trajectory.len().max(1) as f64,
        frames_compared: deviations.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::FusionMode;

    fn record(time_s: f64, tracked: f64) -> TrajectoryRecord {
        TrajectoryRecord {
            time_s,
            azimuth_raw_deg: Some(tracked),
            azimuth_tracked_deg: Some(tracked),
            r: 0.9,
            dispersion: 0.2,
            mode: FusionMode::CommonMean,
            active: true,
        }
    }

    fn truth(time_s: f64, az: f64, active: bool) -> GroundTruthRecord {
        GroundTruthRecord {
            time_s,
            azimuth_deg: az,
            active,
        }
    }

    #[test]
    fn identical_trajectories_have_zero_mad() {
        let traj: Vec<_> = (0..100).map(|i| record(i as f64 * 0.004, 25.0)).collect();
        let gt: Vec<_> = (0..100)
            .map(|i| truth(i as f64 * 0.004, 25.0, true))
            .collect();
        let m = compute_metrics(&traj, &gt).unwrap();
        assert_eq!(m.mad_deg, 0.0);
        assert_eq!(m.std_deg, 0.0);
        assert_eq!(m.frames_valid_pct, 100.0);
    }

    #[test]
    fn constant_offset_has_exact_mad_and_zero_std() {
        let traj: Vec<_> = (0..50).map(|i| record(i as f64 * 0.004, 30.0)).collect();
        let gt: Vec<_> = (0..50)
            .map(|i| truth(i as f64 * 0.004, 20.0, true))
            .collect();
        let m = compute_metrics(&traj, &gt).unwrap();
        assert!((m.mad_deg - 10.0).abs() < 1e-12);
        assert!(m.std_deg < 1e-12);
    }

    #[test]
    fn deviation_is_circular_at_wrap_boundary() {
        let traj = vec![record(0.0, -179.0), record(0.004, -179.0)];
        let gt = vec![truth(0.0, 179.0, true), truth(0.004, 179.0, true)];
        let m = compute_metrics(&traj, &gt).unwrap();
        assert!((m.mad_deg - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inactive_frames_are_excluded() {
        let traj: Vec<_> = (0..10).map(|i| record(i as f64 * 0.004, 0.0)).collect();
        let mut gt: Vec<_> = (0..10)
            .map(|i| truth(i as f64 * 0.004, 0.0, true))
            .collect();
        gt[3].active = false;
        gt[3].azimuth_deg = 90.0; // must not contribute
        let m = compute_metrics(&traj, &gt).unwrap();
        assert_eq!(m.frames_compared, 9);
        assert_eq!(m.mad_deg, 0.0);
    }

    #[test]
    fn no_overlap_is_an_error() {
        let traj = vec![record(0.0, 0.0)];
        let gt = vec![truth(10.0, 0.0, true)];
        assert!(matches!(compute_metrics(&traj, &gt), Err(Error::NoOverlap)));
        let gt = vec![truth(0.0, 0.0, false)];
        assert!(matches!(compute_metrics(&traj, &gt), Err(Error::NoOverlap)));
    }
}
