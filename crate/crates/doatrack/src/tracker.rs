//! Wrapped Kalman filter over (azimuth, angular velocity).
//!
//! Constant-velocity model with the innovation wrapped to `[-pi, pi)`;
//! the measurement variance is not fixed but driven each frame by the
//! fused circular dispersion, so unreliable frames barely move the
//! state. The state azimuth is re-wrapped after every step.

use serde::{Deserialize, Serialize};

use crate::Result;
use crate::angle::wrap_angle;
use crate::error::Error;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerConfig {
    /// Process-noise standard deviation per frame, degrees, applied to
    /// the velocity channel and mapped to the angle by the transition.
    pub process_noise_deg: f64,
    /// Lower clamp on the measurement variance (dispersion).
    pub delta_min: f64,
    /// Upper clamp on the measurement variance; beyond this a
    /// measurement is essentially uninformative.
    pub delta_max: f64,
    /// Initial azimuth standard deviation, degrees.
    pub init_angle_std_deg: f64,
    /// Initial angular-velocity standard deviation, degrees per frame.
    pub init_velocity_std_deg: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            process_noise_deg: 1.0,
            delta_min: 1e-4,
            delta_max: 25.0,
            init_angle_std_deg: 30.0,
            init_velocity_std_deg: 5.0,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.process_noise_deg > 0.0) {
            return Err(Error::InvalidConfig("process_noise_deg must be > 0".into()));
        }
        if !(self.delta_min > 0.0 && self.delta_min < self.delta_max) {
            return Err(Error::InvalidConfig(
                "need 0 < delta_min < delta_max".into(),
            ));
        }
        Ok(())
    }
}

/// Filter state: wrapped azimuth, angular velocity per frame and their
/// 2x2 covariance.
#[derive(Debug, Clone, Copy)]
pub struct TrackerState {
    pub azimuth: f64,
    pub angular_velocity: f64,
    pub covariance: [[f64; 2]; 2],
}

pub struct WrappedKalman {
    config: TrackerConfig,
    state: Option<TrackerState>,
}

impl WrappedKalman {
    pub fn new(config: TrackerConfig) -> Self {
        WrappedKalman {
            config,
            state: None,
        }
    }

    pub fn state(&self) -> Option<&TrackerState> {
        self.state.as_ref()
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Constant-velocity time update.
    pub fn predict(&mut self) {
        let Some(s) = self.state.as_mut() else {
            return;
        };
        let q = self.config.process_noise_deg.to_radians();
        let q2 = q * q;
        let p = s.covariance;
        // P <- F P F' + q^2 G G' with F = [[1,1],[0,1]], G = [1, 1]'.
        let p00 = p[0][0] + p[0][1] + p[1][0] + p[1][1] + q2;
        let p01 = p[0][1] + p[1][1] + q2;
        let p10 = p[1][0] + p[1][1] + q2;
        let p11 = p[1][1] + q2;
        s.azimuth = wrap_angle(s.azimuth + s.angular_velocity);
        s.covariance = [[p00, p01], [p10, p11]];
    }

    /// Measurement update with azimuth `measurement` (radians) and
    /// measurement variance `dispersion` (clamped into the configured
    /// range). Initializes the filter on the first call.
    pub fn update(&mut self, measurement: f64, dispersion: f64) {
        let m = wrap_angle(measurement);
        let Some(s) = self.state.as_mut() else {
            let pa = self.config.init_angle_std_deg.to_radians().powi(2);
            let pv = self.config.init_velocity_std_deg.to_radians().powi(2);
            self.state = Some(TrackerState {
                azimuth: m,
                angular_velocity: 0.0,
                covariance: [[pa, 0.0], [0.0, pv]],
            });
            return;
        };
        let r = dispersion.clamp(self.config.delta_min, self.config.delta_max);
        let p = s.covariance;
        let innovation = wrap_angle(m - s.azimuth);
        let denom = p[0][0] + r;
        let k0 = p[0][0] / denom;
        let k1 = p[1][0] / denom;
        s.azimuth = wrap_angle(s.azimuth + k0 * innovation);
        s.angular_velocity += k1 * innovation;
        // Joseph-form covariance update keeps P symmetric positive definite.
        let a00 = 1.0 - k0;
        // (I - K H) P with H = [1, 0].
        let q00 = a00 * p[0][0];
        let q01 = a00 * p[0][1];
        let q10 = p[1][0] - k1 * p[0][0];
        let q11 = p[1][1] - k1 * p[0][1];
        s.covariance = [
            [q00 * a00 + r * k0 * k0, -q00 * k1 + q01 + r * k0 * k1],
            [a00 * q10 + r * k1 * k0, -q10 * k1 + q11 + r * k1 * k1],
        ];
    }

    /// One frame: predict, then update when a valid measurement is
    /// present. Returns the posterior azimuth once initialized.
    pub fn step(&mut self, measurement: Option<(f64, f64)>) -> Option<f64> {
        self.predict();
        if let Some((m, d)) = measurement {
            self.update(m, d);
        }
        self.state.map(|s| s.azimuth)
    }
}
