//! Synthetic acoustic scenes with known ground truth.
//!
//! Renders four-channel free-field audio for a parameterized binaural
//! geometry: anechoic point sources at 2 m following piecewise-linear
//! azimuth trajectories (time-varying fractional delays, 32-tap
//! windowed-sinc interpolation) plus an isotropic diffuse field built
//! from independent white plane waves. Everything is deterministic
//! given the seed.
//!
//! Coordinates: origin at the head center, +y is the look direction,
//! +x is the user's left, z up. Azimuth 0 = front, positive = left.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::Result;
use crate::angle::wrap_degrees;
use crate::cimp::{ArrayGeometry, ChannelMap, PairId};
use crate::error::Error;
use crate::stft::AudioBlock;

const SOURCE_DISTANCE_M: f64 = 2.0;
const SINC_HALF_TAPS: i64 = 16;

/// Array geometry with explicit microphone positions, channel order
/// left-front, left-rear, right-front, right-rear.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneGeometry {
    /// Microphone positions in meters: [left_front, left_rear,
    /// right_front, right_rear].
    pub mic_positions: [[f64; 3]; 4],
    pub speed_of_sound: f64,
}

impl Default for SceneGeometry {
    fn default() -> Self {
        // 12 mm front-rear spacing per device, 160 mm across the head.
        let (dm, db) = (0.012, 0.16);
        SceneGeometry {
            mic_positions: [
                [db / 2.0, dm / 2.0, 0.0],
                [db / 2.0, -dm / 2.0, 0.0],
                [-db / 2.0, dm / 2.0, 0.0],
                [-db / 2.0, -dm / 2.0, 0.0],
            ],
            speed_of_sound: 343.0,
        }
    }
}

impl SceneGeometry {
    fn dist(&self, a: usize, b: usize) -> f64 {
        let (pa, pb) = (self.mic_positions[a], self.mic_positions[b]);
        ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2)).sqrt()
    }

    /// Pair spacings implied by the positions, for the analysis side.
    pub fn to_array_geometry(&self) -> ArrayGeometry {
        ArrayGeometry {
            d_left: self.dist(0, 1),
            d_right: self.dist(2, 3),
            d_binaural: self.dist(0, 2),
            c: self.speed_of_sound,
            channel_map: ChannelMap::default(),
        }
    }

    /// Signed propagation delay of a plane wave from `azimuth_deg`
    /// at microphone `ch`, relative to the origin (seconds; negative =
    /// arrives before the origin).
    pub fn channel_delay(&self, azimuth_deg: f64, ch: usize) -> f64 {
        let az = azimuth_deg.to_radians();
        let u = [az.sin(), az.cos(), 0.0];
        let p = self.mic_positions[ch];
        -(p[0] * u[0] + p[1] * u[1] + p[2] * u[2]) / self.speed_of_sound
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    WhiteNoise,
    /// White noise amplitude-modulated at 4 Hz with 80% depth; the
    /// modulation gaps mark inactive segments in the ground truth.
    SpeechLikeModulatedNoise,
    File {
        path: String,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub time_s: f64,
    pub azimuth_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub signal: SignalKind,
    /// Piecewise-linear azimuth over time; between breakpoints the
    /// azimuth moves along the shorter arc.
    pub trajectory: Vec<TrajectoryPoint>,
    /// RMS level in dB full scale.
    pub level_db: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffuseSpec {
    /// Total RMS level in dB full scale.
    pub level_db: f64,
    /// Number of independent plane waves; at least 64.
    pub n_plane_waves: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSpec {
    pub geometry: SceneGeometry,
    pub sample_rate: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub sources: Vec<SourceSpec>,
    pub diffuse: Option<DiffuseSpec>,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            geometry: SceneGeometry::default(),
            sample_rate: 16000.0,
            duration_s: 5.0,
            seed: 0,
            sources: Vec::new(),
            diffuse: None,
        }
    }
}

impl SceneSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SceneSpec =
            toml::from_str(text).map_err(|e| Error::InvalidScene(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0) {
            return Err(Error::InvalidScene("sample_rate must be > 0".into()));
        }
        if !(self.duration_s > 0.0) {
            return Err(Error::InvalidScene("duration_s must be > 0".into()));
        }
        for (i, src) in self.sources.iter().enumerate() {
            if src.trajectory.is_empty() {
                return Err(Error::InvalidScene(format!("source {i} has no trajectory")));
            }
            let mut prev = f64::NEG_INFINITY;
            for p in &src.trajectory {
                if !(-180.0..180.0).contains(&p.azimuth_deg) {
                    return Err(Error::InvalidScene(format!(
                        "source {i}: azimuth {} outside [-180, 180)",
                        p.azimuth_deg
                    )));
                }
                if p.time_s < prev {
                    return Err(Error::InvalidScene(format!(
                        "source {i}: trajectory times must be non-decreasing"
                    )));
                }
                if p.time_s < 0.0 || p.time_s > self.duration_s {
                    return Err(Error::InvalidScene(format!(
                        "source {i}: trajectory time {} outside [0, {}]",
                        p.time_s, self.duration_s
                    )));
                }
                prev = p.time_s;
            }
        }
        if let Some(d) = &self.diffuse
            && d.n_plane_waves < 64
        {
            return Err(Error::InvalidScene(
                "n_plane_waves must be >= 64 for a diffuse approximation".into(),
            ));
        }
        Ok(())
    }
}

/// Ground-truth azimuth sample, in the same format the metrics command
/// consumes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub time_s: f64,
    pub azimuth_deg: f64,
    pub active: bool,
}

#[derive(Debug, Clone)]
pub struct RenderedScene {
    pub audio: AudioBlock,
    pub ground_truth: Vec<GroundTruthRecord>,
}

/// Piecewise-linear, wrap-aware azimuth at time `t`: interpolation
/// between breakpoints follows the shorter arc, so trajectories may
/// cross the +-180 degree boundary.
pub fn azimuth_at(trajectory: &[TrajectoryPoint], t: f64) -> f64 {
    assert!(!trajectory.is_empty());
    if t <= trajectory[0].time_s {
        return trajectory[0].azimuth_deg;
    }
    for w in trajectory.windows(2) {
        let (a, b) = (w[0], w[1]);
        if t <= b.time_s {
            if b.time_s == a.time_s {
                return b.azimuth_deg;
            }
            let frac = (t - a.time_s) / (b.time_s - a.time_s);
            let step = wrap_degrees(b.azimuth_deg - a.azimuth_deg);
            return wrap_degrees(a.azimuth_deg + frac * step);
        }
    }
    trajectory.last().unwrap().azimuth_deg
}

/// Exact plane-wave time difference of arrival of a pair for a source
/// at `azimuth_deg`, following the pipeline's sign conventions.
pub fn geometric_tdoa(azimuth_deg: f64, pair: PairId, geometry: &SceneGeometry) -> f64 {
    let map = ChannelMap::default();
    let (a, b) = map.pair_channels(pair);
    geometry.channel_delay(azimuth_deg, b) - geometry.channel_delay(azimuth_deg, a)
}

fn windowed_sinc(x: f64) -> f64 {
    let half = SINC_HALF_TAPS as f64;
    if x.abs() >= half {
        return 0.0;
    }
    let sinc = if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    };
    // Hann window over the 2*half tap span.
    let w = 0.5 * (1.0 + (std::f64::consts::PI * x / half).cos());
    sinc * w
}

/// Interpolation weights for taps j = 1-H .. H at fractional offset
/// `frac` in [0, 1).
fn fractional_kernel(frac: f64) -> [f64; 2 * SINC_HALF_TAPS as usize] {
    let mut kernel = [0.0; 2 * SINC_HALF_TAPS as usize];
    for (slot, j) in kernel.iter_mut().zip(1 - SINC_HALF_TAPS..=SINC_HALF_TAPS) {
        *slot = windowed_sinc(j as f64 - frac);
    }
    kernel
}

/// Reads `signal` at fractional sample position `pos` (indices into the
/// padded buffer) with a 32-tap windowed-sinc kernel.
fn read_fractional(signal: &[f64], pos: f64) -> f64 {
    let base = pos.floor() as i64;
    let frac = pos - base as f64;
    let kernel = fractional_kernel(frac);
    apply_kernel(signal, base, &kernel)
}

fn apply_kernel(signal: &[f64], base: i64, kernel: &[f64; 2 * SINC_HALF_TAPS as usize]) -> f64 {
    let mut acc = 0.0;
    for (slot, j) in kernel.iter().zip(1 - SINC_HALF_TAPS..=SINC_HALF_TAPS) {
        let idx = base + j;
        if idx < 0 || idx as usize >= signal.len() {
            continue;
        }
        acc += signal[idx as usize] * slot;
    }
    acc
}

fn source_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(stream),
    )
}

/// 4 Hz, 80%-depth amplitude envelope of the speech-like source.
fn speech_envelope(t: f64) -> f64 {
    let depth = 0.8;
    1.0 - depth * 0.5 * (1.0 + (std::f64::consts::TAU * 4.0 * t).sin())
}

fn speech_active(t: f64) -> bool {
    speech_envelope(t) >= 0.6
}

fn base_signal(
    kind: &SignalKind,
    n_padded: usize,
    rms: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    match kind {
        SignalKind::WhiteNoise | SignalKind::SpeechLikeModulatedNoise => Ok((0..n_padded)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * rms)
            .collect()),
        SignalKind::File { path } => {
            let block = crate::io::read_wav(std::path::Path::new(path))?;
            let mono = &block.channels[0];
            if mono.is_empty() {
                return Err(Error::InvalidScene(format!("signal file {path} is empty")));
            }
            let energy: f64 = mono.iter().map(|s| s * s).sum();
            let scale = rms / (energy / mono.len() as f64).sqrt().max(1e-12);
            Ok((0..n_padded)
                .map(|i| mono[i % mono.len()] * scale)
                .collect())
        }
    }
}

/// Renders the scene into a four-channel block plus the ground-truth
/// trajectory of the first source, sampled every 2 ms and at every
/// breakpoint.
pub fn render_scene(spec: &SceneSpec) -> Result<RenderedScene> {
    spec.validate()?;
    let fs = spec.sample_rate;
    let n = (spec.duration_s * fs).round() as usize;
    let mut channels = vec![vec![0.0f64; n]; 4];

    // Generous padding: source distance plus the array aperture plus
    // the interpolation kernel.
    let max_delay_s = (SOURCE_DISTANCE_M + 1.0) / spec.geometry.speed_of_sound;
    let pad = (max_delay_s * fs).ceil() as usize + 2 * SINC_HALF_TAPS as usize;

    for (si, src) in spec.sources.iter().enumerate() {
        let rms = 10f64.powf(src.level_db / 20.0);
        let mut rng = source_rng(spec.seed, si as u64 + 1);
        let signal = base_signal(&src.signal, n + 2 * pad, rms, &mut rng)?;
        let dist_delay = SOURCE_DISTANCE_M / spec.geometry.speed_of_sound;
        for (ch, out) in channels.iter_mut().enumerate() {
            for (i, slot) in out.iter_mut().enumerate() {
                let t = i as f64 / fs;
                let az = azimuth_at(&src.trajectory, t);
                let delay = dist_delay + spec.geometry.channel_delay(az, ch);
                let pos = i as f64 - delay * fs + pad as f64;
                let mut sample = read_fractional(&signal, pos);
                if src.signal == SignalKind::SpeechLikeModulatedNoise {
                    sample *= speech_envelope(t);
                }
                *slot += sample;
            }
        }
    }

    if let Some(diffuse) = &spec.diffuse {
        let wave_rms = 10f64.powf(diffuse.level_db / 20.0) / (diffuse.n_plane_waves as f64).sqrt();
        for wi in 0..diffuse.n_plane_waves {
            let mut rng = source_rng(spec.seed, 0x4000 + wi as u64);
            let az = rng.random_range(-180.0..180.0);
            let signal: Vec<f64> = (0..n + 2 * pad)
                .map(|_| rng.sample::<f64, _>(StandardNormal) * wave_rms)
                .collect();
            for (ch, out) in channels.iter_mut().enumerate() {
                // Static direction: the fractional offset is the same
                // for every output sample, so the kernel is fixed.
                let shift = pad as f64 - spec.geometry.channel_delay(az, ch) * fs;
                let base0 = shift.floor();
                let kernel = fractional_kernel(shift - base0);
                for (i, slot) in out.iter_mut().enumerate() {
                    *slot += apply_kernel(&signal, i as i64 + base0 as i64, &kernel);
                }
            }
        }
    }

    let ground_truth = match spec.sources.first() {
        Some(src) => {
            let mut times: Vec<f64> = Vec::new();
            let step = 0.002;
            let mut t = 0.0;
            while t < spec.duration_s {
                times.push(t);
                t += step;
            }
            times.extend(
                src.trajectory
                    .iter()
                    .map(|p| p.time_s)
                    .filter(|&t| t <= spec.duration_s),
            );
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
            times.dedup();
            times
                .into_iter()
                .map(|t| GroundTruthRecord {
                    time_s: t,
                    azimuth_deg: azimuth_at(&src.trajectory, t),
                    active: match src.signal {
                        SignalKind::SpeechLikeModulatedNoise => speech_active(t),
                        _ => true,
                    },
                })
                .collect()
        }
        None => Vec::new(),
    };

    Ok(RenderedScene {
        audio: AudioBlock {
            sample_rate: fs,
            channels,
        },
        ground_truth,
    })
}

/// Convenience constructor for single-source scenes.
pub fn single_source_scene(
    trajectory: Vec<TrajectoryPoint>,
    level_db: f64,
    diffuse_level_db: Option<f64>,
    duration_s: f64,
    seed: u64,
) -> SceneSpec {
    SceneSpec {
        duration_s,
        seed,
        sources: vec![SourceSpec {
            signal: SignalKind::WhiteNoise,
            trajectory,
            level_db,
        }],
        diffuse: diffuse_level_db.map(|level_db| DiffuseSpec {
            level_db,
            n_plane_waves: 64,
        }),
        ..SceneSpec::default()
    }
}
