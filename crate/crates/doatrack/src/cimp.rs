//! Circular statistics of inter-microphone phase differences.
//!
//! For every microphone pair and frequency bin below the ambiguity limit
//! the module tracks two exponentially smoothed phasor accumulators:
//! the raw accumulator gives the mean phase difference, the mapped one
//! (phase scaled by `k_u / k`) gives the mapped mean resultant length,
//! which stays near 1 for localized sources but collapses for diffuse
//! noise at all usable frequencies. The mapped resultant length is
//! converted to a circular dispersion that weights the delay fit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::Result;
use crate::error::Error;
use crate::stft::FrameSpectrum;

/// Sentinel dispersion for bins that carry no usable information;
/// such bins get zero weight downstream.
pub const DISPERSION_INFINITE: f64 = f64::INFINITY;

/// The three microphone pairs of a binaural four-microphone setup.
///
/// Phase convention: for monaural pairs the phase is
/// `arg(X_front * conj(X_rear))`, for the binaural pair
/// `arg(X_left * conj(X_right))`. A positive fitted delay therefore
/// means front-leading (monaural) or left-leading (binaural).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairId {
    LeftMonaural,
    RightMonaural,
    Binaural,
}

impl PairId {
    pub const ALL: [PairId; 3] = [
        PairId::LeftMonaural,
        PairId::RightMonaural,
        PairId::Binaural,
    ];
}

/// Which input channel carries which microphone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelMap {
    pub left_front: usize,
    pub left_rear: usize,
    pub right_front: usize,
    pub right_rear: usize,
}

impl Default for ChannelMap {
    fn default() -> Self {
        ChannelMap {
            left_front: 0,
            left_rear: 1,
            right_front: 2,
            right_rear: 3,
        }
    }
}

impl ChannelMap {
    /// (a, b) channel indices entering the cross-spectrum of `pair`.
    pub fn pair_channels(&self, pair: PairId) -> (usize, usize) {
        match pair {
            PairId::LeftMonaural => (self.left_front, self.left_rear),
            PairId::RightMonaural => (self.right_front, self.right_rear),
            PairId::Binaural => (self.left_front, self.right_front),
        }
    }

    pub fn max_channel(&self) -> usize {
        self.left_front
            .max(self.left_rear)
            .max(self.right_front)
            .max(self.right_rear)
    }
}

/// Microphone spacings and medium parameters of the array.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayGeometry {
    /// Front-rear spacing on the left device, meters.
    pub d_left: f64,
    /// Front-rear spacing on the right device, meters.
    pub d_right: f64,
    /// Across-head spacing between the devices, meters.
    pub d_binaural: f64,
    /// Speed of sound, m/s.
    pub c: f64,
    pub channel_map: ChannelMap,
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        // Typical behind-the-ear dimensions.
        ArrayGeometry {
            d_left: 0.012,
            d_right: 0.012,
            d_binaural: 0.16,
            c: 343.0,
            channel_map: ChannelMap::default(),
        }
    }
}

impl ArrayGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, d) in [
            ("d_left", self.d_left),
            ("d_right", self.d_right),
            ("d_binaural", self.d_binaural),
        ] {
            if !(d > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {d}")));
            }
        }
        if self.d_binaural <= self.d_left || self.d_binaural <= self.d_right {
            return Err(Error::InvalidConfig(
                "d_binaural must exceed both monaural spacings".into(),
            ));
        }
        if !(300.0..=360.0).contains(&self.c) {
            return Err(Error::InvalidConfig(format!(
                "speed of sound must be in [300, 360] m/s, got {}",
                self.c
            )));
        }
        Ok(())
    }

    pub fn spacing(&self, pair: PairId) -> f64 {
        match pair {
            PairId::LeftMonaural => self.d_left,
            PairId::RightMonaural => self.d_right,
            PairId::Binaural => self.d_binaural,
        }
    }

    /// Ambiguity frequency f_u = c / (2 d) of a pair.
    pub fn ambiguity_freq(&self, pair: PairId) -> f64 {
        self.c / (2.0 * self.spacing(pair))
    }

    /// Ambiguity bin k_u = floor(2 K f_u / f_s); may exceed the Nyquist
    /// bin for closely spaced pairs.
    pub fn ambiguity_bin(&self, pair: PairId, nyquist_bin: usize, sample_rate: f64) -> usize {
        (2.0 * nyquist_bin as f64 * self.ambiguity_freq(pair) / sample_rate).floor() as usize
    }
}

/// Smoothing and numerical floors for the phase statistics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CimpConfig {
    /// Time constant of the recursive short-time expectation, seconds.
    pub time_constant_s: f64,
    /// Resultant lengths at or below this floor are treated as fully
    /// dispersed (infinite dispersion / variance).
    pub r_floor: f64,
    /// Magnitude product floor below which a bin is considered dead.
    pub eps_mag: f64,
}

impl Default for CimpConfig {
    fn default() -> Self {
        CimpConfig {
            time_constant_s: 0.040,
            r_floor: 1e-4,
            eps_mag: 1e-12,
        }
    }
}

impl CimpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_constant_s > 0.0) {
            return Err(Error::InvalidConfig("time_constant_s must be > 0".into()));
        }
        if !(self.r_floor > 0.0 && self.r_floor < 1.0) {
            return Err(Error::InvalidConfig("r_floor must be in (0, 1)".into()));
        }
        if !(self.eps_mag > 0.0) {
            return Err(Error::InvalidConfig("eps_mag must be > 0".into()));
        }
        Ok(())
    }

    /// Smoothing factor for a given hop, clamped into (0, 1].
    pub fn lambda(&self, hop: usize, sample_rate: f64) -> f64 {
        (hop as f64 / (self.time_constant_s * sample_rate)).min(1.0)
    }
}

/// Per-pair, per-frame phase statistics consumed by the delay fit.
#[derive(Debug, Clone)]
pub struct ImpdStats {
    pub pair: PairId,
    pub frame: usize,
    /// Ambiguity bin of this pair (exclusive upper limit of usable bins).
    pub k_u: usize,
    /// Mean phase difference per bin, radians in [-pi, pi).
    pub theta: Vec<f64>,
    /// Mapped mean resultant length per bin, in [0, 1].
    pub mapped_r: Vec<f64>,
    /// Circular dispersion per bin; `DISPERSION_INFINITE` for unusable bins.
    pub dispersion: Vec<f64>,
}

/// Unit phasor of the instantaneous normalized cross-spectrum, or
/// `None` when either input is below the magnitude floor.
pub fn instantaneous_impd(xa: Complex64, xb: Complex64, eps_mag: f64) -> Option<Complex64> {
    let mag = (xa.norm_sqr() * xb.norm_sqr()).sqrt();
    if mag <= eps_mag {
        return None;
    }
    Some(xa * xb.conj() / mag)
}

/// One step of the recursive circular mean; returns (mean angle,
/// mean resultant length) of the updated accumulator.
pub fn update_circular_mean(acc: &mut Complex64, z: Complex64, lambda: f64) -> (f64, f64) {
    *acc = (1.0 - lambda) * *acc + lambda * z;
    (acc.arg(), acc.norm())
}

/// Circular dispersion of a wrapped normal with mean resultant length `r`.
pub fn dispersion(r: f64, r_floor: f64) -> f64 {
    if r <= r_floor {
        DISPERSION_INFINITE
    } else {
        let r2 = r * r;
        (1.0 - r2 * r2) / (2.0 * r2)
    }
}

/// Wrapped-normal variance for mean resultant length `r`.
pub fn wrapped_normal_variance(r: f64, r_floor: f64) -> f64 {
    if r <= r_floor {
        f64::INFINITY
    } else {
        -2.0 * r.ln()
    }
}

/// Mean resultant length of a wrapped normal with variance `sigma2`.
pub fn resultant_from_variance(sigma2: f64) -> f64 {
    (-0.5 * sigma2).exp()
}

/// Exact inverse of [`dispersion`]: the resultant length that produces
/// dispersion `delta`.
pub fn resultant_from_dispersion(delta: f64) -> f64 {
    if delta.is_infinite() {
        0.0
    } else {
        1.0 / (delta + (1.0 + delta * delta).sqrt()).sqrt()
    }
}

/// Recursive circular statistics of one microphone pair.
///
/// Bins are independent; frames must be fed strictly in order.
pub struct PairState {
    pair: PairId,
    channels: (usize, usize),
    k_u: usize,
    /// Exclusive upper bin of the update range: min(k_u, K).
    upper: usize,
    lambda: f64,
    r_floor: f64,
    eps_mag: f64,
    raw: Vec<Complex64>,
    mapped: Vec<Complex64>,
    frame: usize,
}

impl PairState {
    pub fn new(
        pair: PairId,
        geometry: &ArrayGeometry,
        cfg: &CimpConfig,
        nyquist_bin: usize,
        hop: usize,
        sample_rate: f64,
    ) -> Self {
        let k_u = geometry.ambiguity_bin(pair, nyquist_bin, sample_rate);
        PairState {
            pair,
            channels: geometry.channel_map.pair_channels(pair),
            k_u,
            upper: k_u.min(nyquist_bin),
            lambda: cfg.lambda(hop, sample_rate),
            r_floor: cfg.r_floor,
            eps_mag: cfg.eps_mag,
            raw: vec![Complex64::default(); nyquist_bin + 1],
            mapped: vec![Complex64::default(); nyquist_bin + 1],
            frame: 0,
        }
    }

    pub fn pair(&self) -> PairId {
        self.pair
    }

    pub fn k_u(&self) -> usize {
        self.k_u
    }

    /// Consumes one frame's spectra and returns the updated statistics.
    pub fn update(&mut self, spectrum: &FrameSpectrum) -> ImpdStats {
        let (a, b) = self.channels;
        let xa = &spectrum.channels[a];
        let xb = &spectrum.channels[b];
        let n = self.raw.len();
        let mut theta = vec![0.0; n];
        let mut mapped_r = vec![0.0; n];
        let mut disp = vec![DISPERSION_INFINITE; n];
        for k in 1..self.upper {
            match instantaneous_impd(xa[k], xb[k], self.eps_mag) {
                Some(z) => {
                    let exponent = self.k_u as f64 / k as f64;
                    let zm = Complex64::from_polar(1.0, z.arg() * exponent);
                    update_circular_mean(&mut self.raw[k], z, self.lambda);
                    update_circular_mean(&mut self.mapped[k], zm, self.lambda);
                }
                None => {
                    // Dead bin: both accumulators decay toward zero.
                    self.raw[k] *= 1.0 - self.lambda;
                    self.mapped[k] *= 1.0 - self.lambda;
                }
            }
            theta[k] = self.raw[k].arg();
            let r = self.mapped[k].norm().min(1.0);
            mapped_r[k] = r;
            disp[k] = dispersion(r, self.r_floor);
        }
        let stats = ImpdStats {
            pair: self.pair,
            frame: self.frame,
            k_u: self.k_u,
            theta,
            mapped_r,
            dispersion: disp,
        };
        self.frame += 1;
        stats
    }
}

/// Batch (equal-weight) circular statistics of the mapped phase per bin.
///
/// Unlike [`PairState`] this accumulates a plain arithmetic mean over all
/// frames pushed so far, which is the right estimator for long-horizon
/// sound-field analysis (diffuse vs. localized discrimination).
pub struct MappedBatch {
    k_u: usize,
    upper: usize,
    eps_mag: f64,
    sums: Vec<Complex64>,
    counts: Vec<usize>,
}

impl MappedBatch {
    pub fn new(k_u: usize, nyquist_bin: usize, eps_mag: f64) -> Self {
        MappedBatch {
            k_u,
            upper: k_u.min(nyquist_bin),
            eps_mag,
            sums: vec![Complex64::default(); nyquist_bin + 1],
            counts: vec![0; nyquist_bin + 1],
        }
    }

    pub fn push(&mut self, xa: &[Complex64], xb: &[Complex64]) {
        for k in 1..self.upper {
            if let Some(z) = instantaneous_impd(xa[k], xb[k], self.eps_mag) {
                let exponent = self.k_u as f64 / k as f64;
                self.sums[k] += Complex64::from_polar(1.0, z.arg() * exponent);
                self.counts[k] += 1;
            }
        }
    }

    /// Mapped mean resultant length per usable bin (k = 1 .. upper).
    pub fn resultants(&self) -> Vec<(usize, f64)> {
        (1..self.upper)
            .filter(|&k| self.counts[k] > 0)
            .map(|k| (k, (self.sums[k] / self.counts[k] as f64).norm()))
            .collect()
    }
}
