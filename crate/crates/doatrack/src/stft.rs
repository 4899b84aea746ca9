//! Streaming short-time Fourier transform of multichannel audio.
//!
//! All channels share one frame grid: frame `l` covers samples
//! `[l*hop, l*hop + frame_len)`. Only bins `0..=K` (K = Nyquist) are kept;
//! bins 0 and K are produced for completeness but the downstream fit
//! never uses them.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::Result;
use crate::error::Error;

/// Multichannel time-domain audio, full scale +-1.0.
#[derive(Debug, Clone)]
pub struct AudioBlock {
    pub sample_rate: f64,
    /// One sample vector per channel, all of equal length.
    pub channels: Vec<Vec<f64>>,
}

impl AudioBlock {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate <= 0.0 {
            return Err(Error::InvalidAudio(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if self.channels.is_empty() {
            return Err(Error::InvalidAudio("no channels".into()));
        }
        let n = self.channels[0].len();
        for (i, ch) in self.channels.iter().enumerate() {
            if ch.len() != n {
                return Err(Error::InvalidAudio(format!(
                    "channel {i} has {} samples, expected {n}",
                    ch.len()
                )));
            }
            if ch.iter().any(|s| !s.is_finite()) {
                return Err(Error::InvalidAudio(format!(
                    "channel {i} contains NaN or infinite samples"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Hann,
    /// Debug mode; exposes raw DFT behaviour (e.g. bin-exact tones).
    Rectangular,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StftConfig {
    /// Frame length in samples; must be a power of two >= 16.
    pub frame_len: usize,
    /// Hop between frame starts in samples; 1..=frame_len.
    pub hop: usize,
    pub window: Window,
}

impl Default for StftConfig {
    fn default() -> Self {
        // 8 ms frames at 16 kHz with 50% overlap.
        StftConfig {
            frame_len: 128,
            hop: 64,
            window: Window::Hann,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.frame_len.is_power_of_two() || self.frame_len < 16 {
            return Err(Error::InvalidConfig(format!(
                "frame_len must be a power of two >= 16, got {}",
                self.frame_len
            )));
        }
        if self.hop == 0 || self.hop > self.frame_len {
            return Err(Error::InvalidConfig(format!(
                "hop must be in 1..=frame_len, got {}",
                self.hop
            )));
        }
        Ok(())
    }

    /// Nyquist bin index K = frame_len / 2.
    pub fn nyquist_bin(&self) -> usize {
        self.frame_len / 2
    }
}

/// Complex spectra of one frame, bins `0..=K` per channel.
#[derive(Debug, Clone)]
pub struct FrameSpectrum {
    pub frame_index: usize,
    /// Frequency step between adjacent bins, f_s / frame_len.
    pub bin_hz_step: f64,
    pub channels: Vec<Vec<Complex64>>,
}

/// Reusable STFT processor. Stateless apart from the FFT plan; safe to
/// run on independent blocks concurrently behind a clone each.
pub struct Stft {
    config: StftConfig,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl Stft {
    pub fn new(config: StftConfig) -> Result<Self> {
        config.validate()?;
        let n = config.frame_len;
        let window = match config.window {
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / n as f64).cos()))
                .collect(),
            Window::Rectangular => vec![1.0; n],
        };
        let fft = FftPlanner::new().plan_fft_forward(n);
        Ok(Stft {
            config,
            window,
            fft,
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    /// Number of frames produced for a block of `n` samples.
    pub fn num_frames(&self, n: usize) -> usize {
        if n < self.config.frame_len {
            0
        } else {
            (n - self.config.frame_len) / self.config.hop + 1
        }
    }

    /// Transforms all channels of `block` onto a common frame grid.
    pub fn process(&self, block: &AudioBlock) -> Result<Vec<FrameSpectrum>> {
        block.validate()?;
        let n = self.config.frame_len;
        let k = self.config.nyquist_bin();
        let bin_hz_step = block.sample_rate / n as f64;
        let mut frames = Vec::with_capacity(self.num_frames(block.len()));
        let mut buf = vec![Complex64::default(); n];
        for l in 0..self.num_frames(block.len()) {
            let start = l * self.config.hop;
            let mut channels = Vec::with_capacity(block.channels.len());
            for ch in &block.channels {
                for (i, slot) in buf.iter_mut().enumerate() {
                    *slot = Complex64::new(ch[start + i] * self.window[i], 0.0);
                }
                self.fft.process(&mut buf);
                channels.push(buf[..=k].to_vec());
            }
            frames.push(FrameSpectrum {
                frame_index: l,
                bin_hz_step,
                channels,
            });
        }
        Ok(frames)
    }
}
