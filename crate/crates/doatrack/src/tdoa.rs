//! Per-pair time-delay estimation from mean phase differences.
//!
//! Below the ambiguity frequency the mean phase of a single broadband
//! source is a straight line through the origin, `theta(f) = 2 pi f tau`.
//! The slope is fitted by weighted least squares with per-bin weights
//! `1/dispersion`, which yields the closed-form delay and delay variance
//! used by the fusion stage.

use serde::{Deserialize, Serialize};

use crate::Result;
use crate::cimp::{ImpdStats, PairId};
use crate::error::Error;

#[derive(Debug, Clone, Copy)]
pub struct TdoaEstimate {
    pub pair: PairId,
    pub frame: usize,
    /// Delay in seconds; positive = first microphone of the pair leads.
    pub tau: f64,
    /// Closed-form variance of the delay, seconds^2.
    pub var_tau: f64,
    pub n_bins_used: usize,
}

/// Policy for the upper fit bin K'.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// K' as a fraction of the pair's ambiguity bin.
    pub ku_fraction: f64,
    /// Absolute frequency cap on the fit, Hz.
    pub max_freq_hz: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            ku_fraction: 0.9,
            max_freq_hz: 8000.0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ku_fraction > 0.0 && self.ku_fraction <= 1.0) {
            return Err(Error::InvalidConfig("ku_fraction must be in (0, 1]".into()));
        }
        if !(self.max_freq_hz > 0.0) {
            return Err(Error::InvalidConfig("max_freq_hz must be > 0".into()));
        }
        Ok(())
    }

    /// Inclusive upper fit bin for a pair with ambiguity bin `k_u`.
    pub fn upper_bin(&self, k_u: usize, nyquist_bin: usize, bin_hz: f64) -> usize {
        let guard = (self.ku_fraction * k_u as f64).floor() as usize;
        let cap = (self.max_freq_hz / bin_hz).floor() as usize;
        guard.min(cap).min(nyquist_bin.saturating_sub(1))
    }
}

/// Dispersion-weighted least-squares fit of the delay through the
/// origin. Returns `None` when no bin carries finite dispersion.
pub fn fit_tdoa(stats: &ImpdStats, bin_hz: f64, cfg: &FitConfig) -> Option<TdoaEstimate> {
    let nyquist_bin = stats.theta.len() - 1;
    let upper = cfg.upper_bin(stats.k_u, nyquist_bin, bin_hz);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut used = 0;
    for k in 1..=upper {
        let delta = stats.dispersion[k];
        if !delta.is_finite() || delta <= 0.0 {
            continue;
        }
        let f_k = bin_hz * k as f64;
        num += stats.theta[k] * f_k / delta;
        den += f_k * f_k / delta;
        used += 1;
    }
    if used == 0 || den <= 0.0 {
        return None;
    }
    let two_pi = std::f64::consts::TAU;
    Some(TdoaEstimate {
        pair: stats.pair,
        frame: stats.frame,
        tau: num / den / two_pi,
        var_tau: 1.0 / (two_pi * two_pi * den),
        n_bins_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cimp::DISPERSION_INFINITE;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn stats(theta: Vec<f64>, dispersion: Vec<f64>, k_u: usize) -> ImpdStats {
        let n = theta.len();
        ImpdStats {
            pair: PairId::Binaural,
            frame: 0,
            k_u,
            mapped_r: vec![0.9; n],
            theta,
            dispersion,
        }
    }

    #[test]
    fn zero_phase_gives_zero_delay() {
        let s = stats(vec![0.0; 65], vec![0.5; 65], 64);
        let est = fit_tdoa(&s, 125.0, &FitConfig::default()).unwrap();
        assert_eq!(est.tau, 0.0);
        assert!(est.var_tau > 0.0);
    }

    #[test]
    fn exact_line_recovered_regardless_of_weights() {
        let tau0 = 100e-6;
        let bin_hz = 125.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let theta: Vec<f64> = (0..65)
            .map(|k| std::f64::consts::TAU * bin_hz * k as f64 * tau0)
            .collect();
        let disp: Vec<f64> = (0..65).map(|_| rng.random_range(0.01..5.0)).collect();
        let est = fit_tdoa(&stats(theta, disp, 64), bin_hz, &FitConfig::default()).unwrap();
        assert!((est.tau - tau0).abs() / tau0 < 1e-12);
    }

    /// Independent oracle: dense grid search of the weighted LS cost.
    pub(crate) fn brute_force_tau(
        theta: &[f64],
        dispersion: &[f64],
        bin_hz: f64,
        upper: usize,
        range: f64,
        step: f64,
    ) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        let n = (2.0 * range / step).round() as i64;
        for i in 0..=n {
            let tau = -range + i as f64 * step;
            let mut cost = 0.0;
            for k in 1..=upper {
                if !dispersion[k].is_finite() {
                    continue;
                }
                let f_k = bin_hz * k as f64;
                let resid = theta[k] - std::f64::consts::TAU * f_k * tau;
                cost += resid * resid / dispersion[k];
            }
            if cost < best.0 {
                best = (cost, tau);
            }
        }
        best.1
    }

    #[test]
    fn noisy_fit_matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let bin_hz = 125.0;
        let cfg = FitConfig::default();
        for _ in 0..20 {
            let tau0 = rng.random_range(-100e-6..100e-6);
            let k_u = 8;
            let n = 65;
            let mut theta = vec![0.0; n];
            let mut disp = vec![DISPERSION_INFINITE; n];
            for k in 1..k_u {
                let noise: f64 = rng.sample(rand_distr::StandardNormal);
                theta[k] = std::f64::consts::TAU * bin_hz * k as f64 * tau0 + 0.1 * noise;
                disp[k] = rng.random_range(0.05..2.0);
            }
            let s = stats(theta.clone(), disp.clone(), k_u);
            let est = fit_tdoa(&s, bin_hz, &cfg).unwrap();
            let upper = cfg.upper_bin(k_u, 64, bin_hz);
            let oracle = brute_force_tau(&theta, &disp, bin_hz, upper, 300e-6, 1e-9);
            assert!((est.tau - oracle).abs() <= 1e-9);
        }
    }

    #[test]
    fn weight_scaling_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bin_hz = 125.0;
        let n = 65;
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let disp: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..3.0)).collect();
        let scaled: Vec<f64> = disp.iter().map(|d| d * 7.5).collect();
        let a = fit_tdoa(
            &stats(theta.clone(), disp, 40),
            bin_hz,
            &FitConfig::default(),
        )
        .unwrap();
        let b = fit_tdoa(&stats(theta, scaled, 40), bin_hz, &FitConfig::default()).unwrap();
        assert!((a.tau - b.tau).abs() <= 1e-12 * a.tau.abs().max(1e-12));
        assert!((b.var_tau / a.var_tau - 7.5).abs() < 1e-9);
    }

    #[test]
    fn removing_a_bin_never_decreases_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bin_hz = 125.0;
        let n = 65;
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut disp: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..3.0)).collect();
        let full = fit_tdoa(
            &stats(theta.clone(), disp.clone(), 40),
            bin_hz,
            &FitConfig::default(),
        )
        .unwrap();
        disp[5] = DISPERSION_INFINITE;
        let fewer = fit_tdoa(&stats(theta, disp, 40), bin_hz, &FitConfig::default()).unwrap();
        assert!(fewer.var_tau >= full.var_tau);
        assert_eq!(fewer.n_bins_used, full.n_bins_used - 1);
    }

    #[test]
    fn negating_phases_negates_tau() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bin_hz = 125.0;
        let n = 65;
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
        let disp: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..3.0)).collect();
        let a = fit_tdoa(
            &stats(theta, disp.clone(), 40),
            bin_hz,
            &FitConfig::default(),
        )
        .unwrap();
        let b = fit_tdoa(&stats(neg, disp, 40), bin_hz, &FitConfig::default()).unwrap();
        assert!((a.tau + b.tau).abs() < 1e-15);
        assert_eq!(a.var_tau.to_bits(), b.var_tau.to_bits());
    }

    #[test]
    fn variance_matches_hand_derived_three_point_formula() {
        // Three bins at 125, 250, 375 Hz with dispersions 1, 2, 4:
        // var = 1 / (4 pi^2 * (125^2/1 + 250^2/2 + 375^2/4)).
        let mut theta = vec![0.0; 5];
        theta[1] = 0.01;
        theta[2] = 0.02;
        theta[3] = 0.03;
        let disp = vec![DISPERSION_INFINITE, 1.0, 2.0, 4.0, DISPERSION_INFINITE];
        let est = fit_tdoa(&stats(theta, disp, 4), 125.0, &FitConfig::default()).unwrap();
        let sum = 125.0f64.powi(2) / 1.0 + 250.0f64.powi(2) / 2.0 + 375.0f64.powi(2) / 4.0;
        let want = 1.0 / (4.0 * std::f64::consts::PI.powi(2) * sum);
        assert!((est.var_tau - want).abs() / want < 1e-12);
        assert_eq!(est.n_bins_used, 3);
    }

    #[test]
    fn all_bins_unusable_yields_none() {
        let s = stats(vec![0.0; 65], vec![DISPERSION_INFINITE; 65], 64);
        assert!(fit_tdoa(&s, 125.0, &FitConfig::default()).is_none());
    }
}
