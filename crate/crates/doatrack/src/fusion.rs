//! Monaural/binaural azimuth fusion on the full circle.
//!
//! Each pair's delay maps to a local azimuth with an ambiguous support:
//! monaural pairs resolve front/back but not left/right, the binaural
//! pair resolves left/right but not front/back. The binaural sign picks
//! the closer-ear monaural pair, the two estimates are lifted onto the
//! full circle, tested for a common mean and combined; on rejection the
//! branch with the lower circular dispersion wins.
//!
//! Convention: azimuth 0 is the look direction, positive angles are to
//! the user's left, wrapped to `[-pi, pi)`.

use serde::{Deserialize, Serialize};

use crate::Result;
use crate::angle::wrap_angle;
use crate::cimp::{ArrayGeometry, dispersion, resultant_from_dispersion, resultant_from_variance};
use crate::error::Error;
use crate::tdoa::TdoaEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DoaSource {
    MonauralLeft,
    MonauralRight,
    Binaural,
}

/// Azimuth estimate of a single pair, on that pair's native support.
#[derive(Debug, Clone, Copy)]
pub struct LocalDoa {
    pub source: DoaSource,
    /// Monaural: [0, pi]; binaural: [-pi/2, pi/2].
    pub phi: f64,
    pub variance: f64,
    pub r: f64,
    pub dispersion: f64,
    /// Set when the delay exceeded the physical aperture and the angle
    /// was clamped to the support boundary.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FusionMode {
    CommonMean,
    MonauralOnly,
    BinauralOnly,
    Invalid,
}

impl std::fmt::Display for FusionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FusionMode::CommonMean => "common_mean",
            FusionMode::MonauralOnly => "monaural_only",
            FusionMode::BinauralOnly => "binaural_only",
            FusionMode::Invalid => "invalid",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for FusionMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "common_mean" => Ok(FusionMode::CommonMean),
            "monaural_only" => Ok(FusionMode::MonauralOnly),
            "binaural_only" => Ok(FusionMode::BinauralOnly),
            "invalid" => Ok(FusionMode::Invalid),
            other => Err(format!("unknown fusion mode {other:?}")),
        }
    }
}

/// Fused full-circle azimuth of one frame.
#[derive(Debug, Clone, Copy)]
pub struct FusedDoa {
    pub frame: usize,
    /// Radians in [-pi, pi); 0 = look direction, positive = left.
    pub azimuth: f64,
    pub r: f64,
    pub dispersion: f64,
    pub mode: FusionMode,
}

impl FusedDoa {
    pub fn invalid(frame: usize) -> Self {
        FusedDoa {
            frame,
            azimuth: 0.0,
            r: 0.0,
            dispersion: f64::INFINITY,
            mode: FusionMode::Invalid,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    /// Significance level of the common-mean test; one of 0.01, 0.05, 0.1.
    pub alpha: f64,
    /// Resultant-length floor below which a branch is uninformative.
    pub r_floor: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            alpha: 0.1,
            r_floor: 1e-4,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        chi2_threshold(self.alpha).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "alpha must be one of 0.01, 0.05, 0.1; got {}",
                self.alpha
            ))
        })?;
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        chi2_threshold(self.alpha).expect("validated alpha")
    }
}

/// Upper 100(1-alpha)% point of the chi-squared distribution with one
/// degree of freedom, for the supported significance levels.
pub fn chi2_threshold(alpha: f64) -> Option<f64> {
    // Tabulated quantiles; no runtime solver.
    if (alpha - 0.10).abs() < 1e-12 {
        Some(2.7055)
    } else if (alpha - 0.05).abs() < 1e-12 {
        Some(3.8415)
    } else if (alpha - 0.01).abs() < 1e-12 {
        Some(6.6349)
    } else {
        None
    }
}

fn reliability(variance: f64, r_floor: f64) -> (f64, f64) {
    let r = resultant_from_variance(variance);
    (r, dispersion(r, r_floor))
}

/// Monaural delay to local azimuth: phi = arccos(c tau / d), support [0, pi].
pub fn monaural_doa(
    tdoa: &TdoaEstimate,
    source: DoaSource,
    d: f64,
    c: f64,
    r_floor: f64,
) -> LocalDoa {
    let u = c * tdoa.tau / d;
    let clamped = u.abs() > 1.0;
    let phi = u.clamp(-1.0, 1.0).acos();
    let variance = (c / d).powi(2) * tdoa.var_tau;
    let (r, delta) = reliability(variance, r_floor);
    LocalDoa {
        source,
        phi,
        variance,
        r,
        dispersion: delta,
        clamped,
    }
}

/// Binaural delay to local azimuth: phi = c tau / d_B, support [-pi/2, pi/2].
pub fn binaural_doa(tdoa: &TdoaEstimate, d_b: f64, c: f64, r_floor: f64) -> LocalDoa {
    let raw = c * tdoa.tau / d_b;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let clamped = raw.abs() > half_pi;
    let phi = raw.clamp(-half_pi, half_pi);
    let variance = (c / d_b).powi(2) * tdoa.var_tau;
    let (r, delta) = reliability(variance, r_floor);
    LocalDoa {
        source: DoaSource::Binaural,
        phi,
        variance,
        r,
        dispersion: delta,
        clamped,
    }
}

/// Lifts the closer-ear monaural estimate and the binaural estimate
/// onto the full circle.
///
/// `phi_left`/`phi_right` are the monaural azimuths in [0, pi]; the
/// binaural sign selects the side (left when `phi_b >= 0`), the chosen
/// monaural angle decides front/back, and the binaural angle is
/// reflected accordingly. Returns `(varphi_m, varphi_b)` in [-pi, pi).
pub fn lift_to_full_circle(phi_left: f64, phi_right: f64, phi_b: f64) -> (f64, f64) {
    let varphi_m = if phi_b >= 0.0 { phi_left } else { -phi_right };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let varphi_b = if varphi_m.abs() <= half_pi {
        phi_b
    } else if varphi_m > half_pi {
        // Behind and to the left.
        std::f64::consts::PI - phi_b
    } else {
        // Behind and to the right.
        -std::f64::consts::PI - phi_b
    };
    (wrap_angle(varphi_m), wrap_angle(varphi_b))
}

/// Common-mean test statistic for two full-circle estimates.
///
/// Weights `w_M = sin^2(varphi_M)` and `w_B = cos^2(varphi_B)` discount
/// each branch where its small-angle variance approximation is weakest.
/// Returns `(accepted, y)` with acceptance when `y <= threshold`.
pub fn common_mean_test(
    varphi_m: f64,
    delta_m: f64,
    varphi_b: f64,
    delta_b: f64,
    threshold: f64,
) -> (bool, f64) {
    let w_m = varphi_m.sin().powi(2);
    let w_b = varphi_b.cos().powi(2);
    let a_m = w_m / delta_m;
    let a_b = w_b / delta_b;
    let c = a_m * varphi_m.cos() + a_b * varphi_b.cos();
    let s = a_m * varphi_m.sin() + a_b * varphi_b.sin();
    let y = 2.0 * ((a_m + a_b) - (c * c + s * s).sqrt());
    (y <= threshold, y)
}

/// Combined estimate under the common-mean hypothesis: circular mean of
/// the two branch phasors with dispersion-normalized weights, plus the
/// dispersion and resultant length of the combination.
pub fn fuse_common_mean(
    varphi_m: f64,
    r_m: f64,
    delta_m: f64,
    varphi_b: f64,
    r_b: f64,
    delta_b: f64,
) -> Option<(f64, f64, f64)> {
    let w_m = varphi_m.sin().powi(2);
    let w_b = varphi_b.cos().powi(2);
    let g_m = w_m / (r_m * delta_m);
    let g_b = w_b / (r_b * delta_b);
    let norm = g_m + g_b;
    if !(norm.is_finite() && norm > 0.0) {
        return None;
    }
    let w1 = g_m / norm;
    let w2 = g_b / norm;
    let phasor = w1 * r_m * num_complex::Complex64::from_polar(1.0, varphi_m)
        + w2 * r_b * num_complex::Complex64::from_polar(1.0, varphi_b);
    let denom = w1 * r_m + w2 * r_b;
    if !(denom > 0.0) {
        return None;
    }
    let delta =
        2.0 * (w1 * w1 * r_m * r_m * delta_m + w2 * w2 * r_b * r_b * delta_b) / (denom * denom);
    let r = resultant_from_dispersion(delta);
    Some((wrap_angle(phasor.arg()), r, delta))
}

/// Fallback when the common-mean hypothesis is rejected: the branch
/// with the lower dispersion wins; ties go to the binaural branch
/// (larger aperture).
pub fn fuse_reject(
    varphi_m: f64,
    r_m: f64,
    delta_m: f64,
    varphi_b: f64,
    r_b: f64,
    delta_b: f64,
) -> (f64, f64, f64, FusionMode) {
    if delta_m < delta_b {
        (varphi_m, r_m, delta_m, FusionMode::MonauralOnly)
    } else {
        (varphi_b, r_b, delta_b, FusionMode::BinauralOnly)
    }
}

/// Full per-frame fusion of the three pair delays.
pub fn fuse_frame(
    frame: usize,
    left: Option<&TdoaEstimate>,
    right: Option<&TdoaEstimate>,
    binaural: Option<&TdoaEstimate>,
    geometry: &ArrayGeometry,
    cfg: &FusionConfig,
) -> FusedDoa {
    let Some(bin_tdoa) = binaural else {
        // Without the binaural sign the side is unresolvable.
        return FusedDoa::invalid(frame);
    };
    let bin = binaural_doa(bin_tdoa, geometry.d_binaural, geometry.c, cfg.r_floor);
    let side_left = bin.phi >= 0.0;
    let mon = if side_left {
        left.map(|t| {
            monaural_doa(
                t,
                DoaSource::MonauralLeft,
                geometry.d_left,
                geometry.c,
                cfg.r_floor,
            )
        })
    } else {
        right.map(|t| {
            monaural_doa(
                t,
                DoaSource::MonauralRight,
                geometry.d_right,
                geometry.c,
                cfg.r_floor,
            )
        })
    };

    let bin_ok = bin.dispersion.is_finite();
    let Some(mon) = mon.filter(|m| m.dispersion.is_finite()) else {
        // Closer-ear monaural estimate missing or uninformative.
        if bin_ok {
            return FusedDoa {
                frame,
                azimuth: wrap_angle(bin.phi),
                r: bin.r,
                dispersion: bin.dispersion,
                mode: FusionMode::BinauralOnly,
            };
        }
        return FusedDoa::invalid(frame);
    };

    let (varphi_m, varphi_b) = if side_left {
        lift_to_full_circle(mon.phi, 0.0, bin.phi)
    } else {
        lift_to_full_circle(0.0, mon.phi, bin.phi)
    };

    if !bin_ok {
        return FusedDoa {
            frame,
            azimuth: varphi_m,
            r: mon.r,
            dispersion: mon.dispersion,
            mode: FusionMode::MonauralOnly,
        };
    }

    let (accepted, _y) = common_mean_test(
        varphi_m,
        mon.dispersion,
        varphi_b,
        bin.dispersion,
        cfg.threshold(),
    );
    if accepted
        && let Some((azimuth, r, delta)) = fuse_common_mean(
            varphi_m,
            mon.r,
            mon.dispersion,
            varphi_b,
            bin.r,
            bin.dispersion,
        )
    {
        return FusedDoa {
            frame,
            azimuth,
            r,
            dispersion: delta,
            mode: FusionMode::CommonMean,
        };
    }
    // Degenerate weights (both branches at a blind spot of the
    // weighting); fall through to the dispersion pick.
    let (azimuth, r, delta, mode) = fuse_reject(
        varphi_m,
        mon.r,
        mon.dispersion,
        varphi_b,
        bin.r,
        bin.dispersion,
    );
    FusedDoa {
        frame,
        azimuth,
        r,
        dispersion: delta,
        mode,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cimp::PairId;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn tdoa(pair: PairId, tau: f64, var: f64) -> TdoaEstimate {
        TdoaEstimate {
            pair,
            frame: 0,
            tau,
            var_tau: var,
            n_bins_used: 10,
        }
    }

    #[test]
    fn monaural_mapping_reference_points() {
        let (d, c) = (0.012, 343.0);
        let t = |tau| tdoa(PairId::LeftMonaural, tau, 1e-10);
        let at = |tau: f64| monaural_doa(&t(tau), DoaSource::MonauralLeft, d, c, 1e-4);
        assert!((at(0.0).phi - PI / 2.0).abs() < 1e-12);
        assert!(at(d / c).phi.abs() < 1e-6);
        assert!((at(-d / c).phi - PI).abs() < 1e-6);
        assert!((at(d / (2.0 * c)).phi - PI / 3.0).abs() < 1e-12);
        assert!(!at(0.0).clamped);
        assert!(at(2.0 * d / c).clamped);
    }

    #[test]
    fn binaural_mapping_reference_points() {
        let (d_b, c) = (0.16, 343.0);
        let at = |tau: f64| binaural_doa(&tdoa(PairId::Binaural, tau, 1e-10), d_b, c, 1e-4);
        assert_eq!(at(0.0).phi, 0.0);
        assert!((at(d_b / (2.0 * c)).phi - 0.5).abs() < 1e-12);
        let clamped = at(2.0 * d_b / c);
        assert!((clamped.phi - PI / 2.0).abs() < 1e-12);
        assert!(clamped.clamped);
    }

    #[test]
    fn variance_scales_by_aperture_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let var = rng.random_range(1e-12..1e-8);
            let m = monaural_doa(
                &tdoa(PairId::LeftMonaural, 0.0, var),
                DoaSource::MonauralLeft,
                0.012,
                343.0,
                1e-4,
            );
            assert_eq!(m.variance, (343.0f64 / 0.012).powi(2) * var);
            let b = binaural_doa(&tdoa(PairId::Binaural, 0.0, var), 0.16, 343.0, 1e-4);
            assert_eq!(b.variance, (343.0f64 / 0.16).powi(2) * var);
        }
    }

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    #[test]
    fn quadrant_rules_front_left() {
        let (m, b) = lift_to_full_circle(deg(60.0), 0.0, deg(30.0));
        assert!((m - deg(60.0)).abs() < 1e-12);
        assert!((b - deg(30.0)).abs() < 1e-12);
    }

    #[test]
    fn quadrant_rules_behind_left() {
        let (m, b) = lift_to_full_circle(deg(120.0), 0.0, deg(40.0));
        assert!((m - deg(120.0)).abs() < 1e-12);
        assert!((b - deg(140.0)).abs() < 1e-12);
    }

    #[test]
    fn quadrant_rules_behind_right() {
        let (m, b) = lift_to_full_circle(0.0, deg(120.0), deg(-40.0));
        assert!((m - deg(-120.0)).abs() < 1e-12);
        assert!((b - deg(-140.0)).abs() < 1e-12);
    }

    #[test]
    fn lift_outputs_always_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10_000 {
            let phi_l = rng.random_range(0.0..=PI);
            let phi_r = rng.random_range(0.0..=PI);
            let phi_b = rng.random_range(-PI / 2.0..=PI / 2.0);
            let (m, b) = lift_to_full_circle(phi_l, phi_r, phi_b);
            assert!((-PI..PI).contains(&m));
            assert!((-PI..PI).contains(&b));
        }
    }

    #[test]
    fn lift_mirror_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let phi_l = rng.random_range(0.0..=PI);
            let phi_r = rng.random_range(0.0..=PI);
            // Keep away from the sign boundary where the side flips.
            let phi_b = rng.random_range(1e-6..PI / 2.0);
            let (m1, b1) = lift_to_full_circle(phi_l, phi_r, phi_b);
            let (m2, b2) = lift_to_full_circle(phi_r, phi_l, -phi_b);
            assert!(wrap_angle(m1 + m2).abs() < 1e-9);
            assert!(wrap_angle(b1 + b2).abs() < 1e-9);
        }
    }

    #[test]
    fn test_statistic_zero_for_identical_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let phi = rng.random_range(-PI..PI);
            let dm = rng.random_range(0.01..5.0);
            let db = rng.random_range(0.01..5.0);
            let (acc, y) = common_mean_test(phi, dm, phi, db, 2.7055);
            assert!(acc);
            assert!(y.abs() < 1e-9);
            assert!(y >= -1e-12);
        }
    }

    #[test]
    fn test_statistic_reference_value() {
        // varphi_M = pi/2, varphi_B = 0, both dispersions 0.5:
        // weights 1 and 1, C = 2, S = 2, Y = 2 (4 - sqrt(8)).
        let (acc, y) = common_mean_test(PI / 2.0, 0.5, 0.0, 0.5, 2.7055);
        let want = 2.0 * (4.0 - 8.0f64.sqrt());
        assert!((y - want).abs() < 1e-12);
        assert!((y - 2.343).abs() < 1e-3);
        assert!(acc);
    }

    #[test]
    fn test_statistic_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10_000 {
            let (_, y) = common_mean_test(
                rng.random_range(-PI..PI),
                rng.random_range(0.001..10.0),
                rng.random_range(-PI..PI),
                rng.random_range(0.001..10.0),
                2.7055,
            );
            assert!(y >= -1e-9);
        }
    }

    #[test]
    fn symmetric_merge_is_identity() {
        // At pi/4 the monaural and binaural test weights coincide
        // (sin^2 = cos^2), so merging two identical estimates must
        // return them unchanged.
        let (phi, r, d) = (PI / 4.0, 0.9, 0.3);
        let (az, r_out, d_out) = fuse_common_mean(phi, r, d, phi, r, d).unwrap();
        assert!((az - phi).abs() < 1e-12);
        assert!((d_out - d).abs() < 1e-12);
        assert!((r_out - resultant_from_dispersion(d)).abs() < 1e-12);
    }

    #[test]
    fn zero_dispersion_gives_unit_resultant() {
        assert_eq!(resultant_from_dispersion(0.0), 1.0);
    }

    #[test]
    fn equal_weight_merge_is_arc_midpoint() {
        // Equal weighting requires equal test weights too, so place the
        // angles symmetrically about a common offset in weight space.
        let (vm, vb) = (deg(10.0), deg(20.0));
        // Force equal effective weights by matching w/(R delta).
        let r = 0.9;
        let dm = vm.sin().powi(2);
        let db = vb.cos().powi(2);
        // Choose dispersions so w_M/(R dm') == w_B/(R db').
        let (az, _, _) = fuse_common_mean(vm, r, dm, vb, r, db).unwrap();
        assert!((az - deg(15.0)).abs() < 1e-9);
    }

    #[test]
    fn fused_angle_on_shorter_arc() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..1000 {
            let vm = rng.random_range(-PI..PI);
            let sep = rng.random_range(-3.0..3.0);
            let vb = wrap_angle(vm + sep);
            let (az, _, _) = fuse_common_mean(
                vm,
                rng.random_range(0.1..1.0),
                rng.random_range(0.01..2.0),
                vb,
                rng.random_range(0.1..1.0),
                rng.random_range(0.01..2.0),
            )
            .unwrap_or((vm, 1.0, 0.0));
            // az must lie between vm and vb along the shorter arc.
            let to_az = wrap_angle(az - vm);
            let to_vb = wrap_angle(vb - vm);
            if to_vb.abs() > 1e-9 {
                assert!(to_az.signum() == to_vb.signum() || to_az.abs() < 1e-9);
                assert!(to_az.abs() <= to_vb.abs() + 1e-9);
            }
        }
    }

    #[test]
    fn rejection_picks_lower_dispersion_with_binaural_ties() {
        let (.., mode) = fuse_reject(1.0, 0.9, 0.2, -1.0, 0.8, 0.9);
        assert_eq!(mode, FusionMode::MonauralOnly);
        let (.., mode) = fuse_reject(1.0, 0.9, 0.5, -1.0, 0.8, 0.5);
        assert_eq!(mode, FusionMode::BinauralOnly);
        let (.., mode) = fuse_reject(1.0, 0.0, f64::INFINITY, -1.0, 0.8, 0.5);
        assert_eq!(mode, FusionMode::BinauralOnly);
    }

    #[test]
    fn fuse_frame_handles_missing_inputs() {
        let geom = ArrayGeometry::default();
        let cfg = FusionConfig::default();
        assert_eq!(
            fuse_frame(0, None, None, None, &geom, &cfg).mode,
            FusionMode::Invalid
        );
        // Binaural only (closer-ear monaural missing).
        let b = tdoa(PairId::Binaural, 50e-6, 1e-10);
        let fused = fuse_frame(0, None, None, Some(&b), &geom, &cfg);
        assert_eq!(fused.mode, FusionMode::BinauralOnly);
        assert!(fused.azimuth > 0.0);
    }

    #[test]
    fn chi2_table() {
        assert!((chi2_threshold(0.1).unwrap() - 2.7055).abs() < 1e-12);
        assert!((chi2_threshold(0.05).unwrap() - 3.8415).abs() < 1e-12);
        assert!((chi2_threshold(0.01).unwrap() - 6.6349).abs() < 1e-12);
        assert!(chi2_threshold(0.2).is_none());
    }
}
