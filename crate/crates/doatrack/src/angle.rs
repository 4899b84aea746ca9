//! Small helpers for angles on the circle.

use std::f64::consts::{PI, TAU};

/// Wraps an angle in radians to `[-pi, pi)`.
///
/// `rem_euclid` on f64 is an exact operation, so inputs that differ by a
/// representable multiple of `TAU` wrap to bit-identical results.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(TAU);
    if r >= PI {
        r -= TAU;
    }
    r
}

/// Wraps an angle in degrees to `[-180, 180)`.
pub fn wrap_degrees(a: f64) -> f64 {
    let mut r = a.rem_euclid(360.0);
    if r >= 180.0 {
        r -= 360.0;
    }
    r
}

/// Signed shortest-arc difference `a - b` in degrees, in `[-180, 180)`.
pub fn degrees_between(a: f64, b: f64) -> f64 {
    wrap_degrees(a - b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_into_range() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_eq!(wrap_angle(PI), -PI);
        assert_eq!(wrap_angle(-PI), -PI);
        assert!((wrap_angle(3.0 * PI / 2.0) - (-PI / 2.0)).abs() < 1e-15);
        assert_eq!(wrap_degrees(180.0), -180.0);
        assert_eq!(wrap_degrees(540.0), -180.0);
        assert_eq!(degrees_between(179.0, -179.0), -2.0);
    }

    #[test]
    fn multiples_of_tau_are_bit_identical() {
        // Values chosen so that a + k*TAU is exactly representable.
        for &a in &[-PI, -PI / 2.0, 0.0, 1.0 - PI] {
            for k in 1..=4 {
                let shifted = a + k as f64 * TAU;
                if shifted - k as f64 * TAU == a {
                    assert_eq!(wrap_angle(shifted).to_bits(), wrap_angle(a).to_bits());
                }
            }
        }
    }
}
