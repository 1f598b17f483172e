use std::f64::consts::PI;

use crate::error::{Error, Result};

/// C-infinity ramp from 0 on (-inf, 0] to 1 on [1, inf); the classic
/// exp(-1/u) glue, strictly monotone in between with chi(u) + chi(1-u) = 1.
pub(crate) fn smooth_ramp(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let g = (-1.0 / u).exp();
    let h = (-1.0 / (1.0 - u)).exp();
    g / (g + h)
}

/// Meyer-style dyadic mask pair.
///
/// `a` is even, supported on 1/2 <= |t| <= 2 and satisfies the partition
/// identity |a(t)|^2 + |a(2t)|^2 = 1 on [1/2, 1]; `b` equals 1 for |t| <= 1
/// and |a(t)|^2 outside. Built from sin/cos of a smooth ramp, so the pair is
/// infinitely smooth; `smoothness_k` records the differentiability order the
/// caller asked for (every k is satisfied by this construction).
#[derive(Debug, Clone, Copy)]
pub struct MaskPair {
    pub smoothness_k: usize,
}

/// Builds the mask pair for a requested smoothness order `k >= 3`.
pub fn build_mask(k: usize) -> Result<MaskPair> {
    if k < 3 {
        return Err(Error::invalid(format!(
            "mask smoothness order {k} too small (need k >= 3)"
        )));
    }
    Ok(MaskPair { smoothness_k: k })
}

impl MaskPair {
    /// Mask value: sin((pi/2) chi(2|t|-1)) on [1/2, 1],
    /// cos((pi/2) chi(|t|-1)) on [1, 2], zero outside.
    pub fn a(&self, t: f64) -> f64 {
        let x = t.abs();
        if x <= 0.5 || x >= 2.0 {
            0.0
        } else if x <= 1.0 {
            (PI / 2.0 * smooth_ramp(2.0 * x - 1.0)).sin()
        } else {
            (PI / 2.0 * smooth_ramp(x - 1.0)).cos()
        }
    }

    pub fn a_sq(&self, t: f64) -> f64 {
        let v = self.a(t);
        v * v
    }

    /// Low-pass companion: 1 on |t| <= 1, |a(t)|^2 beyond.
    pub fn b(&self, t: f64) -> f64 {
        if t.abs() <= 1.0 {
            1.0
        } else {
            self.a_sq(t)
        }
    }

    /// Finite dyadic sum `sum_{j <= J} |a(t / 2^j)|^2` for t > 0. Only the
    /// two scales nearest log2(t) contribute; the sum telescopes to
    /// `b(t / 2^J)`.
    pub fn telescope_sum(&self, t: f64, big_j: i64) -> f64 {
        debug_assert!(t > 0.0);
        let j_start = t.log2().floor() as i64 - 1;
        let mut acc = 0.0;
        for j in j_start..=big_j {
            acc += self.a_sq(t * 2.0f64.powi(-j as i32));
        }
        acc
    }
}

/// Worst-case residuals of the two mask identities: the partition identity
/// |a(t)|^2 + |a(2t)|^2 = 1 on a 1001-point grid over [1/2, 1], and the
/// dyadic telescoping sum against b over a log-spaced t grid and J = 0..=8.
pub fn partition_check(mask: &MaskPair) -> (f64, f64) {
    let mut worst_grid = 0.0f64;
    for i in 0..=1000 {
        let t = 0.5 + 0.5 * i as f64 / 1000.0;
        let err = (mask.a_sq(t) + mask.a_sq(2.0 * t) - 1.0).abs();
        worst_grid = worst_grid.max(err);
    }
    let mut worst_tel = 0.0f64;
    for i in 0..=96 {
        let t = 10.0f64.powf(-2.0 + 4.0 * i as f64 / 96.0);
        for big_j in 0..=8i64 {
            let lhs = mask.telescope_sum(t, big_j);
            let rhs = mask.b(t * 2.0f64.powi(-big_j as i32));
            worst_tel = worst_tel.max((lhs - rhs).abs());
        }
    }
    (worst_grid, worst_tel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn support_endpoints_and_center() {
        let m = build_mask(4).unwrap();
        assert_eq!(m.a(0.5), 0.0);
        assert_eq!(m.a(2.0), 0.0);
        assert_eq!(m.a(0.1), 0.0);
        assert_eq!(m.a(3.0), 0.0);
        // partition identity at t = 1 with a(2) = 0 forces |a(1)| = 1
        assert_eq!(m.a(1.0), 1.0);
    }

    #[test]
    fn mask_is_even() {
        let m = build_mask(3).unwrap();
        for i in 0..50 {
            let t = 0.3 + 2.0 * i as f64 / 49.0;
            assert_eq!(m.a(-t), m.a(t));
            assert_eq!(m.b(-t), m.b(t));
        }
    }

    #[test]
    fn partition_identity_on_grid() {
        let m = build_mask(5).unwrap();
        let (grid_err, tel_err) = partition_check(&m);
        assert!(grid_err < 1e-12, "partition residual {grid_err:.3e}");
        assert!(tel_err < 1e-10, "telescoping residual {tel_err:.3e}");
    }

    #[test]
    fn b_is_one_inside_and_a_squared_outside() {
        let m = build_mask(3).unwrap();
        assert_eq!(m.b(0.0), 1.0);
        assert_eq!(m.b(1.0), 1.0);
        assert_eq!(m.b(-0.7), 1.0);
        for &t in &[1.2f64, 1.5, 1.9, 2.5] {
            assert_eq!(m.b(t), m.a_sq(t));
        }
        assert_eq!(m.b(4.0), 0.0);
    }

    #[test]
    fn ramp_is_monotone_and_complementary() {
        let mut prev = -1.0;
        for i in 0..=40 {
            let u = i as f64 / 40.0;
            let v = smooth_ramp(u);
            assert!(v >= prev);
            prev = v;
            assert!((smooth_ramp(u) + smooth_ramp(1.0 - u) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_low_smoothness_order() {
        assert!(matches!(
            build_mask(2),
            Err(crate::error::Error::InvalidParameter { .. })
        ));
        assert!(build_mask(3).is_ok());
    }

    proptest! {
        #[test]
        fn partition_identity_holds_everywhere(t in 0.5f64..1.0) {
            let m = build_mask(3).unwrap();
            prop_assert!((m.a_sq(t) + m.a_sq(2.0 * t) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn telescoping_matches_b(t in 0.011f64..90.0, big_j in 0i64..9) {
            let m = build_mask(3).unwrap();
            let lhs = m.telescope_sum(t, big_j);
            let rhs = m.b(t * 2.0f64.powi(-big_j as i32));
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}
