//! Zonal kernel catalog: coefficient construction for the classical
//! spherical basis function families, plus spectral transforms and tail
//! functionals shared by the approximation operators.

mod gaussian;
mod generating;
mod green;
mod multiquadric;
mod rule;
mod tps;
mod wendland;
pub(crate) mod zonal;

pub use gaussian::make_gaussian;
pub use generating::make_generating;
pub use green::{make_green, GreenKernelSpec};
pub use multiquadric::make_multiquadric;
pub use tps::make_tps;
pub use wendland::make_wendland;
pub use zonal::{
    best_poly_error, lp_kernel_transform, min_coeff_profile, FamilyTag, MinCoeffProfile,
    ZonalKernel,
};

#[cfg(test)]
mod catalog_tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::harmonics::{gegenbauer, projection_kernel_all};
    use crate::numerics::{gauss_jacobi, gauss_legendre, kahan_sum};

    fn presets() -> Vec<(&'static str, ZonalKernel)> {
        vec![
            ("green(2,3)", make_green(2, 3.0, None).unwrap()),
            ("green(1,2.5)", make_green(1, 2.5, None).unwrap()),
            ("tps(2,1/2)", make_tps(2, 0.5).unwrap()),
            ("tps(2,-1/2)", make_tps(2, -0.5).unwrap()),
            ("tps(2,1)", make_tps(2, 1.0).unwrap()),
            ("wendland(2,5,1,0)", make_wendland(2, 5, 1, 0.0).unwrap()),
            ("gaussian(2,0.5)", make_gaussian(2, 0.5).unwrap()),
            ("gaussian(2,1)", make_gaussian(2, 1.0).unwrap()),
            ("gaussian(2,2)", make_gaussian(2, 2.0).unwrap()),
            ("multiquadric(2,1)", make_multiquadric(2, 1.0).unwrap()),
            ("generating(2,1/2)", make_generating(2, 0.5).unwrap()),
            ("generating(1,1/2)", make_generating(1, 0.5).unwrap()),
        ]
    }

    #[test]
    fn stored_coefficients_positive() {
        for (name, k) in presets() {
            let top = k.l_max().min(200);
            for l in 0..=top {
                assert!(k.coeff(l) > 0.0, "{name}: phi_hat({l}) = {}", k.coeff(l));
            }
        }
    }

    /// Truncated true series vs closed form, within the certified tail bound
    /// (plus an fp allowance for the series evaluation itself).
    #[test]
    fn closed_form_within_tail_bound_of_series() {
        for (name, k) in presets() {
            if !k.has_closed_form() || !k.tail_bound(0).is_finite() {
                continue;
            }
            let bound = k.tail_bound(k.l_max());
            for i in 0..32 {
                let t = -1.0 + 2.0 * i as f64 / 31.0;
                let closed = k.eval_closed(t).unwrap();
                let basis = projection_kernel_all(k.dim_n, k.l_max(), t);
                let series = kahan_sum(
                    basis
                        .iter()
                        .enumerate()
                        .map(|(l, &p)| p * k.true_coeff(l)),
                );
                let slack = bound + 1e-12 * (1.0 + closed.abs());
                assert!(
                    (closed - series).abs() <= slack,
                    "{name} at t={t}: closed={closed} series={series} bound={bound:.3e}"
                );
            }
        }
    }

    /// Recomputing coefficients from the closed form by quadrature
    /// reproduces the stored values (above the polynomial cutoff) and the
    /// recorded signed values below it, n = 2, l <= 20.
    #[test]
    fn quadrature_recomputation_round_trip() {
        // (kernel, quadrature for its closed form)
        let cases: Vec<(&str, ZonalKernel, Box<dyn Fn(usize) -> f64>)> = vec![
            (
                "tps(2,1/2)",
                make_tps(2, 0.5).unwrap(),
                Box::new(|l| {
                    let rule = gauss_jacobi(64, 0.5, 0.0).unwrap();
                    2.0 * PI * rule.integrate(|x| -gegenbauer(0.5, l, x))
                }),
            ),
            (
                "tps(2,1)",
                make_tps(2, 1.0).unwrap(),
                Box::new(|l| {
                    let rule = gauss_jacobi(3000, 1.0, 0.0).unwrap();
                    2.0 * PI * rule.integrate(|x| (1.0 - x).ln() * gegenbauer(0.5, l, x))
                }),
            ),
            (
                "gaussian(2,1)",
                make_gaussian(2, 1.0).unwrap(),
                Box::new(|l| {
                    let rule = gauss_legendre(300);
                    2.0 * PI
                        * rule.integrate(|x| {
                            (-2.0 * (1.0 - x)).exp() * gegenbauer(0.5, l, x)
                        })
                }),
            ),
            (
                "multiquadric(2,1)",
                make_multiquadric(2, 1.0).unwrap(),
                Box::new(|l| {
                    let rule = gauss_legendre(300);
                    2.0 * PI
                        * rule.integrate(|x| -(3.0 - 2.0 * x).sqrt() * gegenbauer(0.5, l, x))
                }),
            ),
            (
                "wendland(2,5,1,0)",
                make_wendland(2, 5, 1, 0.0).unwrap(),
                Box::new(|l| {
                    let k = make_wendland(2, 5, 1, 0.0).unwrap();
                    let rule = gauss_legendre(800).scaled_to(0.0, 1.0);
                    2.0 * PI
                        * rule.integrate(|x| k.eval_closed(x).unwrap() * gegenbauer(0.5, l, x))
                }),
            ),
        ];
        for (name, k, oracle) in cases {
            for l in 0..=20usize {
                let want = oracle(l);
                let got = k.true_coeff(l);
                // The f64 quadrature carries ~1e-14 absolute noise from node
                // roundoff on an O(1) integrand, so coefficients below that
                // scale can only be checked absolutely.
                assert!(
                    (got - want).abs() < 1e-7 * want.abs() + 1e-13,
                    "{name} l={l}: stored={got} quadrature={want}"
                );
            }
        }
    }

    /// Linear combinations of thin-plate powers keep the leading-order
    /// coefficient structure A1 C_{s1,n} nu^{-2 s1 - n} of the smallest
    /// order.
    #[test]
    fn tps_combination_ratio_limit() {
        let k1 = make_tps(2, 0.5).unwrap();
        let k2 = make_tps(2, 1.5).unwrap();
        let (a1, a2) = (2.0, -0.7);
        // Coefficients of (1-t)^s are eps_s * true coefficients of the
        // catalog kernel eps_s (1-t)^s; eps_{1/2} = -1, eps_{3/2} = +1.
        let seq = |l: usize| a1 * (-k1.true_coeff(l)) + a2 * k2.true_coeff(l);
        // Leading constant: coefficients of (1-t)^{1/2} behave like
        // -|C_{1/2,2}| nu^{-(2 s1 + n)} = -|C| nu^{-3}.
        let c_lead = -(2.0f64.powf(2.5) * PI / 4.0);
        let ratio_at = |l: usize| {
            let nu = l as f64 + 0.5;
            seq(l) * nu.powf(3.0) / (a1 * c_lead)
        };
        let r64 = ratio_at(64);
        let r512 = ratio_at(512);
        assert!((r512 - 1.0).abs() < 2e-2, "r512={r512}");
        assert!((r512 - 1.0).abs() < (r64 - 1.0).abs(), "r64={r64} r512={r512}");
    }

    #[test]
    fn green_transform_shifts_order() {
        let g3 = make_green(2, 3.0, None).unwrap();
        let shifted = lp_kernel_transform(&g3, 1.0).unwrap();
        let g2 = make_green(2, 2.0, None).unwrap();
        for l in 0..=g2.l_max() {
            let rel = (shifted.coeff(l) - g2.coeff(l)).abs() / g2.coeff(l);
            assert!(rel < 1e-13, "l={l}");
        }
        // The perturbation factor rides along untouched.
        let psi = ZonalKernel::custom(2, vec![0.25; 8]).unwrap();
        let gp = make_green(2, 3.0, Some(&psi)).unwrap();
        let gp_shift = lp_kernel_transform(&gp, 1.0).unwrap();
        let g2p = make_green(2, 2.0, Some(&psi)).unwrap();
        for l in 0..=12 {
            let rel = (gp_shift.coeff(l) - g2p.coeff(l)).abs() / g2p.coeff(l);
            assert!(rel < 1e-13, "perturbed l={l}");
        }
    }

    #[test]
    fn min_profile_examples() {
        // Monotone Green coefficients: the running min is the last value.
        let g = make_green(2, 3.0, None).unwrap();
        let prof = min_coeff_profile(&g, 0.0, 40).unwrap();
        for (l, v) in prof.values.iter().enumerate() {
            let expect = (l as f64 + 0.5).powf(-3.0);
            assert!((v - expect).abs() < 1e-15 * expect, "L={l}");
        }
        // Decreasing Gaussian tail: min at L = 10 is phi_hat(10).
        let ga = make_gaussian(2, 1.0).unwrap();
        let p = min_coeff_profile(&ga, 0.0, 10).unwrap();
        assert_eq!(p.values[10], ga.coeff(10));
        // delta = 0 shifted profile matches the plain one.
        let p0 = min_coeff_profile(&ga, 0.0, 10).unwrap();
        assert_eq!(p0.values, p0.shifted);
    }

    #[test]
    fn transformed_kernel_tail_stays_usable() {
        let g = make_green(2, 4.0, None).unwrap();
        let down = lp_kernel_transform(&g, 1.5).unwrap();
        // beta_eff = 2.5 > n = 2: still summable.
        assert!(down.tail_bound(16).is_finite());
        let too_far = lp_kernel_transform(&g, 2.5).unwrap();
        // beta_eff = 1.5 <= 2: divergent.
        assert!(too_far.tail_bound(16).is_infinite());
        assert!(matches!(
            too_far.eval(0.2),
            Err(crate::error::Error::DivergentSeries { .. })
        ));
    }
}
