use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::harmonics::{gegenbauer, lambda_n};
use crate::kernels::rule::rule_constant;
use crate::kernels::zonal::{FamilyTag, TailInfo, ZonalKernel};
use crate::numerics::{gauss_jacobi, ln_gamma, ln_gamma_signed};

const L_MAX_ALGEBRAIC: usize = 1024;

/// Thin-plate spline kernel of order `s > -n/2` on the n-sphere.
///
/// Closed form: `eps_s (1-t)^s` with `eps_s = (-1)^{floor(s)+1}` for
/// non-integer s, and `(-1)^{s+1} (1-t)^s log(1-t)` for integer s >= 0.
/// The sign makes the expansion coefficients
///
///   phi_hat(l) = C_{s,n} Gamma(l - s) / Gamma(l + s + n),
///   C_{s,n} = 2^{s+n} pi^{n/2} Gamma(s+1) Gamma(s + n/2) * (sin(pi s)/pi or 1),
///
/// positive for every degree above the polynomial cutoff
/// `L0 = max(0, ceil(s))` (integer s: `s + 1`). The kernel is conditionally
/// positive definite: below L0 the stored coefficients are the positive
/// continuation `phi_hat(L0) (nu_l / nu_L0)^{-(2s+n)}` and the true signed
/// values are kept in `low_coeffs`.
pub fn make_tps(dim_n: usize, s: f64) -> Result<ZonalKernel> {
    if dim_n == 0 {
        return Err(Error::invalid("thin-plate kernel needs dimension n >= 1"));
    }
    if !s.is_finite() || s <= -(dim_n as f64) / 2.0 {
        return Err(Error::invalid(format!(
            "thin-plate order must satisfy s > -n/2, got s = {s} for n = {dim_n}"
        )));
    }
    let integer = (s - s.round()).abs() < 1e-12;
    if integer && s.round() < 0.0 {
        return Err(Error::invalid(format!(
            "thin-plate order must be a nonnegative integer or non-integer real, got {s}"
        )));
    }

    let lam = lambda_n(dim_n);
    let nf = dim_n as f64;
    let ln_common =
        (s + nf) * std::f64::consts::LN_2 + 0.5 * nf * PI.ln() + ln_gamma(s + 1.0)
            + ln_gamma(s + 0.5 * nf);

    let (cutoff, true_coeff): (usize, Box<dyn Fn(usize) -> f64>) = if integer {
        let si = s.round() as usize;
        let tc = move |l: usize| {
            let lf = l as f64;
            (ln_common + ln_gamma(lf - s) - ln_gamma(lf + s + nf)).exp()
        };
        (si + 1, Box::new(tc))
    } else {
        let cutoff = s.ceil().max(0.0) as usize;
        let ln_sin = (PI * s).sin().abs().ln() - PI.ln();
        let tc = move |l: usize| {
            let lf = l as f64;
            let (lg, sg) = ln_gamma_signed(lf - s);
            sg as f64 * (ln_common + ln_sin + lg - ln_gamma(lf + s + nf)).exp()
        };
        (cutoff, Box::new(tc))
    };

    let mut coeffs: Vec<f64> = Vec::with_capacity(L_MAX_ALGEBRAIC + 1);
    for l in cutoff..=L_MAX_ALGEBRAIC {
        let c = true_coeff(l);
        if !(c > 0.0) {
            return Err(Error::invalid(format!(
                "thin-plate coefficient phi_hat({l}) = {c:.3e} not positive; sign bookkeeping broken for s = {s}"
            )));
        }
        coeffs.push(c);
    }

    // Positive continuation below the cutoff, matching the kernel's own
    // decay exponent. On the circle the nu = 0 constant mode borrows the
    // midpoint shift nu = 1/2 so the continuation stays finite.
    let decay = 2.0 * s + nf;
    let nu = |l: usize| -> f64 {
        let v = l as f64 + lam;
        if v == 0.0 { 0.5 } else { v }
    };
    let anchor = coeffs[0];
    let mut low = Vec::with_capacity(cutoff);
    let mut head = Vec::with_capacity(cutoff);
    for l in 0..cutoff {
        head.push(anchor * (nu(l) / nu(cutoff)).powf(-decay));
        low.push(if integer {
            integer_low_coeff(dim_n, s.round() as usize, l)?
        } else {
            true_coeff(l)
        });
    }
    head.extend(coeffs);
    let coeffs = head;

    let envelope = coeffs
        .iter()
        .enumerate()
        .map(|(l, c)| c * nu(l).powf(decay))
        .fold(0.0f64, f64::max);

    let closed: Arc<dyn Fn(f64) -> f64 + Send + Sync> = if integer {
        let si = s.round() as i32;
        let sign = if si % 2 == 0 { -1.0 } else { 1.0 };
        Arc::new(move |t: f64| {
            let u = (1.0 - t).max(0.0);
            if u == 0.0 {
                // limit of u^s ln u as u -> 0: 0 for s >= 1, -inf for s = 0
                return if si == 0 { f64::NEG_INFINITY } else { 0.0 };
            }
            sign * u.powi(si) * u.ln()
        })
    } else {
        let eps = -((PI * s).sin().signum());
        Arc::new(move |t: f64| eps * (1.0 - t).max(0.0).powf(s))
    };

    ZonalKernel::build(
        dim_n,
        FamilyTag::Tps,
        coeffs,
        cutoff,
        low,
        Some(closed),
        TailInfo::Algebraic { exponent: decay, envelope },
    )
}

/// True signed coefficient of the integer-order kernel
/// `(-1)^{s+1} (1-t)^s log(1-t)` for a degree below the cutoff.
///
/// Uses d/ds (1-t)^s = (1-t)^s log(1-t): the map
/// `G(q) = R_n(l) int (1-t)^q C_l (1-t^2)^{lambda-1/2} dt` is analytic in q
/// and evaluates exactly by a Gauss-Jacobi rule whose weight absorbs
/// `(1-t)^q`, so a central difference in q gives the log integral to O(h^2).
fn integer_low_coeff(dim_n: usize, s: usize, l: usize) -> Result<f64> {
    let lam = lambda_n(dim_n);
    let sf = s as f64;
    let h = 1e-5;
    let g = |q: f64| -> Result<f64> {
        let rule = gauss_jacobi(l / 2 + 12, lam - 0.5 + q, lam - 0.5)?;
        Ok(rule_constant(dim_n, l) * rule.integrate(|x| gegenbauer(lam, l, x)))
    };
    let deriv = (g(sf + h)? - g(sf - h)?) / (2.0 * h);
    let sign = if s % 2 == 0 { -1.0 } else { 1.0 };
    Ok(sign * deriv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_matches_half_order() {
        // Independent check: phi_hat(l) = 2 pi * GJ[(1-x)^{1/2} weight](-C_l)
        // for the kernel -(1-t)^{1/2} on S^2.
        let k = make_tps(2, 0.5).unwrap();
        assert_eq!(k.poly_cutoff(), 1);
        for l in 1usize..=3 {
            let rule = gauss_jacobi(16, 0.5, 0.0).unwrap();
            let oracle = 2.0 * PI * rule.integrate(|x| -gegenbauer(0.5, l, x));
            let rel = (k.coeff(l) - oracle).abs() / oracle.abs();
            assert!(rel < 1e-8, "l={l} stored={} oracle={oracle} rel={rel:.2e}", k.coeff(l));
        }
        // Hand value: phi_hat(1) = 8 sqrt(2) pi / 15.
        assert!((k.coeff(1) - 8.0 * 2.0f64.sqrt() * PI / 15.0).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_constant_at_high_degree() {
        // phi_hat(l) nu^{2s+n} / C_{s,n} -> 1; within 5e-3 by l = 512.
        let k = make_tps(2, 0.5).unwrap();
        let c_mag = 2.0f64.powf(2.5) * PI / 4.0; // |C_{1/2,2}|
        let nu = 512.0f64 + 0.5;
        let ratio = k.coeff(512) * nu.powf(3.0) / c_mag;
        assert!((ratio - 1.0).abs() < 5e-3, "ratio={ratio}");
    }

    #[test]
    fn singular_order_is_positive_definite() {
        // (1-t)^{-1/2} expands with strictly positive coefficients
        // 2 sqrt(2) pi / (l + 1/2); no polynomial cutoff.
        let k = make_tps(2, -0.5).unwrap();
        assert_eq!(k.poly_cutoff(), 0);
        assert!(k.low_coeffs().is_empty());
        for l in 0..=200usize {
            let exact = 2.0 * 2.0f64.sqrt() * PI / (l as f64 + 0.5);
            assert!(
                (k.coeff(l) - exact).abs() < 1e-12 * exact,
                "l={l} got={} want={exact}",
                k.coeff(l)
            );
        }
        // Singular kernel: tail not summable against d_l.
        assert!(k.tail_bound(10).is_infinite());
        assert!(k.eval_closed(0.5).unwrap() > 0.0);
    }

    #[test]
    fn integer_order_one() {
        // s = 1, n = 2: kernel (1-t) log(1-t), cutoff 2,
        // stored phi_hat(2) = C_{1,2} Gamma(1)/Gamma(5) = 8 pi / 24 = pi / 3.
        let k = make_tps(2, 1.0).unwrap();
        assert_eq!(k.poly_cutoff(), 2);
        assert!((k.coeff(2) - PI / 3.0).abs() < 1e-12);
        for l in 2..=200 {
            assert!(k.coeff(l) > 0.0);
        }
        // Independent low-coefficient oracle: Gauss-Jacobi with the (1-x)
        // factor absorbed into the weight and the log integrated directly.
        for l in 0..2usize {
            let rule = gauss_jacobi(2000, 1.0, 0.0).unwrap();
            let oracle =
                2.0 * PI * rule.integrate(|x| (1.0 - x).ln() * gegenbauer(0.5, l, x));
            let got = k.low_coeffs()[l];
            assert!(
                (got - oracle).abs() < 1e-7 * oracle.abs().max(1.0),
                "l={l} got={got} oracle={oracle}"
            );
        }
        let f = |t: f64| (1.0 - t) * (1.0f64 - t).ln();
        assert!((k.eval_closed(0.3).unwrap() - f(0.3)).abs() < 1e-15);
        assert_eq!(k.eval_closed(1.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_signs() {
        assert!(make_tps(2, 0.5).unwrap().eval_closed(0.0).unwrap() < 0.0);
        assert!(make_tps(2, -0.5).unwrap().eval_closed(0.0).unwrap() > 0.0);
        assert!(make_tps(2, 1.5).unwrap().eval_closed(0.0).unwrap() > 0.0);
        assert!(make_tps(2, 0.0).unwrap().eval_closed(0.3).unwrap() > 0.0);
    }

    #[test]
    fn continuation_below_cutoff() {
        let k = make_tps(2, 0.5).unwrap();
        // nu-power continuation with exponent 2s+n = 3:
        // stored(0) = stored(1) (0.5/1.5)^{-3} = 27 stored(1).
        assert!((k.coeff(0) - 27.0 * k.coeff(1)).abs() < 1e-12 * k.coeff(0));
        // True l = 0 coefficient of -(1-t)^{1/2} is negative.
        assert!(k.low_coeffs()[0] < 0.0);
        assert_eq!(k.true_coeff(0), k.low_coeffs()[0]);
        assert_eq!(k.true_coeff(1), k.coeff(1));
    }

    #[test]
    fn circle_orders() {
        // s = 1/2 on S^1: coefficients of -(1-cos theta)^{1/2} are classic:
        // -(2 - 2 cos)^{1/2}/sqrt(2), and -(sin(theta/2)) has Fourier
        // cosine coefficients 2/(pi (4 l^2 - 1)) * ... checked via oracle.
        let k = make_tps(1, 0.5).unwrap();
        assert_eq!(k.poly_cutoff(), 1);
        for l in 1usize..=4 {
            let rule = gauss_jacobi(64, 0.0, -0.5).unwrap();
            let oracle = 2.0 * rule.integrate(|x| -gegenbauer(0.0, l, x));
            assert!(
                (k.coeff(l) - oracle).abs() < 1e-8 * oracle.abs(),
                "l={l} got={} oracle={oracle}",
                k.coeff(l)
            );
        }
        assert!(k.coeff(0) > 0.0);
    }

    #[test]
    fn rejects_out_of_range_orders() {
        assert!(make_tps(2, -1.0).is_err());
        assert!(make_tps(2, -1.5).is_err());
        assert!(make_tps(1, -0.5).is_err());
        assert!(make_tps(2, f64::NAN).is_err());
    }
}
