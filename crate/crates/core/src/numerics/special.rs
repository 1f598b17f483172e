//! Gamma-function helpers, the modified Bessel ladder and the Gauss
//! hypergeometric series needed by the kernel coefficient formulas.

use crate::error::{Error, Result};

pub use statrs::function::gamma::ln_gamma;

/// Natural log of |Γ(x)| together with the sign of Γ(x).
///
/// Sign is 0 at the poles (non-positive integers). Negative arguments use the
/// reflection formula Γ(x)Γ(1−x) = π / sin(πx).
pub fn ln_gamma_signed(x: f64) -> (f64, i32) {
    if x > 0.0 {
        return (ln_gamma(x), 1);
    }
    if x == x.floor() {
        return (f64::INFINITY, 0);
    }
    let s = (std::f64::consts::PI * x).sin();
    let ln_abs = std::f64::consts::PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    (ln_abs, if s > 0.0 { 1 } else { -1 })
}

/// Γ(a) / Γ(b) in log space with sign tracking, for arguments where either
/// gamma may be negative. Errors if a pole is hit.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    let (la, sa) = ln_gamma_signed(a);
    let (lb, sb) = ln_gamma_signed(b);
    if sa == 0 {
        return Err(Error::PoleAtInteger { arg: a });
    }
    if sb == 0 {
        return Ok(0.0); // 1/Γ at a pole vanishes
    }
    Ok((sa * sb) as f64 * (la - lb).exp())
}

/// Binomial coefficient as f64 (exact while the product stays below 2^53).
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Modified Bessel function I_ν(x) by direct power series,
/// ln I_ν(x) = ν ln(x/2) − ln Γ(ν+1) + ln Σ_k (x²/4)^k / (k! (ν+1)_k).
///
/// All series terms are positive, so this is accurate for any ν ≥ 0 and
/// moderate x; it anchors the Miller ladder and serves as an oracle in tests.
pub fn ln_bessel_i(nu: f64, x: f64) -> f64 {
    debug_assert!(nu >= 0.0 && x > 0.0);
    let q = x * x / 4.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..200 {
        term *= q / (k as f64 * (nu + k as f64));
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }
    nu * (x / 2.0).ln() - ln_gamma(nu + 1.0) + sum.ln()
}

/// I_ν(x) for the ladder of orders ν = nu0, nu0+1, …, nu0+count−1 at fixed
/// x > 0, by downward (Miller-type) recurrence I_{ν−1} = I_{ν+1} + (2ν/x) I_ν
/// started above the top order and normalized against I_{nu0} computed
/// directly. Entries that underflow f64 come back as 0.
pub fn bessel_i_ladder(nu0: f64, count: usize, x: f64) -> Vec<f64> {
    assert!(x > 0.0 && nu0 >= 0.0 && count > 0);
    let buffer = 30 + x.ceil() as usize;
    let top = count - 1 + buffer;
    // Record (mantissa, rescale generation); value_k = mantissa · R^gen with
    // the generation counter shared with the running pair.
    const RESCALE: f64 = 1e250;
    const LN_RESCALE: f64 = 575.6462732485114; // ln(1e250)
    let mut recorded = vec![(0.0f64, 0i64); count];
    let mut i_up = 0.0f64; // I at order ν+1 (unnormalized)
    let mut i_cur = 1e-280f64; // I at order ν
    let mut gen = 0i64;
    let mut k = top as i64;
    while k >= 0 {
        if (k as usize) < count {
            recorded[k as usize] = (i_cur, gen);
        }
        if k == 0 {
            break;
        }
        let nu = nu0 + k as f64;
        let i_down = i_up + (2.0 * nu / x) * i_cur;
        i_up = i_cur;
        i_cur = i_down;
        if i_cur > RESCALE {
            i_cur /= RESCALE;
            i_up /= RESCALE;
            gen += 1;
        }
        k -= 1;
    }
    let ln_anchor = ln_bessel_i(nu0, x);
    let (v0, g0) = recorded[0];
    let ln_norm = ln_anchor - (v0.ln() + g0 as f64 * LN_RESCALE);
    recorded
        .iter()
        .map(|&(v, g)| {
            if v <= 0.0 {
                0.0
            } else {
                (v.ln() + g as f64 * LN_RESCALE + ln_norm).exp()
            }
        })
        .collect()
}

/// Gauss hypergeometric series ₂F₁(a, b; c; z) for 0 ≤ z < 1 with a, b, c > 0.
/// The ratio test certifies the tail; parameters from the multiquadric
/// coefficient formula always satisfy z < 1.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    assert!(c > 0.0, "hyp2f1 requires c > 0");
    if z == 0.0 {
        return Ok(1.0);
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..100_000u64 {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if ratio.abs() < 1.0 && term.abs() / (1.0 - ratio.abs()) < sum.abs() * 1e-17 {
            return Ok(sum);
        }
    }
    Err(Error::SeriesNonConvergence {
        context: format!("2F1({a}, {b}; {c}; {z}) partial sums fail the ratio-test tolerance"),
    })
}
