use std::f64::consts::PI;

use faer::Mat;

use crate::error::{Error, Result};
use crate::geometry::{
    analyze_centers, build_cells, build_cells_default, equispaced_circle, sphere_volume,
    CenterSet, SpherePoint,
};
use crate::harmonics::{harmonic_row, lambda_n, space_dim};
use crate::numerics::{gauss_legendre, kahan_dot, kahan_sum};

/// Positive-weight quadrature rule on S^n exact on polynomials up to
/// `degree_l`.
///
/// Weights are anchored at the Voronoi cell measures and certified at
/// construction: every weight is strictly positive and the worst moment
/// residual is below 1e-9. Because the anchor is a cell measure (at most
/// 2h on the circle, at most the cap area pi h^2 on the sphere) and the
/// moment correction is a small perturbation for reasonable geometries,
/// weights stay below 4 h^n in practice; the tests assert that bound for
/// every rule they build.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub centers: CenterSet,
    pub degree_l: usize,
    /// One positive weight per center, in center order.
    pub weights: Vec<f64>,
    /// Max over the harmonic basis of |sum_xi c_xi Y(xi) - integral of Y|.
    pub exactness_residual: f64,
    /// h (L + lambda_n) for this rule.
    pub feasibility_product: f64,
    /// Boundary below which positive weights are expected from the geometry
    /// alone; rules above it are best-effort and certified a posteriori.
    pub feasibility_threshold: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weighted sum over values already evaluated at the centers.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        kahan_dot(&self.weights, values)
    }

    /// Weighted sum of `f` over the centers.
    pub fn integrate(&self, mut f: impl FnMut(&crate::geometry::SpherePoint) -> f64) -> f64 {
        kahan_sum(
            self.centers
                .points
                .iter()
                .zip(&self.weights)
                .map(|(p, w)| w * f(p)),
        )
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// True when h (L + lambda_n) is below the recorded threshold.
    pub fn within_feasibility(&self) -> bool {
        self.feasibility_product <= self.feasibility_threshold
    }
}

/// Options for [`build_rule_with`].
#[derive(Debug, Clone)]
pub struct RuleOptions {
    /// Boundary for h (L + lambda_n) below which positive weights are
    /// guaranteed by the geometry. Construction is still attempted above it
    /// (the certification is a posteriori); the value is recorded in the rule
    /// so certificates can report the margin.
    pub feasibility_threshold: f64,
    /// Grid resolution for the Voronoi cell measures; a separation-based
    /// heuristic when None.
    pub cells_grid: Option<usize>,
}

impl Default for RuleOptions {
    fn default() -> Self {
        Self {
            feasibility_threshold: 0.25,
            cells_grid: None,
        }
    }
}

/// Builds a positive-weight rule exact on polynomials up to degree `l_degree`
/// with default options.
pub fn build_rule(cs: &CenterSet, l_degree: usize) -> Result<QuadratureRule> {
    build_rule_with(cs, l_degree, &RuleOptions::default())
}

/// Builds a positive-weight rule exact on polynomials up to degree `l_degree`.
///
/// The weights minimize sum_xi (c_xi - mu_xi)^2 / mu_xi over all solutions of
/// the moment system sum_xi c_xi Y_lm(xi) = sqrt(omega_n) delta_l0 delta_m1,
/// where mu_xi are the Voronoi cell measures. The KKT solution is computed
/// through a rank-revealing SVD, so consistent but overdetermined systems
/// (such as equispaced circle nodes with L = N - 1) are accepted; the
/// residual of the returned weights is certified below 1e-9 either way.
pub fn build_rule_with(
    cs: &CenterSet,
    l_degree: usize,
    opts: &RuleOptions,
) -> Result<QuadratureRule> {
    if cs.dim_n > 2 {
        return Err(Error::UnsupportedDimension {
            n: cs.dim_n,
            what: "quadrature rule construction",
            supported: "n in {1, 2}",
        });
    }
    if !(opts.feasibility_threshold > 0.0) {
        return Err(Error::invalid("feasibility threshold must be positive"));
    }
    let cells = match opts.cells_grid {
        Some(g) => build_cells(cs, g)?,
        None => build_cells_default(cs)?,
    };
    let mu = &cells.cell_measure;
    let n_pts = cs.points.len();
    let m_dim = space_dim(cs.dim_n, l_degree);
    let omega = sphere_volume(cs.dim_n);

    // Column xi holds all basis values at that center.
    let mut cols = Vec::with_capacity(n_pts);
    for p in &cs.points {
        cols.push(harmonic_row(cs.dim_n, l_degree, p)?);
    }

    let mut b = vec![0.0; m_dim];
    b[0] = omega.sqrt();
    let residual_row = |i: usize, c: &[f64]| -> f64 {
        kahan_sum(cols.iter().zip(c).map(|(col, &cj)| col[i] * cj)) - b[i]
    };

    let sqrt_mu: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
    let scaled = Mat::<f64>::from_fn(m_dim, n_pts, |i, j| cols[j][i] * sqrt_mu[j]);
    let rhs: Vec<f64> = (0..m_dim).map(|i| -residual_row(i, mu)).collect();

    let svd = scaled.thin_svd().map_err(|_| Error::InfeasibleMoments {
        context: format!("moment system SVD failed (L = {l_degree}, N = {n_pts})"),
    })?;
    let k_dim = m_dim.min(n_pts);
    let sigma_max = (0..k_dim).map(|k| svd.S()[k]).fold(0.0f64, f64::max);
    let cut = sigma_max * f64::EPSILON * m_dim.max(n_pts) as f64;

    // Minimum-norm correction z with (A sqrt_mu) z = b - A mu, then
    // c = mu + sqrt_mu * z.
    let mut projected = vec![0.0; k_dim];
    for (k, pk) in projected.iter_mut().enumerate() {
        let s = svd.S()[k];
        if s > cut {
            *pk = kahan_sum((0..m_dim).map(|i| svd.U()[(i, k)] * rhs[i])) / s;
        }
    }
    let weights: Vec<f64> = (0..n_pts)
        .map(|j| {
            let z = kahan_sum((0..k_dim).map(|k| svd.V()[(j, k)] * projected[k]));
            mu[j] + sqrt_mu[j] * z
        })
        .collect();

    let exactness_residual = (0..m_dim)
        .map(|i| residual_row(i, &weights).abs())
        .fold(0.0f64, f64::max);
    if exactness_residual >= 1e-9 {
        return Err(Error::InfeasibleMoments {
            context: format!(
                "moment residual {exactness_residual:.3e} above certification tolerance 1e-9 \
                 (L = {l_degree}, N = {n_pts}, basis size {m_dim})"
            ),
        });
    }
    if let Some(idx) = weights.iter().position(|&w| w <= 0.0) {
        return Err(Error::NegativeWeight {
            index: idx,
            weight: weights[idx],
            degree: l_degree,
        });
    }

    Ok(QuadratureRule {
        centers: cs.clone(),
        degree_l: l_degree,
        weights,
        exactness_residual,
        feasibility_product: cs.mesh_norm_h * (l_degree as f64 + lambda_n(cs.dim_n)),
        feasibility_threshold: opts.feasibility_threshold,
    })
}

/// Lowers the exactness degree until construction succeeds.
///
/// Starting from `l_start`, retries after NegativeWeight or InfeasibleMoments
/// with L - 1; degree 0 always succeeds for a valid center set (the weights
/// are then the cell measures rescaled to total measure omega_n).
pub fn build_rule_backoff(cs: &CenterSet, l_start: usize) -> Result<QuadratureRule> {
    let mut l = l_start;
    loop {
        match build_rule(cs, l) {
            Ok(rule) => return Ok(rule),
            Err(e @ (Error::NegativeWeight { .. } | Error::InfeasibleMoments { .. })) => {
                if l == 0 {
                    return Err(e);
                }
                l -= 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Positive product rule exact on polynomials up to `degree_l`: equispaced
/// trapezoid on the circle, Gauss-Legendre polar grid times an equispaced
/// azimuth on the sphere.
///
/// Unlike [`build_rule`], which corrects cell measures on given centers,
/// this places its own nodes, so arbitrarily high exactness degrees come at
/// cost linear in the node count. The nodes cluster toward the poles on the
/// sphere (mesh ratio grows with the degree), which positive-weight
/// arguments tolerate but quasi-uniform ones do not.
pub fn gauss_product_rule(dim_n: usize, degree_l: usize) -> Result<QuadratureRule> {
    let threshold = RuleOptions::default().feasibility_threshold;
    let (cs, weights) = match dim_n {
        1 => {
            let n_pts = (degree_l + 1).max(4);
            let pts = equispaced_circle(n_pts);
            let w = 2.0 * PI / n_pts as f64;
            (analyze_centers(1, pts)?, vec![w; n_pts])
        }
        2 => {
            let m_pol = (degree_l / 2 + 1).max(2);
            let m_az = (degree_l + 1).max(4);
            let gl = gauss_legendre(m_pol);
            let mut pts = Vec::with_capacity(m_pol * m_az);
            let mut w = Vec::with_capacity(m_pol * m_az);
            let az_w = 2.0 * PI / m_az as f64;
            for (t, glw) in gl.nodes.iter().zip(&gl.weights) {
                let sin_t = (1.0 - t * t).max(0.0).sqrt();
                for j in 0..m_az {
                    let phi = az_w * j as f64;
                    pts.push(SpherePoint::new(vec![
                        sin_t * phi.cos(),
                        sin_t * phi.sin(),
                        *t,
                    ])?);
                    w.push(glw * az_w);
                }
            }
            (analyze_centers(2, pts)?, w)
        }
        n => {
            return Err(Error::UnsupportedDimension {
                n,
                what: "product quadrature rule",
                supported: "n in {1, 2}",
            })
        }
    };

    let omega = sphere_volume(dim_n);
    let m_dim = space_dim(dim_n, degree_l);
    let mut moments = vec![0.0; m_dim];
    for (p, wj) in cs.points.iter().zip(&weights) {
        let row = harmonic_row(dim_n, degree_l, p)?;
        for (mi, ri) in moments.iter_mut().zip(&row) {
            *mi += wj * ri;
        }
    }
    moments[0] -= omega.sqrt();
    let exactness_residual = moments.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if exactness_residual >= 1e-9 {
        return Err(Error::InfeasibleMoments {
            context: format!(
                "product rule residual {exactness_residual:.3e} above certification \
                 tolerance 1e-9 (L = {degree_l})"
            ),
        });
    }

    Ok(QuadratureRule {
        feasibility_product: cs.mesh_norm_h * (degree_l as f64 + lambda_n(dim_n)),
        centers: cs,
        degree_l,
        weights,
        exactness_residual,
        feasibility_threshold: threshold,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::frames::poly_sup_norm;
    use crate::geometry::{
        analyze_centers, equispaced_circle, fibonacci_sphere, SpherePoint,
    };
    use crate::harmonics::PolynomialOnSphere;

    fn fib_rule_400_deg_12() -> &'static QuadratureRule {
        static RULE: OnceLock<QuadratureRule> = OnceLock::new();
        RULE.get_or_init(|| {
            let cs = analyze_centers(2, fibonacci_sphere(400)).unwrap();
            build_rule(&cs, 12).unwrap()
        })
    }

    fn random_poly(dim_n: usize, degree: usize, seed: u64) -> PolynomialOnSphere {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<f64> = (0..space_dim(dim_n, degree))
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        PolynomialOnSphere::from_coeffs(dim_n, degree, coeffs).unwrap()
    }

    #[test]
    fn product_rules_certify_high_degrees() {
        for (n, l) in [(1usize, 40usize), (2, 20), (2, 33)] {
            let rule = gauss_product_rule(n, l).unwrap();
            assert_eq!(rule.degree_l, l);
            assert!(rule.exactness_residual < 1e-9, "n={n} L={l}");
            assert!(rule.min_weight() > 0.0);
            let total: f64 = kahan_sum(rule.weights.iter().copied());
            assert!((total - sphere_volume(n)).abs() < 1e-10 * sphere_volume(n));

            let poly = random_poly(n, l, 0xB00 + l as u64);
            let quad = rule.integrate(|p| poly.eval(p).unwrap());
            let exact = sphere_volume(n).sqrt() * poly.get(0, 1);
            let scale = poly_sup_norm(&poly, 4000).unwrap();
            assert!(
                (quad - exact).abs() <= 1e-9 * scale.max(1.0),
                "n={n} L={l}: quadrature off by {:.3e}",
                (quad - exact).abs()
            );
        }
        assert!(matches!(
            gauss_product_rule(3, 4),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn equispaced_circle_recovers_trapezoid_weights() {
        let n = 32usize;
        let cs = analyze_centers(1, equispaced_circle(n)).unwrap();
        // 2N - 1 moment rows against N unknowns: consistent but
        // overdetermined, exercised through the rank-revealing path.
        let rule = build_rule(&cs, n - 1).unwrap();
        let expect = 2.0 * PI / n as f64;
        for w in &rule.weights {
            assert!((w - expect).abs() < 1e-12, "weight {w} vs {expect}");
        }
        assert!(rule.exactness_residual < 1e-12);
        assert!(!rule.within_feasibility());
    }

    #[test]
    fn fibonacci_400_degree_12_certificate() {
        let rule = fib_rule_400_deg_12();
        assert!(rule.exactness_residual < 1e-9);
        let mean = 4.0 * PI / 400.0;
        assert!(
            rule.min_weight() > 0.3 * mean,
            "min weight {} vs mean {mean}",
            rule.min_weight()
        );
        assert!(
            rule.max_weight() < 3.0 * mean,
            "max weight {} vs mean {mean}",
            rule.max_weight()
        );
        let h = rule.centers.mesh_norm_h;
        assert!(rule.max_weight() <= 4.0 * h * h);
    }

    #[test]
    fn degree_zero_weights_follow_cell_measures() {
        let cs = analyze_centers(2, fibonacci_sphere(100)).unwrap();
        let cells = build_cells_default(&cs).unwrap();
        let rule = build_rule(&cs, 0).unwrap();
        let total = kahan_sum(rule.weights.iter().copied());
        assert!((total - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
        // Single moment: the minimizer rescales the cell measures.
        let factor = 4.0 * PI / cells.total_measure();
        for (w, m) in rule.weights.iter().zip(&cells.cell_measure) {
            assert!((w - m * factor).abs() < 1e-13, "{w} vs {}", m * factor);
        }
    }

    #[test]
    fn circle_degree_zero_on_uneven_centers() {
        let angles = [0.0, 0.3, 1.1, 2.2, 2.9, 4.0, 5.5];
        let pts: Vec<SpherePoint> = angles.iter().map(|&a| SpherePoint::from_angle(a)).collect();
        let cs = analyze_centers(1, pts).unwrap();
        let rule = build_rule(&cs, 0).unwrap();
        let total = kahan_sum(rule.weights.iter().copied());
        assert!((total - 2.0 * PI).abs() < 1e-13);
        // Exact arc measures already integrate constants, so no correction.
        let cells = build_cells_default(&cs).unwrap();
        for (w, m) in rule.weights.iter().zip(&cells.cell_measure) {
            assert!((w - m).abs() < 1e-13);
        }
    }

    #[test]
    fn weights_are_invariant_under_rotation() {
        let pts = fibonacci_sphere(128);
        let cs = analyze_centers(2, pts.clone()).unwrap();
        let rule = build_rule(&cs, 6).unwrap();

        let (s, c) = (0.6f64, 0.8f64);
        let rotated: Vec<SpherePoint> = pts
            .iter()
            .map(|p| {
                let x = p.coords();
                SpherePoint::new(vec![c * x[0] - s * x[2], x[1], s * x[0] + c * x[2]]).unwrap()
            })
            .collect();
        let cs_r = analyze_centers(2, rotated).unwrap();
        let rule_r = build_rule(&cs_r, 6).unwrap();
        for (a, b) in rule.weights.iter().zip(&rule_r.weights) {
            assert!(
                (a - b).abs() <= 1e-10,
                "weights moved under rotation: {a} vs {b}"
            );
        }
    }

    #[test]
    fn clustered_cap_geometry_backs_off() {
        // All centers inside a small cap: high-degree moments cannot be
        // matched with positive weights anchored at the (one giant, many
        // tiny) cells.
        let pts: Vec<SpherePoint> = fibonacci_sphere(100)
            .iter()
            .map(|p| {
                let x = p.coords();
                SpherePoint::new(vec![x[0], x[1], x[2] + 3.0]).unwrap()
            })
            .collect();
        let cs = analyze_centers(2, pts).unwrap();
        match build_rule(&cs, 8) {
            Err(Error::NegativeWeight { .. }) | Err(Error::InfeasibleMoments { .. }) => {}
            other => panic!("expected failure on cap geometry, got {other:?}"),
        }
        let rule = build_rule_backoff(&cs, 8).unwrap();
        assert!(rule.degree_l < 8);
        assert!(rule.min_weight() > 0.0);
    }

    #[test]
    fn backoff_keeps_full_degree_when_feasible() {
        let cs = analyze_centers(1, equispaced_circle(64)).unwrap();
        let rule = build_rule_backoff(&cs, 20).unwrap();
        assert_eq!(rule.degree_l, 20);
    }

    #[test]
    fn rejects_unsupported_dimension() {
        let pts = crate::geometry::random_uniform(3, 40, 5);
        let cs = analyze_centers(3, pts).unwrap();
        assert!(matches!(
            build_rule(&cs, 2),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn random_polynomials_integrate_exactly() {
        let rule = fib_rule_400_deg_12();
        for seed in 0..10u64 {
            let poly = random_poly(2, 12, 0xABCD + seed);
            let values = poly.eval_many(&rule.centers.points).unwrap();
            let quad = rule.integrate_values(&values);
            let exact = (4.0 * PI).sqrt() * poly.get(0, 1);
            let sup = poly_sup_norm(&poly, 4000).unwrap();
            assert!(
                (quad - exact).abs() <= 1e-8 * sup,
                "seed {seed}: quad {quad} vs exact {exact} (sup {sup})"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn exactness_over_random_coefficients(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 169),
            ) {
            let rule = fib_rule_400_deg_12();
            let poly = PolynomialOnSphere::from_coeffs(2, 12, coeffs).unwrap();
            let values = poly.eval_many(&rule.centers.points).unwrap();
            let quad = rule.integrate_values(&values);
            let exact = (4.0 * PI).sqrt() * poly.get(0, 1);
            let sup = poly_sup_norm(&poly, 4000).unwrap();
            prop_assert!((quad - exact).abs() <= 1e-8 * sup);
        }
    }
}
