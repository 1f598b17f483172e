use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::point::{geodesic_distance, SpherePoint};
use crate::geometry::TEXT_SIG_DIGITS;

/// A finite set of centers on the n-sphere together with its mesh geometry.
///
/// `sep_radius_q` is exactly half the minimal pairwise geodesic distance.
/// `mesh_norm_h` is the covering radius `sup_x min_xi d(x, xi)`; on the
/// circle it is computed exactly from sorted angular gaps, in higher
/// dimensions it is a supremum over a dense probe grid whose size is
/// recorded in `grid_resolution`.
#[derive(Debug, Clone)]
pub struct CenterSet {
    pub dim_n: usize,
    pub points: Vec<SpherePoint>,
    pub sep_radius_q: f64,
    pub mesh_norm_h: f64,
    pub mesh_ratio_rho: f64,
    /// Probe points used for the mesh-norm supremum (0 when exact).
    pub grid_resolution: usize,
}

impl CenterSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Serializes as a header line "n N" followed by one point per line,
    /// coordinates written with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.dim_n, self.points.len()));
        for p in &self.points {
            let row: Vec<String> = p
                .coords()
                .iter()
                .map(|c| format!("{:.*e}", TEXT_SIG_DIGITS, c))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parses the text format written by [`CenterSet::to_text`], returning the
/// sphere dimension and the points. Run [`analyze_centers`] on the result to
/// recover mesh statistics.
pub fn parse_centers_text(text: &str) -> Result<(usize, Vec<SpherePoint>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid("empty center-set file"))?;
    let mut it = header.split_whitespace();
    let dim_n: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::invalid("center-set header must start with the sphere dimension"))?;
    let count: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::invalid("center-set header must be \"n N\""))?;
    if dim_n == 0 {
        return Err(Error::invalid("sphere dimension must be at least 1"));
    }
    let mut points = Vec::with_capacity(count);
    for (k, line) in lines.enumerate() {
        let coords: Vec<f64> = line
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad coordinate on point line {}", k + 1)))
            })
            .collect::<Result<_>>()?;
        if coords.len() != dim_n + 1 {
            return Err(Error::invalid(format!(
                "point line {} has {} coordinates, expected {}",
                k + 1,
                coords.len(),
                dim_n + 1
            )));
        }
        points.push(SpherePoint::new(coords)?);
    }
    if points.len() != count {
        return Err(Error::invalid(format!(
            "header promised {} points, file contains {}",
            count,
            points.len()
        )));
    }
    Ok((dim_n, points))
}

/// Minimal pairwise geodesic distance and the offending pair.
fn min_pairwise(points: &[SpherePoint]) -> (f64, usize, usize) {
    let n = points.len();
    (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, i, i + 1);
            for j in i + 1..n {
                let d = geodesic_distance(&points[i], &points[j]);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, 0, 0),
            |a, b| if b.0 < a.0 { b } else { a },
        )
}

/// Nearest-center queries accelerated by sorting centers along the last
/// coordinate: the colatitude map `x -> arccos(x_last)` is 1-Lipschitz for
/// the geodesic metric, so the scan stops once the colatitude gap alone
/// exceeds the best distance found.
pub(crate) struct NearestIndex<'a> {
    points: &'a [SpherePoint],
    order: Vec<u32>,
    colat: Vec<f64>,
}

impl<'a> NearestIndex<'a> {
    pub fn new(points: &'a [SpherePoint]) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let key = |i: &u32| {
            let z = *points[*i as usize].coords().last().unwrap();
            z.clamp(-1.0, 1.0).acos()
        };
        order.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
        let colat: Vec<f64> = order.iter().map(key).collect();
        Self {
            points,
            order,
            colat,
        }
    }

    /// Index of the nearest center and the geodesic distance to it.
    /// Ties are broken toward the smaller center index.
    pub fn nearest(&self, p: &SpherePoint) -> (usize, f64) {
        let tp = p.coords().last().unwrap().clamp(-1.0, 1.0).acos();
        let start = self.colat.partition_point(|&c| c < tp);
        let m = self.order.len();
        let mut best_dot = f64::NEG_INFINITY;
        let mut best_idx = usize::MAX;
        let mut best_angle = f64::INFINITY;
        let mut lo = start as isize - 1;
        let mut hi = start;
        loop {
            let lo_gap = if lo >= 0 {
                tp - self.colat[lo as usize]
            } else {
                f64::INFINITY
            };
            let hi_gap = if hi < m {
                self.colat[hi] - tp
            } else {
                f64::INFINITY
            };
            let (pos, gap) = if lo_gap <= hi_gap {
                (lo as usize, lo_gap)
            } else {
                (hi, hi_gap)
            };
            if gap > best_angle || !gap.is_finite() {
                break;
            }
            let idx = self.order[pos] as usize;
            let dot = p.dot(&self.points[idx]);
            if dot > best_dot || (dot == best_dot && idx < best_idx) {
                best_dot = dot;
                best_idx = idx;
                best_angle = best_dot.clamp(-1.0, 1.0).acos();
            }
            if lo_gap <= hi_gap {
                lo -= 1;
            } else {
                hi += 1;
            }
        }
        (best_idx, best_angle)
    }
}

/// Default probe-grid size for the mesh-norm supremum: spacing about q/4.5,
/// at least four times finer than the covering radius (which is always >= q).
fn default_h_grid(dim_n: usize, q: f64) -> usize {
    let q = q.max(1e-4);
    let raw = match dim_n {
        2 => (12.0 / q).powi(2),
        _ => (6.0 / q).powf(dim_n as f64),
    };
    (raw.ceil() as usize).clamp(20_000, 4_000_000)
}

/// Deterministic probe grid used for mesh-norm estimation on S^n, n >= 2.
pub(crate) fn probe_grid(dim_n: usize, size: usize) -> Vec<SpherePoint> {
    if dim_n == 2 {
        fibonacci_sphere(size)
    } else {
        random_uniform(dim_n, size, 0x5eed_cafe)
    }
}

/// Computes separation radius, mesh norm and mesh ratio for a point set.
///
/// The separation radius is exact (half the cached pairwise minimum). The
/// mesh norm is exact on the circle (half the largest angular gap) and a
/// probe-grid supremum otherwise, slightly underestimating the true value
/// by at most the probe covering radius.
pub fn analyze_centers(dim_n: usize, points: Vec<SpherePoint>) -> Result<CenterSet> {
    analyze_impl(dim_n, points, None)
}

/// Same as [`analyze_centers`] with an explicit probe-grid size for the
/// mesh-norm supremum (ignored on the circle, where the value is exact).
pub fn analyze_centers_with_grid(
    dim_n: usize,
    points: Vec<SpherePoint>,
    grid_size: usize,
) -> Result<CenterSet> {
    analyze_impl(dim_n, points, Some(grid_size))
}

fn analyze_impl(
    dim_n: usize,
    points: Vec<SpherePoint>,
    grid_size: Option<usize>,
) -> Result<CenterSet> {
    if dim_n == 0 {
        return Err(Error::UnsupportedDimension {
            n: 0,
            what: "center-set analysis".into(),
            supported: "n >= 1".into(),
        });
    }
    if points.is_empty() {
        return Err(Error::invalid("need at least 1 center"));
    }
    for (k, p) in points.iter().enumerate() {
        if p.dim_n() != dim_n {
            return Err(Error::invalid(format!(
                "point {} lives on S^{}, expected S^{}",
                k,
                p.dim_n(),
                dim_n
            )));
        }
    }
    if points.len() == 1 {
        // A lone center has no pairwise distances: cap the vacuous minimum
        // at the geodesic diameter. The covering radius is exactly pi
        // (attained at the antipode).
        return Ok(CenterSet {
            dim_n,
            points,
            sep_radius_q: 0.5 * PI,
            mesh_norm_h: PI,
            mesh_ratio_rho: 2.0,
            grid_resolution: 0,
        });
    }
    let (min_d, i, j) = min_pairwise(&points);
    if min_d < 1e-12 {
        return Err(Error::DuplicatePoints { i, j, dist: min_d });
    }
    let q = 0.5 * min_d;

    let (h, grid_used) = if dim_n == 1 {
        (circle_mesh_norm(&points), 0)
    } else {
        let size = grid_size.unwrap_or_else(|| default_h_grid(dim_n, q));
        let grid = probe_grid(dim_n, size);
        let index = NearestIndex::new(&points);
        let h = grid
            .par_iter()
            .map(|g| index.nearest(g).1)
            .reduce(|| 0.0, f64::max);
        (h, size)
    };

    Ok(CenterSet {
        dim_n,
        points,
        sep_radius_q: q,
        mesh_norm_h: h,
        mesh_ratio_rho: h / q,
        grid_resolution: grid_used,
    })
}

/// Exact covering radius on the circle: half the largest gap between
/// angularly consecutive points.
fn circle_mesh_norm(points: &[SpherePoint]) -> f64 {
    let mut angles: Vec<f64> = points.iter().map(|p| p.angle()).collect();
    angles.sort_by(f64::total_cmp);
    let mut max_gap = 2.0 * PI - (angles[angles.len() - 1] - angles[0]);
    for w in angles.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    0.5 * max_gap
}

/// N points equally spaced on the circle, starting at angle 0.
pub fn equispaced_circle(n_points: usize) -> Vec<SpherePoint> {
    (0..n_points)
        .map(|k| SpherePoint::from_angle(2.0 * PI * k as f64 / n_points as f64))
        .collect()
}

/// Fibonacci (golden-angle) lattice on S^2; quasi-uniform with mesh ratio
/// around 1.8 for all sizes.
pub fn fibonacci_sphere(n_points: usize) -> Vec<SpherePoint> {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    (0..n_points)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n_points as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * PI * (k as f64 / golden).fract();
            SpherePoint::from_unit_coords(vec![r * phi.cos(), r * phi.sin(), z])
        })
        .collect()
}

/// Hammersley point set on S^2: van der Corput heights paired with
/// equispaced longitudes.
pub fn hammersley_sphere(n_points: usize) -> Vec<SpherePoint> {
    (0..n_points)
        .map(|k| {
            let mut v = 0.0f64;
            let mut base = 0.5;
            let mut kk = k;
            while kk > 0 {
                if kk & 1 == 1 {
                    v += base;
                }
                base *= 0.5;
                kk >>= 1;
            }
            let z = 1.0 - 2.0 * v - 1.0 / n_points as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * PI * k as f64 / n_points as f64;
            SpherePoint::from_unit_coords(vec![r * phi.cos(), r * phi.sin(), z])
        })
        .collect()
}

/// Independent uniform samples on S^n drawn from a seeded ChaCha stream
/// (normalized Gaussian vectors), reproducible across platforms.
pub fn random_uniform(dim_n: usize, n_points: usize, seed: u64) -> Vec<SpherePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Box-Muller on the uniform stream keeps the draw sequence identical
    // across platforms for a given seed.
    let mut spare: Option<f64> = None;
    let mut normal = move |rng: &mut ChaCha8Rng| {
        if let Some(z) = spare.take() {
            return z;
        }
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        spare = Some(r * s);
        r * c
    };
    let mut out = Vec::with_capacity(n_points);
    while out.len() < n_points {
        let coords: Vec<f64> = (0..dim_n + 1).map(|_| normal(&mut rng)).collect();
        if let Ok(p) = SpherePoint::new(coords) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn antipodal_pair_on_circle() {
        let pts = vec![SpherePoint::from_angle(0.3), SpherePoint::from_angle(0.3 + PI)];
        let cs = analyze_centers(1, pts).unwrap();
        assert!((cs.sep_radius_q - PI / 2.0).abs() < 1e-12);
        assert!((cs.mesh_norm_h - PI / 2.0).abs() < 1e-12);
        assert!((cs.mesh_ratio_rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equispaced_circle_mesh_quantities() {
        for n in [3usize, 8, 17, 64] {
            let cs = analyze_centers(1, equispaced_circle(n)).unwrap();
            let expect = PI / n as f64;
            assert!((cs.sep_radius_q - expect).abs() < 1e-12 * expect);
            assert!((cs.mesh_norm_h - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn duplicates_are_rejected() {
        let pts = vec![
            SpherePoint::from_angle(1.0),
            SpherePoint::from_angle(2.0),
            SpherePoint::from_angle(1.0),
        ];
        match analyze_centers(1, pts) {
            Err(Error::DuplicatePoints { i, j, .. }) => {
                assert_eq!((i, j), (0, 2));
            }
            other => panic!("expected DuplicatePoints, got {other:?}"),
        }
    }

    /// Brute-force covering radius over an independent latitude-longitude
    /// grid, no shared code with the production estimator.
    fn brute_force_mesh_norm(points: &[SpherePoint], lat: usize, lon: usize) -> f64 {
        (0..lat)
            .into_par_iter()
            .map(|a| {
                let theta = PI * (a as f64 + 0.5) / lat as f64;
                let mut worst = 0.0f64;
                for b in 0..lon {
                    let phi = 2.0 * PI * b as f64 / lon as f64;
                    let g = SpherePoint::from_spherical(theta, phi);
                    let mut nearest = f64::INFINITY;
                    for p in points {
                        nearest = nearest.min(geodesic_distance(&g, p));
                    }
                    worst = worst.max(nearest);
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    #[test]
    fn fibonacci_512_mesh_norm_matches_brute_force() {
        let pts = fibonacci_sphere(512);
        let cs = analyze_centers_with_grid(2, pts.clone(), 2_000_000).unwrap();
        let oracle = brute_force_mesh_norm(&pts, 1000, 1000);
        // Both are suprema over grids of comparable resolution, so they
        // agree to within the two covering radii.
        assert!(
            (cs.mesh_norm_h - oracle).abs() < 0.05 * oracle,
            "grid h = {}, brute-force h = {}",
            cs.mesh_norm_h,
            oracle
        );
        assert!(cs.mesh_ratio_rho >= 1.0 && cs.mesh_ratio_rho < 3.0);
    }

    #[test]
    fn nearest_index_agrees_with_linear_scan() {
        let pts = fibonacci_sphere(300);
        let index = NearestIndex::new(&pts);
        for probe in random_uniform(2, 500, 7) {
            let (bi, bd) = index.nearest(&probe);
            let mut best = (usize::MAX, f64::INFINITY);
            for (k, p) in pts.iter().enumerate() {
                let d = geodesic_distance(&probe, p);
                if d < best.1 {
                    best = (k, d);
                }
            }
            assert_eq!(bi, best.0);
            assert!((bd - best.1).abs() < 1e-12);
        }
    }

    #[test]
    fn text_round_trip_preserves_coordinates() {
        let pts = fibonacci_sphere(37);
        let cs = analyze_centers(2, pts).unwrap();
        let text = cs.to_text();
        let (n, back) = parse_centers_text(&text).unwrap();
        assert_eq!(n, 2);
        assert_eq!(back.len(), 37);
        for (a, b) in cs.points.iter().zip(&back) {
            for (x, y) in a.coords().iter().zip(b.coords()) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(parse_centers_text("").is_err());
        assert!(parse_centers_text("2 1\n0.0 1.0\n").is_err());
        assert!(parse_centers_text("1 2\n1 0\n0 nope\n").is_err());
        assert!(parse_centers_text("1 1\n1 0 0\n").is_err());
    }

    #[test]
    fn generators_have_sane_mesh_ratios() {
        let fib = analyze_centers(2, fibonacci_sphere(256)).unwrap();
        assert!(fib.mesh_ratio_rho < 2.5, "rho = {}", fib.mesh_ratio_rho);
        let ham = analyze_centers(2, hammersley_sphere(256)).unwrap();
        assert!(ham.mesh_ratio_rho < 40.0);
        let rnd = analyze_centers(2, random_uniform(2, 128, 42)).unwrap();
        assert!(rnd.mesh_ratio_rho > 1.0);
        // Same seed reproduces points exactly.
        let again = random_uniform(2, 128, 42);
        for (a, b) in rnd.points.iter().zip(&again) {
            assert_eq!(a.coords(), b.coords());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Pigeonhole on the circle: the smallest gap is at most the mean
        /// gap 2 pi / N and the largest at least it, so q <= pi/N <= h.
        #[test]
        fn circle_separation_bracket(angles in proptest::collection::vec(0.0..(2.0 * PI), 3..40)) {
            let pts: Vec<SpherePoint> = angles.iter().map(|&a| SpherePoint::from_angle(a)).collect();
            let n = pts.len() as f64;
            if let Ok(cs) = analyze_centers(1, pts) {
                prop_assert!(cs.sep_radius_q <= PI / n + 1e-12);
                prop_assert!(cs.mesh_norm_h >= PI / n - 1e-12);
                prop_assert!(cs.sep_radius_q <= cs.mesh_norm_h + 1e-12);
                prop_assert!(cs.mesh_ratio_rho >= 1.0 - 1e-12);
            }
        }

        #[test]
        fn sphere_q_below_h(seed in 0u64..1000) {
            let cs = analyze_centers(2, random_uniform(2, 48, seed)).unwrap();
            prop_assert!(cs.sep_radius_q <= cs.mesh_norm_h);
        }
    }
}
