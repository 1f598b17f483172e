use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frames::Envelope;
use crate::geometry::CenterSet;
use crate::harmonics::{lambda_n, projection_kernel_all};
use crate::kernels::ZonalKernel;
use crate::network::SbfNetwork;
use crate::numerics::kahan_dot;

/// Largest system assembled as a dense matrix; everything here is O(N^3).
const MAX_DENSE_N: usize = 2000;

/// Spectral estimates of a symmetric collocation matrix, all from one dense
/// eigendecomposition.
#[derive(Debug, Clone, Copy)]
pub struct CondEstimates {
    /// Column-sum norm of the inverse; infinite when an eigenvalue vanishes.
    pub norm1_inv: f64,
    /// Spectral norm of the inverse, `1 / min |lambda|`.
    pub norm2_inv: f64,
    /// Smallest signed eigenvalue.
    pub lambda_min: f64,
}

/// Symmetric collocation matrix with entries `phi_eps(xi . eta)` over a
/// center set, with its condition estimates attached.
#[derive(Debug, Clone)]
pub struct InterpolationSystem {
    pub dim_n: usize,
    /// Smoothing scale; 0 marks the plain kernel matrix.
    pub epsilon: f64,
    /// Row-major N x N entries.
    pub matrix_a: Vec<f64>,
    pub cond_estimates: CondEstimates,
}

impl InterpolationSystem {
    pub fn size(&self) -> usize {
        if self.matrix_a.is_empty() {
            0
        } else {
            (self.matrix_a.len() as f64).sqrt().round() as usize
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix_a[i * self.size() + j]
    }

    /// Plain collocation matrix `[phi(xi . eta)]` (the epsilon = 0 case).
    pub fn unsmoothed(kernel: &ZonalKernel, cs: &CenterSet) -> Result<Self> {
        validate_pair(kernel, cs)?;
        continuity_gate(kernel)?;
        let entries = assemble_pointwise(kernel, cs)?;
        let cond_estimates = estimates_of(&entries, cs.len())?;
        Ok(Self {
            dim_n: kernel.dim_n,
            epsilon: 0.0,
            matrix_a: entries,
            cond_estimates,
        })
    }
}

fn validate_pair(kernel: &ZonalKernel, cs: &CenterSet) -> Result<()> {
    if kernel.dim_n != cs.dim_n {
        return Err(Error::invalid(format!(
            "kernel on S^{} but centers on S^{}",
            kernel.dim_n, cs.dim_n
        )));
    }
    if cs.is_empty() {
        return Err(Error::invalid("collocation needs at least one center"));
    }
    if cs.len() > MAX_DENSE_N {
        return Err(Error::invalid(format!(
            "{} centers exceed the dense solver cap {MAX_DENSE_N}",
            cs.len()
        )));
    }
    Ok(())
}

fn continuity_gate(kernel: &ZonalKernel) -> Result<()> {
    if !kernel.tail_bound(kernel.l_max()).is_finite() {
        return Err(Error::DivergentSeries {
            context: "pointwise collocation needs a continuous kernel (finite tail bound)"
                .to_string(),
        });
    }
    Ok(())
}

/// Row-major entries `phi(xi_i . xi_j)` by pointwise kernel evaluation.
fn assemble_pointwise(kernel: &ZonalKernel, cs: &CenterSet) -> Result<Vec<f64>> {
    let n = cs.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    let v = kernel.eval(cs.points[i].dot(&cs.points[j]))?;
                    if !v.is_finite() {
                        return Err(Error::DivergentSeries {
                            context: format!(
                                "kernel value at centers ({i}, {j}) is not finite"
                            ),
                        });
                    }
                    Ok(v)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(mirror(upper, n))
}

/// Row-major entries of the smoothed kernel `sum_l mult_l phi_hat(l)
/// P_l(xi . eta)`, truncated at the stored coefficient run.
fn assemble_smoothed(kernel: &ZonalKernel, cs: &CenterSet, mult: &[f64]) -> Vec<f64> {
    let weighted: Vec<f64> = mult
        .iter()
        .enumerate()
        .map(|(l, m)| m * kernel.true_coeff(l))
        .collect();
    let top = weighted
        .iter()
        .rposition(|w| *w != 0.0)
        .unwrap_or(0);
    let dim = kernel.dim_n;
    let n = cs.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    let basis =
                        projection_kernel_all(dim, top, cs.points[i].dot(&cs.points[j]));
                    kahan_dot(&basis, &weighted[..=top])
                })
                .collect()
        })
        .collect();
    mirror(upper, n)
}

fn mirror(upper: Vec<Vec<f64>>, n: usize) -> Vec<f64> {
    let mut entries = vec![0.0; n * n];
    for (i, row) in upper.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            let j = i + offset;
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    entries
}

fn estimates_of(entries: &[f64], n: usize) -> Result<CondEstimates> {
    let mat = Mat::<f64>::from_fn(n, n, |i, j| entries[i * n + j]);
    let evd = mat
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::SingularSystem {
            context: "symmetric eigensolve did not converge".to_string(),
            lambda_min: f64::NAN,
        })?;
    let lambda_min = evd.S()[0];
    let mut min_abs = f64::INFINITY;
    for i in 0..n {
        min_abs = min_abs.min(evd.S()[i].abs());
    }
    if min_abs == 0.0 {
        return Ok(CondEstimates {
            norm1_inv: f64::INFINITY,
            norm2_inv: f64::INFINITY,
            lambda_min,
        });
    }
    let scaled = Mat::<f64>::from_fn(n, n, |i, k| evd.U()[(i, k)] / evd.S()[k]);
    let inv = scaled * evd.U().transpose();
    let mut norm1_inv = 0.0f64;
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            col += inv[(i, j)].abs();
        }
        norm1_inv = norm1_inv.max(col);
    }
    Ok(CondEstimates {
        norm1_inv,
        norm2_inv: 1.0 / min_abs,
        lambda_min,
    })
}

/// Smoothed collocation matrix: entries are the kernel series reweighted by
/// the envelope multiplier `kappa(eps (l + lambda_n))` degree by degree,
/// truncated at the stored coefficient run, with signed low-degree
/// coefficients used where the kernel has them.
pub fn smoothed_matrix(
    kernel: &ZonalKernel,
    cs: &CenterSet,
    kappa: &Envelope,
    eps: f64,
) -> Result<InterpolationSystem> {
    validate_pair(kernel, cs)?;
    if !(eps > 0.0 && eps <= 1.0) || !eps.is_finite() {
        return Err(Error::invalid(format!(
            "smoothing scale eps = {eps} outside (0, 1]"
        )));
    }
    let lam = lambda_n(kernel.dim_n);
    let mult: Vec<f64> = (0..=kernel.l_max())
        .map(|l| kappa.eval(eps * (l as f64 + lam)))
        .collect();
    let entries = assemble_smoothed(kernel, cs, &mult);
    let cond_estimates = estimates_of(&entries, cs.len())?;
    Ok(InterpolationSystem {
        dim_n: kernel.dim_n,
        epsilon: eps,
        matrix_a: entries,
        cond_estimates,
    })
}

/// Solves `A a = y` for the collocation matrix `A = [phi(xi . eta)]` and
/// wraps the solution as a network.
///
/// The solve goes through an LU factorization (the catalog includes kernels
/// with signed low-degree coefficients, so A need not be positive definite)
/// and is gated a posteriori: the returned network reproduces the data
/// within `1e-8 |y|_inf` at the centers, anything worse reports the system
/// as numerically singular together with its smallest eigenvalue.
pub fn interpolate(kernel: &ZonalKernel, cs: &CenterSet, values_y: &[f64]) -> Result<SbfNetwork> {
    validate_pair(kernel, cs)?;
    continuity_gate(kernel)?;
    let n = cs.len();
    if values_y.len() != n {
        return Err(Error::invalid(format!(
            "{} data values for {} centers",
            values_y.len(),
            n
        )));
    }
    if values_y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("interpolation data must be finite"));
    }
    let entries = assemble_pointwise(kernel, cs)?;
    let mat = Mat::<f64>::from_fn(n, n, |i, j| entries[i * n + j]);
    let rhs = Mat::<f64>::from_fn(n, 1, |i, _| values_y[i]);
    let sol = mat.partial_piv_lu().solve(&rhs);
    let a: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();

    let y_norm = values_y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut residual = 0.0f64;
    for i in 0..n {
        let row = &entries[i * n..(i + 1) * n];
        residual = residual.max((kahan_dot(row, &a) - values_y[i]).abs());
    }
    if !(residual <= 1e-8 * y_norm) {
        let lambda_min = estimates_of(&entries, n)
            .map(|c| c.lambda_min)
            .unwrap_or(f64::NAN);
        return Err(Error::SingularSystem {
            context: format!(
                "interpolation residual {residual:.3e} exceeds 1e-8 * |y|_inf = {:.3e}",
                1e-8 * y_norm
            ),
            lambda_min,
        });
    }
    SbfNetwork::new(kernel.clone(), cs.clone(), a)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::geometry::{analyze_centers, fibonacci_sphere};
    use crate::kernels::{make_gaussian, make_green, make_tps};

    fn fib_centers(n: usize) -> CenterSet {
        analyze_centers(2, fibonacci_sphere(n)).unwrap()
    }

    #[test]
    fn single_center_is_a_scalar_solve() {
        let cs = fib_centers(1);
        let net = interpolate(&make_gaussian(2, 1.0).unwrap(), &cs, &[2.5]).unwrap();
        assert!((net.coeffs_a[0] - 2.5).abs() < 1e-14);

        let green = make_green(2, 3.0, None).unwrap();
        let phi1 = green.eval(1.0).unwrap();
        let net = interpolate(&green, &cs, &[2.5]).unwrap();
        assert!((net.coeffs_a[0] - 2.5 / phi1).abs() < 1e-12 * (2.5 / phi1).abs());
    }

    #[test]
    fn matrix_column_data_recovers_a_unit_vector() {
        let kernel = make_gaussian(2, 1.0).unwrap();
        let cs = fib_centers(30);
        let k = 11;
        let y: Vec<f64> = cs
            .points
            .iter()
            .map(|p| kernel.eval(p.dot(&cs.points[k])).unwrap())
            .collect();
        let net = interpolate(&kernel, &cs, &y).unwrap();
        for (i, a) in net.coeffs_a.iter().enumerate() {
            let want = if i == k { 1.0 } else { 0.0 };
            assert!((a - want).abs() < 1e-8, "a[{i}] = {a}");
        }
    }

    #[test]
    fn gaussian_round_trip_recovers_coefficients() {
        let kernel = make_gaussian(2, 1.0).unwrap();
        let cs = fib_centers(100);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let a_true: Vec<f64> = (0..100).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let reference =
            SbfNetwork::new(kernel.clone(), cs.clone(), a_true.clone()).unwrap();
        let y = reference.evaluate_many(&cs.points).unwrap();
        let net = interpolate(&kernel, &cs, &y).unwrap();
        let worst = net
            .coeffs_a
            .iter()
            .zip(&a_true)
            .map(|(got, want)| (got - want).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-6, "coefficient drift {worst:.3e}");
    }

    #[test]
    fn distributional_kernel_is_rejected() {
        let cs = fib_centers(5);
        let err = interpolate(&make_tps(2, -0.5).unwrap(), &cs, &[1.0; 5]);
        assert!(matches!(err, Err(Error::DivergentSeries { .. })));
    }

    #[test]
    fn duplicate_direction_reports_a_singular_system() {
        // Two copies of the same point can't be produced by analyze_centers
        // (it rejects duplicates), so collapse the matrix instead: a kernel
        // with a single active degree on more centers than the eigenspace
        // holds is rank deficient.
        let kernel = ZonalKernel::custom(2, vec![1.0, 1.0]).unwrap();
        // space_dim(2, 1) = 4 < 6 centers. The data must avoid the span of
        // the low-degree harmonics sampled at the centers, otherwise the
        // factorization still finds an exact solution: a lone spike works.
        let cs = fib_centers(6);
        let err = interpolate(&kernel, &cs, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        match err {
            Err(Error::SingularSystem { lambda_min, .. }) => {
                assert!(lambda_min.abs() < 1e-10, "lambda_min = {lambda_min}");
            }
            other => panic!("expected a singular system, got {other:?}"),
        }
    }

    #[test]
    fn identity_multiplier_reproduces_the_unsmoothed_matrix() {
        let kernel = make_gaussian(2, 1.0).unwrap();
        let cs = fib_centers(40);
        let plain = InterpolationSystem::unsmoothed(&kernel, &cs).unwrap();
        let ones = Envelope::Custom {
            eval: Arc::new(|_| 1.0),
            support: None,
        };
        let sys = smoothed_matrix(&kernel, &cs, &ones, 0.7).unwrap();
        assert_eq!(plain.epsilon, 0.0);
        assert_eq!(sys.epsilon, 0.7);
        let slack = kernel.tail_bound(kernel.l_max()) + 1e-12;
        for i in 0..40 {
            for j in 0..40 {
                assert!((sys.entry(i, j) - plain.entry(i, j)).abs() <= slack);
                assert_eq!(sys.entry(i, j), sys.entry(j, i));
            }
        }
    }

    #[test]
    fn heat_smoothing_keeps_the_rayleigh_ritz_ordering() {
        // The heat multiplier lies in (0, 1], so A - A_eps has nonnegative
        // kernel coefficients and is positive semidefinite.
        let kernel = make_gaussian(2, 1.0).unwrap();
        let cs = fib_centers(50);
        let plain = InterpolationSystem::unsmoothed(&kernel, &cs).unwrap();
        let sys = smoothed_matrix(&kernel, &cs, &Envelope::Heat, 0.1).unwrap();
        let lam_a = plain.cond_estimates.lambda_min;
        let lam_eps = sys.cond_estimates.lambda_min;
        assert!(lam_eps > 0.0, "smoothed matrix not positive: {lam_eps:.3e}");
        assert!(
            lam_a >= lam_eps - 1e-12,
            "ordering violated: {lam_a:.6e} < {lam_eps:.6e}"
        );
    }

    #[test]
    fn condition_estimates_match_direct_linear_algebra() {
        // Cross-check the eigendecomposition route on a matrix small enough
        // to invert by hand: entries of a 2x2 collocation system.
        let kernel = make_gaussian(2, 1.0).unwrap();
        let cs = analyze_centers(
            2,
            vec![
                crate::geometry::SpherePoint::new(vec![0.0, 0.0, 1.0]).unwrap(),
                crate::geometry::SpherePoint::new(vec![0.6, 0.0, 0.8]).unwrap(),
            ],
        )
        .unwrap();
        let sys = InterpolationSystem::unsmoothed(&kernel, &cs).unwrap();
        let (d, o) = (sys.entry(0, 0), sys.entry(0, 1));
        // eigenvalues d +- o, inverse entries from the 2x2 formula
        let lam_small = d - o.abs();
        assert!((sys.cond_estimates.lambda_min - lam_small).abs() < 1e-14);
        assert!((sys.cond_estimates.norm2_inv - 1.0 / lam_small).abs() < 1e-10 / lam_small);
        let det = d * d - o * o;
        let inv_col = (d.abs() + o.abs()) / det;
        assert!(
            (sys.cond_estimates.norm1_inv - inv_col).abs() < 1e-10 * inv_col,
            "{} vs {}",
            sys.cond_estimates.norm1_inv,
            inv_col
        );
    }

    #[test]
    fn arguments_are_validated() {
        let kernel = make_gaussian(2, 1.0).unwrap();
        let cs = fib_centers(4);
        assert!(interpolate(&kernel, &cs, &[1.0; 3]).is_err());
        assert!(interpolate(&kernel, &cs, &[1.0, 2.0, f64::NAN, 0.0]).is_err());
        assert!(smoothed_matrix(&kernel, &cs, &Envelope::Heat, 0.0).is_err());
        assert!(smoothed_matrix(&kernel, &cs, &Envelope::Heat, 1.5).is_err());
        let circle = make_gaussian(1, 1.0).unwrap();
        assert!(interpolate(&circle, &cs, &[1.0; 4]).is_err());
    }
}
