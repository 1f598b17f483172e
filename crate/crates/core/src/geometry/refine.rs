use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::centers::{analyze_centers, probe_grid, CenterSet};
use crate::geometry::point::{geodesic_distance, SpherePoint};

/// Produces a nested sequence `X_0 subset X_1 subset ...` of `levels + 1`
/// center sets whose mesh norms roughly halve from level to level, with
/// every mesh ratio kept below `rho_cap`.
///
/// Points are added by greedy farthest-point insertion: on the circle the
/// farthest point is exactly the midpoint of the widest gap; on higher
/// spheres it is taken from a dense candidate grid refreshed per level.
/// Earlier levels are reused verbatim, so subset relations hold by point
/// identity, not merely within tolerance.
pub fn refine_nested(base: &CenterSet, levels: usize, rho_cap: f64) -> Result<Vec<CenterSet>> {
    if !(rho_cap >= 2.0) {
        return Err(Error::invalid(format!(
            "rho_cap must be at least 2, got {rho_cap}"
        )));
    }
    let mut out = Vec::with_capacity(levels + 1);
    check_rho(base, rho_cap, 0)?;
    out.push(base.clone());
    for level in 1..=levels {
        let prev = out.last().unwrap();
        let next = if base.dim_n == 1 {
            refine_circle_level(prev)?
        } else {
            refine_grid_level(prev)?
        };
        check_rho(&next, rho_cap, level)?;
        out.push(next);
    }
    Ok(out)
}

fn check_rho(cs: &CenterSet, rho_cap: f64, level: usize) -> Result<()> {
    if cs.mesh_ratio_rho > rho_cap * (1.0 + 1e-9) {
        return Err(Error::RhoCapExceeded {
            rho: cs.mesh_ratio_rho,
            cap: rho_cap,
            level,
        });
    }
    Ok(())
}

/// One refinement level on the circle: repeatedly bisect the widest angular
/// gap (the continuum farthest point) until the covering radius has halved.
fn refine_circle_level(prev: &CenterSet) -> Result<CenterSet> {
    let mut angles: Vec<f64> = prev.points.iter().map(|p| p.angle()).collect();
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    let mut sorted: Vec<f64> = order.iter().map(|&i| angles[i]).collect();

    let target = 0.5 * prev.mesh_norm_h;
    let budget = 8 * prev.points.len() + 64;
    let mut new_points = Vec::new();
    for step in 0..=budget {
        // Widest gap, wraparound included; ties resolve to the first gap.
        let m = sorted.len();
        let mut widest = (2.0 * PI + sorted[0] - sorted[m - 1], m - 1);
        for k in 0..m - 1 {
            let g = sorted[k + 1] - sorted[k];
            if g > widest.0 {
                widest = (g, k);
            }
        }
        // Relative slack so a 1-ulp rounding of a midpoint cannot force an
        // extra full round of splitting.
        if 0.5 * widest.0 <= target * (1.0 + 1e-12) {
            break;
        }
        if step == budget {
            return Err(Error::RefinementStall {
                h: 0.5 * widest.0,
                h_prev: prev.mesh_norm_h,
                budget,
            });
        }
        let (gap, k) = widest;
        let mid = if k == m - 1 {
            let a = sorted[m - 1] + 0.5 * gap;
            if a > PI {
                a - 2.0 * PI
            } else {
                a
            }
        } else {
            0.5 * (sorted[k] + sorted[k + 1])
        };
        let pos = sorted.partition_point(|&a| a < mid);
        sorted.insert(pos, mid);
        new_points.push(SpherePoint::from_angle(mid));
        angles.push(mid);
    }

    let mut points = prev.points.clone();
    points.extend(new_points);
    analyze_centers(1, points)
}

/// One refinement level on S^n, n >= 2: greedy maximin insertion from a
/// candidate grid fine enough to resolve the halved mesh norm.
fn refine_grid_level(prev: &CenterSet) -> Result<CenterSet> {
    let target = 0.47 * prev.mesh_norm_h;
    let grid_size = ((21.0 / target).powi(2).ceil() as usize).clamp(20_000, 2_000_000);
    let grid = probe_grid(prev.dim_n, grid_size);

    // Distance from each candidate to the current set, updated per insertion.
    let mut dist: Vec<f64> = grid
        .par_iter()
        .map(|g| {
            prev.points
                .iter()
                .map(|p| geodesic_distance(g, p))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    let budget = 12 * prev.points.len() + 64;
    let mut points = prev.points.clone();
    for step in 0..=budget {
        let (far_idx, far_d) = dist
            .par_iter()
            .enumerate()
            .map(|(i, &d)| (i, d))
            .reduce(
                || (usize::MAX, f64::NEG_INFINITY),
                |a, b| {
                    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                        b
                    } else {
                        a
                    }
                },
            );
        if far_d <= target {
            break;
        }
        if step == budget {
            return Err(Error::RefinementStall {
                h: far_d,
                h_prev: prev.mesh_norm_h,
                budget,
            });
        }
        let p = grid[far_idx].clone();
        dist.par_iter_mut().zip(grid.par_iter()).for_each(|(d, g)| {
            *d = d.min(geodesic_distance(g, &p));
        });
        points.push(p);
    }

    analyze_centers(prev.dim_n, points)
}
