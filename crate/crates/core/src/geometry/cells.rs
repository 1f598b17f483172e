use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::centers::{CenterSet, NearestIndex};
use crate::geometry::point::{geodesic_distance, sphere_volume, SpherePoint};
use crate::numerics::kahan_sum;

/// Measured Voronoi decomposition of the sphere induced by a center set.
///
/// Cell measures come from counting uniform grid points per nearest center
/// (exact arc lengths on the circle). `partition_norm` estimates the largest
/// cell diameter and is clamped into the proven bracket `[h, 2h]`: every
/// Voronoi cell contains a point at distance h from its center and fits in
/// a ball of radius h.
#[derive(Debug, Clone)]
pub struct CellDecomposition {
    pub cell_measure: Vec<f64>,
    pub partition_norm: f64,
    /// Grid points used for counting (0 when measures are exact).
    pub grid_resolution: usize,
}

impl CellDecomposition {
    pub fn total_measure(&self) -> f64 {
        kahan_sum(self.cell_measure.iter().copied())
    }

    pub fn min_measure(&self) -> f64 {
        self.cell_measure.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Default grid size: roughly 60 points in a spherical cap of radius q, a
/// comfortable margin over the 20-point floor for the smallest cell.
pub fn default_cells_grid(dim_n: usize, q: f64) -> usize {
    let q = q.max(1e-4);
    let raw = match dim_n {
        2 => 240.0 / (q * q),
        _ => 60.0 * sphere_volume(dim_n) / q.powi(dim_n as i32),
    };
    (raw.ceil() as usize).clamp(50_000, 6_000_000)
}

/// Builds the grid-counted Voronoi decomposition with a default resolution
/// derived from the separation radius.
pub fn build_cells_default(cs: &CenterSet) -> Result<CellDecomposition> {
    build_cells(cs, default_cells_grid(cs.dim_n, cs.sep_radius_q))
}

/// Builds the grid-counted Voronoi decomposition of the sphere.
///
/// `grid_resolution` must put at least 20 grid points into the smallest
/// cell; an empty cell reports `EmptyCell`. On the circle the measures are
/// exact half-gap arc lengths and the grid is not used. On S^2 the counting
/// grid is a Fibonacci lattice rotated into a frame built from the data, so
/// that rotating the whole center set yields identical measures.
pub fn build_cells(cs: &CenterSet, grid_resolution: usize) -> Result<CellDecomposition> {
    if cs.dim_n == 1 {
        return Ok(circle_cells(cs));
    }
    if grid_resolution < 20 * cs.points.len() {
        return Err(Error::invalid(format!(
            "grid_resolution {} cannot place 20 points in each of {} cells",
            grid_resolution,
            cs.points.len()
        )));
    }
    let grid = aligned_grid(cs, grid_resolution);
    let index = NearestIndex::new(&cs.points);

    let assigned: Vec<(u32, f64)> = grid
        .par_iter()
        .map(|g| {
            let (idx, d) = index.nearest(g);
            (idx as u32, d)
        })
        .collect();

    let n = cs.points.len();
    let weight = sphere_volume(cs.dim_n) / grid_resolution as f64;
    let mut counts = vec![0u64; n];
    for &(idx, _) in &assigned {
        counts[idx as usize] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyCell {
            index: empty,
            grid_size: grid_resolution,
        });
    }
    let cell_measure: Vec<f64> = counts.iter().map(|&c| c as f64 * weight).collect();

    // Diameter estimate: for each cell keep the K grid points farthest from
    // the owning center (diameter endpoints are extremal), then take the max
    // pairwise distance among them.
    const K: usize = 48;
    let mut extremal: Vec<Vec<(f64, u32)>> = vec![Vec::with_capacity(K + 1); n];
    for (g_idx, &(c_idx, d)) in assigned.iter().enumerate() {
        let bucket = &mut extremal[c_idx as usize];
        if bucket.len() < K {
            bucket.push((d, g_idx as u32));
            if bucket.len() == K {
                bucket.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
        } else if d > bucket[0].0 {
            bucket[0] = (d, g_idx as u32);
            let mut i = 0;
            while i + 1 < K && bucket[i].0 > bucket[i + 1].0 {
                bucket.swap(i, i + 1);
                i += 1;
            }
        }
    }
    let sampled_diam = extremal
        .par_iter()
        .map(|bucket| {
            let mut diam = 0.0f64;
            for a in 0..bucket.len() {
                for b in a + 1..bucket.len() {
                    let d = geodesic_distance(
                        &grid[bucket[a].1 as usize],
                        &grid[bucket[b].1 as usize],
                    );
                    diam = diam.max(d);
                }
            }
            diam
        })
        .reduce(|| 0.0, f64::max);
    let partition_norm = sampled_diam.clamp(cs.mesh_norm_h, 2.0 * cs.mesh_norm_h);

    Ok(CellDecomposition {
        cell_measure,
        partition_norm,
        grid_resolution,
    })
}

/// Exact Voronoi arcs on the circle: each cell runs from the midpoint with
/// the previous point to the midpoint with the next.
fn circle_cells(cs: &CenterSet) -> CellDecomposition {
    let n = cs.points.len();
    let mut order: Vec<usize> = (0..n).collect();
    let angles: Vec<f64> = cs.points.iter().map(|p| p.angle()).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));

    let mut cell_measure = vec![0.0; n];
    let mut max_cell = 0.0f64;
    for (k, &i) in order.iter().enumerate() {
        let prev = angles[order[(k + n - 1) % n]];
        let next = angles[order[(k + 1) % n]];
        let cur = angles[i];
        let gap_prev = (cur - prev).rem_euclid(2.0 * PI);
        let gap_next = (next - cur).rem_euclid(2.0 * PI);
        let m = 0.5 * (gap_prev + gap_next);
        cell_measure[i] = m;
        max_cell = max_cell.max(m);
    }
    CellDecomposition {
        cell_measure,
        partition_norm: max_cell.clamp(cs.mesh_norm_h, 2.0 * cs.mesh_norm_h),
        grid_resolution: 0,
    }
}

/// Fibonacci counting grid rotated into an orthonormal frame built from the
/// centers (index-weighted mean direction plus the first independent
/// center), so the grid co-rotates with the data.
fn aligned_grid(cs: &CenterSet, size: usize) -> Vec<SpherePoint> {
    let base = crate::geometry::centers::probe_grid(cs.dim_n, size);
    if cs.dim_n != 2 {
        return base;
    }
    let dim = 3;
    let mut w = vec![0.0f64; dim];
    for (k, p) in cs.points.iter().enumerate() {
        for (wi, ci) in w.iter_mut().zip(p.coords()) {
            *wi += (k + 1) as f64 * ci;
        }
    }
    let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if wn < 1e-9 {
        return base;
    }
    let u: Vec<f64> = w.iter().map(|x| x / wn).collect();
    let mut v = None;
    for p in &cs.points {
        let d: f64 = p.coords().iter().zip(&u).map(|(a, b)| a * b).sum();
        let t: Vec<f64> = p
            .coords()
            .iter()
            .zip(&u)
            .map(|(a, b)| a - d * b)
            .collect();
        let tn = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        if tn > 1e-9 {
            v = Some(t.iter().map(|x| x / tn).collect::<Vec<f64>>());
            break;
        }
    }
    let v = match v {
        Some(v) => v,
        None => return base,
    };
    let c = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    base.into_iter()
        .map(|p| {
            let x = p.coords();
            SpherePoint::from_unit_coords(vec![
                u[0] * x[0] + v[0] * x[1] + c[0] * x[2],
                u[1] * x[0] + v[1] * x[1] + c[1] * x[2],
                u[2] * x[0] + v[2] * x[1] + c[2] * x[2],
            ])
        })
        .collect()
}
