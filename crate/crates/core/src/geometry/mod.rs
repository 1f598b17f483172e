//! Point sets on the unit n-sphere: geodesic geometry, mesh norm / separation
//! analysis, nested maximin refinement and grid-counted Voronoi cells.

mod cells;
mod centers;
mod point;
mod refine;

pub use cells::{build_cells, build_cells_default, CellDecomposition};
pub use centers::{
    analyze_centers, analyze_centers_with_grid, equispaced_circle, fibonacci_sphere,
    hammersley_sphere, parse_centers_text, random_uniform, CenterSet,
};
pub use point::{geodesic_distance, sphere_volume, SpherePoint};
pub use refine::refine_nested;

/// Directions file layout: "n N" header, one point per line. Shared by
/// [`CenterSet::to_text`] and [`parse_centers_text`].
pub(crate) const TEXT_SIG_DIGITS: usize = 16;
