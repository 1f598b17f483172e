use thiserror::Error;

/// Errors shared across the crate.
///
/// Variants are split between input validation (rejected before any numeric
/// work starts) and numeric failures detected while running. The CLI maps the
/// former to exit code 2 and the latter to exit code 1; see
/// [`Error::is_validation`].
#[derive(Debug, Error)]
pub enum Error {
    /// A pair of centers is closer than the duplicate threshold (1e-12 rad).
    #[error("duplicate points: centers {i} and {j} are {dist:.3e} rad apart")]
    DuplicatePoints { i: usize, j: usize, dist: f64 },

    /// Greedy refinement could not halve the mesh norm within its budget.
    #[error("refinement stall: mesh norm {h:.6e} not halved from {h_prev:.6e} within {budget} insertions")]
    RefinementStall { h: f64, h_prev: f64, budget: usize },

    /// A refinement level exceeded the requested mesh-ratio cap.
    #[error("mesh ratio {rho:.4} exceeds cap {cap:.4} at refinement level {level}")]
    RhoCapExceeded { rho: f64, cap: f64, level: usize },

    /// A Voronoi cell received no grid points; the estimation grid is too coarse.
    #[error("empty cell for center {index}: estimation grid under-resolved (grid size {grid_size})")]
    EmptyCell { index: usize, grid_size: usize },

    /// Pointwise bases and grids are implemented for n ∈ {1, 2} only.
    #[error("unsupported dimension n = {n} for {what} (supported: {supported})")]
    UnsupportedDimension { n: usize, what: &'static str, supported: &'static str },

    /// A perturbed Green kernel needs 1 + ψ̂(ℓ) > 0 for every ℓ.
    #[error("invalid perturbation: 1 + ψ̂({ell}) = {value:.3e} ≤ 0")]
    InvalidPerturbation { ell: usize, value: f64 },

    /// Γ(ℓ−s) was requested at a non-positive integer. Construction code must
    /// branch around the poles; reaching this variant is a bug upstream.
    #[error("gamma pole: Γ({arg}) evaluated at a non-positive integer")]
    PoleAtInteger { arg: f64 },

    /// Adaptive quadrature failed to converge to the requested tolerance.
    #[error("quadrature non-convergence: residual {residual:.3e} above tolerance {tol:.3e} after {panels} panels")]
    QuadratureNonConvergence { residual: f64, tol: f64, panels: usize },

    /// A hypergeometric or coefficient series failed its ratio-test tolerance.
    #[error("series non-convergence: {context}")]
    SeriesNonConvergence { context: String },

    /// A series or norm does not converge for the requested operation.
    #[error("divergent series: {context}")]
    DivergentSeries { context: String },

    /// The quadrature moment system is rank-deficient or inconsistent.
    #[error("infeasible moments: {context}")]
    InfeasibleMoments { context: String },

    /// Weight solve produced a negative weight; the geometry is too irregular
    /// for the requested exactness degree. Callers should lower L.
    #[error("negative weight {weight:.3e} at center {index} for exactness degree L = {degree}")]
    NegativeWeight { index: usize, weight: f64, degree: usize },

    /// A linear system is numerically singular / positive-semidefinite.
    #[error("singular system: {context} (smallest eigenvalue estimate {lambda_min:.3e})")]
    SingularSystem { context: String, lambda_min: f64 },

    /// A kernel coefficient needed for deconvolution vanishes.
    #[error("zero coefficient φ̂({ell}) = 0: conditionally positive definite kernel without continuation")]
    ZeroCoefficient { ell: usize },

    /// Quadrature exactness degree is insufficient for a frame identity.
    #[error("degree overflow: rule exact on degree {have} but the construction needs {need}")]
    DegreeOverflow { have: usize, need: usize },

    /// Rate fitting needs at least 3 usable levels.
    #[error("fit unstable: {usable} usable levels (need at least 3)")]
    FitUnstable { usable: usize },

    /// A Besov boundary verdict is too close to call.
    #[error("inconclusive trend: fitted exponent {fitted:.4} within {margin:.4} of r = {r:.4}")]
    InconclusiveTrend { fitted: f64, r: f64, margin: f64 },

    /// No tail-domination exponent m ≤ 8 certifies the kernel.
    #[error("condition failed: no m ≤ {m_max} yields a bounded tail ratio profile")]
    ConditionFailed { m_max: usize },

    /// Generic input validation failure.
    #[error("invalid parameter: {context}")]
    InvalidParameter { context: String },

    /// Filesystem or serialization failure in report writers.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that reject inputs before numeric work starts.
    /// The CLI maps these to exit code 2, numeric failures to exit code 1.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DuplicatePoints { .. }
                | Error::UnsupportedDimension { .. }
                | Error::InvalidPerturbation { .. }
                | Error::InvalidParameter { .. }
        )
    }

    pub(crate) fn invalid(context: impl Into<String>) -> Self {
        Error::InvalidParameter { context: context.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
