//! Positive-weight quadrature on the sphere from scattered centers, product
//! grid norms, and kernel-sum estimators tied to the center geometry.

mod mz;
mod norms;
mod rule;

pub use mz::{mz_discrepancy, offdiag_kernel_sum};
pub use norms::lp_norm_on_grid;
pub use rule::{
    build_rule, build_rule_backoff, build_rule_with, gauss_product_rule, QuadratureRule,
    RuleOptions,
};
