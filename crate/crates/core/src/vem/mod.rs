//! Classical first-order virtual element kernels.

pub mod elastic;
pub mod thermal;

pub use elastic::{elastic_stiffness, thermal_force, vector_projection, VectorElementKernel, VectorProjection};
pub use thermal::{scalar_projection, thermal_stiffness, ScalarElementKernel, ScalarProjection};

use nalgebra::DMatrix;

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}
