//! Numerical differentiation weights for the Laplacian.

mod poly;
mod rbf;
mod rbffd;

pub use poly::PolyBasis;
pub use rbf::PolyharmonicRbf;
pub use rbffd::{
    classical_7star_weights, compute_rbffd_weights, exactness_residual, seven_star_offsets, WeightFailure,
    EXACTNESS_TOL, RANK_TOL, RCOND_MIN,
};

use crate::selection::InfluenceSet;

/// An influence set together with its Laplacian weights (units length^-2),
/// aligned with `set.members`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedStencil {
    pub set: InfluenceSet,
    pub weights: Vec<f64>,
}

impl WeightedStencil {
    pub fn center(&self) -> usize {
        self.set.center()
    }

    pub fn len(&self) -> usize {
        self.set.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.members.is_empty()
    }
}
