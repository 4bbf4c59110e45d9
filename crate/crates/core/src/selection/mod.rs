//! Stencil selection: choosing the influence set of every interior node.

mod basic;
mod cones;
mod oct_dist;
mod pqr;
mod tet;

pub use basic::{select_grid_7star, select_knear, select_oct, OCT_CLOUD};
pub use cones::classify_cone;
pub use oct_dist::{select_oct_dist, select_oct_dist_traced, Admission, OctDistParams, OctDistTrace};
pub(crate) use pqr::try_select_pqr;
pub use pqr::{select_pqr, PQR_CLOUD};
pub use tet::TetSelector;

/// Global node indices of a stencil; the first member is the center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceSet {
    pub members: Vec<usize>,
}

impl InfluenceSet {
    pub fn center(&self) -> usize {
        self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True if no member appears twice.
    pub fn is_distinct(&self) -> bool {
        let mut sorted = self.members.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }
}
