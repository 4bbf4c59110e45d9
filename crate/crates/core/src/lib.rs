//! Meshless finite difference (mFD) discretization of the Poisson equation
//! with Dirichlet boundary conditions on 3D domains.
//!
//! The pipeline is: generate or load a [`NodeSet`](geometry::NodeSet), build a
//! [`SpatialIndex`](spatial::SpatialIndex), choose an influence set for every
//! interior node ([`selection`]), compute Laplacian weights ([`weights`]),
//! assemble and solve the sparse system ([`linsys`]) and measure the result
//! ([`diagnostics`]). The [`experiment`] module drives refinement sweeps from a
//! config file and backs the `mfd3d` binary.

// NaN must fail the `!(x <= tol)` checks; dense kernels index by position
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod io;
pub mod linsys;
pub mod pipeline;
pub mod selection;
pub mod spatial;
pub mod weights;

mod dense;

pub use error::{Error, Result};
pub use geometry::{Domain, NodeSet, Point3};
