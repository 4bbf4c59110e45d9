//! Assembly and solution of the sparse interior system.

mod assemble;
mod bicgstab;
mod csr;
mod direct;
mod ilu;
pub mod normest;
mod rcm;

pub use assemble::{assemble, LinearProblem};
pub use bicgstab::{
    bicgstab, solve_iterative, IdentityPreconditioner, IterReport, IterStatus, Preconditioner, BREAKDOWN_TOL,
};
pub use csr::CsrMatrix;
pub use direct::{sparse_lu_solve, DirectSolver};
pub use ilu::Ilu0;
pub use normest::{onenormest, LinearOperator};
pub use rcm::{bandwidth, rcm_ordering};
