//! Domains, surface and volume meshes, and node generation.

mod domain;
mod halton;
mod nodes;
mod point;
mod stl;
mod tetmesh;

pub use domain::{box_mesh, closest_point_on_triangle, Domain, MeshDomain};
pub use halton::{radical_inverse, Halton3};
pub use nodes::{
    generate_grid_nodes, generate_halton_count, generate_halton_nodes, halton_target_count, lattice_coord,
    project_boundary_nodes, NodeSet, CLEARANCE,
};
pub use point::{Aabb, Point3};
pub use stl::{parse_stl, write_binary_stl, SurfaceMesh};
pub use tetmesh::{mesh_quality_stats, signed_volume, tet_gamma, QualityStats, TetMesh};
