use std::collections::BTreeSet;

use super::InfluenceSet;
use crate::error::{Error, Result};
use crate::geometry::TetMesh;
use crate::spatial::SpatialIndex;

/// Edge adjacency of a tetrahedral mesh, expressed in global node indices.
#[derive(Debug, Clone)]
pub struct TetSelector {
    neighbors: Vec<Option<Vec<usize>>>,
}

impl TetSelector {
    /// `node_of_vertex[v]` is the global node index of mesh vertex `v`.
    pub fn new(mesh: &TetMesh, node_of_vertex: &[usize]) -> Result<Self> {
        if node_of_vertex.len() != mesh.vertices.len() {
            return Err(Error::invalid("node map length must equal the mesh vertex count"));
        }
        let n_nodes = node_of_vertex.iter().map(|&i| i + 1).max().unwrap_or(0);
        let mut sets: Vec<Option<BTreeSet<usize>>> = vec![None; n_nodes];
        for tet in &mesh.tets {
            let nodes = tet.map(|v| node_of_vertex[v]);
            for &a in &nodes {
                let set = sets[a].get_or_insert_with(BTreeSet::new);
                set.extend(nodes.iter().copied().filter(|&b| b != a));
            }
        }
        Ok(TetSelector {
            neighbors: sets.into_iter().map(|s| s.map(|s| s.into_iter().collect())).collect(),
        })
    }

    /// Matches every mesh vertex to the node of `index` at the same position,
    /// within `tol`.
    pub fn matching(mesh: &TetMesh, index: &SpatialIndex, tol: f64) -> Result<Self> {
        let mut map = Vec::with_capacity(mesh.vertices.len());
        for (v, &p) in mesh.vertices.iter().enumerate() {
            match index.k_nearest(p, 1, false).first() {
                Some(nb) if nb.dist <= tol => map.push(nb.index),
                _ => {
                    return Err(Error::invalid(format!(
                        "mesh vertex {v} at ({}, {}, {}) matches no node",
                        p.x, p.y, p.z
                    )))
                }
            }
        }
        Self::new(mesh, &map)
    }

    /// The center and every node joined to it by a mesh edge, in ascending
    /// index order.
    pub fn select(&self, center: usize) -> Result<InfluenceSet> {
        match self.neighbors.get(center) {
            Some(Some(adj)) => {
                let mut members = Vec::with_capacity(adj.len() + 1);
                members.push(center);
                members.extend_from_slice(adj);
                Ok(InfluenceSet { members })
            }
            _ => Err(Error::NotInMesh(center)),
        }
    }
}
