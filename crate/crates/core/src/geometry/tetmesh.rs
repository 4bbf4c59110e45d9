use super::point::Point3;
use crate::error::{Error, Result};

/// Tetrahedral mesh whose vertices double as discretization nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    pub vertices: Vec<Point3>,
    /// Positively oriented vertex quadruples.
    pub tets: Vec<[usize; 4]>,
    pub boundary: Vec<bool>,
}

impl TetMesh {
    /// Validates indices and flips negatively oriented tetrahedra.
    pub fn new(vertices: Vec<Point3>, mut tets: Vec<[usize; 4]>, boundary: Vec<bool>) -> Result<Self> {
        if boundary.len() != vertices.len() {
            return Err(Error::invalid("boundary flag count must equal vertex count"));
        }
        for (t, tet) in tets.iter_mut().enumerate() {
            if let Some(&bad) = tet.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::invalid(format!("tet {t} references vertex {bad} out of range")));
            }
            let p = tet.map(|v| vertices[v]);
            if signed_volume(p) < 0.0 {
                tet.swap(2, 3);
            }
        }
        Ok(TetMesh {
            vertices,
            tets,
            boundary,
        })
    }

    pub fn tet_points(&self, t: usize) -> [Point3; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }
}

pub fn signed_volume([a, b, c, d]: [Point3; 4]) -> f64 {
    (b - a).dot((c - a).cross(d - a)) / 6.0
}

/// Inverse aspect ratio `2 sqrt(6) * inradius / diameter`, in [0, 1]; equal
/// to 1 for a regular tetrahedron and 0 for a flat one.
pub fn tet_gamma(p: [Point3; 4]) -> f64 {
    let volume = signed_volume(p).abs();
    if volume == 0.0 {
        return 0.0;
    }
    let mut diameter: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            diameter = diameter.max(p[i].dist(p[j]));
        }
    }
    let face = |a: Point3, b: Point3, c: Point3| 0.5 * (b - a).cross(c - a).norm();
    let area = face(p[0], p[1], p[2]) + face(p[0], p[1], p[3]) + face(p[0], p[2], p[3]) + face(p[1], p[2], p[3]);
    let inradius = 3.0 * volume / area;
    (2.0 * 6f64.sqrt() * inradius / diameter).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityStats {
    pub min: f64,
    pub mean: f64,
    /// Fractions of tetrahedra with gamma in (0,.25], (.25,.5], (.5,.75],
    /// (.75,1]; gamma = 0 is counted in the first bin.
    pub bins: [f64; 4],
    pub count: usize,
}

pub fn mesh_quality_stats(mesh: &TetMesh) -> Result<QualityStats> {
    if mesh.tets.is_empty() {
        return Err(Error::invalid("mesh has no tetrahedra"));
    }
    let mut min = f64::INFINITY;
    let mut sum = 0.0;
    let mut counts = [0usize; 4];
    for t in 0..mesh.tets.len() {
        let g = tet_gamma(mesh.tet_points(t));
        min = min.min(g);
        sum += g;
        let bin = if g <= 0.25 {
            0
        } else if g <= 0.5 {
            1
        } else if g <= 0.75 {
            2
        } else {
            3
        };
        counts[bin] += 1;
    }
    let n = mesh.tets.len() as f64;
    Ok(QualityStats {
        min,
        mean: sum / n,
        bins: counts.map(|c| c as f64 / n),
        count: mesh.tets.len(),
    })
}
