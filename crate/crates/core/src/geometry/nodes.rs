use std::collections::HashMap;

use super::domain::Domain;
use super::halton::Halton3;
use super::point::Point3;
use crate::error::{Error, Result};

/// Minimum distance from the boundary, as a fraction of the spacing, for
/// generated interior nodes.
pub const CLEARANCE: f64 = 0.25;

const HALTON_PILOT: u64 = 10_000;

/// Discretization nodes. Global node indices put the interior nodes first,
/// followed by the boundary nodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeSet {
    pub interior: Vec<Point3>,
    pub boundary: Vec<Point3>,
}

impl NodeSet {
    pub fn new(interior: Vec<Point3>, boundary: Vec<Point3>) -> Self {
        NodeSet { interior, boundary }
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn len(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_interior(&self, index: usize) -> bool {
        index < self.interior.len()
    }

    pub fn point(&self, index: usize) -> Point3 {
        if index < self.interior.len() {
            self.interior[index]
        } else {
            self.boundary[index - self.interior.len()]
        }
    }

    /// All nodes in global index order.
    pub fn points(&self) -> impl Iterator<Item = Point3> + '_ {
        self.interior.iter().chain(self.boundary.iter()).copied()
    }

    /// Interior nodes from `generate`, plus boundary nodes obtained by
    /// projecting interior nodes closer than `h` to the boundary.
    pub fn with_projected_boundary(domain: &Domain, interior: Vec<Point3>, h: f64) -> Result<Self> {
        let boundary = project_boundary_nodes(domain, &interior, h)?;
        Ok(NodeSet { interior, boundary })
    }
}

fn check_spacing(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("spacing must be positive and finite, got {h}")))
    }
}

fn accept(domain: &Domain, p: Point3, h: f64) -> Result<bool> {
    Ok(domain.contains(p)? && domain.distance_to_boundary(p) >= CLEARANCE * h)
}

/// Lattice coordinate `i` along one axis: `lo + h (i + 1/2)`.
#[inline]
pub fn lattice_coord(lo: f64, h: f64, i: usize) -> f64 {
    lo + h * (i as f64 + 0.5)
}

/// Points of the lattice `bbox.min + h/2 + h Z^3` that lie inside the domain
/// at distance at least `h/4` from the boundary. Ordered with x varying
/// fastest.
pub fn generate_grid_nodes(domain: &Domain, h: f64) -> Result<Vec<Point3>> {
    check_spacing(h)?;
    let bbox = domain.bbox();
    let count = |lo: f64, hi: f64| {
        let mut n = 0;
        while lattice_coord(lo, h, n) <= hi {
            n += 1;
        }
        n
    };
    let (nx, ny, nz) = (
        count(bbox.min.x, bbox.max.x),
        count(bbox.min.y, bbox.max.y),
        count(bbox.min.z, bbox.max.z),
    );
    let mut out = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let p = Point3::new(
                    lattice_coord(bbox.min.x, h, i),
                    lattice_coord(bbox.min.y, h, j),
                    lattice_coord(bbox.min.z, h, k),
                );
                if accept(domain, p, h)? {
                    out.push(p);
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyNodeSet(h));
    }
    Ok(out)
}

/// Target node count `round(V / h^3)` with the volume estimated from the
/// fraction of the first 10000 Halton points of the bounding box that fall
/// inside the domain.
pub fn halton_target_count(domain: &Domain, h: f64) -> Result<usize> {
    check_spacing(h)?;
    let bbox = domain.bbox();
    let e = bbox.extent();
    let mut inside = 0u64;
    for idx in 1..=HALTON_PILOT {
        let u = Halton3::point(idx);
        let p = bbox.min + Point3::new(u[0] * e.x, u[1] * e.y, u[2] * e.z);
        if domain.contains(p)? {
            inside += 1;
        }
    }
    let volume = inside as f64 / HALTON_PILOT as f64 * bbox.volume();
    Ok((volume / h.powi(3)).round() as usize)
}

/// Halton nodes with target average spacing `h`, cleared of points outside
/// the domain or closer than `h/4` to its boundary.
pub fn generate_halton_nodes(domain: &Domain, h: f64) -> Result<Vec<Point3>> {
    let target = halton_target_count(domain, h)?;
    generate_halton_count(domain, h, target)
}

/// The first `target` accepted Halton points; a prefix of any longer run.
pub fn generate_halton_count(domain: &Domain, h: f64, target: usize) -> Result<Vec<Point3>> {
    check_spacing(h)?;
    if target == 0 {
        return Err(Error::EmptyNodeSet(h));
    }
    let bbox = domain.bbox();
    let e = bbox.extent();
    let mut out = Vec::with_capacity(target);
    let zero_check = 10 * target as u64;
    let hard_cap = 1000 * target as u64 + HALTON_PILOT;
    for (draw, u) in (1u64..).zip(Halton3::new()) {
        let p = bbox.min + Point3::new(u[0] * e.x, u[1] * e.y, u[2] * e.z);
        if accept(domain, p, h)? {
            out.push(p);
            if out.len() == target {
                return Ok(out);
            }
        }
        if (draw >= zero_check && out.is_empty()) || draw >= hard_cap {
            break;
        }
    }
    Err(Error::EmptyNodeSet(h))
}

/// Projects every interior node closer than `h` to the boundary onto it.
/// Projections within `1e-6 h` of an earlier one are merged.
pub fn project_boundary_nodes(domain: &Domain, interior: &[Point3], h: f64) -> Result<Vec<Point3>> {
    check_spacing(h)?;
    let merge = 1e-6 * h;
    let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let cell_of = |p: Point3| {
        [
            (p.x / merge).floor() as i64,
            (p.y / merge).floor() as i64,
            (p.z / merge).floor() as i64,
        ]
    };
    let mut out: Vec<Point3> = Vec::new();
    for &p in interior {
        if domain.distance_to_boundary(p) >= h {
            continue;
        }
        let q = domain.project_to_boundary(p)?;
        let c = cell_of(q);
        let mut duplicate = false;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if ids.iter().any(|&i| out[i].dist(q) < merge) {
                            duplicate = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if !duplicate {
            cells.entry(c).or_default().push(out.len());
            out.push(q);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_clearance_and_empty() {
        let d = Domain::unit_ball();
        let nodes = generate_grid_nodes(&d, 0.5).unwrap();
        assert!(!nodes.is_empty());
        assert!(nodes.iter().all(|p| p.norm() <= 1.0 - 0.125));
        assert!(matches!(generate_grid_nodes(&d, 10.0), Err(Error::EmptyNodeSet(_))));
        assert!(generate_grid_nodes(&d, -1.0).is_err());
    }

    #[test]
    fn grid_count_matches_enumeration() {
        let d = Domain::unit_ball();
        let h = 0.1;
        let nodes = generate_grid_nodes(&d, h).unwrap();
        // direct enumeration of the lattice -1 + h(i + 1/2)
        let mut expected = 0;
        for i in 0..20 {
            for j in 0..20 {
                for k in 0..20 {
                    let c = |i: usize| -1.0 + h * (i as f64 + 0.5);
                    let r = (c(i).powi(2) + c(j).powi(2) + c(k).powi(2)).sqrt();
                    if r < 1.0 && 1.0 - r >= 0.25 * h {
                        expected += 1;
                    }
                }
            }
        }
        assert_eq!(nodes.len(), expected);
        let estimate = 4.0 / 3.0 * std::f64::consts::PI * (1.0f64 - 0.025).powi(3) / h.powi(3);
        assert!(
            (nodes.len() as f64 - estimate).abs() <= 0.1 * estimate,
            "{} vs {estimate}",
            nodes.len()
        );
    }

    #[test]
    fn halton_clearance() {
        let d = Domain::unit_ball();
        let nodes = generate_halton_nodes(&d, 0.3).unwrap();
        assert!(nodes.iter().all(|p| p.norm() <= 1.0 - 0.075));
    }

    #[test]
    fn halton_count_near_volume_estimate() {
        let d = Domain::unit_ball();
        let nodes = generate_halton_nodes(&d, 0.2).unwrap();
        let expected = (4.0 / 3.0 * std::f64::consts::PI / 0.008f64).round();
        assert!(((nodes.len() as f64) - expected).abs() <= 0.15 * expected);
    }

    #[test]
    fn halton_prefix_stable() {
        let d = Domain::unit_ball();
        let a = generate_halton_count(&d, 0.2, 100).unwrap();
        let b = generate_halton_count(&d, 0.2, 250).unwrap();
        assert_eq!(a[..], b[..100]);
    }

    #[test]
    fn projection_examples() {
        let d = Domain::unit_ball();
        let out = project_boundary_nodes(&d, &[Point3::new(0.5, 0.0, 0.0)], 1.0).unwrap();
        assert_eq!(out, vec![Point3::new(1.0, 0.0, 0.0)]);
        let out = project_boundary_nodes(&d, &[Point3::ORIGIN], 0.5).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn projection_merges_duplicates() {
        let d = Domain::unit_ball();
        let pts = [Point3::new(0.5, 0.0, 0.0), Point3::new(0.6, 0.0, 0.0)];
        let out = project_boundary_nodes(&d, &pts, 1.0).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn projected_grid_boundary_on_sphere() {
        let d = Domain::unit_ball();
        let grid = generate_grid_nodes(&d, 0.2).unwrap();
        let bnd = project_boundary_nodes(&d, &grid, 0.2).unwrap();
        assert!(!bnd.is_empty());
        assert!(bnd.iter().all(|p| (p.norm() - 1.0).abs() <= 1e-9));
    }
}
