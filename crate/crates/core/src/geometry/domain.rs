use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::point::{Aabb, Point3};
use super::stl::{parse_stl, SurfaceMesh};
use crate::error::{Error, Result};

/// Tolerance (relative to barycentric units, or to the bounding-box diagonal
/// for lengths) under which a ray hit is treated as ambiguous.
const RAY_EPS: f64 = 1e-10;
const MAX_RAY_RETRIES: usize = 16;

#[derive(Debug, Clone)]
pub struct MeshDomain {
    pub mesh: SurfaceMesh,
    pub bbox: Aabb,
    /// Seed for the randomized ray directions used on ambiguous hits.
    pub seed: u64,
}

/// The computational domain: an analytic ball or the interior of a closed
/// triangle surface.
#[derive(Debug, Clone)]
pub enum Domain {
    Ball { center: Point3, radius: f64 },
    Mesh(Box<MeshDomain>),
}

impl Domain {
    pub fn ball(center: Point3, radius: f64) -> Result<Domain> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::invalid(format!(
                "ball needs a finite positive radius, got {radius}"
            )));
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn unit_ball() -> Domain {
        Domain::Ball {
            center: Point3::ORIGIN,
            radius: 1.0,
        }
    }

    pub fn from_mesh(mesh: SurfaceMesh) -> Domain {
        let bbox = mesh.bbox();
        Domain::Mesh(Box::new(MeshDomain { mesh, bbox, seed: 0 }))
    }

    pub fn from_stl_bytes(bytes: &[u8]) -> Result<Domain> {
        Ok(Domain::from_mesh(parse_stl(bytes)?))
    }

    pub fn from_stl_file(path: impl AsRef<Path>) -> Result<Domain> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Domain::from_stl_bytes(&bytes)
    }

    /// Sets the seed of the ray-retry generator (no effect on balls).
    pub fn with_seed(mut self, seed: u64) -> Domain {
        if let Domain::Mesh(m) = &mut self {
            m.seed = seed;
        }
        self
    }

    pub fn bbox(&self) -> Aabb {
        match self {
            Domain::Ball { center, radius } => {
                let r = Point3::new(*radius, *radius, *radius);
                Aabb {
                    min: *center - r,
                    max: *center + r,
                }
            }
            Domain::Mesh(m) => m.bbox,
        }
    }

    /// Whether `p` lies strictly inside the domain.
    pub fn contains(&self, p: Point3) -> Result<bool> {
        match self {
            Domain::Ball { center, radius } => Ok(p.dist(*center) < *radius),
            Domain::Mesh(m) => m.contains(p),
        }
    }

    pub fn distance_to_boundary(&self, p: Point3) -> f64 {
        match self {
            Domain::Ball { center, radius } => (radius - p.dist(*center)).abs(),
            Domain::Mesh(m) => m.closest_point(p).0,
        }
    }

    /// Orthogonal projection of `p` onto the boundary.
    pub fn project_to_boundary(&self, p: Point3) -> Result<Point3> {
        match self {
            Domain::Ball { center, radius } => {
                let d = p - *center;
                let r = d.norm();
                if r == 0.0 {
                    return Err(Error::ProjectionUndefined);
                }
                Ok(*center + d * (radius / r))
            }
            Domain::Mesh(m) => Ok(m.closest_point(p).1),
        }
    }
}

impl MeshDomain {
    fn contains(&self, p: Point3) -> Result<bool> {
        if p.x < self.bbox.min.x
            || p.y < self.bbox.min.y
            || p.z < self.bbox.min.z
            || p.x > self.bbox.max.x
            || p.y > self.bbox.max.y
            || p.z > self.bbox.max.z
        {
            return Ok(false);
        }
        let mut dir = Point3::new(1.0, 0.0, 0.0);
        let mut rng: Option<ChaCha8Rng> = None;
        for _ in 0..=MAX_RAY_RETRIES {
            match self.count_crossings(p, dir) {
                RayOutcome::Crossings(n) => return Ok(n % 2 == 1),
                RayOutcome::OnSurface => return Ok(false),
                RayOutcome::Ambiguous => {
                    let rng = rng.get_or_insert_with(|| ChaCha8Rng::seed_from_u64(self.query_seed(p)));
                    dir = random_unit(rng);
                }
            }
        }
        Err(Error::RayRetryExhausted(MAX_RAY_RETRIES))
    }

    fn query_seed(&self, p: Point3) -> u64 {
        self.seed ^ p.x.to_bits().rotate_left(7) ^ p.y.to_bits().rotate_left(29) ^ p.z.to_bits().rotate_left(47)
    }

    fn count_crossings(&self, origin: Point3, dir: Point3) -> RayOutcome {
        let len_tol = RAY_EPS * self.bbox.diagonal();
        let mut crossings = 0;
        for t in 0..self.mesh.triangles.len() {
            let [a, b, c] = self.mesh.triangle(t);
            let e1 = b - a;
            let e2 = c - a;
            let pvec = dir.cross(e2);
            let det = e1.dot(pvec);
            let normal = e1.cross(e2);
            if det.abs() <= RAY_EPS * normal.norm() {
                // ray parallel to the facet plane; only a problem if it lies in it
                let plane_dist = (origin - a).dot(normal).abs() / normal.norm();
                if plane_dist <= len_tol {
                    return RayOutcome::Ambiguous;
                }
                continue;
            }
            let inv = 1.0 / det;
            let tvec = origin - a;
            let u = tvec.dot(pvec) * inv;
            if !(-RAY_EPS..=1.0 + RAY_EPS).contains(&u) {
                continue;
            }
            let qvec = tvec.cross(e1);
            let v = dir.dot(qvec) * inv;
            if v < -RAY_EPS || u + v > 1.0 + RAY_EPS {
                continue;
            }
            let dist = e2.dot(qvec) * inv;
            if dist.abs() <= len_tol {
                return RayOutcome::OnSurface;
            }
            if dist < 0.0 {
                continue;
            }
            if u <= RAY_EPS || v <= RAY_EPS || u + v >= 1.0 - RAY_EPS {
                return RayOutcome::Ambiguous;
            }
            crossings += 1;
        }
        RayOutcome::Crossings(crossings)
    }

    /// Exact distance to the surface and the closest point; ties go to the
    /// lowest triangle index.
    pub fn closest_point(&self, p: Point3) -> (f64, Point3) {
        let mut best = (f64::INFINITY, p);
        for t in 0..self.mesh.triangles.len() {
            let (d2, q) = closest_point_on_triangle(p, self.mesh.triangle(t));
            if d2 < best.0 {
                best = (d2, q);
            }
        }
        (best.0.sqrt(), best.1)
    }
}

enum RayOutcome {
    Crossings(usize),
    OnSurface,
    Ambiguous,
}

fn random_unit(rng: &mut impl Rng) -> Point3 {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    Point3::new(s * phi.cos(), s * phi.sin(), z)
}

/// Squared distance from `p` to a triangle and the closest point, following
/// the Voronoi-region case analysis (vertex, edge, face).
pub fn closest_point_on_triangle(p: Point3, [a, b, c]: [Point3; 3]) -> (f64, Point3) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (p.dist2(a), a);
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (p.dist2(b), b);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        let q = a + ab * v;
        return (p.dist2(q), q);
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (p.dist2(c), c);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        let q = a + ac * w;
        return (p.dist2(q), q);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        let q = b + (c - b) * w;
        return (p.dist2(q), q);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    let q = a + ab * v + ac * w;
    (p.dist2(q), q)
}

/// Closed axis-aligned box `[lo, hi]` as 12 outward-oriented triangles.
pub fn box_mesh(lo: Point3, hi: Point3) -> SurfaceMesh {
    let corner = |i: usize| {
        Point3::new(
            if i & 1 == 0 { lo.x } else { hi.x },
            if i & 2 == 0 { lo.y } else { hi.y },
            if i & 4 == 0 { lo.z } else { hi.z },
        )
    };
    // quads listed counter-clockwise seen from outside
    let quads = [
        [0, 2, 3, 1], // z = lo
        [4, 5, 7, 6], // z = hi
        [0, 1, 5, 4], // y = lo
        [2, 6, 7, 3], // y = hi
        [0, 4, 6, 2], // x = lo
        [1, 3, 7, 5], // x = hi
    ];
    let soup: Vec<[Point3; 3]> = quads
        .iter()
        .flat_map(|q| {
            [
                [corner(q[0]), corner(q[1]), corner(q[2])],
                [corner(q[0]), corner(q[2]), corner(q[3])],
            ]
        })
        .collect();
    SurfaceMesh::from_triangles(&soup).expect("box is non-degenerate")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube() -> Domain {
        Domain::from_mesh(box_mesh(Point3::ORIGIN, Point3::new(1.0, 1.0, 1.0)))
    }

    #[test]
    fn ball_contains() {
        let d = Domain::unit_ball();
        assert!(d.contains(Point3::ORIGIN).unwrap());
        assert!(!d.contains(Point3::new(2.0, 0.0, 0.0)).unwrap());
        assert!(!d.contains(Point3::new(1.0, 0.0, 0.0)).unwrap());
    }

    #[test]
    fn ball_projection() {
        let d = Domain::unit_ball();
        let p = Point3::new(0.5, 0.0, 0.0);
        assert_eq!(d.distance_to_boundary(p), 0.5);
        assert_eq!(d.project_to_boundary(p).unwrap(), Point3::new(1.0, 0.0, 0.0));
        assert!(matches!(
            d.project_to_boundary(Point3::ORIGIN),
            Err(Error::ProjectionUndefined)
        ));
    }

    #[test]
    fn ball_rejects_bad_radius() {
        assert!(Domain::ball(Point3::ORIGIN, 0.0).is_err());
        assert!(Domain::ball(Point3::ORIGIN, f64::NAN).is_err());
    }

    #[test]
    fn cube_contains() {
        let d = unit_cube();
        assert!(d.contains(Point3::new(0.5, 0.5, 0.5)).unwrap());
        assert!(!d.contains(Point3::new(1.5, 0.5, 0.5)).unwrap());
        assert!(!d.contains(Point3::new(-0.1, 0.5, 0.5)).unwrap());
        // +x ray from here runs exactly along the diagonal edge of a face pair
        assert!(d.contains(Point3::new(0.25, 0.25, 0.25)).unwrap());
        assert!(d.contains(Point3::new(0.3, 0.5, 0.5)).unwrap());
    }

    #[test]
    fn cube_projection() {
        let d = unit_cube();
        let p = Point3::new(0.5, 0.5, 0.9);
        assert!((d.distance_to_boundary(p) - 0.1).abs() < 1e-15);
        let q = d.project_to_boundary(p).unwrap();
        assert!(q.dist(Point3::new(0.5, 0.5, 1.0)) < 1e-15);
    }

    #[test]
    fn closest_point_regions() {
        let tri = [Point3::ORIGIN, Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)];
        // vertex region
        let (d2, q) = closest_point_on_triangle(Point3::new(-1.0, -1.0, 0.0), tri);
        assert_eq!(q, tri[0]);
        assert_eq!(d2, 2.0);
        // edge region
        let (_, q) = closest_point_on_triangle(Point3::new(0.5, -1.0, 0.0), tri);
        assert_eq!(q, Point3::new(0.5, 0.0, 0.0));
        // hypotenuse
        let (_, q) = closest_point_on_triangle(Point3::new(1.0, 1.0, 0.0), tri);
        assert!(q.dist(Point3::new(0.5, 0.5, 0.0)) < 1e-15);
        // face region
        let (d2, q) = closest_point_on_triangle(Point3::new(0.2, 0.2, 3.0), tri);
        assert!(q.dist(Point3::new(0.2, 0.2, 0.0)) < 1e-15);
        assert!((d2 - 9.0).abs() < 1e-14);
    }
}
