use super::cones::classify_cone;
use super::InfluenceSet;
use crate::geometry::Point3;
use crate::spatial::SpatialIndex;

/// Neighbors examined by [`select_oct`].
pub const OCT_CLOUD: usize = 100;

/// The center and the closest node in each of the 16 half-octants, taken from
/// its 100 nearest neighbors. Members after the center are ordered by
/// distance.
pub fn select_oct(center: usize, index: &SpatialIndex) -> InfluenceSet {
    let zeta = index.point(center);
    let mut taken = [false; 16];
    let mut members = vec![center];
    for nb in index.k_nearest(zeta, OCT_CLOUD, true) {
        let Ok(cone) = classify_cone(index.point(nb.index) - zeta, 2) else {
            continue;
        };
        if !taken[cone] {
            taken[cone] = true;
            members.push(nb.index);
        }
    }
    InfluenceSet { members }
}

/// The center and its `k - 1` nearest nodes.
pub fn select_knear(center: usize, index: &SpatialIndex, k: usize) -> InfluenceSet {
    let zeta = index.point(center);
    let mut members = vec![center];
    if k > 1 {
        members.extend(index.k_nearest(zeta, k - 1, true).into_iter().map(|n| n.index));
    }
    InfluenceSet { members }
}

/// The 7-point star `center, +x, -x, +y, -y, +z, -z` at spacing `h`, if all
/// six neighbors are interior nodes.
pub fn select_grid_7star(center: usize, index: &SpatialIndex, h: f64) -> Option<InfluenceSet> {
    let zeta = index.point(center);
    let offsets = [
        Point3::new(h, 0.0, 0.0),
        Point3::new(-h, 0.0, 0.0),
        Point3::new(0.0, h, 0.0),
        Point3::new(0.0, -h, 0.0),
        Point3::new(0.0, 0.0, h),
        Point3::new(0.0, 0.0, -h),
    ];
    let mut members = Vec::with_capacity(7);
    members.push(center);
    for off in offsets {
        let nb = index.lattice_neighbor(zeta, off, h)?;
        if !index.is_interior(nb) {
            return None;
        }
        members.push(nb);
    }
    Some(InfluenceSet { members })
}
