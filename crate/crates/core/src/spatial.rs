//! Exact k-nearest-neighbor search over a node set.
//!
//! A median-split kd-tree with leaves of at most 16 points. Results are
//! ordered by ascending distance, with exact ties broken by ascending global
//! node index, so repeated queries are fully deterministic.

use crate::error::{Error, Result};
use crate::geometry::{NodeSet, Point3};

const LEAF_SIZE: usize = 16;
/// Nodes closer than this to the query are treated as the query itself.
pub const SELF_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist: f64,
}

#[derive(Debug, Clone)]
enum KdNode {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<Point3>,
    n_interior: usize,
    order: Vec<usize>,
    nodes: Vec<KdNode>,
}

impl SpatialIndex {
    pub fn build(nodes: &NodeSet) -> Result<Self> {
        Self::from_points(nodes.points().collect(), nodes.n_interior())
    }

    /// Index over `points`, of which the first `n_interior` are interior.
    pub fn from_points(points: Vec<Point3>, n_interior: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("cannot index an empty node set"));
        }
        let mut index = SpatialIndex {
            order: (0..points.len()).collect(),
            points,
            n_interior,
            nodes: Vec::new(),
        };
        index.build_range(0, index.points.len());
        Ok(index)
    }

    fn build_range(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(KdNode::Leaf { start, end });
            return id;
        }
        let slice = &self.order[start..end];
        let mut lo = self.points[slice[0]];
        let mut hi = lo;
        for &i in slice {
            lo = lo.min(self.points[i]);
            hi = hi.max(self.points[i]);
        }
        let ext = hi - lo;
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        let mid = (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
        });
        let value = self.points[self.order[start + mid]][axis];
        self.nodes.push(KdNode::Leaf { start, end });
        let left = self.build_range(start, start + mid);
        let right = self.build_range(start + mid, end);
        self.nodes[id] = KdNode::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn is_interior(&self, index: usize) -> bool {
        index < self.n_interior
    }

    pub fn point(&self, index: usize) -> Point3 {
        self.points[index]
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    /// The `k` nearest nodes to `query`, or all of them if fewer exist. With
    /// `exclude_self`, nodes within [`SELF_TOLERANCE`] of the query are skipped.
    pub fn k_nearest(&self, query: Point3, k: usize, exclude_self: bool) -> Vec<Neighbor> {
        let mut best = Best {
            k,
            items: Vec::with_capacity(k.min(self.points.len()) + 1),
        };
        if k > 0 {
            let skip2 = if exclude_self {
                SELF_TOLERANCE * SELF_TOLERANCE
            } else {
                -1.0
            };
            self.search(0, query, skip2, &mut best);
        }
        best.items
            .into_iter()
            .map(|(d2, index)| Neighbor { index, dist: d2.sqrt() })
            .collect()
    }

    fn search(&self, node: usize, q: Point3, skip2: f64, best: &mut Best) {
        match self.nodes[node] {
            KdNode::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = q.dist2(self.points[i]);
                    if d2 >= skip2 {
                        best.offer(d2, i);
                    }
                }
            }
            KdNode::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, skip2, best);
                if diff * diff <= best.worst() {
                    self.search(far, q, skip2, best);
                }
            }
        }
    }

    /// The node within `1e-9 h` of `p + offset`, if any.
    pub fn lattice_neighbor(&self, p: Point3, offset: Point3, h: f64) -> Option<usize> {
        let target = p + offset;
        self.k_nearest(target, 1, false)
            .first()
            .filter(|n| n.dist <= 1e-9 * h)
            .map(|n| n.index)
    }
}

struct Best {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl Best {
    fn worst(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.items.len() - 1].0
        }
    }

    fn offer(&mut self, d2: f64, index: usize) {
        let key = (d2, index);
        let less = |a: &(f64, usize), b: &(f64, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
        if self.items.len() == self.k {
            if !less(&key, self.items.last().unwrap()) {
                return;
            }
            self.items.pop();
        }
        let pos = self.items.partition_point(|x| less(x, &key));
        self.items.insert(pos, key);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_corners() -> NodeSet {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Point3::new(
                (i & 1) as f64,
                ((i >> 1) & 1) as f64,
                ((i >> 2) & 1) as f64,
            ));
        }
        NodeSet::new(pts, vec![])
    }

    #[test]
    fn single_node() {
        let idx = SpatialIndex::build(&NodeSet::new(vec![Point3::new(1.0, 2.0, 3.0)], vec![])).unwrap();
        let r = idx.k_nearest(Point3::ORIGIN, 1, false);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].index, 0);
    }

    #[test]
    fn empty_rejected() {
        assert!(SpatialIndex::build(&NodeSet::default()).is_err());
    }

    #[test]
    fn equidistant_corners_by_index() {
        let idx = SpatialIndex::build(&cube_corners()).unwrap();
        let r = idx.k_nearest(Point3::new(0.5, 0.5, 0.5), 8, false);
        assert_eq!(
            r.iter().map(|n| n.index).collect::<Vec<_>>(),
            (0..8).collect::<Vec<_>>()
        );
        let r = idx.k_nearest(Point3::new(0.5, 0.5, 0.5), 3, false);
        assert_eq!(r.iter().map(|n| n.index).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn k_exceeds_count_and_self_exclusion() {
        let idx = SpatialIndex::build(&cube_corners()).unwrap();
        assert_eq!(idx.k_nearest(Point3::ORIGIN, 50, false).len(), 8);
        let r = idx.k_nearest(Point3::ORIGIN, 50, true);
        assert_eq!(r.len(), 7);
        assert!(r.iter().all(|n| n.index != 0));
        assert!(idx.k_nearest(Point3::ORIGIN, 0, false).is_empty());
    }

    #[test]
    fn lattice_lookup_tolerance() {
        let h = 0.1;
        let pts = vec![
            Point3::ORIGIN,
            Point3::new(h, 0.0, 0.0),
            Point3::new(0.0, h + 1e-6 * h, 0.0),
        ];
        let idx = SpatialIndex::build(&NodeSet::new(pts, vec![])).unwrap();
        assert_eq!(
            idx.lattice_neighbor(Point3::ORIGIN, Point3::new(h, 0.0, 0.0), h),
            Some(1)
        );
        assert_eq!(idx.lattice_neighbor(Point3::ORIGIN, Point3::new(0.0, h, 0.0), h), None);
        assert_eq!(idx.lattice_neighbor(Point3::ORIGIN, Point3::new(0.0, 0.0, h), h), None);
    }
}
