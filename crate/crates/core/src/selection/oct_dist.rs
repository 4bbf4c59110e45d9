//! Octant-based selection with distance control.
//!
//! Stage I collects up to `nu = n / s` nearest nodes in each of the `8 s`
//! cones around the center, taken from the `m - 1` nearest neighbors. If that
//! already gives at most `k - 1` candidates they are returned as they are.
//! Stage II seeds the set with the nearest candidate of every nonempty
//! octant, then sweeps the remaining candidates by increasing distance and
//! admits those at least `rho` away from everything selected so far,
//! shrinking `rho` by the factor `delta` after each sweep until `k - 1`
//! nodes are selected.

use super::cones::classify_cone;
use super::InfluenceSet;
use crate::error::{Error, Result};
use crate::spatial::{Neighbor, SpatialIndex};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OctDistParams {
    /// Size of the initial cloud, center included.
    pub m: usize,
    /// Target influence-set size, center included.
    pub k: usize,
    /// Octant subdivisions (1, 2 or 3).
    pub s: usize,
    /// Candidates per octant; a multiple of `s`.
    pub n: usize,
    /// Standard distance tolerance in (0, 1).
    pub delta: f64,
}

impl Default for OctDistParams {
    fn default() -> Self {
        OctDistParams {
            m: 100,
            k: 17,
            s: 1,
            n: 3,
            delta: 0.9,
        }
    }
}

impl OctDistParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(1..=3).contains(&self.s) {
            return Err(Error::invalid(format!("s must be 1, 2 or 3, got {}", self.s)));
        }
        if self.n == 0 || self.n % self.s != 0 {
            return Err(Error::invalid(format!(
                "n = {} must be a positive multiple of s = {}",
                self.n, self.s
            )));
        }
        if self.k < 2 {
            return Err(Error::invalid(format!("k must be at least 2, got {}", self.k)));
        }
        if self.m <= self.k {
            return Err(Error::invalid(format!("m = {} must exceed k = {}", self.m, self.k)));
        }
        Ok(())
    }
}

/// One node admitted during a distance sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Admission {
    pub node: usize,
    pub sweep: usize,
    /// Separation threshold in force when the node was admitted.
    pub rho: f64,
    /// Distance to the closest previously selected node.
    pub separation: f64,
    pub dist_to_center: f64,
}

/// Bookkeeping of one run, used to check the algorithm's invariants.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OctDistTrace {
    pub rho_initial: f64,
    pub candidates: usize,
    pub early_stop: bool,
    pub seeds: Vec<usize>,
    pub admissions: Vec<Admission>,
}

pub fn select_oct_dist(center: usize, index: &SpatialIndex, params: &OctDistParams) -> Result<InfluenceSet> {
    select_oct_dist_traced(center, index, params).map(|(set, _)| set)
}

pub fn select_oct_dist_traced(
    center: usize,
    index: &SpatialIndex,
    params: &OctDistParams,
) -> Result<(InfluenceSet, OctDistTrace)> {
    params.validate()?;
    let zeta = index.point(center);
    let cloud = index.k_nearest(zeta, params.m - 1, true);
    if cloud.len() < 6 {
        return Err(Error::TooFewNeighbors {
            node: center,
            found: cloud.len(),
            needed: 6,
        });
    }
    let mut trace = OctDistTrace {
        rho_initial: params.delta / 6.0 * cloud[..6].iter().map(|n| n.dist).sum::<f64>(),
        ..Default::default()
    };

    // Stage I: at most nu nearest per cone; `cloud` is already sorted.
    let nu = params.n / params.s;
    let mut per_cone = vec![0usize; 8 * params.s];
    let mut octants: Vec<Vec<Neighbor>> = vec![Vec::new(); 8];
    let mut candidates: Vec<Neighbor> = Vec::new();
    for nb in &cloud {
        let cone = classify_cone(index.point(nb.index) - zeta, params.s)?;
        if per_cone[cone] < nu {
            per_cone[cone] += 1;
            octants[cone / params.s].push(*nb);
            candidates.push(*nb);
        }
    }
    trace.candidates = candidates.len();
    if candidates.len() < params.k {
        trace.early_stop = true;
        let members = std::iter::once(center)
            .chain(candidates.iter().map(|n| n.index))
            .collect();
        return Ok((InfluenceSet { members }, trace));
    }

    // Stage II
    let target = params.k - 1;
    let mut seeds: Vec<Neighbor> = octants.iter().filter_map(|o| o.first().copied()).collect();
    if seeds.len() > target {
        seeds.sort_by(|a, b| a.dist.total_cmp(&b.dist).then(a.index.cmp(&b.index)));
        seeds.truncate(target);
    }
    let mut selected: Vec<usize> = seeds.iter().map(|n| n.index).collect();
    trace.seeds = selected.clone();
    let mut remaining: Vec<Neighbor> = candidates
        .into_iter()
        .filter(|c| !selected.contains(&c.index))
        .collect();

    let mut rho = trace.rho_initial;
    let mut sweep = 0;
    while selected.len() < target {
        let mut admitted_any = false;
        let mut i = 0;
        while i < remaining.len() && selected.len() < target {
            let cand = remaining[i];
            let p = index.point(cand.index);
            let separation = selected
                .iter()
                .map(|&s| p.dist(index.point(s)))
                .fold(f64::INFINITY, f64::min);
            if separation >= rho {
                selected.push(cand.index);
                trace.admissions.push(Admission {
                    node: cand.index,
                    sweep,
                    rho,
                    separation,
                    dist_to_center: cand.dist,
                });
                remaining.remove(i);
                admitted_any = true;
            } else {
                i += 1;
            }
        }
        rho *= params.delta;
        sweep += 1;
        if !admitted_any && rho < f64::MIN_POSITIVE {
            // only coincident candidates are left
            selected.extend(remaining.iter().take(target - selected.len()).map(|c| c.index));
            break;
        }
    }
    let members = std::iter::once(center).chain(selected).collect();
    Ok((InfluenceSet { members }, trace))
}
