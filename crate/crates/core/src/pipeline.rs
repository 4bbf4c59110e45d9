//! One discretize-and-solve pass: stencils for every interior node, weights,
//! assembly, solve and error measurement.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::diagnostics::{evaluate_solution, Iterations, SolveReport, StencilStats};
use crate::error::{Error, Result};
use crate::geometry::{NodeSet, Point3, TetMesh};
use crate::linsys::{assemble, solve_iterative, sparse_lu_solve, DirectSolver, LinearProblem};
use crate::selection::{
    select_grid_7star, select_knear, select_oct, select_oct_dist, try_select_pqr, InfluenceSet, OctDistParams,
    TetSelector,
};
use crate::spatial::SpatialIndex;
use crate::weights::{classical_7star_weights, compute_rbffd_weights, PolyharmonicRbf, WeightFailure, WeightedStencil};

/// Polynomial order of the RBF-FD weights.
pub const RBF_ORDER: usize = 3;

/// A stencil selection method.
#[derive(Debug, Clone)]
pub enum Method {
    OctDist(OctDistParams),
    Oct,
    KNear(usize),
    /// Edge neighbors in a tetrahedral mesh whose vertices coincide with
    /// nodes.
    Tet(Arc<TetMesh>),
    /// pQR selection and weights of the given order.
    Pqr(usize),
    /// pQR selection of order 4 with RBF-FD weights.
    Pqr4Sel,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::OctDist(p) if *p == OctDistParams::default() => write!(f, "oct-dist"),
            Method::OctDist(p) => write!(f, "oct-dist:m={}:k={}:s={}:n={}:delta={}", p.m, p.k, p.s, p.n, p.delta),
            Method::Oct => write!(f, "oct"),
            Method::KNear(k) => write!(f, "{k}near"),
            Method::Tet(_) => write!(f, "tet"),
            Method::Pqr(l) => write!(f, "pqr{l}"),
            Method::Pqr4Sel => write!(f, "pqr4sel"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Parses `oct-dist[:key=value...]` (keys m, k, s, n, delta), `oct`,
    /// `<k>near` or `knear:<k>`, `pqr3`, `pqr4` and `pqr4sel`. `tet` needs a
    /// mesh and is not accepted here.
    fn from_str(spec: &str) -> Result<Self> {
        let bad = |msg: String| Error::Config(format!("method '{spec}': {msg}"));
        let mut parts = spec.split(':');
        let name = parts.next().unwrap_or_default().trim().to_ascii_lowercase();
        let rest: Vec<&str> = parts.collect();
        let no_args = |m: Method| {
            if rest.is_empty() {
                Ok(m)
            } else {
                Err(bad("takes no parameters".into()))
            }
        };
        match name.as_str() {
            "oct-dist" | "octdist" => {
                let mut p = OctDistParams::default();
                for kv in rest {
                    let (key, value) = kv
                        .split_once('=')
                        .ok_or_else(|| bad(format!("expected key=value, got '{kv}'")))?;
                    let int = || {
                        value
                            .parse::<usize>()
                            .map_err(|_| bad(format!("invalid integer '{value}'")))
                    };
                    match key.trim() {
                        "m" => p.m = int()?,
                        "k" => p.k = int()?,
                        "s" => p.s = int()?,
                        "n" => p.n = int()?,
                        "delta" => p.delta = value.parse().map_err(|_| bad(format!("invalid number '{value}'")))?,
                        other => return Err(bad(format!("unknown parameter '{other}'"))),
                    }
                }
                p.validate().map_err(|e| bad(e.to_string()))?;
                Ok(Method::OctDist(p))
            }
            "oct" => no_args(Method::Oct),
            "pqr3" => no_args(Method::Pqr(3)),
            "pqr4" => no_args(Method::Pqr(4)),
            "pqr4sel" => no_args(Method::Pqr4Sel),
            "knear" => match rest.as_slice() {
                [k] => k
                    .parse()
                    .ok()
                    .filter(|&k: &usize| k >= 1)
                    .map(Method::KNear)
                    .ok_or_else(|| bad("k must be a positive integer".into())),
                _ => Err(bad("expected knear:<k>".into())),
            },
            "tet" => Err(bad("tet needs a mesh file".into())),
            other => match other.strip_suffix("near").and_then(|k| k.parse::<usize>().ok()) {
                Some(k) if k >= 1 && rest.is_empty() => Ok(Method::KNear(k)),
                _ => Err(bad("unknown method".into())),
            },
        }
    }
}

/// Selected influence sets and their weights for every interior node.
#[derive(Debug, Clone)]
pub struct StencilBatch {
    pub sets: Vec<InfluenceSet>,
    pub weights: Vec<Result<Vec<f64>, WeightFailure>>,
    pub t_select: f64,
    pub t_weights: f64,
}

impl StencilBatch {
    pub fn stats(&self) -> Option<StencilStats> {
        StencilStats::from_sizes(self.sets.iter().map(InfluenceSet::len))
    }

    pub fn failures(&self) -> usize {
        self.weights.iter().filter(|w| w.is_err()).count()
    }

    /// All stencils, or the first weight failure in node order.
    pub fn stencils(&self) -> Result<Vec<WeightedStencil>> {
        self.sets
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(node, (set, w))| match w {
                Ok(w) => Ok(WeightedStencil {
                    set: set.clone(),
                    weights: w.clone(),
                }),
                Err(e) => Err(Error::WeightsFailed {
                    node,
                    reason: e.to_string(),
                }),
            })
            .collect()
    }
}

enum Selected {
    Star(InfluenceSet),
    Rbf(InfluenceSet),
    Weighted(WeightedStencil),
    Failed(InfluenceSet, WeightFailure),
}

/// Selects and weights stencils for all interior nodes in parallel. With
/// `grid_spacing` set, nodes whose full 7-point star is interior get the
/// classical weights instead.
pub fn compute_stencils(index: &SpatialIndex, method: &Method, grid_spacing: Option<f64>) -> Result<StencilBatch> {
    let start = Instant::now();
    let tet = match method {
        Method::Tet(mesh) => {
            let tol = 1e-9
                * crate::geometry::Aabb::from_points(index.points())
                    .map_or(1.0, |b| b.diagonal().max(f64::MIN_POSITIVE));
            Some(TetSelector::matching(mesh, index, tol)?)
        }
        _ => None,
    };
    let selected: Vec<Selected> = (0..index.n_interior())
        .into_par_iter()
        .map(|i| -> Result<Selected> {
            if let Some(h) = grid_spacing {
                if let Some(star) = select_grid_7star(i, index, h) {
                    return Ok(Selected::Star(star));
                }
            }
            Ok(match method {
                Method::OctDist(p) => Selected::Rbf(select_oct_dist(i, index, p)?),
                Method::Oct => Selected::Rbf(select_oct(i, index)),
                Method::KNear(k) => Selected::Rbf(select_knear(i, index, *k)),
                Method::Tet(_) => Selected::Rbf(tet.as_ref().expect("selector built").select(i)?),
                Method::Pqr(order) => match try_select_pqr(i, index, *order)? {
                    Ok(st) => Selected::Weighted(st),
                    Err(e) => Selected::Failed(InfluenceSet { members: vec![i] }, e),
                },
                Method::Pqr4Sel => match try_select_pqr(i, index, 4)? {
                    Ok(st) => Selected::Rbf(st.set),
                    Err(e) => Selected::Failed(InfluenceSet { members: vec![i] }, e),
                },
            })
        })
        .collect::<Result<_>>()?;
    let t_select = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let phi = PolyharmonicRbf::default();
    let (sets, weights): (Vec<_>, Vec<_>) = selected
        .into_par_iter()
        .map(|sel| match sel {
            Selected::Star(set) => {
                let h = index.point(set.members[1]).dist(index.point(set.members[0]));
                (set, Ok(classical_7star_weights(h).to_vec()))
            }
            Selected::Rbf(set) => {
                let pts: Vec<Point3> = set.members.iter().map(|&m| index.point(m)).collect();
                let w = compute_rbffd_weights(&pts, phi, RBF_ORDER);
                (set, w)
            }
            Selected::Weighted(st) => (st.set, Ok(st.weights)),
            Selected::Failed(set, e) => (set, Err(e)),
        })
        .unzip();
    Ok(StencilBatch {
        sets,
        weights,
        t_select,
        t_weights: start.elapsed().as_secs_f64(),
    })
}

/// Built-in right-hand sides and boundary data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Problem {
    /// `u = exp(x + y + z)`: `f = 3 u`, `g = u`.
    BallExp,
    /// `f = c`, `g = 0`, no exact solution.
    Constant(f64),
}

impl Problem {
    pub fn f(&self, p: Point3) -> f64 {
        match *self {
            Problem::BallExp => 3.0 * (p.x + p.y + p.z).exp(),
            Problem::Constant(c) => c,
        }
    }

    pub fn g(&self, p: Point3) -> f64 {
        match *self {
            Problem::BallExp => (p.x + p.y + p.z).exp(),
            Problem::Constant(_) => 0.0,
        }
    }

    pub fn exact(&self) -> Option<fn(Point3) -> f64> {
        match self {
            Problem::BallExp => Some(|p: Point3| (p.x + p.y + p.z).exp()),
            Problem::Constant(_) => None,
        }
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ball-exp" => Ok(Problem::BallExp),
            other => other
                .strip_prefix("const:")
                .and_then(|c| c.trim().parse().ok())
                .map(Problem::Constant)
                .ok_or_else(|| Error::Config(format!("unknown problem '{s}' (expected ball-exp or const:<value>)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solver {
    Direct,
    BiCgStab { tol: f64, maxit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub solver: Solver,
    /// Estimate `||A^-1||_inf` (needs a sparse LU also for the iterative
    /// solver).
    pub sigma: bool,
    /// Lattice spacing enabling the 7-point star where it fits.
    pub grid_spacing: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            solver: Solver::Direct,
            sigma: true,
            grid_spacing: None,
        }
    }
}

/// Everything one pass produces. `e_ref` in the report is NaN when no
/// weights could be found and infinite when the system is singular; with no
/// exact solution it stays NaN even for a good solution.
#[derive(Debug)]
pub struct LevelResult {
    pub report: SolveReport,
    pub stencils: Option<StencilBatch>,
    pub problem: Option<LinearProblem>,
    pub solution: Option<Vec<f64>>,
}

pub fn run_level(nodes: &NodeSet, method: &Method, problem: Problem, opts: &SolveOptions) -> Result<LevelResult> {
    let index = SpatialIndex::build(nodes)?;
    run_level_indexed(nodes, &index, method, problem, opts)
}

pub fn run_level_indexed(
    nodes: &NodeSet,
    index: &SpatialIndex,
    method: &Method,
    problem: Problem,
    opts: &SolveOptions,
) -> Result<LevelResult> {
    let mut report = SolveReport::new(method.to_string(), nodes.n_interior(), nodes.n_boundary());
    let mut result = LevelResult {
        report: report.clone(),
        stencils: None,
        problem: None,
        solution: None,
    };
    let batch = match compute_stencils(index, method, opts.grid_spacing) {
        Ok(b) => b,
        Err(e @ (Error::TooFewNeighbors { .. } | Error::NotInMesh(_))) => {
            log::warn!("{method}: {e}");
            return Ok(result);
        }
        Err(e) => return Err(e),
    };
    report.stencils = batch.stats();
    report.times.select = batch.t_select;
    report.times.weights = batch.t_weights;
    let stencils = batch.stencils();
    result.stencils = Some(batch);
    let stencils = match stencils {
        Ok(s) => s,
        Err(e) => {
            log::warn!("{method}: {e}");
            result.report = report;
            return Ok(result);
        }
    };

    let start = Instant::now();
    let lp = assemble(nodes, &stencils, |p| problem.f(p), |p| problem.g(p))?;
    report.times.assemble = start.elapsed().as_secs_f64();
    report.density = Some(lp.matrix.density());

    let start = Instant::now();
    let solved: Result<(Vec<f64>, Option<DirectSolver>)> = match opts.solver {
        Solver::Direct => sparse_lu_solve(&lp).map(|(x, lu)| (x, Some(lu))),
        Solver::BiCgStab { tol, maxit } => {
            let (x, it) = solve_iterative(&lp, tol, maxit);
            report.iterations = Some(Iterations {
                count: it.iterations,
                converged: it.converged(),
            });
            Ok((x, None))
        }
    };
    report.times.solve = start.elapsed().as_secs_f64();
    match solved {
        Ok((x, lu)) => {
            if opts.sigma {
                let lu = match lu {
                    Some(lu) => Some(lu),
                    None => DirectSolver::factor(&lp.matrix).ok(),
                };
                report.sigma = Some(lu.map_or(f64::INFINITY, |lu| lu.inverse_norm_inf()));
            }
            if let Some(exact) = problem.exact() {
                report.e_ref = if x.iter().all(|v| v.is_finite()) {
                    evaluate_solution(nodes, &x, exact)?
                } else {
                    f64::INFINITY
                };
            }
            result.solution = Some(x);
        }
        Err(Error::Singular) => {
            log::warn!("{method}: system matrix is singular");
            report.e_ref = f64::INFINITY;
            if opts.sigma {
                report.sigma = Some(f64::INFINITY);
            }
        }
        Err(e) => return Err(e),
    }
    result.report = report;
    result.problem = Some(lp);
    Ok(result)
}
