//! C ABI for mfd3d.
//!
//! Domains and node sets are opaque handles created by `mfd3d_*_new`-style
//! constructors and released with the matching `*_free`. Every fallible
//! function returns an [`Mfd3dStatus`]; on failure the message is kept per
//! thread and can be read with [`mfd3d_last_error`]. Points are passed as
//! flat `xyz` arrays of `3 * count` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::sync::OnceLock;

use mfd3d::diagnostics::SolveReport;
use mfd3d::geometry::{generate_grid_nodes, generate_halton_nodes, tet_gamma};
use mfd3d::io::{read_nodes, write_nodes};
use mfd3d::pipeline::{run_level_indexed, Method, Problem, SolveOptions, Solver};
use mfd3d::selection::{select_oct_dist, OctDistParams};
use mfd3d::spatial::SpatialIndex;
use mfd3d::weights::{compute_rbffd_weights, PolyharmonicRbf};
use mfd3d::{Domain, Error, NodeSet, Point3};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mfd3dStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Geometry = 4,
    Selection = 5,
    Weights = 6,
    Singular = 7,
    Io = 8,
    Format = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mfd3dNodeKind {
    Grid = 0,
    Halton = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mfd3dSolverKind {
    Direct = 0,
    Bicgstab = 1,
}

/// Opaque domain handle.
pub struct Mfd3dDomain(Domain);

/// Opaque node set handle.
pub struct Mfd3dNodes {
    nodes: NodeSet,
    index: OnceLock<SpatialIndex>,
    grid_spacing: Option<f64>,
}

impl Mfd3dNodes {
    fn new(nodes: NodeSet, grid_spacing: Option<f64>) -> Self {
        Mfd3dNodes {
            nodes,
            index: OnceLock::new(),
            grid_spacing,
        }
    }

    fn index(&self) -> Result<&SpatialIndex, Error> {
        if let Some(i) = self.index.get() {
            return Ok(i);
        }
        let built = SpatialIndex::build(&self.nodes)?;
        Ok(self.index.get_or_init(|| built))
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Mfd3dOctDistParams {
    pub m: usize,
    pub k: usize,
    pub s: usize,
    pub n: usize,
    pub delta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct Mfd3dSolveOptions {
    /// Method name as accepted by the config files, e.g. `oct-dist:k=18`.
    pub method: *const c_char,
    /// Nonzero selects `f = constant`, `g = 0`; zero selects `u = exp(x+y+z)`.
    pub constant_rhs: bool,
    pub constant: f64,
    pub solver: Mfd3dSolverKind,
    pub tol: f64,
    pub maxit: usize,
    pub sigma: bool,
}

/// Outcome of [`mfd3d_solve`]. Quantities that were not computed are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct Mfd3dReport {
    pub n_interior: usize,
    pub n_boundary: usize,
    pub e_ref: f64,
    pub density: f64,
    pub sigma: f64,
    pub iterations: f64,
    pub k_min: usize,
    pub k_mean: f64,
    pub k_max: usize,
    /// True when a solution vector was produced.
    pub solved: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> Mfd3dStatus {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) => Mfd3dStatus::InvalidArgument,
        Error::StlTruncated { .. }
        | Error::StlSyntax { .. }
        | Error::StlEmpty
        | Error::RayRetryExhausted(_)
        | Error::ProjectionUndefined
        | Error::EmptyNodeSet(_) => Mfd3dStatus::Geometry,
        Error::TooFewNeighbors { .. } | Error::NotInMesh(_) => Mfd3dStatus::Selection,
        Error::WeightsFailed { .. } => Mfd3dStatus::Weights,
        Error::Singular | Error::ZeroPivot(_) => Mfd3dStatus::Singular,
        Error::Io { .. } => Mfd3dStatus::Io,
        Error::Format { .. } => Mfd3dStatus::Format,
    }
}

struct Fail(Mfd3dStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(Mfd3dStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(Mfd3dStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> Mfd3dStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Mfd3dStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            Mfd3dStatus::Panic
        }
    }
}

unsafe fn points(xyz: *const f64, count: usize, what: &str) -> Result<Vec<Point3>, Fail> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if xyz.is_null() {
        return Err(null(what));
    }
    let flat = std::slice::from_raw_parts(xyz, 3 * count);
    Ok(flat.chunks_exact(3).map(|c| Point3::new(c[0], c[1], c[2])).collect())
}

unsafe fn path_arg(path: *const c_char) -> Result<PathBuf, Fail> {
    if path.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(path)
        .to_str()
        .map_err(|_| invalid("path is not UTF-8"))?;
    Ok(PathBuf::from(s))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mfd3d_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mfd3d_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_domain_new_ball(
    cx: f64,
    cy: f64,
    cz: f64,
    radius: f64,
    out: *mut *mut Mfd3dDomain,
) -> Mfd3dStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let d = Domain::ball(Point3::new(cx, cy, cz), radius)?;
        *out = Box::into_raw(Box::new(Mfd3dDomain(d)));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_domain_from_stl_file(path: *const c_char, out: *mut *mut Mfd3dDomain) -> Mfd3dStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let d = Domain::from_stl_file(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(Mfd3dDomain(d)));
        Ok(())
    })
}

/// # Safety
/// `bytes` must point to `len` readable bytes and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_domain_from_stl_bytes(
    bytes: *const u8,
    len: usize,
    out: *mut *mut Mfd3dDomain,
) -> Mfd3dStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if bytes.is_null() {
            return Err(null("bytes"));
        }
        let d = Domain::from_stl_bytes(std::slice::from_raw_parts(bytes, len))?;
        *out = Box::into_raw(Box::new(Mfd3dDomain(d)));
        Ok(())
    })
}

/// Reseeds the randomized ray retries of the inside test.
///
/// # Safety
/// `domain` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_domain_set_seed(domain: *mut Mfd3dDomain, seed: u64) -> Mfd3dStatus {
    guard(|| {
        let d = out_ptr(domain, "domain")?;
        d.0 = d.0.clone().with_seed(seed);
        Ok(())
    })
}

/// # Safety
/// `domain` must be a live handle, `xyz` hold 3 doubles and `inside` be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_domain_contains(
    domain: *const Mfd3dDomain,
    xyz: *const f64,
    inside: *mut bool,
) -> Mfd3dStatus {
    guard(|| {
        let d = domain.as_ref().ok_or_else(|| null("domain"))?;
        let p = points(xyz, 1, "xyz")?[0];
        *out_ptr(inside, "inside")? = d.0.contains(p)?;
        Ok(())
    })
}

/// # Safety
/// `domain` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_domain_free(domain: *mut Mfd3dDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// Interior nodes at spacing `h` plus boundary nodes projected from them.
///
/// # Safety
/// `domain` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_nodes_generate(
    domain: *const Mfd3dDomain,
    kind: Mfd3dNodeKind,
    h: f64,
    out: *mut *mut Mfd3dNodes,
) -> Mfd3dStatus {
    guard(|| {
        let d = &domain.as_ref().ok_or_else(|| null("domain"))?.0;
        let out = out_ptr(out, "out")?;
        let interior = match kind {
            Mfd3dNodeKind::Grid => generate_grid_nodes(d, h)?,
            Mfd3dNodeKind::Halton => generate_halton_nodes(d, h)?,
        };
        let nodes = NodeSet::with_projected_boundary(d, interior, h)?;
        let spacing = (kind == Mfd3dNodeKind::Grid).then_some(h);
        *out = Box::into_raw(Box::new(Mfd3dNodes::new(nodes, spacing)));
        Ok(())
    })
}

/// # Safety
/// `interior` and `boundary` must hold `3 * n` doubles each (may be null
/// when the count is zero); `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_nodes_from_arrays(
    interior: *const f64,
    n_interior: usize,
    boundary: *const f64,
    n_boundary: usize,
    out: *mut *mut Mfd3dNodes,
) -> Mfd3dStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let nodes = NodeSet::new(
            points(interior, n_interior, "interior")?,
            points(boundary, n_boundary, "boundary")?,
        );
        *out = Box::into_raw(Box::new(Mfd3dNodes::new(nodes, None)));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_nodes_load(path: *const c_char, out: *mut *mut Mfd3dNodes) -> Mfd3dStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let nodes = read_nodes(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(Mfd3dNodes::new(nodes, None)));
        Ok(())
    })
}

/// # Safety
/// `nodes` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_nodes_save(nodes: *const Mfd3dNodes, path: *const c_char) -> Mfd3dStatus {
    guard(|| {
        let n = nodes.as_ref().ok_or_else(|| null("nodes"))?;
        write_nodes(path_arg(path)?, &n.nodes)?;
        Ok(())
    })
}

/// # Safety
/// `nodes` must be a live handle; the outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_nodes_counts(
    nodes: *const Mfd3dNodes,
    n_interior: *mut usize,
    n_boundary: *mut usize,
) -> Mfd3dStatus {
    guard(|| {
        let n = nodes.as_ref().ok_or_else(|| null("nodes"))?;
        *out_ptr(n_interior, "n_interior")? = n.nodes.n_interior();
        *out_ptr(n_boundary, "n_boundary")? = n.nodes.n_boundary();
        Ok(())
    })
}

/// Copies all node coordinates, interior first, into `xyz` (`capacity`
/// points).
///
/// # Safety
/// `nodes` must be a live handle and `xyz` hold `3 * capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_nodes_copy(nodes: *const Mfd3dNodes, xyz: *mut f64, capacity: usize) -> Mfd3dStatus {
    guard(|| {
        let n = nodes.as_ref().ok_or_else(|| null("nodes"))?;
        if capacity < n.nodes.len() {
            return Err(Fail(
                Mfd3dStatus::BufferTooSmall,
                format!("need room for {} points, got {capacity}", n.nodes.len()),
            ));
        }
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        let out = std::slice::from_raw_parts_mut(xyz, 3 * n.nodes.len());
        for (chunk, p) in out.chunks_exact_mut(3).zip(n.nodes.points()) {
            chunk.copy_from_slice(&[p.x, p.y, p.z]);
        }
        Ok(())
    })
}

/// # Safety
/// `nodes` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_nodes_free(nodes: *mut Mfd3dNodes) {
    if !nodes.is_null() {
        drop(Box::from_raw(nodes));
    }
}

/// Default oct-dist parameters.
#[no_mangle]
pub extern "C" fn mfd3d_oct_dist_defaults() -> Mfd3dOctDistParams {
    let p = OctDistParams::default();
    Mfd3dOctDistParams {
        m: p.m,
        k: p.k,
        s: p.s,
        n: p.n,
        delta: p.delta,
    }
}

/// Influence set of interior node `center`, center first. `params` may be
/// null for the defaults. The number of members goes to `len`.
///
/// # Safety
/// `nodes` must be a live handle, `members` hold `capacity` entries and
/// `len` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_select_oct_dist(
    nodes: *const Mfd3dNodes,
    center: usize,
    params: *const Mfd3dOctDistParams,
    members: *mut usize,
    capacity: usize,
    len: *mut usize,
) -> Mfd3dStatus {
    guard(|| {
        let n = nodes.as_ref().ok_or_else(|| null("nodes"))?;
        let len = out_ptr(len, "len")?;
        let params = match params.as_ref() {
            Some(p) => OctDistParams {
                m: p.m,
                k: p.k,
                s: p.s,
                n: p.n,
                delta: p.delta,
            },
            None => OctDistParams::default(),
        };
        if center >= n.nodes.n_interior() {
            return Err(invalid(format!("node {center} is not an interior node")));
        }
        let set = select_oct_dist(center, n.index()?, &params)?;
        *len = set.len();
        if capacity < set.len() {
            return Err(Fail(
                Mfd3dStatus::BufferTooSmall,
                format!("influence set has {} members, buffer holds {capacity}", set.len()),
            ));
        }
        if members.is_null() {
            return Err(null("members"));
        }
        std::slice::from_raw_parts_mut(members, set.len()).copy_from_slice(&set.members);
        Ok(())
    })
}

/// Laplacian weights at the first of `count` points by polyharmonic RBF-FD
/// (`r^5`, exact for quadratics).
///
/// # Safety
/// `xyz` must hold `3 * count` doubles and `weights` `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_stencil_weights(xyz: *const f64, count: usize, weights: *mut f64) -> Mfd3dStatus {
    guard(|| {
        let pts = points(xyz, count, "xyz")?;
        if weights.is_null() {
            return Err(null("weights"));
        }
        let phi = PolyharmonicRbf::new(5)?;
        let w = compute_rbffd_weights(&pts, phi, 3).map_err(|e| Fail(Mfd3dStatus::Weights, e.to_string()))?;
        std::slice::from_raw_parts_mut(weights, count).copy_from_slice(&w);
        Ok(())
    })
}

fn fill_report(r: &SolveReport, solved: bool) -> Mfd3dReport {
    let (k_min, k_mean, k_max) = r.stencils.map_or((0, f64::NAN, 0), |s| (s.min, s.mean, s.max));
    Mfd3dReport {
        n_interior: r.n_interior,
        n_boundary: r.n_boundary,
        e_ref: r.e_ref,
        density: r.density.unwrap_or(f64::NAN),
        sigma: r.sigma.unwrap_or(f64::NAN),
        iterations: r.iterations.map_or(f64::NAN, |i| i.count),
        k_min,
        k_mean,
        k_max,
        solved,
    }
}

/// Builds and solves the system on `nodes`. On success the report is filled
/// even when the method failed on some stencil (then `solved` is false and
/// `e_ref` NaN or Inf). `solution` may be null; otherwise it receives the
/// `capacity >= n_interior` interior values.
///
/// # Safety
/// `nodes` and `options` must be valid, `options->method` NUL-terminated,
/// `report` valid for writes and `solution` null or `capacity` long.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_solve(
    nodes: *const Mfd3dNodes,
    options: *const Mfd3dSolveOptions,
    report: *mut Mfd3dReport,
    solution: *mut f64,
    capacity: usize,
) -> Mfd3dStatus {
    guard(|| {
        let n = nodes.as_ref().ok_or_else(|| null("nodes"))?;
        let o = options.as_ref().ok_or_else(|| null("options"))?;
        let report = out_ptr(report, "report")?;
        if o.method.is_null() {
            return Err(null("options.method"));
        }
        let name = CStr::from_ptr(o.method)
            .to_str()
            .map_err(|_| invalid("method is not UTF-8"))?;
        let method: Method = name.parse()?;
        let problem = if o.constant_rhs {
            Problem::Constant(o.constant)
        } else {
            Problem::BallExp
        };
        let solver = match o.solver {
            Mfd3dSolverKind::Direct => Solver::Direct,
            Mfd3dSolverKind::Bicgstab => Solver::BiCgStab {
                tol: o.tol,
                maxit: o.maxit,
            },
        };
        let opts = SolveOptions {
            solver,
            sigma: o.sigma,
            grid_spacing: n.grid_spacing,
        };
        let result = run_level_indexed(&n.nodes, n.index()?, &method, problem, &opts)?;
        *report = fill_report(&result.report, result.solution.is_some());
        if let (Some(x), false) = (&result.solution, solution.is_null()) {
            if capacity < x.len() {
                return Err(Fail(
                    Mfd3dStatus::BufferTooSmall,
                    format!("solution has {} values, buffer holds {capacity}", x.len()),
                ));
            }
            std::slice::from_raw_parts_mut(solution, x.len()).copy_from_slice(x);
        }
        Ok(())
    })
}

/// Shape quality of the tetrahedron with vertices `xyz[0..12]`: 1 for the
/// regular tetrahedron, 0 when degenerate. NaN for a null pointer.
///
/// # Safety
/// `xyz` must be null or hold 12 doubles.
#[no_mangle]
pub unsafe extern "C" fn mfd3d_tet_gamma(xyz: *const f64) -> f64 {
    if xyz.is_null() {
        return f64::NAN;
    }
    let p: Vec<Point3> = std::slice::from_raw_parts(xyz, 12)
        .chunks_exact(3)
        .map(|c| Point3::new(c[0], c[1], c[2]))
        .collect();
    tet_gamma([p[0], p[1], p[2], p[3]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(mfd3d_last_error()) }
            .to_string_lossy()
            .into_owned()
    }

    #[test]
    fn ball_solve_round_trip() {
        unsafe {
            let mut d = ptr::null_mut();
            assert_eq!(mfd3d_domain_new_ball(0.0, 0.0, 0.0, 1.0, &mut d), Mfd3dStatus::Ok);
            let mut inside = false;
            assert_eq!(
                mfd3d_domain_contains(d, [0.1, 0.2, 0.3].as_ptr(), &mut inside),
                Mfd3dStatus::Ok
            );
            assert!(inside);

            let mut nodes = ptr::null_mut();
            assert_eq!(
                mfd3d_nodes_generate(d, Mfd3dNodeKind::Grid, 0.2, &mut nodes),
                Mfd3dStatus::Ok
            );
            let (mut ni, mut nb) = (0, 0);
            assert_eq!(mfd3d_nodes_counts(nodes, &mut ni, &mut nb), Mfd3dStatus::Ok);
            assert!(ni > 50 && nb > 0);

            let method = CString::new("oct-dist:k=18").unwrap();
            let opts = Mfd3dSolveOptions {
                method: method.as_ptr(),
                constant_rhs: false,
                constant: 0.0,
                solver: Mfd3dSolverKind::Direct,
                tol: 1e-8,
                maxit: 100,
                sigma: true,
            };
            let mut report = Mfd3dReport::default();
            let mut x = vec![0.0; ni];
            assert_eq!(
                mfd3d_solve(nodes, &opts, &mut report, x.as_mut_ptr(), ni),
                Mfd3dStatus::Ok
            );
            assert!(report.solved);
            assert!(report.e_ref < 1e-2, "{}", report.e_ref);
            assert!(report.sigma.is_finite());
            assert!(x.iter().all(|v| v.is_finite()));

            let mut members = [0usize; 32];
            let mut len = 0;
            let st = mfd3d_select_oct_dist(nodes, 0, ptr::null(), members.as_mut_ptr(), 32, &mut len);
            assert_eq!(st, Mfd3dStatus::Ok);
            assert_eq!(members[0], 0);
            assert_eq!(len, 17);

            mfd3d_nodes_free(nodes);
            mfd3d_domain_free(d);
        }
    }

    #[test]
    fn errors_carry_status_and_message() {
        unsafe {
            let mut d = ptr::null_mut();
            assert_eq!(
                mfd3d_domain_new_ball(0.0, 0.0, 0.0, -1.0, &mut d),
                Mfd3dStatus::InvalidArgument
            );
            assert!(d.is_null());
            assert!(last_error().contains("radius"), "{}", last_error());

            assert_eq!(
                mfd3d_domain_new_ball(0.0, 0.0, 0.0, 1.0, ptr::null_mut()),
                Mfd3dStatus::NullPointer
            );

            let path = CString::new("/nonexistent/file.stl").unwrap();
            assert_eq!(mfd3d_domain_from_stl_file(path.as_ptr(), &mut d), Mfd3dStatus::Io);

            let bytes = [0u8; 10];
            assert_eq!(
                mfd3d_domain_from_stl_bytes(bytes.as_ptr(), 10, &mut d),
                Mfd3dStatus::Geometry
            );
            mfd3d_domain_free(ptr::null_mut());
            mfd3d_nodes_free(ptr::null_mut());
        }
    }

    #[test]
    fn buffers_are_checked() {
        unsafe {
            let interior = [0.0, 0.0, 0.0];
            let boundary = [1.0, 0.0, 0.0, -1.0, 0.0, 0.0];
            let mut nodes = ptr::null_mut();
            assert_eq!(
                mfd3d_nodes_from_arrays(interior.as_ptr(), 1, boundary.as_ptr(), 2, &mut nodes),
                Mfd3dStatus::Ok
            );
            let mut xyz = [0.0; 6];
            assert_eq!(
                mfd3d_nodes_copy(nodes, xyz.as_mut_ptr(), 2),
                Mfd3dStatus::BufferTooSmall
            );
            let mut xyz = [0.0; 9];
            assert_eq!(mfd3d_nodes_copy(nodes, xyz.as_mut_ptr(), 3), Mfd3dStatus::Ok);
            assert_eq!(xyz[3..6], boundary[..3]);
            mfd3d_nodes_free(nodes);
        }
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("n.nodes").to_str().unwrap()).unwrap();
        unsafe {
            let pts = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
            let mut a = ptr::null_mut();
            assert_eq!(
                mfd3d_nodes_from_arrays(pts.as_ptr(), 1, pts[3..].as_ptr(), 1, &mut a),
                Mfd3dStatus::Ok
            );
            assert_eq!(mfd3d_nodes_save(a, path.as_ptr()), Mfd3dStatus::Ok);
            let mut b = ptr::null_mut();
            assert_eq!(mfd3d_nodes_load(path.as_ptr(), &mut b), Mfd3dStatus::Ok);
            let mut xyz = [0.0; 6];
            assert_eq!(mfd3d_nodes_copy(b, xyz.as_mut_ptr(), 2), Mfd3dStatus::Ok);
            assert_eq!(xyz, pts);
            mfd3d_nodes_free(a);
            mfd3d_nodes_free(b);
        }
    }

    #[test]
    fn seven_star_weights_and_gamma() {
        let h = 0.1;
        let mut xyz = vec![0.0; 3];
        for (axis, s) in [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0), (2, 1.0), (2, -1.0)] {
            let mut p = [0.0; 3];
            p[axis] = s * h;
            xyz.extend_from_slice(&p);
        }
        let mut w = [0.0; 7];
        assert_eq!(
            unsafe { mfd3d_stencil_weights(xyz.as_ptr(), 7, w.as_mut_ptr()) },
            Mfd3dStatus::Ok
        );
        assert!((w[0] + 600.0).abs() < 1e-8 * 600.0);
        assert!(w[1..].iter().all(|v| (v - 100.0).abs() < 1e-8 * 100.0));

        let s = 1.0 / 8f64.sqrt();
        let reg = [s, s, s, s, -s, -s, -s, s, -s, -s, -s, s];
        assert!((unsafe { mfd3d_tet_gamma(reg.as_ptr()) } - 1.0).abs() < 1e-12);
        assert!(unsafe { mfd3d_tet_gamma(ptr::null()) }.is_nan());
    }

    #[test]
    fn header_declares_every_export() {
        let header = include_str!("../include/mfd3d.h");
        let src = include_str!("lib.rs");
        let exports: Vec<&str> = src
            .split("extern \"C\" fn ")
            .skip(1)
            .filter_map(|s| s.split('(').next())
            .filter(|name| name.starts_with("mfd3d_"))
            .collect();
        assert!(exports.len() >= 15);
        for name in exports {
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
        }
        for ty in [
            "Mfd3dDomain",
            "Mfd3dNodes",
            "MFD3D_STATUS_BUFFER_TOO_SMALL",
            "Mfd3dReport",
        ] {
            assert!(header.contains(ty), "{ty} missing from header");
        }
    }
}
