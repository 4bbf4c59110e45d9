//! Config-driven refinement sweeps behind the `mfd3d` binary.
//!
//! A config file holds one or more `[[experiment]]` tables. Each experiment
//! fixes a domain, a node source with a list of refinement levels, a set of
//! methods, a problem and a solver, and writes one CSV row per level and
//! method. Failures at one level show up as `NaN` or `Inf` rows and do not
//! stop the sweep.

mod config;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use config::{ConfigFile, DomainConfig, ExperimentConfig, NodeSource, NodesConfig, SolverConfig};

use crate::dense::PivotedQr;
use crate::diagnostics::{rrms, SolveReport, CSV_HEADER};
use crate::error::{Error, Result};
use crate::geometry::{generate_grid_nodes, generate_halton_nodes, Domain, NodeSet, TetMesh};
use crate::io::{nodes_from_tetmesh, read_nodes, read_tetmesh, write_nodes, write_stencils_to};
use crate::pipeline::{run_level_indexed, Method, Problem, SolveOptions};
use crate::spatial::SpatialIndex;
use crate::weights::{PolyBasis, RANK_TOL};
use crate::Point3;

/// Options that come from the command line rather than the config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config seed.
    pub seed: Option<u64>,
    /// Directory for Matrix Market dumps of every assembled system.
    pub export_matrix: Option<PathBuf>,
    /// Directory for stencil dumps.
    pub dump_stencils: Option<PathBuf>,
}

/// Nodes of one refinement level.
#[derive(Debug, Clone)]
pub struct Level {
    pub nodes: NodeSet,
    /// Lattice spacing for grid nodes.
    pub grid_spacing: Option<f64>,
    pub mesh: Option<Arc<TetMesh>>,
}

/// Generates or loads the node sets of all levels. A level that cannot be
/// produced is kept as an error.
pub fn build_levels(cfg: &ExperimentConfig, base: &Path, seed: Option<u64>) -> Result<Vec<Result<Level>>> {
    let source = cfg.nodes.source;
    Ok(match source {
        NodeSource::Grid | NodeSource::Halton => {
            let mut domain = cfg.domain(base)?;
            if let Some(seed) = seed {
                domain = domain.with_seed(seed);
            }
            cfg.spacings()?
                .into_iter()
                .map(|h| generate_level(&domain, source, h))
                .collect()
        }
        NodeSource::File => cfg
            .nodes
            .files
            .iter()
            .map(|f| {
                read_nodes(base.join(f)).map(|nodes| Level {
                    nodes,
                    grid_spacing: None,
                    mesh: None,
                })
            })
            .collect(),
        NodeSource::Tetmesh => cfg
            .nodes
            .files
            .iter()
            .map(|f| {
                read_tetmesh(base.join(f)).map(|mesh| Level {
                    nodes: nodes_from_tetmesh(&mesh).0,
                    grid_spacing: None,
                    mesh: Some(Arc::new(mesh)),
                })
            })
            .collect(),
    })
}

fn generate_level(domain: &Domain, source: NodeSource, h: f64) -> Result<Level> {
    let interior = match source {
        NodeSource::Grid => generate_grid_nodes(domain, h)?,
        _ => generate_halton_nodes(domain, h)?,
    };
    Ok(Level {
        nodes: NodeSet::with_projected_boundary(domain, interior, h)?,
        grid_spacing: (source == NodeSource::Grid).then_some(h),
        mesh: None,
    })
}

enum MethodSpec {
    Fixed(Method),
    /// `tet` on the level's own mesh.
    LevelMesh,
}

fn resolve_methods(cfg: &ExperimentConfig, base: &Path) -> Result<Vec<(String, MethodSpec)>> {
    cfg.methods
        .iter()
        .map(|m| {
            let label = m.trim().replace(',', ";");
            let spec = if m.trim() == "tet" {
                if cfg.nodes.source != NodeSource::Tetmesh {
                    return Err(Error::Config(format!(
                        "experiment '{}': method 'tet' needs tetmesh nodes or a mesh path (tet:<file>)",
                        cfg.name
                    )));
                }
                MethodSpec::LevelMesh
            } else if let Some(path) = m.trim().strip_prefix("tet:") {
                MethodSpec::Fixed(Method::Tet(Arc::new(read_tetmesh(base.join(path))?)))
            } else {
                MethodSpec::Fixed(m.parse()?)
            };
            Ok((label, spec))
        })
        .collect()
}

fn file_stem(experiment: &str, method: &str, level: usize) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                    c
                } else {
                    '_'
                }
            })
            .collect()
    };
    format!("{}_{}_L{level}", clean(experiment), clean(method))
}

/// Nodes and solution of one level.
type LevelSolution = (Arc<NodeSet>, Vec<f64>);

/// Runs one experiment and returns its rows, level-major.
pub fn run_experiment(cfg: &ExperimentConfig, base: &Path, opts: &RunOptions) -> Result<Vec<SolveReport>> {
    let problem = cfg.problem()?;
    let methods = resolve_methods(cfg, base)?;
    let solve_opts = SolveOptions {
        solver: cfg.solver.solver()?,
        sigma: cfg.sigma,
        grid_spacing: None,
    };
    let levels = build_levels(cfg, base, opts.seed)?;
    for dir in [&opts.export_matrix, &opts.dump_stencils].into_iter().flatten() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let mut rows = Vec::new();
    // per method and level: nodes and solution, for self-convergence
    let mut solutions: Vec<Vec<Option<LevelSolution>>> = vec![Vec::new(); methods.len()];
    for (li, level) in levels.iter().enumerate() {
        let level = match level {
            Ok(l) => l,
            Err(e) => {
                log::warn!("{}: level {li} skipped: {e}", cfg.name);
                for (mi, (label, _)) in methods.iter().enumerate() {
                    rows.push(SolveReport::new(label.clone(), 0, 0));
                    solutions[mi].push(None);
                }
                continue;
            }
        };
        let index = match SpatialIndex::build(&level.nodes) {
            Ok(i) => i,
            Err(e) => {
                log::warn!("{}: level {li} skipped: {e}", cfg.name);
                for (mi, (label, _)) in methods.iter().enumerate() {
                    rows.push(SolveReport::new(
                        label.clone(),
                        level.nodes.n_interior(),
                        level.nodes.n_boundary(),
                    ));
                    solutions[mi].push(None);
                }
                continue;
            }
        };
        let shared = Arc::new(level.nodes.clone());
        let opts_level = SolveOptions {
            grid_spacing: level.grid_spacing,
            ..solve_opts
        };
        for (mi, (label, spec)) in methods.iter().enumerate() {
            let method = match spec {
                MethodSpec::Fixed(m) => m.clone(),
                MethodSpec::LevelMesh => Method::Tet(level.mesh.clone().expect("tetmesh level carries its mesh")),
            };
            log::info!(
                "{}: level {li} ({} interior nodes), {label}",
                cfg.name,
                level.nodes.n_interior()
            );
            let mut result = match run_level_indexed(&level.nodes, &index, &method, problem, &opts_level) {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("{}: level {li}, {label}: {e}", cfg.name);
                    rows.push(SolveReport::new(
                        label.clone(),
                        level.nodes.n_interior(),
                        level.nodes.n_boundary(),
                    ));
                    solutions[mi].push(None);
                    continue;
                }
            };
            result.report.method = label.clone();
            let stem = file_stem(&cfg.name, label, li);
            if let (Some(dir), Some(lp)) = (&opts.export_matrix, &result.problem) {
                let path = dir.join(format!("{stem}.mtx"));
                let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                lp.matrix
                    .write_matrix_market(BufWriter::new(file))
                    .map_err(|e| Error::io(&path, e))?;
            }
            if let (Some(dir), Some(batch)) = (&opts.dump_stencils, &result.stencils) {
                if let Ok(stencils) = batch.stencils() {
                    let path = dir.join(format!("{stem}.stencils"));
                    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                    write_stencils_to(BufWriter::new(file), &stencils).map_err(|e| Error::io(&path, e))?;
                }
            }
            solutions[mi].push(result.solution.map(|x| (shared.clone(), x)));
            rows.push(result.report);
        }
    }

    if problem.exact().is_none() {
        let n_methods = methods.len();
        for (mi, sols) in solutions.iter().enumerate() {
            let method_rows: Vec<usize> = (0..levels.len()).map(|li| li * n_methods + mi).collect();
            self_convergence(sols, &method_rows, problem, &mut rows)?;
        }
    }
    Ok(rows)
}

/// Replaces the error of every solved level by its RRMS distance to the
/// finest level, interpolated to the coarse interior nodes.
fn self_convergence(
    sols: &[Option<LevelSolution>],
    row_of_level: &[usize],
    problem: Problem,
    rows: &mut [SolveReport],
) -> Result<()> {
    let Some(Some((fine, fine_x))) = sols.last() else {
        return Ok(());
    };
    if !fine_x.iter().all(|v| v.is_finite()) {
        return Ok(());
    }
    let reference = Reference::new(fine, fine_x, problem)?;
    for (li, sol) in sols.iter().enumerate() {
        let row = &mut rows[row_of_level[li]];
        let Some((nodes, x)) = sol else { continue };
        if li + 1 == sols.len() {
            row.e_ref = 0.0;
            continue;
        }
        if !x.iter().all(|v| v.is_finite()) {
            continue;
        }
        let values: Vec<f64> = nodes.interior.iter().map(|&p| reference.sample(p)).collect();
        row.e_ref = rrms(&values, x).unwrap_or(f64::NAN);
    }
    Ok(())
}

/// A solution on all nodes of a level, interior values from the solve and
/// boundary values from the data.
struct Reference {
    index: SpatialIndex,
    values: Vec<f64>,
}

impl Reference {
    /// Neighbors used for one local fit.
    const FIT: usize = 20;

    fn new(nodes: &NodeSet, x: &[f64], problem: Problem) -> Result<Self> {
        let mut values = x.to_vec();
        values.extend(nodes.boundary.iter().map(|&p| problem.g(p)));
        Ok(Reference {
            index: SpatialIndex::build(nodes)?,
            values,
        })
    }

    /// Value at `p` of the least-squares quadratic through the nearest
    /// nodes; the nearest value when the fit is rank deficient.
    fn sample(&self, p: Point3) -> f64 {
        let near = self.index.k_nearest(p, Self::FIT, false);
        let basis = PolyBasis::new(3);
        let (m, n) = (near.len(), basis.dim());
        if m < n {
            return self.values[near[0].index];
        }
        let scale = near.iter().map(|nb| nb.dist).sum::<f64>() / m as f64;
        if near[0].dist <= 1e-12 * scale || scale == 0.0 {
            return self.values[near[0].index];
        }
        let mut a = vec![0.0; m * n];
        for (i, nb) in near.iter().enumerate() {
            for (j, v) in basis
                .eval((self.index.point(nb.index) - p) / scale)
                .into_iter()
                .enumerate()
            {
                a[j * m + i] = v;
            }
        }
        let qr = PivotedQr::new(m, n, a, RANK_TOL);
        if qr.rank < n {
            return self.values[near[0].index];
        }
        let mut b: Vec<f64> = near.iter().map(|nb| self.values[nb.index]).collect();
        qr.apply_qt(&mut b);
        let y = qr.solve_r11(&b);
        let constant = qr
            .perm
            .iter()
            .position(|&c| c == 0)
            .expect("permutation covers all columns");
        y[constant]
    }
}

pub fn write_csv(out: impl Write, rows: &[SolveReport], timings: bool) -> std::io::Result<()> {
    let mut out = out;
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_row(timings))?;
    }
    out.flush()
}

/// Plot data: per method, `N_int` times the density on the finest level
/// against `E_ref`.
pub fn write_plot_data(mut out: impl Write, rows: &[SolveReport]) -> std::io::Result<()> {
    writeln!(out, "# method N_int nominal_nnz E_ref")?;
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    for m in methods {
        let mine: Vec<&SolveReport> = rows.iter().filter(|r| r.method == m).collect();
        let finest = mine.last().and_then(|r| r.density).unwrap_or(f64::NAN);
        for r in mine {
            writeln!(
                out,
                "{m} {} {} {}",
                r.n_interior,
                crate::diagnostics::format_sci(r.n_interior as f64 * finest),
                crate::diagnostics::format_sci(r.e_ref)
            )?;
        }
    }
    out.flush()
}

/// Runs every experiment of a config file and writes the reports next to
/// it. Returns the rows of each experiment.
pub fn run_config(path: &Path, opts: &RunOptions) -> Result<Vec<(String, Vec<SolveReport>)>> {
    let cfg = ConfigFile::load(path)?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut all = Vec::new();
    for e in &cfg.experiment {
        let rows = run_experiment(e, &base, opts)?;
        let out = base.join(&e.output);
        create_parent(&out)?;
        let file = fs::File::create(&out).map_err(|err| Error::io(&out, err))?;
        write_csv(BufWriter::new(file), &rows, e.timings).map_err(|err| Error::io(&out, err))?;
        if let Some(plot) = &e.plot {
            let plot = base.join(plot);
            create_parent(&plot)?;
            let file = fs::File::create(&plot).map_err(|err| Error::io(&plot, err))?;
            write_plot_data(BufWriter::new(file), &rows).map_err(|err| Error::io(&plot, err))?;
        }
        all.push((e.name.clone(), rows));
    }
    Ok(all)
}

/// Writes the node sets of every level of every experiment into `dir`.
pub fn generate_config_nodes(path: &Path, dir: &Path, seed: Option<u64>) -> Result<Vec<PathBuf>> {
    let cfg = ConfigFile::load(path)?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for e in &cfg.experiment {
        for (li, level) in build_levels(e, &base, seed)?.into_iter().enumerate() {
            match level {
                Ok(level) => {
                    let out = dir.join(format!("{}.nodes", file_stem(&e.name, "nodes", li)));
                    write_nodes(&out, &level.nodes)?;
                    written.push(out);
                }
                Err(err) => log::warn!("{}: level {li}: {err}", e.name),
            }
        }
    }
    Ok(written)
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| Error::io(p, e)),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_names_are_sanitized() {
        assert_eq!(file_stem("ball grid", "oct-dist:k=18", 2), "ball_grid_oct-dist_k_18_L2");
    }
}
