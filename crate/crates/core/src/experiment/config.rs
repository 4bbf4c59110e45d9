use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point3};
use crate::pipeline::{Problem, Solver};

/// Top-level config file: a list of `[[experiment]]` tables.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub experiment: Vec<ExperimentConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub domain: DomainConfig,
    pub nodes: NodesConfig,
    pub methods: Vec<String>,
    #[serde(default = "default_problem")]
    pub problem: String,
    #[serde(default)]
    pub solver: SolverConfig,
    /// CSV report path.
    pub output: PathBuf,
    /// Optional `(nominal nnz, E_ref)` plot data path.
    #[serde(default)]
    pub plot: Option<PathBuf>,
    /// Write measured phase times; when false they are written as 0 so that
    /// repeated runs give identical files.
    #[serde(default = "default_true")]
    pub timings: bool,
    /// Estimate the stability constant.
    #[serde(default = "default_true")]
    pub sigma: bool,
    /// Seed of the randomized ray retries of the inside test.
    #[serde(default)]
    pub seed: u64,
}

fn default_problem() -> String {
    "ball-exp".into()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainConfig {
    Ball {
        #[serde(default)]
        center: [f64; 3],
        #[serde(default = "one")]
        radius: f64,
    },
    Stl {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeSource {
    Grid,
    Halton,
    File,
    Tetmesh,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodesConfig {
    pub source: NodeSource,
    /// Coarse mesh size `H0` of the schedule `h = 0.9 H0 2^(-i/3)`.
    #[serde(default)]
    pub h0: Option<f64>,
    /// Inclusive range `[i_min, i_max]` of refinement exponents.
    #[serde(default)]
    pub levels: Option<[u32; 2]>,
    /// Explicit spacings, instead of `h0` and `levels`.
    #[serde(default)]
    pub h: Option<Vec<f64>>,
    /// Node or tet mesh files, one per level, for the file sources.
    #[serde(default)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_solver")]
    pub kind: String,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_maxit")]
    pub maxit: usize,
}

fn default_solver() -> String {
    "direct".into()
}

fn default_tol() -> f64 {
    1e-6
}

fn default_maxit() -> usize {
    1000
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kind: default_solver(),
            tol: default_tol(),
            maxit: default_maxit(),
        }
    }
}

impl SolverConfig {
    pub fn solver(&self) -> Result<Solver> {
        match self.kind.as_str() {
            "direct" => Ok(Solver::Direct),
            "bicgstab" => {
                if !(self.tol > 0.0) || self.maxit == 0 {
                    return Err(Error::Config("bicgstab needs tol > 0 and maxit > 0".into()));
                }
                Ok(Solver::BiCgStab {
                    tol: self.tol,
                    maxit: self.maxit,
                })
            }
            other => Err(Error::Config(format!(
                "unknown solver '{other}' (expected direct or bicgstab)"
            ))),
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.experiment.is_empty() {
            return Err(Error::Config("no [[experiment]] sections".into()));
        }
        for e in &cfg.experiment {
            e.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("experiment '{}': {msg}", self.name)));
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        self.problem.parse::<Problem>()?;
        self.solver.solver()?;
        if let DomainConfig::Ball { radius, center } = &self.domain {
            if !(*radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                return bad("ball needs a finite center and radius > 0".into());
            }
        }
        match self.nodes.source {
            NodeSource::Grid | NodeSource::Halton => {
                let h = self.spacings()?;
                if h.is_empty() {
                    return bad("no refinement levels".into());
                }
                if h.iter().any(|&h| !(h > 0.0 && h.is_finite())) || h.windows(2).any(|w| w[1] >= w[0]) {
                    return bad("spacings must be positive and decreasing".into());
                }
            }
            NodeSource::File | NodeSource::Tetmesh => {
                if self.nodes.files.is_empty() {
                    return bad("file node sources need a 'files' list".into());
                }
            }
        }
        Ok(())
    }

    /// Spacings of the refinement levels for generated nodes.
    pub fn spacings(&self) -> Result<Vec<f64>> {
        match (&self.nodes.h, self.nodes.h0, self.nodes.levels) {
            (Some(h), None, None) => Ok(h.clone()),
            (None, Some(h0), Some([lo, hi])) if lo <= hi => {
                Ok((lo..=hi).map(|i| 0.9 * h0 * 2f64.powf(-f64::from(i) / 3.0)).collect())
            }
            _ => Err(Error::Config(format!(
                "experiment '{}': give either 'h' or both 'h0' and 'levels = [i_min, i_max]'",
                self.name
            ))),
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        self.problem.parse()
    }

    /// Builds the domain, resolving relative paths against `base`.
    pub fn domain(&self, base: &Path) -> Result<Domain> {
        let d = match &self.domain {
            DomainConfig::Ball { center, radius } => Domain::ball(Point3::from_array(*center), *radius)?,
            DomainConfig::Stl { path } => Domain::from_stl_file(base.join(path))?,
        };
        Ok(d.with_seed(self.seed))
    }
}
