//! Error and quality metrics, and the per-run report.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{NodeSet, Point3};
use crate::linsys::CsrMatrix;

/// `||reference - approx||_2 / ||reference||_2`.
pub fn rrms(reference: &[f64], approx: &[f64]) -> Result<f64> {
    if reference.len() != approx.len() || reference.is_empty() {
        return Err(Error::invalid(format!(
            "rrms needs equal nonempty vectors, got lengths {} and {}",
            reference.len(),
            approx.len()
        )));
    }
    let den: f64 = reference.iter().map(|r| r * r).sum();
    if den == 0.0 {
        return Err(Error::invalid("reference vector has zero norm"));
    }
    let num: f64 = reference.iter().zip(approx).map(|(r, a)| (r - a) * (r - a)).sum();
    Ok((num / den).sqrt())
}

/// Stored nonzeros per row.
pub fn density(a: &CsrMatrix) -> f64 {
    a.density()
}

/// Least-squares slope of `log E` against `log N^(-1/3)`.
pub fn convergence_order(levels: &[(usize, f64)]) -> Result<f64> {
    if levels.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 levels, got {}", levels.len())));
    }
    if let Some(&(n, e)) = levels.iter().find(|&&(n, e)| !(e > 0.0 && e.is_finite()) || n == 0) {
        return Err(Error::invalid(format!("level with N = {n} has unusable error {e}")));
    }
    let pts: Vec<(f64, f64)> = levels.iter().map(|&(n, e)| (-(n as f64).ln() / 3.0, e.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("all levels have the same node count"));
    }
    Ok(sxy / sxx)
}

/// RRMS error of `solution` against `exact` over the interior nodes.
/// Non-finite entries in the solution propagate to the result.
pub fn evaluate_solution(nodes: &NodeSet, solution: &[f64], exact: impl Fn(Point3) -> f64) -> Result<f64> {
    if solution.len() != nodes.n_interior() {
        return Err(Error::invalid(format!(
            "solution has {} entries for {} interior nodes",
            solution.len(),
            nodes.n_interior()
        )));
    }
    let reference: Vec<f64> = nodes.interior.iter().map(|&p| exact(p)).collect();
    rrms(&reference, solution)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilStats {
    pub min: usize,
    pub mean: f64,
    pub max: usize,
}

impl StencilStats {
    pub fn from_sizes(sizes: impl IntoIterator<Item = usize>) -> Option<Self> {
        let (mut min, mut max, mut sum, mut count) = (usize::MAX, 0, 0usize, 0usize);
        for s in sizes {
            min = min.min(s);
            max = max.max(s);
            sum += s;
            count += 1;
        }
        (count > 0).then(|| StencilStats {
            min,
            mean: sum as f64 / count as f64,
            max,
        })
    }
}

/// BiCGSTAB iteration count of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iterations {
    pub count: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseTimes {
    pub select: f64,
    pub weights: f64,
    pub assemble: f64,
    pub solve: f64,
}

/// Outcome of one method on one node set. `e_ref` is NaN when weights could
/// not be computed and infinite when the system was singular.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: String,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub e_ref: f64,
    pub density: Option<f64>,
    pub sigma: Option<f64>,
    pub iterations: Option<Iterations>,
    pub stencils: Option<StencilStats>,
    pub times: PhaseTimes,
}

pub const CSV_HEADER: &str =
    "method,N_int,N_bnd,E_ref,density,sigma,iters,k_min,k_mean,k_max,t_select,t_weights,t_assemble,t_solve";

/// `NaN`, `Inf` and `-Inf` for the special values, scientific otherwise.
pub fn format_sci(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "Inf" } else { "-Inf" }.into()
    } else {
        format!("{v:.6e}")
    }
}

impl SolveReport {
    pub fn new(method: impl Into<String>, n_interior: usize, n_boundary: usize) -> Self {
        SolveReport {
            method: method.into(),
            n_interior,
            n_boundary,
            e_ref: f64::NAN,
            density: None,
            sigma: None,
            iterations: None,
            stencils: None,
            times: PhaseTimes::default(),
        }
    }

    /// One CSV line without newline. Missing values are empty fields; with
    /// `timings` false the time columns are written as 0.
    pub fn csv_row(&self, timings: bool) -> String {
        let mut s = String::new();
        let opt = |v: Option<String>| v.unwrap_or_default();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},",
            self.method,
            self.n_interior,
            self.n_boundary,
            format_sci(self.e_ref),
            opt(self.density.map(|d| format!("{d:.4}"))),
            opt(self.sigma.map(format_sci)),
            opt(self.iterations.map(|it| if it.converged {
                format!("{}", it.count)
            } else {
                "fail".into()
            })),
        );
        match self.stencils {
            Some(st) => {
                let _ = write!(s, "{},{:.3},{},", st.min, st.mean, st.max);
            }
            None => s.push_str(",,,"),
        }
        let t = if timings { self.times } else { PhaseTimes::default() };
        let _ = write!(s, "{:.3},{:.3},{:.3},{:.3}", t.select, t.weights, t.assemble, t.solve);
        s
    }
}
