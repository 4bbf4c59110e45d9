use super::assemble::LinearProblem;
use super::csr::CsrMatrix;
use super::ilu::Ilu0;
use super::rcm::rcm_ordering;

/// `|rho|` or `|omega|` below this ends the iteration as a breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-30;

pub trait Preconditioner {
    /// `x <- M^-1 x`
    fn apply(&self, x: &mut [f64]);
}

impl Preconditioner for Ilu0 {
    fn apply(&self, x: &mut [f64]) {
        self.solve_in_place(x);
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, _: &mut [f64]) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterStatus {
    Converged,
    MaxIterations,
    Breakdown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterReport {
    /// Counted in half steps: each iteration is a BiCG step followed by a
    /// minimal-residual step.
    pub iterations: f64,
    /// `||b - A x||_2 / ||b||_2` of the returned iterate.
    pub relative_residual: f64,
    pub status: IterStatus,
}

impl IterReport {
    pub fn converged(&self) -> bool {
        self.status == IterStatus::Converged
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.mul(x);
    b.iter().zip(ax).map(|(bi, axi)| bi - axi).collect()
}

/// Right-preconditioned BiCGSTAB for `A x = b`, starting from `x0` (zero if
/// absent). Converged means `||b - A x||_2 <= tol ||b||_2`, checked on the
/// true residual.
pub fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    precond: &impl Preconditioner,
    tol: f64,
    maxit: usize,
    x0: Option<&[f64]>,
) -> (Vec<f64>, IterReport) {
    let n = a.n();
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        let report = IterReport {
            iterations: 0.0,
            relative_residual: 0.0,
            status: IterStatus::Converged,
        };
        return (vec![0.0; n], report);
    }
    let target = tol * b_norm;
    let mut r = residual(a, b, &x);
    let report = |iterations: f64, res: f64, status| IterReport {
        iterations,
        relative_residual: res / b_norm,
        status,
    };
    let r0 = norm(&r);
    if r0 <= target {
        return (x, report(0.0, r0, IterStatus::Converged));
    }

    let r_hat = r.clone();
    let (mut rho_prev, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=maxit {
        let half = it as f64 - 0.5;
        let rho = dot(&r_hat, &r);
        if rho.abs() < BREAKDOWN_TOL {
            let res = norm(&residual(a, b, &x));
            return (x, report(half - 0.5, res, IterStatus::Breakdown));
        }
        if it == 1 {
            p.copy_from_slice(&r);
        } else {
            let beta = (rho / rho_prev) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
        }
        let mut ph = p.clone();
        precond.apply(&mut ph);
        a.matvec(&ph, &mut v);
        let rv = dot(&r_hat, &v);
        if rv.abs() < BREAKDOWN_TOL {
            let res = norm(&residual(a, b, &x));
            return (x, report(half - 0.5, res, IterStatus::Breakdown));
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= target {
            let x_half: Vec<f64> = x.iter().zip(&ph).map(|(xi, pi)| xi + alpha * pi).collect();
            let res = norm(&residual(a, b, &x_half));
            if res <= target {
                return (x_half, report(half, res, IterStatus::Converged));
            }
        }
        let mut sh = s.clone();
        precond.apply(&mut sh);
        a.matvec(&sh, &mut t);
        let tt = dot(&t, &t);
        omega = if tt == 0.0 { 0.0 } else { dot(&t, &s) / tt };
        for i in 0..n {
            x[i] += alpha * ph[i];
        }
        if omega.abs() < BREAKDOWN_TOL {
            let res = norm(&residual(a, b, &x));
            return (x, report(half, res, IterStatus::Breakdown));
        }
        for i in 0..n {
            x[i] += omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm(&r) <= target {
            let res = norm(&residual(a, b, &x));
            if res <= target {
                return (x, report(it as f64, res, IterStatus::Converged));
            }
        }
        rho_prev = rho;
    }
    let res = norm(&residual(a, b, &x));
    (x, report(maxit as f64, res, IterStatus::MaxIterations))
}

/// BiCGSTAB on the RCM-reordered system with ILU(0) preconditioning. If the
/// incomplete factorization hits a zero pivot, the iteration runs without
/// preconditioner.
pub fn solve_iterative(problem: &LinearProblem, tol: f64, maxit: usize) -> (Vec<f64>, IterReport) {
    let perm = rcm_ordering(&problem.matrix);
    let a = problem.matrix.permute(&perm);
    let b: Vec<f64> = perm.iter().map(|&old| problem.rhs[old]).collect();
    let (y, report) = match Ilu0::new(&a) {
        Ok(ilu) => bicgstab(&a, &b, &ilu, tol, maxit, None),
        Err(e) => {
            log::warn!("{e}; running BiCGSTAB without preconditioner");
            bicgstab(&a, &b, &IdentityPreconditioner, tol, maxit, None)
        }
    };
    let mut x = vec![0.0; y.len()];
    for (new, &old) in perm.iter().enumerate() {
        x[old] = y[new];
    }
    (x, report)
}
