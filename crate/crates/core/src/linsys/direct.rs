use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, MatMut};

use super::assemble::LinearProblem;
use super::csr::CsrMatrix;
use super::normest::{onenormest, LinearOperator};
use crate::error::{Error, Result};

/// Sparse LU factorization with partial pivoting.
pub struct DirectSolver {
    lu: Lu<usize, f64>,
    n: usize,
}

impl std::fmt::Debug for DirectSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectSolver")
            .field("n", &self.n)
            .finish_non_exhaustive()
    }
}

impl DirectSolver {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n();
        let mut triplets = Vec::with_capacity(a.nnz());
        for i in 0..n {
            let (cols, vals) = a.row(i);
            triplets.extend(cols.iter().zip(vals).map(|(&c, &v)| Triplet::new(i, c, v)));
        }
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::invalid(format!("sparse matrix construction failed: {e:?}")))?;
        let lu = mat.sp_lu().map_err(|_| Error::Singular)?;
        Ok(DirectSolver { lu, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `A^-1 b`; fails if the result is not finite.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x, false);
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::Singular)
        }
    }

    fn solve_in_place(&self, x: &mut [f64], transpose: bool) {
        let rhs = MatMut::from_column_major_slice_mut(x, self.n, 1);
        if transpose {
            self.lu.solve_transpose_in_place_with_conj(Conj::No, rhs);
        } else {
            self.lu.solve_in_place_with_conj(Conj::No, rhs);
        }
    }

    /// Estimate of `||A^-1||_inf`, computed as the 1-norm of `A^-T`.
    pub fn inverse_norm_inf(&self) -> f64 {
        onenormest(&InverseTranspose(self))
    }
}

struct InverseTranspose<'a>(&'a DirectSolver);

impl LinearOperator for InverseTranspose<'_> {
    fn dim(&self) -> usize {
        self.0.n
    }
    fn apply(&self, x: &mut [f64]) {
        self.0.solve_in_place(x, true);
    }
    fn apply_transpose(&self, x: &mut [f64]) {
        self.0.solve_in_place(x, false);
    }
}

/// Factors and solves the problem, rejecting solutions whose residual
/// `||A x - b||_inf` exceeds `1e-10 (||A||_inf ||x||_inf + ||b||_inf)`. The
/// factorization is returned for reuse.
pub fn sparse_lu_solve(problem: &LinearProblem) -> Result<(Vec<f64>, DirectSolver)> {
    let solver = DirectSolver::factor(&problem.matrix)?;
    let x = solver.solve(&problem.rhs)?;
    let ax = problem.matrix.mul(&x);
    let res = ax
        .iter()
        .zip(&problem.rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let x_inf = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let b_inf = problem.rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(res <= 1e-10 * (problem.matrix.norm_inf() * x_inf + b_inf)) {
        return Err(Error::Singular);
    }
    Ok((x, solver))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(a: CsrMatrix, rhs: Vec<f64>) -> LinearProblem {
        LinearProblem { matrix: a, rhs }
    }

    #[test]
    fn identity() {
        let (x, _) = sparse_lu_solve(&problem(CsrMatrix::identity(3), vec![1.0, -2.0, 3.5])).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)]);
        let (x, _) = sparse_lu_solve(&problem(a, vec![3.0, 3.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(
            sparse_lu_solve(&problem(a, vec![1.0, 2.0])),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn inverse_norm_of_diagonal() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 0.1)]);
        let s = DirectSolver::factor(&a).unwrap();
        assert!((s.inverse_norm_inf() - 10.0).abs() < 1e-12);
        let s = DirectSolver::factor(&CsrMatrix::identity(20)).unwrap();
        assert!((s.inverse_norm_inf() - 1.0).abs() < 1e-12);
    }
}
