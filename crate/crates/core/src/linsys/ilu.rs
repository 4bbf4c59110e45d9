use super::csr::CsrMatrix;
use crate::error::{Error, Result};

/// Zero-fill incomplete LU factorization. `L` (unit diagonal) and `U` share
/// the storage and sparsity pattern of `A`.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.n();
        let mut lu = a.clone();
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            match lu.position(i, i) {
                Some(k) => diag.push(k),
                None => return Err(Error::ZeroPivot(i)),
            }
        }
        let row_ptr = lu.row_ptr().to_vec();
        let col_idx = lu.col_idx().to_vec();
        let mut pos = vec![usize::MAX; n];
        let vals = lu.values_mut();
        for i in 0..n {
            let row = row_ptr[i]..row_ptr[i + 1];
            for k in row.clone() {
                pos[col_idx[k]] = k;
            }
            for kk in row.clone() {
                let k = col_idx[kk];
                if k >= i {
                    break;
                }
                let pivot = vals[diag[k]];
                if pivot == 0.0 || !pivot.is_finite() {
                    return Err(Error::ZeroPivot(k));
                }
                vals[kk] /= pivot;
                let lik = vals[kk];
                for kj in diag[k] + 1..row_ptr[k + 1] {
                    let p = pos[col_idx[kj]];
                    if p != usize::MAX {
                        vals[p] -= lik * vals[kj];
                    }
                }
            }
            for k in row {
                pos[col_idx[k]] = usize::MAX;
            }
            if vals[diag[i]] == 0.0 || !vals[diag[i]].is_finite() {
                return Err(Error::ZeroPivot(i));
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    /// Solves `L U x = r` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.lu.n();
        let (ptr, cols, vals) = (self.lu.row_ptr(), self.lu.col_idx(), self.lu.values());
        for i in 0..n {
            let mut s = x[i];
            for k in ptr[i]..self.diag[i] {
                s -= vals[k] * x[cols[k]];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in self.diag[i] + 1..ptr[i + 1] {
                s -= vals[k] * x[cols[k]];
            }
            x[i] = s / vals[self.diag[i]];
        }
    }

    /// Unit lower triangular factor.
    pub fn lower(&self) -> CsrMatrix {
        self.split(|i, j| j < i, true)
    }

    /// Upper triangular factor.
    pub fn upper(&self) -> CsrMatrix {
        self.split(|i, j| j >= i, false)
    }

    fn split(&self, keep: impl Fn(usize, usize) -> bool, unit_diag: bool) -> CsrMatrix {
        let n = self.lu.n();
        let rows = (0..n)
            .map(|i| {
                let (cols, vals) = self.lu.row(i);
                let mut row: Vec<(usize, f64)> = cols
                    .iter()
                    .zip(vals)
                    .filter(|(&j, _)| keep(i, j))
                    .map(|(&j, &v)| (j, v))
                    .collect();
                if unit_diag {
                    row.push((i, 1.0));
                }
                row
            })
            .collect();
        CsrMatrix::from_rows(n, rows)
    }
}
