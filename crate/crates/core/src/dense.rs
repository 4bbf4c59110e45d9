//! Small dense kernels: Householder QR with column pivoting and an LU solve
//! with a reciprocal condition estimate.

use faer::linalg::solvers::{PartialPivLu, SolveCore};
use faer::{Conj, Mat};

use crate::linsys::normest::{onenormest, LinearOperator};

/// Column-pivoted Householder QR `A P = Q R` of an `m x n` column-major
/// matrix. Pivoting picks the remaining column of largest norm (ties to the
/// lowest index) and stops once that norm drops below `rank_tol * |R_00|`.
pub(crate) struct PivotedQr {
    m: usize,
    n: usize,
    /// R in the upper triangle, Householder vectors below it.
    qr: Vec<f64>,
    tau: Vec<f64>,
    pub perm: Vec<usize>,
    pub rank: usize,
}

impl PivotedQr {
    pub fn new(m: usize, n: usize, mut a: Vec<f64>, rank_tol: f64) -> Self {
        assert_eq!(a.len(), m * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let steps = m.min(n);
        let mut tau = Vec::with_capacity(steps);
        let mut first = 0.0;
        let mut rank = 0;
        for j in 0..steps {
            let col_norm2 = |a: &[f64], c: usize| a[c * m + j..(c + 1) * m].iter().map(|v| v * v).sum::<f64>();
            let (piv, norm2) = (j..n).fold((j, -1.0), |best, c| {
                let v = col_norm2(&a, c);
                if v > best.1 {
                    (c, v)
                } else {
                    best
                }
            });
            let norm = norm2.sqrt();
            if j == 0 {
                first = norm;
            }
            if norm == 0.0 || norm <= rank_tol * first {
                break;
            }
            if piv != j {
                for i in 0..m {
                    a.swap(j * m + i, piv * m + i);
                }
                perm.swap(j, piv);
            }
            // Householder reflector zeroing a[j+1.., j]
            let alpha = a[j * m + j];
            let beta = if alpha >= 0.0 { -norm } else { norm };
            let t = (beta - alpha) / beta;
            let scale = 1.0 / (alpha - beta);
            for i in j + 1..m {
                a[j * m + i] *= scale;
            }
            a[j * m + j] = beta;
            tau.push(t);
            for c in j + 1..n {
                let mut s = a[c * m + j];
                for i in j + 1..m {
                    s += a[j * m + i] * a[c * m + i];
                }
                s *= t;
                a[c * m + j] -= s;
                for i in j + 1..m {
                    a[c * m + i] -= s * a[j * m + i];
                }
            }
            rank += 1;
        }
        PivotedQr {
            m,
            n,
            qr: a,
            tau,
            perm,
            rank,
        }
    }

    #[inline]
    pub fn r(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j && j < self.n);
        self.qr[j * self.m + i]
    }

    /// `x <- Q^T x` for a vector of length m.
    pub fn apply_qt(&self, x: &mut [f64]) {
        for (j, &t) in self.tau.iter().enumerate() {
            let mut s = x[j];
            for i in j + 1..self.m {
                s += self.qr[j * self.m + i] * x[i];
            }
            s *= t;
            x[j] -= s;
            for i in j + 1..self.m {
                x[i] -= s * self.qr[j * self.m + i];
            }
        }
    }

    /// `x <- Q x` for a vector of length m.
    pub fn apply_q(&self, x: &mut [f64]) {
        for (j, &t) in self.tau.iter().enumerate().rev() {
            let mut s = x[j];
            for i in j + 1..self.m {
                s += self.qr[j * self.m + i] * x[i];
            }
            s *= t;
            x[j] -= s;
            for i in j + 1..self.m {
                x[i] -= s * self.qr[j * self.m + i];
            }
        }
    }

    /// Solves `R11 y = b` with `R11` the leading `rank x rank` block.
    pub fn solve_r11(&self, b: &[f64]) -> Vec<f64> {
        let r = self.rank;
        let mut y = b[..r].to_vec();
        for i in (0..r).rev() {
            let mut s = y[i];
            for j in i + 1..r {
                s -= self.r(i, j) * y[j];
            }
            y[i] = s / self.r(i, i);
        }
        y
    }

    /// Solves `R11^T y = b` with `R11` the leading `rank x rank` block.
    pub fn solve_r11_transpose(&self, b: &[f64]) -> Vec<f64> {
        let r = self.rank;
        let mut y = b[..r].to_vec();
        for i in 0..r {
            let mut s = y[i];
            for j in 0..i {
                s -= self.r(j, i) * y[j];
            }
            y[i] = s / self.r(i, i);
        }
        y
    }
}

/// Dense LU with partial pivoting.
pub(crate) struct DenseLu {
    lu: PartialPivLu<f64>,
    n: usize,
    norm1: f64,
}

impl DenseLu {
    pub fn new(a: &Mat<f64>) -> Self {
        let n = a.nrows();
        let norm1 = (0..n)
            .map(|j| (0..n).map(|i| a[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        DenseLu {
            lu: a.partial_piv_lu(),
            n,
            norm1,
        }
    }

    pub fn solve(&self, b: &mut [f64]) {
        let mut m = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place_with_conj(Conj::No, m.as_mut());
        for (i, v) in b.iter_mut().enumerate() {
            *v = m[(i, 0)];
        }
    }

    fn solve_transpose(&self, b: &mut [f64]) {
        let mut m = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_transpose_in_place_with_conj(Conj::No, m.as_mut());
        for (i, v) in b.iter_mut().enumerate() {
            *v = m[(i, 0)];
        }
    }

    /// Estimate of `1 / (||A||_1 ||A^-1||_1)`; 0 when the factorization is
    /// singular.
    pub fn rcond(&self) -> f64 {
        if self.norm1 == 0.0 {
            return 0.0;
        }
        let inv = onenormest(self);
        if !inv.is_finite() || inv == 0.0 {
            return 0.0;
        }
        1.0 / (self.norm1 * inv)
    }
}

impl LinearOperator for DenseLu {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &mut [f64]) {
        self.solve(x)
    }
    fn apply_transpose(&self, x: &mut [f64]) {
        self.solve_transpose(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_reconstructs_and_pivots() {
        // columns: (1,0,0), (0,3,0), (1,1,1), (2,0,0)
        let a = vec![1.0, 0.0, 0.0, 0.0, 3.0, 0.0, 1.0, 1.0, 1.0, 2.0, 0.0, 0.0];
        let qr = PivotedQr::new(3, 4, a.clone(), 1e-10);
        assert_eq!(qr.rank, 3);
        assert_eq!(qr.perm[0], 1);
        // Q^T A[:, perm[j]] equals column j of R
        for j in 0..3 {
            let c = qr.perm[j];
            let mut col = a[c * 3..c * 3 + 3].to_vec();
            qr.apply_qt(&mut col);
            for i in 0..3 {
                let expected = if i <= j { qr.r(i, j) } else { 0.0 };
                assert!((col[i] - expected).abs() < 1e-14);
            }
            qr.apply_q(&mut col);
            for i in 0..3 {
                assert!((col[i] - a[c * 3 + i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn qr_detects_rank() {
        // rank one: all columns multiples of (1,2)
        let a = vec![1.0, 2.0, 2.0, 4.0, -1.0, -2.0];
        let qr = PivotedQr::new(2, 3, a, 1e-10);
        assert_eq!(qr.rank, 1);
        assert_eq!(qr.perm[0], 1);
    }

    #[test]
    fn lu_rcond() {
        let a = Mat::<f64>::from_fn(3, 3, |i, j| if i == j { [1.0, 2.0, 4.0][i] } else { 0.0 });
        let lu = DenseLu::new(&a);
        assert!((lu.rcond() - 0.25).abs() < 1e-15);
        let mut b = vec![1.0, 2.0, 4.0];
        lu.solve(&mut b);
        assert_eq!(b, vec![1.0, 1.0, 1.0]);
        let s = Mat::<f64>::from_fn(3, 3, |_, _| 1.0);
        assert!(DenseLu::new(&s).rcond() < 1e-13);
    }
}
