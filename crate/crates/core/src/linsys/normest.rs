//! Block 1-norm estimation (Higham & Tisseur) for operators available only
//! through products with a vector and with its transpose.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A square operator `B` applied in place.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `x <- B x`
    fn apply(&self, x: &mut [f64]);
    /// `x <- B^T x`
    fn apply_transpose(&self, x: &mut [f64]);
}

/// Columns per block.
pub const BLOCK: usize = 2;
/// Maximum number of sweeps.
pub const MAX_SWEEPS: usize = 5;

/// Estimate of `||B||_1`. The estimate is always attained by some unit
/// vector, so it never exceeds the true norm. Small operators (n <= 8) are
/// evaluated exactly.
pub fn onenormest(op: &impl LinearOperator) -> f64 {
    let n = op.dim();
    if n == 0 {
        return 0.0;
    }
    if n <= 8 {
        return exact_norm1(op);
    }
    let t = BLOCK.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6f726d657374);
    let inv_n = 1.0 / n as f64;

    let mut x: Vec<Vec<f64>> = vec![vec![inv_n; n]];
    while x.len() < t {
        let col: Vec<f64> = (0..n)
            .map(|_| if rng.random::<bool>() { inv_n } else { -inv_n })
            .collect();
        if !x.iter().any(|c| parallel(c, &col)) {
            x.push(col);
        }
    }

    let mut visited = vec![false; n];
    let mut est_old = 0.0;
    let mut est = 0.0;
    let mut ind_best = 0usize;
    let mut ind: Vec<usize> = Vec::new();
    let mut s_old: Vec<Vec<f64>> = Vec::new();

    for sweep in 0..MAX_SWEEPS {
        let y: Vec<Vec<f64>> = x
            .iter()
            .map(|c| {
                let mut v = c.clone();
                op.apply(&mut v);
                v
            })
            .collect();
        if y.iter().flatten().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        let (j_best, e) = y
            .iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (j, v)| if v > acc.1 { (j, v) } else { acc },
            );
        est = e;
        if sweep >= 1 && est <= est_old {
            est = est_old;
            break;
        }
        if sweep >= 1 {
            ind_best = ind[j_best];
        }
        est_old = est;

        let mut s: Vec<Vec<f64>> = y
            .iter()
            .map(|c| c.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect())
            .collect();
        if sweep >= 1 && s.iter().all(|c| s_old.iter().any(|o| parallel(c, o))) {
            break;
        }
        for j in 1..s.len() {
            let mut tries = 0;
            while tries < 8 && (s[..j].iter().any(|c| parallel(c, &s[j])) || s_old.iter().any(|c| parallel(c, &s[j]))) {
                s[j] = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
                tries += 1;
            }
        }

        let z: Vec<Vec<f64>> = s
            .iter()
            .map(|c| {
                let mut v = c.clone();
                op.apply_transpose(&mut v);
                v
            })
            .collect();
        let h: Vec<f64> = (0..n)
            .map(|i| z.iter().map(|c| c[i].abs()).fold(0.0, f64::max))
            .collect();
        let h_max = h.iter().copied().fold(0.0, f64::max);
        if sweep >= 1 && h_max == h[ind_best] {
            break;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| h[b].total_cmp(&h[a]).then(a.cmp(&b)));
        if order[..t].iter().all(|&i| visited[i]) {
            break;
        }
        ind = order.into_iter().filter(|&i| !visited[i]).take(t).collect();
        if ind.is_empty() {
            break;
        }
        x = ind
            .iter()
            .map(|&i| {
                visited[i] = true;
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        s_old = s;
    }
    est
}

fn exact_norm1(op: &impl LinearOperator) -> f64 {
    let n = op.dim();
    (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            op.apply(&mut e);
            let s = e.iter().map(|v| v.abs()).sum::<f64>();
            if s.is_finite() {
                s
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

fn parallel(a: &[f64], b: &[f64]) -> bool {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    (dot.abs() - na * nb).abs() <= 1e-12 * na * nb
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Dense(Vec<Vec<f64>>);

    impl LinearOperator for Dense {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &mut [f64]) {
            let y: Vec<f64> = self
                .0
                .iter()
                .map(|r| r.iter().zip(&*x).map(|(a, b)| a * b).sum())
                .collect();
            x.copy_from_slice(&y);
        }
        fn apply_transpose(&self, x: &mut [f64]) {
            let n = self.0.len();
            let y: Vec<f64> = (0..n).map(|j| (0..n).map(|i| self.0[i][j] * x[i]).sum()).collect();
            x.copy_from_slice(&y);
        }
    }

    fn true_norm1(a: &[Vec<f64>]) -> f64 {
        (0..a.len())
            .map(|j| a.iter().map(|r| r[j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_large() {
        let n = 40;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 + i as f64 } else { 0.0 }).collect())
            .collect();
        assert_eq!(onenormest(&Dense(a)), 40.0);
    }

    #[test]
    fn random_dense_within_factor_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [9, 20, 60] {
            let a: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let exact = true_norm1(&a);
            let est = onenormest(&Dense(a));
            assert!(est <= exact * (1.0 + 1e-12) && est >= exact / 3.0, "{est} vs {exact}");
        }
    }
}
