use faer::Mat;

use super::poly::PolyBasis;
use super::rbf::PolyharmonicRbf;
use crate::dense::{DenseLu, PivotedQr};
use crate::geometry::Point3;

/// Relative pivot threshold for the numerical rank of collocation matrices.
pub const RANK_TOL: f64 = 1e-10;
/// Saddle systems with a smaller reciprocal condition estimate are rejected.
pub const RCOND_MIN: f64 = 1e-13;
/// Accepted relative residual of the polynomial exactness conditions.
pub const EXACTNESS_TOL: f64 = 1e-9;

/// Why a stencil has no weights.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WeightFailure {
    #[error("no weights reproduce the Laplacian of all polynomials of order {order} (residual {residual:.2e})")]
    PolynomialExactness { order: usize, residual: f64 },
    #[error("saddle-point matrix is singular to working precision (rcond {0:.2e})")]
    Singular(f64),
    #[error("invalid stencil: {0}")]
    InvalidStencil(String),
}

/// Mean distance from `center` to the other members; 1 if there are none.
pub(crate) fn local_scale(center: Point3, others: impl Iterator<Item = Point3>) -> f64 {
    let (sum, count) = others.fold((0.0, 0usize), |(s, c), p| (s + p.dist(center), c + 1));
    if count == 0 || sum == 0.0 {
        1.0
    } else {
        sum / count as f64
    }
}

/// RBF-FD weights of the Laplacian at `members[0]` on the influence set
/// `members`, for the kernel `phi` augmented by polynomials of order `order`.
///
/// The points are shifted to the center and scaled by their mean distance to
/// it before assembly; the kernel is homogeneous, so this only rescales the
/// weights by `scale^-2`. When the collocation matrix of the polynomial basis
/// is rank deficient, the exactness constraints are restricted to its range,
/// which keeps the weights unique whenever polynomial exactness is solvable.
pub fn compute_rbffd_weights(
    members: &[Point3],
    phi: PolyharmonicRbf,
    order: usize,
) -> Result<Vec<f64>, WeightFailure> {
    let Some(&center) = members.first() else {
        return Err(WeightFailure::InvalidStencil("empty influence set".into()));
    };
    let k = members.len();
    let scale = local_scale(center, members[1..].iter().copied());
    let x: Vec<Point3> = members.iter().map(|&p| (p - center) / scale).collect();

    let basis = PolyBasis::new(order);
    let l = basis.dim();
    // collocation matrix P (k x L), column-major
    let mut p = vec![0.0; k * l];
    for (j, &xj) in x.iter().enumerate() {
        for (i, v) in basis.eval(xj).into_iter().enumerate() {
            p[i * k + j] = v;
        }
    }
    let target = basis.laplacian(Point3::ORIGIN);

    let qr = PivotedQr::new(k, l, p.clone(), RANK_TOL);
    let r = qr.rank;
    // P^T w = target  <=>  R^T (Q^T w) = Pi^T target; the rows beyond the rank
    // must be consistent with the leading ones.
    let permuted: Vec<f64> = qr.perm.iter().map(|&c| target[c]).collect();
    let d = qr.solve_r11_transpose(&permuted);
    let mut inconsistency: f64 = 0.0;
    for (jj, &want) in permuted.iter().enumerate().skip(r) {
        let got: f64 = (0..r).map(|i| qr.r(i, jj) * d[i]).sum();
        inconsistency = inconsistency.max((got - want).abs() / (1.0 + want.abs()));
    }
    if inconsistency > EXACTNESS_TOL {
        return Err(WeightFailure::PolynomialExactness {
            order,
            residual: inconsistency,
        });
    }

    // orthonormal basis of range(P): first r columns of Q
    let q_cols: Vec<Vec<f64>> = (0..r)
        .map(|c| {
            let mut e = vec![0.0; k];
            e[c] = 1.0;
            qr.apply_q(&mut e);
            e
        })
        .collect();

    let n = k + r;
    let mut a = Mat::<f64>::zeros(n, n);
    let mut rhs = vec![0.0; n];
    for i in 0..k {
        for j in 0..i {
            let v = phi.eval(x[i].dist(x[j]));
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        for (c, q) in q_cols.iter().enumerate() {
            a[(i, k + c)] = q[i];
            a[(k + c, i)] = q[i];
        }
        rhs[i] = phi.laplacian(x[i].norm());
    }
    rhs[k..].copy_from_slice(&d);

    let lu = DenseLu::new(&a);
    let rcond = lu.rcond();
    if !(rcond >= RCOND_MIN) {
        return Err(WeightFailure::Singular(rcond));
    }
    lu.solve(&mut rhs);
    let scaled = &rhs[..k];

    let residual = exactness_residual_scaled(&basis, &x, scaled);
    if !(residual <= EXACTNESS_TOL) {
        return Err(WeightFailure::PolynomialExactness { order, residual });
    }
    let inv2 = 1.0 / (scale * scale);
    Ok(scaled.iter().map(|w| w * inv2).collect())
}

/// `max_i |Delta p_i(0) - sum_j w_j p_i(x_j)| / (1 + |Delta p_i(0)|)` for
/// points already centered at the stencil center.
pub(crate) fn exactness_residual_scaled(basis: &PolyBasis, x: &[Point3], w: &[f64]) -> f64 {
    let target = basis.laplacian(Point3::ORIGIN);
    let mut acc = vec![0.0; basis.dim()];
    for (xj, wj) in x.iter().zip(w) {
        for (a, v) in acc.iter_mut().zip(basis.eval(*xj)) {
            *a += wj * v;
        }
    }
    acc.iter()
        .zip(&target)
        .map(|(got, want)| (got - want).abs() / (1.0 + want.abs()))
        .fold(0.0, f64::max)
}

/// Relative polynomial exactness residual of physical weights `w` on
/// `members` (center first), measured in the center-shifted monomial basis
/// with lengths expressed in units of the mean member distance.
pub fn exactness_residual(members: &[Point3], w: &[f64], order: usize) -> f64 {
    let center = members[0];
    let scale = local_scale(center, members[1..].iter().copied());
    let x: Vec<Point3> = members.iter().map(|&p| (p - center) / scale).collect();
    let ws: Vec<f64> = w.iter().map(|v| v * scale * scale).collect();
    exactness_residual_scaled(&PolyBasis::new(order), &x, &ws)
}

/// Weights of the classical 7-point Laplacian with spacing `h`, ordered as
/// center, +x, -x, +y, -y, +z, -z.
pub fn classical_7star_weights(h: f64) -> [f64; 7] {
    let s = 1.0 / (h * h);
    [-6.0 * s, s, s, s, s, s, s]
}

/// Offsets of the 7-point stencil members in the order used by
/// [`classical_7star_weights`].
pub fn seven_star_offsets(h: f64) -> [Point3; 7] {
    [
        Point3::ORIGIN,
        Point3::new(h, 0.0, 0.0),
        Point3::new(-h, 0.0, 0.0),
        Point3::new(0.0, h, 0.0),
        Point3::new(0.0, -h, 0.0),
        Point3::new(0.0, 0.0, h),
        Point3::new(0.0, 0.0, -h),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(center: Point3, h: f64) -> Vec<Point3> {
        seven_star_offsets(h).iter().map(|&o| center + o).collect()
    }

    #[test]
    fn seven_star_reproduces_classical_weights() {
        for order in [3, 4] {
            for h in [1.0, 0.1, 0.01] {
                let w = compute_rbffd_weights(&star(Point3::new(0.3, -0.2, 0.1), h), PolyharmonicRbf::default(), order)
                    .unwrap();
                for (got, want) in w.iter().zip(classical_7star_weights(h)) {
                    assert!(
                        (got - want).abs() <= 1e-8 * want.abs(),
                        "order {order} h {h}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn classical_values() {
        assert_eq!(classical_7star_weights(1.0), [-6.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(classical_7star_weights(0.5)[0], -24.0);
        // u = x^2 + y^2 + z^2 on the unit star: Laplacian 6
        let u = |p: Point3| p.norm_squared();
        let pts = star(Point3::ORIGIN, 1.0);
        let lap: f64 = classical_7star_weights(1.0)
            .iter()
            .zip(&pts)
            .map(|(w, p)| w * u(*p))
            .sum();
        assert_eq!(lap, 6.0);
    }

    #[test]
    fn coplanar_members_fail() {
        let mut pts = vec![Point3::ORIGIN];
        for i in 0..12 {
            let t = i as f64 * 0.5;
            pts.push(Point3::new(t.cos() * (1.0 + 0.1 * i as f64), t.sin(), 0.0));
        }
        assert!(matches!(
            compute_rbffd_weights(&pts, PolyharmonicRbf::default(), 3),
            Err(WeightFailure::PolynomialExactness { .. })
        ));
    }

    #[test]
    fn lone_center_fails() {
        assert!(compute_rbffd_weights(&[Point3::ORIGIN], PolyharmonicRbf::default(), 3).is_err());
        assert!(compute_rbffd_weights(&[], PolyharmonicRbf::default(), 3).is_err());
    }
}
