use super::InfluenceSet;
use crate::dense::PivotedQr;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::spatial::SpatialIndex;
use crate::weights::{PolyBasis, WeightFailure, WeightedStencil, EXACTNESS_TOL, RANK_TOL};

/// Candidate neighbors examined by [`select_pqr`].
pub const PQR_CLOUD: usize = 100;

/// Selects nodes as the pivot columns of a column-pivoted QR factorization of
/// the polynomial collocation matrix over the nearest candidates, and returns
/// them with the weights solving the exactness conditions for polynomials of
/// degree below `order`.
///
/// The center is always a member. Its weight is fixed by the constant row, so
/// the factorization only involves the non-constant monomials, which vanish
/// at the center; at most `L - 1` further nodes are chosen. Each candidate
/// column is divided by its distance to the power `order - 1`, otherwise the
/// pivoting would prefer the farthest candidates.
pub fn select_pqr(center: usize, index: &SpatialIndex, order: usize) -> Result<WeightedStencil> {
    try_select_pqr(center, index, order)?.map_err(|e| Error::WeightsFailed {
        node: center,
        reason: format!("pQR{order}: {e}"),
    })
}

/// Like [`select_pqr`], with an unsolvable exactness system reported in the
/// inner result.
pub(crate) fn try_select_pqr(
    center: usize,
    index: &SpatialIndex,
    order: usize,
) -> Result<Result<WeightedStencil, WeightFailure>> {
    if !(1..=6).contains(&order) {
        return Err(Error::invalid(format!("pQR order must lie in 1..=6, got {order}")));
    }
    let zeta = index.point(center);
    let cloud = index.k_nearest(zeta, PQR_CLOUD, true);
    let basis = PolyBasis::new(order);
    let rows = basis.dim() - 1;
    if cloud.len() < rows.max(6) {
        return Err(Error::TooFewNeighbors {
            node: center,
            found: cloud.len(),
            needed: rows.max(6),
        });
    }
    let r_loc = cloud[..6].iter().map(|n| n.dist).sum::<f64>() / 6.0;
    let m = cloud.len();

    // rows: non-constant monomials; columns: candidates
    let mut p = vec![0.0; rows * m];
    let mut scale = vec![1.0; m];
    for (j, nb) in cloud.iter().enumerate() {
        let x = (index.point(nb.index) - zeta) / r_loc;
        scale[j] = x.norm().powi(1 - order as i32);
        for (i, v) in basis.eval(x).into_iter().skip(1).enumerate() {
            p[j * rows + i] = v * scale[j];
        }
    }
    let b: Vec<f64> = basis.laplacian(Point3::ORIGIN).into_iter().skip(1).collect();

    let qr = PivotedQr::new(rows, m, p.clone(), RANK_TOL);
    let mut qtb = b.clone();
    qr.apply_qt(&mut qtb);
    let y = qr.solve_r11(&qtb);
    let selected = &qr.perm[..qr.rank];

    let mut residual2 = 0.0;
    for (i, &bi) in b.iter().enumerate() {
        let got: f64 = selected.iter().zip(&y).map(|(&c, yc)| p[c * rows + i] * yc).sum();
        residual2 += (got - bi) * (got - bi);
    }
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let residual = residual2.sqrt();
    if !(residual <= EXACTNESS_TOL * b_norm) {
        return Ok(Err(WeightFailure::PolynomialExactness {
            order,
            residual: residual / b_norm,
        }));
    }

    let inv2 = 1.0 / (r_loc * r_loc);
    let mut members = vec![center];
    let mut weights = vec![0.0];
    for (&c, &yc) in selected.iter().zip(&y) {
        members.push(cloud[c].index);
        weights.push(yc * scale[c] * inv2);
    }
    weights[0] = -weights[1..].iter().sum::<f64>();
    Ok(Ok(WeightedStencil {
        set: InfluenceSet { members },
        weights,
    }))
}
