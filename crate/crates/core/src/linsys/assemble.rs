use super::csr::CsrMatrix;
use crate::error::{Error, Result};
use crate::geometry::{NodeSet, Point3};
use crate::weights::WeightedStencil;

/// The eliminated interior system. Row `i` belongs to interior node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProblem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl LinearProblem {
    pub fn n(&self) -> usize {
        self.rhs.len()
    }
}

/// Assembles `sum_xi w_xi u_xi = f(zeta)` for every interior node, moving the
/// Dirichlet values `g` of boundary members to the right-hand side.
/// `stencils[i]` must be centered at interior node `i`.
pub fn assemble(
    nodes: &NodeSet,
    stencils: &[WeightedStencil],
    f: impl Fn(Point3) -> f64,
    g: impl Fn(Point3) -> f64,
) -> Result<LinearProblem> {
    let n = nodes.n_interior();
    if stencils.len() != n {
        return Err(Error::invalid(format!(
            "expected {n} stencils, one per interior node, got {}",
            stencils.len()
        )));
    }
    let mut rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for (i, st) in stencils.iter().enumerate() {
        if st.set.members.first() != Some(&i) {
            return Err(Error::invalid(format!(
                "stencil {i} is not centered at interior node {i}"
            )));
        }
        if st.weights.len() != st.set.members.len() {
            return Err(Error::invalid(format!(
                "stencil {i} has {} weights for {} members",
                st.weights.len(),
                st.len()
            )));
        }
        if let Some(w) = st.weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::WeightsFailed {
                node: i,
                reason: format!("non-finite weight {w}"),
            });
        }
        let mut b = f(nodes.point(i));
        let mut row = Vec::with_capacity(st.len());
        for (&m, &w) in st.set.members.iter().zip(&st.weights) {
            if m >= nodes.len() {
                return Err(Error::invalid(format!("stencil {i} references node {m} out of range")));
            }
            if nodes.is_interior(m) {
                row.push((m, w));
            } else {
                b -= w * g(nodes.point(m));
            }
        }
        rows.push(row);
        rhs.push(b);
    }
    Ok(LinearProblem {
        matrix: CsrMatrix::from_rows(n, rows),
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::InfluenceSet;
    use crate::weights::classical_7star_weights;

    #[test]
    fn single_unknown_elimination() {
        let h = 1.0;
        let boundary: Vec<Point3> = crate::weights::seven_star_offsets(h)[1..].to_vec();
        let nodes = NodeSet::new(vec![Point3::ORIGIN], boundary);
        let st = WeightedStencil {
            set: InfluenceSet {
                members: (0..7).collect(),
            },
            weights: classical_7star_weights(h).to_vec(),
        };
        let p = assemble(&nodes, &[st], |_| -6.0, |_| 0.0).unwrap();
        assert_eq!(p.matrix.nnz(), 1);
        assert_eq!(p.matrix.get(0, 0), -6.0);
        assert_eq!(p.rhs, vec![-6.0]);
    }

    #[test]
    fn failed_weights_name_the_node() {
        let nodes = NodeSet::new(vec![Point3::ORIGIN, Point3::new(1.0, 0.0, 0.0)], vec![]);
        let st = |c: usize, w: f64| WeightedStencil {
            set: InfluenceSet { members: vec![c] },
            weights: vec![w],
        };
        let err = assemble(&nodes, &[st(0, 1.0), st(1, f64::NAN)], |_| 0.0, |_| 0.0).unwrap_err();
        assert!(matches!(err, Error::WeightsFailed { node: 1, .. }));
    }
}
