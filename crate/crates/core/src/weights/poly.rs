use crate::geometry::Point3;

/// Monomial basis of trivariate polynomials of total degree below `order`,
/// in graded lexicographic order: 1, x, y, z, x^2, xy, xz, y^2, yz, z^2, ...
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyBasis {
    order: usize,
    exponents: Vec<[u32; 3]>,
}

impl PolyBasis {
    pub fn new(order: usize) -> Self {
        let mut exponents = Vec::new();
        for degree in 0..order as u32 {
            for a in (0..=degree).rev() {
                for b in (0..=degree - a).rev() {
                    exponents.push([a, b, degree - a - b]);
                }
            }
        }
        PolyBasis { order, exponents }
    }

    /// `C(order + 2, 3)`.
    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn exponents(&self) -> &[[u32; 3]] {
        &self.exponents
    }

    pub fn eval(&self, p: Point3) -> Vec<f64> {
        self.exponents
            .iter()
            .map(|&[a, b, c]| pow(p.x, a) * pow(p.y, b) * pow(p.z, c))
            .collect()
    }

    pub fn laplacian(&self, p: Point3) -> Vec<f64> {
        self.exponents
            .iter()
            .map(|&[a, b, c]| {
                let (px, py, pz) = (pow(p.x, a), pow(p.y, b), pow(p.z, c));
                second(p.x, a) * py * pz + px * second(p.y, b) * pz + px * py * second(p.z, c)
            })
            .collect()
    }
}

#[inline]
fn pow(v: f64, e: u32) -> f64 {
    v.powi(e as i32)
}

/// d^2/dv^2 of v^e
#[inline]
fn second(v: f64, e: u32) -> f64 {
    if e < 2 {
        0.0
    } else {
        (e * (e - 1)) as f64 * v.powi(e as i32 - 2)
    }
}
