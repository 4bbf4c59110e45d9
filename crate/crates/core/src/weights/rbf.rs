use crate::error::{Error, Result};

/// Polyharmonic kernel `phi(r) = r^alpha` with odd `alpha >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolyharmonicRbf {
    alpha: u32,
}

impl Default for PolyharmonicRbf {
    fn default() -> Self {
        PolyharmonicRbf { alpha: 5 }
    }
}

impl PolyharmonicRbf {
    pub fn new(alpha: u32) -> Result<Self> {
        if alpha < 3 || alpha % 2 == 0 {
            return Err(Error::invalid(format!(
                "polyharmonic exponent must be odd and >= 3, got {alpha}"
            )));
        }
        Ok(PolyharmonicRbf { alpha })
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        r.powi(self.alpha as i32)
    }

    /// 3D Laplacian of `x -> phi(|x|)` at radius `r`: `alpha (alpha + 1) r^(alpha - 2)`.
    #[inline]
    pub fn laplacian(&self, r: f64) -> f64 {
        let a = self.alpha as f64;
        a * (a + 1.0) * r.powi(self.alpha as i32 - 2)
    }
}
