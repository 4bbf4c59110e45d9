/// Radical inverse of `index` in the given base: the base-`b` digits of the
/// index mirrored about the radix point.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut scale = inv_base;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv_base;
    }
    value
}

/// Unscrambled 3D Halton sequence with bases (2, 3, 5), starting at index 1.
#[derive(Debug, Clone)]
pub struct Halton3 {
    next: u64,
}

impl Halton3 {
    pub fn new() -> Self {
        Halton3 { next: 1 }
    }

    pub fn point(index: u64) -> [f64; 3] {
        [
            radical_inverse(index, 2),
            radical_inverse(index, 3),
            radical_inverse(index, 5),
        ]
    }
}

impl Default for Halton3 {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for Halton3 {
    type Item = [f64; 3];

    fn next(&mut self) -> Option<[f64; 3]> {
        let p = Halton3::point(self.next);
        self.next += 1;
        Some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points() {
        let mut h = Halton3::new();
        assert_eq!(h.next().unwrap(), [0.5, 1.0 / 3.0, 0.2]);
        assert_eq!(h.next().unwrap(), [0.25, 2.0 / 3.0, 0.4]);
        let p3 = h.next().unwrap();
        assert_eq!(p3[0], 0.75);
        assert!((p3[1] - 1.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn base_two_digits() {
        // 6 = 110b -> 0.011b
        assert_eq!(radical_inverse(6, 2), 0.375);
        assert_eq!(radical_inverse(0, 7), 0.0);
    }
}
