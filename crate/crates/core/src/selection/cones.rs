use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Index of the cone containing direction `v` among the `8 s` cones around
/// the origin, 0-based.
///
/// The octant is `nx + 2 ny + 4 nz` where `nx`, `ny`, `nz` flag the negative
/// side of each coordinate plane. A zero coordinate is put on the side chosen
/// cyclically by the next coordinate: `x = 0` counts as negative iff `y > 0`,
/// `y = 0` iff `z > 0`, `z = 0` iff `x > 0`. This splits the points of each
/// coordinate plane between both adjacent octants. For `s = 2` each octant is split
/// by the plane `|x| = |y|` (`|x| >= |y|` first); for `s = 3` it is split by
/// the dominant coordinate `argmax |v_i|`, ties going to the lower axis.
pub fn classify_cone(v: Point3, s: usize) -> Result<usize> {
    if v == Point3::ORIGIN {
        return Err(Error::invalid("cannot classify the zero vector"));
    }
    let negative = |a: f64, next: f64| a < 0.0 || (a == 0.0 && next > 0.0);
    let octant =
        usize::from(negative(v.x, v.y)) + 2 * usize::from(negative(v.y, v.z)) + 4 * usize::from(negative(v.z, v.x));
    let (ax, ay, az) = (v.x.abs(), v.y.abs(), v.z.abs());
    Ok(match s {
        1 => octant,
        2 => 2 * octant + usize::from(ax < ay),
        3 => {
            let sub = if ax >= ay && ax >= az {
                0
            } else if ay >= az {
                1
            } else {
                2
            };
            3 * octant + sub
        }
        _ => return Err(Error::invalid(format!("octant subdivision must be 1, 2 or 3, got {s}"))),
    })
}
