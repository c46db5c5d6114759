use super::{Field, Sample};
use crate::error::{Result, SgError};

const D1_INTERIOR: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D1_EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const D1_EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
const D2_INTERIOR: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D2_EDGE0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
const D2_EDGE1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];

fn dot<T: Sample>(coef: &[f64], v: impl Iterator<Item = T>) -> T {
    coef.iter()
        .zip(v)
        .fold(T::default(), |acc, (&c, x)| acc + x * c)
}

/// Fourth-order finite-difference derivative (order 1 or 2).
///
/// Central stencils in the interior, one-sided fourth-order stencils on the
/// two outermost nodes at each end.
pub fn spatial_derivative<T: Sample>(f: &Field<T>, order: u32) -> Result<Field<T>> {
    let v = f.values();
    let n = v.len();
    let dx = f.grid().dx();
    let mut out = vec![T::default(); n];
    match order {
        1 => {
            let s = 1.0 / (12.0 * dx);
            for i in 2..n - 2 {
                out[i] = dot(&D1_INTERIOR, v[i - 2..=i + 2].iter().copied()) * s;
            }
            out[0] = dot(&D1_EDGE0, v[..5].iter().copied()) * s;
            out[1] = dot(&D1_EDGE1, v[..5].iter().copied()) * s;
            out[n - 1] = -dot(&D1_EDGE0, v[n - 5..].iter().rev().copied()) * s;
            out[n - 2] = -dot(&D1_EDGE1, v[n - 5..].iter().rev().copied()) * s;
        }
        2 => {
            let s = 1.0 / (12.0 * dx * dx);
            for i in 2..n - 2 {
                out[i] = dot(&D2_INTERIOR, v[i - 2..=i + 2].iter().copied()) * s;
            }
            out[0] = dot(&D2_EDGE0, v[..6].iter().copied()) * s;
            out[1] = dot(&D2_EDGE1, v[..6].iter().copied()) * s;
            out[n - 1] = dot(&D2_EDGE0, v[n - 6..].iter().rev().copied()) * s;
            out[n - 2] = dot(&D2_EDGE1, v[n - 6..].iter().rev().copied()) * s;
        }
        _ => {
            return Err(SgError::InvalidArgument(format!(
                "finite-difference order {order} not supported"
            )))
        }
    }
    Field::checked(*f.grid(), out)
}
