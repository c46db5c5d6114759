use super::{Field, Sample};
use crate::error::Result;

/// Trapezoid rule over `[x_0, x_{n-1}]`.
pub fn integrate<T: Sample>(f: &Field<T>) -> T {
    trapezoid(f.values(), f.grid().dx())
}

pub(crate) fn trapezoid<T: Sample>(v: &[T], dx: f64) -> T {
    let n = v.len();
    let inner = v.iter().fold(T::default(), |a, &b| a + b);
    (inner - (v[0] + v[n - 1]) * 0.5) * dx
}

/// `sum f conj(g) dx` with trapezoid weights.
pub fn inner_product<T: Sample>(f: &Field<T>, g: &Field<T>) -> Result<T> {
    f.same_grid(g)?;
    let prod: Vec<T> = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(&a, &b)| a * b.conj())
        .collect();
    Ok(trapezoid(&prod, f.grid().dx()))
}

/// Four-point Gauss-Legendre rule on `[0, 1]`.
pub(crate) const GAUSS4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

/// Sixth-order local Lagrange interpolation of grid samples.
pub(crate) struct LocalInterp<'a> {
    x0: f64,
    dx: f64,
    v: &'a [f64],
}

impl<'a> LocalInterp<'a> {
    pub fn new(f: &'a Field<f64>) -> Self {
        LocalInterp {
            x0: f.grid().x_min(),
            dx: f.grid().dx(),
            v: f.values(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.v.len();
        let s = (x - self.x0) / self.dx;
        let j = (s.floor() as i64).clamp(0, n as i64 - 2);
        let start = (j - 2).clamp(0, n as i64 - 6) as usize;
        let mut acc = 0.0;
        for a in 0..6 {
            let mut w = 1.0;
            let sa = (start + a) as f64;
            for b in 0..6 {
                if b != a {
                    let sb = (start + b) as f64;
                    w *= (s - sb) / (sa - sb);
                }
            }
            acc += w * self.v[start + a];
        }
        acc
    }
}
