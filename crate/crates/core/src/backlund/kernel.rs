//! Exponential kernels `cosh(gamma (y - c)) / cosh(gamma (x - c))` and
//! cell quadrature against interpolated grid data.

use crate::field::quadrature::{LocalInterp, GAUSS4};

/// `ln cosh(u)` without overflow.
pub(crate) fn ln_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Kernel {
    pub gamma: f64,
    pub center: f64,
}

impl Kernel {
    /// `cosh(gamma (y - c)) / cosh(gamma (x - c))`.
    pub fn ratio(&self, y: f64, x: f64) -> f64 {
        let g = self.gamma;
        (ln_cosh(g * (y - self.center)) - ln_cosh(g * (x - self.center))).exp()
    }

    pub fn sech(&self, x: f64) -> f64 {
        1.0 / (self.gamma * (x - self.center)).cosh()
    }

    pub fn tanh(&self, x: f64) -> f64 {
        (self.gamma * (x - self.center)).tanh()
    }
}

/// `int_a^b w(y) F(y) dy` with Gauss-Legendre nodes and interpolated `F`.
pub(crate) fn cell(a: f64, b: f64, interp: &LocalInterp, w: impl Fn(f64) -> f64) -> f64 {
    let h = b - a;
    GAUSS4
        .iter()
        .map(|&(xi, wt)| {
            let y = a + xi * h;
            wt * w(y) * interp.eval(y)
        })
        .sum::<f64>()
        * h
}
