use super::kernel::{cell, Kernel};
use crate::error::{Result, SgError};
use crate::exact::lorentz_gamma;
use crate::field::quadrature::{trapezoid, LocalInterp};
use crate::field::Field;
use crate::state::{State, Topology};

/// `(I F)(x) = int_c^x cosh(gamma (y - c)) / cosh(gamma (x - c)) F(y) dy`
/// with `c = beta t + center`.
pub fn operator_i(f: &Field, beta: f64, center: f64, t: f64) -> Result<Field> {
    if !(beta.abs() < 1.0) {
        return Err(SgError::InvalidArgument(format!("beta = {beta}")));
    }
    let grid = *f.grid();
    let c = beta * t + center;
    if !grid.contains(c) {
        return Err(SgError::OutOfRange { x: c });
    }
    let kern = Kernel {
        gamma: lorentz_gamma(beta),
        center: c,
    };
    let interp = LocalInterp::new(f);
    let n = grid.len();
    let mut out = vec![0.0; n];
    let first_right = (0..n).find(|&i| grid.x(i) >= c).unwrap_or(n);
    if first_right < n {
        let x = grid.x(first_right);
        let mut acc = cell(c, x, &interp, |y| kern.ratio(y, x));
        out[first_right] = acc;
        for i in first_right + 1..n {
            let (xa, xb) = (grid.x(i - 1), grid.x(i));
            acc = kern.ratio(xa, xb) * acc + cell(xa, xb, &interp, |y| kern.ratio(y, xb));
            out[i] = acc;
        }
    }
    if first_right > 0 {
        let last_left = first_right - 1;
        let x = grid.x(last_left);
        let mut acc = -cell(x, c, &interp, |y| kern.ratio(y, x));
        out[last_left] = acc;
        for i in (0..last_left).rev() {
            let (xa, xb) = (grid.x(i), grid.x(i + 1));
            acc = kern.ratio(xb, xa) * acc - cell(xa, xb, &interp, |y| kern.ratio(y, xa));
            out[i] = acc;
        }
    }
    Field::checked(grid, out)
}

/// Approximation to `f - Q(t, .; beta, center)` from a Backlund partner
/// `phi`:
///
/// ```text
/// F = phi_t - beta gamma cos(Q/2) phi
/// g = I F - gamma / (2 cosh(gamma (x - c))) int (I F) sech(gamma (y - c)) dy
/// ```
///
/// The correction makes `g` orthogonal to `sech(gamma (x - c))`.
pub fn reconstruct_difference(phi: &State, beta: f64, center: f64) -> Result<Field> {
    if phi.topology() != Topology::Zero {
        return Err(SgError::Topology("reconstruction needs a Zero-topology phi".into()));
    }
    let t = phi.time();
    let gamma = lorentz_gamma(beta);
    let c = beta * t + center;
    let kern = Kernel { gamma, center: c };
    let grid = *phi.grid();
    let forcing = Field::checked(
        grid,
        grid.points()
            .zip(phi.phi().values().iter().zip(phi.phi_t().values()))
            .map(|(x, (&p, &pt))| pt + beta * gamma * kern.tanh(x) * p)
            .collect(),
    )?;
    let i_f = operator_i(&forcing, beta, center, t)?;
    let proj: Vec<f64> = grid
        .points()
        .zip(i_f.values())
        .map(|(x, v)| v * kern.sech(x))
        .collect();
    let m = trapezoid(&proj, grid.dx());
    i_f.map_x(|x, v| v - 0.5 * gamma * kern.sech(x) * m)
}
