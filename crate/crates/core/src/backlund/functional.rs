use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::kernel::{cell, Kernel};
use crate::error::{Result, SgError};
use crate::exact::{a_of_beta, beta_of_a, kink_identities, lorentz_gamma, KinkParams};
use crate::field::quadrature::{trapezoid, LocalInterp};
use crate::field::spectral::{ensure_periodic, spectral_derivative_raw};
use crate::field::{Field, Grid};

/// Base point of the functional: the kink `Q(t, .; beta0, x0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FContext {
    pub beta0: f64,
    pub t: f64,
    pub x0: f64,
}

impl FContext {
    pub fn kink(&self) -> Result<KinkParams> {
        KinkParams::new(self.beta0, self.x0)
    }
    pub fn a0(&self) -> f64 {
        a_of_beta(self.beta0)
    }
    pub fn gamma0(&self) -> f64 {
        lorentz_gamma(self.beta0)
    }
    pub fn center(&self) -> f64 {
        self.beta0 * self.t + self.x0
    }
    fn kernel(&self) -> Kernel {
        Kernel {
            gamma: self.gamma0(),
            center: self.center(),
        }
    }
}

/// Values of the three components.
#[derive(Clone, Debug, PartialEq)]
pub struct FTriple {
    pub f1: Field,
    pub f2: Field,
    pub f3: f64,
}

/// Kink profile and derivatives on the grid.
pub(super) struct KinkSamples {
    pub q: Vec<f64>,
    pub q_x: Vec<f64>,
    pub q_t: Vec<f64>,
}

pub(super) fn kink_samples(grid: &Grid, ctx: &FContext) -> Result<KinkSamples> {
    let p = ctx.kink()?;
    let ids: Vec<_> = grid.points().map(|x| kink_identities(&p, ctx.t, x)).collect();
    Ok(KinkSamples {
        q: ids.iter().map(|k| k.q).collect(),
        q_x: ids.iter().map(|k| k.q_x).collect(),
        q_t: ids.iter().map(|k| k.q_t).collect(),
    })
}

/// Decaying-field derivative.
pub(super) fn dx_decaying(f: &Field) -> Result<Vec<f64>> {
    ensure_periodic(f.values())?;
    Ok(spectral_derivative_raw(f.grid(), f.values(), 1))
}

/// Second component alone; the inverse transform iterates on it.
pub(super) fn f2_values(
    a: f64,
    v0: &Field,
    u0: &Field,
    u1: &Field,
    k: &KinkSamples,
) -> Result<Vec<f64>> {
    let v0x = dx_decaying(v0)?;
    let (v0, u0, u1) = (v0.values(), u0.values(), u1.values());
    Ok((0..v0.len())
        .map(|i| {
            let s = u0[i] + k.q[i];
            k.q_t[i] + u1[i] - v0x[i] - ((s + v0[i]) / 2.0).sin() / a
                + a * ((s - v0[i]) / 2.0).sin()
        })
        .collect())
}

pub(super) fn f1_values(
    a: f64,
    v0: &Field,
    v1: &Field,
    u0: &Field,
    k: &KinkSamples,
) -> Result<Vec<f64>> {
    let u0x = dx_decaying(u0)?;
    let (v0, v1, u0) = (v0.values(), v1.values(), u0.values());
    Ok((0..v0.len())
        .map(|i| {
            let s = u0[i] + k.q[i];
            k.q_x[i] + u0x[i] - v1[i] - ((s + v0[i]) / 2.0).sin() / a
                - a * ((s - v0[i]) / 2.0).sin()
        })
        .collect())
}

/// Third component and its `y`-derivative.
pub(super) fn f3_with_slope(
    grid: &Grid,
    delta: f64,
    y: f64,
    u0: &Field,
    k: &KinkSamples,
    ctx: &FContext,
) -> (f64, f64) {
    let g = lorentz_gamma(beta_of_a(ctx.a0() + delta));
    let c = ctx.center() + y;
    let (mut val, mut slope) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for (i, x) in grid.points().enumerate() {
        let z = g * (x - c);
        let s = 1.0 / z.cosh();
        let f = u0.values()[i] + k.q[i];
        val.push(f * s);
        slope.push(f * g * s * z.tanh());
    }
    (
        trapezoid(&val, grid.dx()) - PI * PI / g,
        trapezoid(&slope, grid.dx()),
    )
}

/// The functional whose zeros `(delta, y, v0, v1)` parametrize Backlund
/// partners of `Q + u0` near the base kink:
///
/// ```text
/// F1 = Q_x + u0_x - v1 - (1/a) sin((u0+Q+v0)/2) - a sin((u0+Q-v0)/2)
/// F2 = Q_t + u1 - v0_x - (1/a) sin((u0+Q+v0)/2) + a sin((u0+Q-v0)/2)
/// F3 = int (u0+Q) sech(gamma(delta) (x - beta0 t - x0 - y)) dx - pi^2/gamma(delta)
/// ```
///
/// with `a = a0 + delta`.
pub fn eval_functional(
    delta: f64,
    y: f64,
    v0: &Field,
    v1: &Field,
    u0: &Field,
    u1: &Field,
    ctx: &FContext,
) -> Result<FTriple> {
    for f in [v1, u0, u1] {
        v0.same_grid(f)?;
    }
    let a = ctx.a0() + delta;
    if !(a > 0.0) {
        return Err(SgError::InvalidArgument(format!("a0 + delta = {a} must be positive")));
    }
    let grid = *v0.grid();
    let k = kink_samples(&grid, ctx)?;
    let f1 = f1_values(a, v0, v1, u0, &k)?;
    let f2 = f2_values(a, v0, u0, u1, &k)?;
    let (f3, _) = f3_with_slope(&grid, delta, y, u0, &k, ctx);
    Ok(FTriple {
        f1: Field::checked(grid, f1)?,
        f2: Field::checked(grid, f2)?,
        f3,
    })
}

/// Solution `(lambda, w)` of the linearized second component.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolution {
    pub lambda: f64,
    pub w: Field,
    /// Sup norm of `L(lambda, w) - g`.
    pub residual: f64,
}

/// `L(lambda, w) = -w_x - gamma0 cos(Q/2) w + lambda (1 + a0^-2) sin(Q/2)`.
pub fn apply_linearized_f2(lambda: f64, w: &Field, ctx: &FContext) -> Result<Field> {
    let wx = dx_decaying(w)?;
    let kern = ctx.kernel();
    let ca = 1.0 + ctx.a0().powi(-2);
    let g0 = ctx.gamma0();
    let out = w
        .grid()
        .points()
        .zip(w.values())
        .zip(wx)
        .map(|((x, &wv), wxv)| -wxv + g0 * kern.tanh(x) * wv + lambda * ca * kern.sech(x))
        .collect();
    Field::checked(*w.grid(), out)
}

/// Bounded solution of `L(lambda, w) = g` for decaying `g`.
///
/// `lambda` is fixed by the solvability condition
/// `int (lambda (1 + a0^-2) sech^2 - g sech) = 0`; then `w` is the
/// variation-of-constants integral taken from `+infinity` right of the
/// kink and from `-infinity` left of it. The quadrature solve is polished
/// by iterative refinement against the spectral residual.
pub fn solve_linearized_f2(g: &Field, ctx: &FContext) -> Result<LinearSolution> {
    ensure_periodic(g.values())?;
    let mut lambda = 0.0;
    let mut w = Field::zeros(*g.grid());
    let mut res = g.clone();
    let mut best = f64::INFINITY;
    for _ in 0..8 {
        let (dl, dw) = quadrature_solve(&res, ctx)?;
        lambda += dl;
        w = w.try_add(&dw)?;
        res = g.try_sub(&apply_linearized_f2(lambda, &w, ctx)?)?;
        let r = res.sup_norm();
        if r >= 0.5 * best || r < 1e-14 * g.sup_norm().max(1e-300) {
            best = best.min(r);
            break;
        }
        best = r;
    }
    Ok(LinearSolution {
        lambda,
        w,
        residual: best,
    })
}

fn quadrature_solve(g: &Field, ctx: &FContext) -> Result<(f64, Field)> {
    let grid = *g.grid();
    let kern = ctx.kernel();
    let ca = 1.0 + ctx.a0().powi(-2);
    let c = ctx.center();
    let interp = LocalInterp::new(g);
    // same cell rule as the recursions, so both halves of w join smoothly
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..grid.len() - 1 {
        let (xa, xb) = (grid.x(i), grid.x(i + 1));
        num += cell(xa, xb, &interp, |y| kern.sech(y));
        den += integrate_cell(xa, xb, |y| kern.sech(y).powi(2));
    }
    let lambda = num / (ca * den);
    let r = |y: f64| lambda * ca * kern.sech(y);
    let n = grid.len();
    let mut w = vec![0.0; n];
    // right of the kink: w(x) = -int_x^inf K(y; x) (r - g)(y) dy
    let first_right = (0..n).find(|&i| grid.x(i) >= c).unwrap_or(n);
    let mut acc = 0.0;
    for i in (first_right..n.saturating_sub(1)).rev() {
        let (xa, xb) = (grid.x(i), grid.x(i + 1));
        let rho = kern.ratio(xa, xb);
        let local_r = integrate_cell(xa, xb, |y| kern.ratio(xa, y) * r(y));
        let local_g = cell(xa, xb, &interp, |y| kern.ratio(xa, y));
        acc = rho * acc + local_r - local_g;
        w[i] = -acc;
    }
    // left of the kink: w(x) = int_-inf^x K(y; x) (r - g)(y) dy
    let mut acc = 0.0;
    for i in 1..first_right.min(n) {
        let (xa, xb) = (grid.x(i - 1), grid.x(i));
        let rho = kern.ratio(xb, xa);
        let local_r = integrate_cell(xa, xb, |y| kern.ratio(xb, y) * r(y));
        let local_g = cell(xa, xb, &interp, |y| kern.ratio(xb, y));
        acc = rho * acc + local_r - local_g;
        w[i] = acc;
    }
    Ok((lambda, Field::checked(grid, w)?))
}

/// Gauss rule for an explicit integrand.
fn integrate_cell(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let h = b - a;
    crate::field::quadrature::GAUSS4
        .iter()
        .map(|&(xi, wt)| wt * f(a + xi * h))
        .sum::<f64>()
        * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(-32.0, 32.0, 1024).unwrap()
    }

    #[test]
    fn functional_vanishes_at_base_point() {
        let g = grid();
        let ctx = FContext {
            beta0: 0.3,
            t: 0.0,
            x0: 0.5,
        };
        let z = Field::zeros(g);
        let f = eval_functional(0.0, 0.0, &z, &z, &z, &z, &ctx).unwrap();
        assert!(f.f1.sup_norm() < 1e-13);
        assert!(f.f2.sup_norm() < 1e-13);
        assert!(f.f3.abs() < 1e-10, "{}", f.f3);
    }

    #[test]
    fn f3_slope_is_four() {
        let g = grid();
        let ctx = FContext {
            beta0: 0.0,
            t: 0.0,
            x0: 0.0,
        };
        let z = Field::zeros(g);
        let h = 1e-4;
        let fp = eval_functional(0.0, h, &z, &z, &z, &z, &ctx).unwrap().f3;
        let fm = eval_functional(0.0, -h, &z, &z, &z, &z, &ctx).unwrap().f3;
        assert!(((fp - fm) / (2.0 * h) - 4.0).abs() < 1e-5);
        let k = kink_samples(&g, &ctx).unwrap();
        let (_, slope) = f3_with_slope(&g, 0.0, 0.0, &z, &k, &ctx);
        assert!((slope - 4.0).abs() < 1e-10);
    }

    #[test]
    fn projected_source_gives_lambda() {
        let g = grid();
        let ctx = FContext {
            beta0: 0.0,
            t: 0.0,
            x0: 0.0,
        };
        let ca = 1.0 + ctx.a0().powi(-2);
        let rhs = Field::from_fn(g, |x| 0.7 * ca / x.cosh()).unwrap();
        let s = solve_linearized_f2(&rhs, &ctx).unwrap();
        assert!((s.lambda - 0.7).abs() < 1e-12);
        assert!(s.w.sup_norm() < 1e-12, "{} {}", s.w.sup_norm(), s.residual);
    }
}
