use serde::Serialize;

use super::functional::{
    f1_values, f2_values, f3_with_slope, kink_samples, solve_linearized_f2, FContext,
};
use crate::error::{Result, SgError};
use crate::exact::beta_of_a;
use crate::field::quadrature::trapezoid;
use crate::field::spectral::ensure_periodic;
use crate::field::Field;
use crate::state::{State, Topology};

/// Residual tolerance of each Newton stage.
pub const INVERSE_TOL: f64 = 1e-10;
pub const INVERSE_MAX_ITER: usize = 50;

/// Backlund partner of a perturbed kink.
#[derive(Clone, Debug, Serialize)]
pub struct InverseResult {
    pub delta: f64,
    pub y: f64,
    /// `beta(delta)`: velocity of the kink `f` is modulated to.
    pub beta: f64,
    /// `x0_guess + y`: its center at `t = 0` convention.
    pub y0: f64,
    #[serde(skip)]
    pub phi: State,
    /// `||F1||_2 + ||F2||_2 + |F3|` at the solution.
    pub residual_norm: f64,
    pub iterations: usize,
}

fn l2(v: &[f64], dx: f64) -> f64 {
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    trapezoid(&sq, dx).sqrt()
}

/// Solves `F(delta, y, v0, v1) = 0` for `u0 = f - Q`, `u1 = f_t - Q_t`
/// around the kink `Q(t, .; beta0, x0_guess)`.
///
/// Stage one runs a damped Newton iteration on `F2` in `(delta, v0)` with
/// the linearization frozen at the base point; `v1` is then explicit from
/// `F1 = 0`, and `y` follows from `F3 = 0` by scalar Newton.
pub fn inverse_transform(f: &State, beta0: f64, x0_guess: f64) -> Result<InverseResult> {
    if f.topology() != Topology::Kink {
        return Err(SgError::Topology("inverse transform needs a Kink-topology f".into()));
    }
    let grid = *f.grid();
    let dx = grid.dx();
    let ctx = FContext {
        beta0,
        t: f.time(),
        x0: x0_guess,
    };
    let k = kink_samples(&grid, &ctx)?;
    let u0 = Field::checked(
        grid,
        f.phi().values().iter().zip(&k.q).map(|(a, b)| a - b).collect(),
    )?;
    let u1 = Field::checked(
        grid,
        f.phi_t().values().iter().zip(&k.q_t).map(|(a, b)| a - b).collect(),
    )?;
    ensure_periodic(u0.values())?;
    let a0 = ctx.a0();

    let mut delta = 0.0;
    let mut v0 = Field::zeros(grid);
    let mut f2 = f2_values(a0, &v0, &u0, &u1, &k)?;
    let mut r2 = l2(&f2, dx);
    let mut iterations = 0;
    while r2 >= INVERSE_TOL {
        if iterations == INVERSE_MAX_ITER {
            return Err(SgError::NoConvergence {
                stage: "inverse transform (delta, v0)",
                iterations,
                residual: r2,
            });
        }
        iterations += 1;
        let neg = Field::checked(grid, f2.iter().map(|v| -v).collect())?;
        let step = solve_linearized_f2(&neg, &ctx)?;
        let mut damping = 1.0;
        loop {
            let d_try = delta + damping * step.lambda;
            let v_try = v0.try_add(&step.w.scale(damping))?;
            if a0 + d_try > 0.0 {
                let f_try = f2_values(a0 + d_try, &v_try, &u0, &u1, &k)?;
                let r_try = l2(&f_try, dx);
                if r_try < r2 {
                    delta = d_try;
                    v0 = v_try;
                    f2 = f_try;
                    r2 = r_try;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-4 {
                return Err(SgError::NoConvergence {
                    stage: "inverse transform (delta, v0)",
                    iterations,
                    residual: r2,
                });
            }
        }
    }
    let a = a0 + delta;

    // F1 = 0 with v1 = 0 gives v1 = F1(v1 = 0)
    let zero = Field::zeros(grid);
    let v1 = Field::checked(grid, f1_values(a, &v0, &zero, &u0, &k)?)?;

    let mut y = 0.0;
    let (mut f3, mut slope) = f3_with_slope(&grid, delta, y, &u0, &k, &ctx);
    let mut it3 = 0;
    while f3.abs() >= INVERSE_TOL {
        if it3 == INVERSE_MAX_ITER || slope.abs() < 1e-3 {
            return Err(SgError::NoConvergence {
                stage: "inverse transform (y)",
                iterations: it3,
                residual: f3.abs(),
            });
        }
        it3 += 1;
        let step = (f3 / slope).clamp(-1.0, 1.0);
        y -= step;
        (f3, slope) = f3_with_slope(&grid, delta, y, &u0, &k, &ctx);
    }

    let f1 = f1_values(a, &v0, &v1, &u0, &k)?;
    let beta = beta_of_a(a);
    Ok(InverseResult {
        delta,
        y,
        beta,
        y0: x0_guess + y,
        phi: State::raw(v0, v1, f.time(), Topology::Zero),
        residual_norm: l2(&f1, dx) + r2 + f3.abs(),
        iterations: iterations + it3,
    })
}
