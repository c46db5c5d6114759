//! Backlund transform between a kink-like field `f` and a small field
//! `phi`:
//!
//! ```text
//! f_x - phi_t = (1/a) sin((f + phi)/2) + a sin((f - phi)/2)
//! f_t - phi_x = (1/a) sin((f + phi)/2) - a sin((f - phi)/2)
//! ```

mod functional;
mod inverse;
mod kernel;
mod reconstruct;

pub use functional::{
    apply_linearized_f2, eval_functional, solve_linearized_f2, FContext, FTriple, LinearSolution,
};
pub use inverse::{inverse_transform, InverseResult, INVERSE_MAX_ITER, INVERSE_TOL};
pub use reconstruct::{operator_i, reconstruct_difference};

use num_complex::Complex64;

use crate::error::{Result, SgError};
use crate::field::spectral::upsample;
use crate::field::{pair_energy_norm, BandLimited, Field};
use crate::state::{smooth_derivative, State, Topology};

/// RK4 substeps per grid cell in [`forward_transform`].
pub const FORWARD_SUBSTEPS: usize = 4;

/// Largest `H^1 x L^2` size of `phi` accepted by [`forward_transform`].
pub const FORWARD_MAX_NORM: f64 = 0.3;

fn ensure_topologies(f: &State, phi: &State) -> Result<()> {
    if f.topology() != Topology::Kink || phi.topology() != Topology::Zero {
        return Err(SgError::Topology(format!(
            "expected (Kink, Zero), got ({:?}, {:?})",
            f.topology(),
            phi.topology()
        )));
    }
    f.phi().same_grid(phi.phi())
}

/// Pointwise residuals `(R1, R2)` of the two Backlund equations.
pub fn backlund_residual(f: &State, phi: &State, a: f64) -> Result<(Field, Field)> {
    ensure_topologies(f, phi)?;
    let fx = smooth_derivative(f.phi(), 1, Topology::Kink)?;
    let px = smooth_derivative(phi.phi(), 1, Topology::Zero)?;
    let n = fx.len();
    let (fv, ft) = (f.phi().values(), f.phi_t().values());
    let (pv, pt) = (phi.phi().values(), phi.phi_t().values());
    let mut r1 = Vec::with_capacity(n);
    let mut r2 = Vec::with_capacity(n);
    for i in 0..n {
        let sp = ((fv[i] + pv[i]) / 2.0).sin() / a;
        let sm = a * ((fv[i] - pv[i]) / 2.0).sin();
        r1.push(fx[i] - pt[i] - sp - sm);
        r2.push(ft[i] - px[i] - sp + sm);
    }
    let g = *f.grid();
    Ok((Field::checked(g, r1)?, Field::checked(g, r2)?))
}

/// Kink-like `f` with `f(center) = pi` solving the Backlund pair with `phi`.
///
/// The first equation is an ODE in `x`, integrated outward from `center`
/// with RK4 (stable in both directions); `phi` and `phi_t` are evaluated
/// off-grid by band-limited interpolation. `f_t` then follows from the
/// second equation.
pub fn forward_transform(phi: &State, a: f64, center: f64) -> Result<State> {
    if phi.topology() != Topology::Zero {
        return Err(SgError::Topology("forward transform needs a Zero-topology phi".into()));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(SgError::InvalidArgument(format!("Backlund parameter a = {a}")));
    }
    let size = pair_energy_norm(phi.phi(), phi.phi_t())?;
    if !(size < FORWARD_MAX_NORM) {
        return Err(SgError::InvalidArgument(format!(
            "phi too large for the forward transform (norm {size:.3e})"
        )));
    }
    let grid = *phi.grid();
    if !grid.contains(center) {
        return Err(SgError::OutOfRange { x: center });
    }
    let n = grid.len();
    let dx = grid.dx();
    let fine = 2 * FORWARD_SUBSTEPS;
    let to_c = |f: &Field| f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>();
    let p_up: Vec<f64> = upsample(&to_c(phi.phi()), fine).iter().map(|c| c.re).collect();
    let pt_up: Vec<f64> = upsample(&to_c(phi.phi_t()), fine).iter().map(|c| c.re).collect();
    let rhs = |f: f64, p: f64, pt: f64| pt + ((f + p) / 2.0).sin() / a + a * ((f - p) / 2.0).sin();

    // partial step from the pinning point to the nearest node
    let ic = grid.nearest(center);
    let h0 = grid.x(ic) - center;
    let bl_p = BandLimited::new(phi.phi())?;
    let bl_pt = BandLimited::new(phi.phi_t())?;
    let at = |x: f64| (bl_p.eval(x).re, bl_pt.eval(x).re);
    let mut f = vec![0.0; n];
    f[ic] = {
        let (p0, q0) = at(center);
        let (p1, q1) = at(center + 0.5 * h0);
        let (p2, q2) = at(center + h0);
        rk4(std::f64::consts::PI, h0, (p0, q0), (p1, q1), (p2, q2), &rhs)
    };

    let h = dx / FORWARD_SUBSTEPS as f64;
    let sample = |j: usize| (p_up[j], pt_up[j]);
    // rightwards
    for i in ic..n - 1 {
        let mut v = f[i];
        for s in 0..FORWARD_SUBSTEPS {
            let j = i * fine + 2 * s;
            v = rk4(v, h, sample(j), sample(j + 1), sample(j + 2), &rhs);
        }
        f[i + 1] = v;
    }
    // leftwards
    for i in (1..=ic).rev() {
        let mut v = f[i];
        for s in 0..FORWARD_SUBSTEPS {
            let j = i * fine - 2 * s;
            v = rk4(v, -h, sample(j), sample(j - 1), sample(j - 2), &rhs);
        }
        f[i - 1] = v;
    }

    let px = smooth_derivative(phi.phi(), 1, Topology::Zero)?;
    let (pv, _) = (phi.phi().values(), ());
    let ft: Vec<f64> = (0..n)
        .map(|i| {
            px[i] + ((f[i] + pv[i]) / 2.0).sin() / a - a * ((f[i] - pv[i]) / 2.0).sin()
        })
        .collect();
    let f = Field::new(grid, f)?;
    let ft = Field::new(grid, ft)?;
    State::new(f, ft, phi.time(), Topology::Kink).map_err(|_| SgError::NoConvergence {
        stage: "forward transform tails",
        iterations: 0,
        residual: f64::NAN,
    })
}

/// One RK4 step for `y' = rhs(y, phi, phi_t)` with coefficients sampled at
/// the start, middle and end of the step.
fn rk4(
    y: f64,
    h: f64,
    s0: (f64, f64),
    s1: (f64, f64),
    s2: (f64, f64),
    rhs: &impl Fn(f64, f64, f64) -> f64,
) -> f64 {
    let k1 = rhs(y, s0.0, s0.1);
    let k2 = rhs(y + 0.5 * h * k1, s1.0, s1.1);
    let k3 = rhs(y + 0.5 * h * k2, s1.0, s1.1);
    let k4 = rhs(y + h * k3, s2.0, s2.1);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}
