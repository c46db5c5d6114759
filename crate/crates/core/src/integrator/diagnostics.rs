use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Result, SgError};
use crate::field::quadrature::trapezoid;
use crate::field::{spatial_derivative, Field};
use crate::state::{smooth_derivative, State, Topology};

/// Energy, momentum and the first two higher conserved quantities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub e0: f64,
    pub p: f64,
    pub e2: f64,
    pub e4: f64,
}

impl Conserved {
    pub fn as_array(&self) -> [f64; 4] {
        [self.e0, self.p, self.e2, self.e4]
    }

    /// `|q - q_ref| / max(|q_ref|, 1)` per component.
    pub fn relative_drift(&self, reference: &Conserved) -> [f64; 4] {
        let a = self.as_array();
        let b = reference.as_array();
        std::array::from_fn(|i| (a[i] - b[i]).abs() / b[i].abs().max(1.0))
    }
}

/// `E0`, `P`, `E2`, `E4` from light-cone derivatives.
///
/// With `d_pm = (d_t +- d_x)/sqrt 2` the densities are sums of the
/// divergence-free currents of both light-cone orientations; the equation
/// `phi_{+-} = -sin(phi)/2` removes all mixed derivatives.
pub fn conserved_quantities(s: &State) -> Result<Conserved> {
    let topo = s.topology();
    let phi = s.phi().values();
    let pt = s.phi_t().values();
    let px = smooth_derivative(s.phi(), 1, topo)?;
    let pxx = smooth_derivative(s.phi(), 2, topo)?;
    let pxxx = smooth_derivative(s.phi(), 3, topo)?;
    let ptx = smooth_derivative(s.phi_t(), 1, Topology::Zero)?;
    let ptxx = smooth_derivative(s.phi_t(), 2, Topology::Zero)?;
    let n = phi.len();
    let (mut d0, mut dp, mut d2, mut d4) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for i in 0..n {
        let (c, sn) = (phi[i].cos(), phi[i].sin());
        let (t, x, xx, xxx, tx, txx) = (pt[i], px[i], pxx[i], pxxx[i], ptx[i], ptxx[i]);
        d0.push(0.5 * (t * t + x * x) + 1.0 - c);
        dp.push(0.5 * t * x);
        let m1 = (t - x) / SQRT_2;
        let p1 = (t + x) / SQRT_2;
        let m2 = 0.5 * (2.0 * xx - sn - 2.0 * tx);
        let p2 = 0.5 * (2.0 * xx - sn + 2.0 * tx);
        let m3 = (4.0 * txx - t * c - 4.0 * xxx + 3.0 * x * c) / (2.0 * SQRT_2);
        let p3 = (4.0 * txx - t * c + 4.0 * xxx - 3.0 * x * c) / (2.0 * SQRT_2);
        d2.push(j2(m1, m2, c) + j2(p1, p2, c));
        d4.push(j4(m1, m2, m3, c, sn) + j4(p1, p2, p3, c, sn));
    }
    let dx = s.grid().dx();
    Ok(Conserved {
        e0: trapezoid(&d0, dx),
        p: trapezoid(&dp, dx),
        e2: trapezoid(&d2, dx),
        e4: trapezoid(&d4, dx),
    })
}

/// Time plus space component of the second current.
fn j2(a1: f64, a2: f64, c: f64) -> f64 {
    a2 * a2 - 0.25 * a1.powi(4) + 0.5 * a1 * a1 * c
}

/// Time plus space component of the fourth current; the mixed derivative
/// `phi_{aab}` is `-cos(phi) phi_a / 2`.
fn j4(a1: f64, a2: f64, a3: f64, c: f64, s: f64) -> f64 {
    let mixed = -0.5 * c * a1;
    let plus = a3 * a3
        + 2.5 * a1 * a1 * a2 * a2
        + 5.0 / 3.0 * a1.powi(3) * a3
        + a1.powi(6) / 8.0;
    let minus = -5.0 / 3.0 * a1.powi(3) * mixed - 0.375 * a1.powi(4) * c
        + 1.5 * a1 * a1 * a2 * s
        + 0.5 * a2 * a2 * c;
    plus + minus
}

/// Energy-momentum tensor densities.
#[derive(Clone, Debug, PartialEq)]
pub struct EmTensor {
    pub t00: Field,
    pub t01: Field,
    pub t11: Field,
}

pub fn em_tensor(s: &State) -> Result<EmTensor> {
    let px = s.phi_x()?;
    let g = *s.grid();
    let (mut t00, mut t01, mut t11) = (Vec::new(), Vec::new(), Vec::new());
    for ((&f, &t), &x) in s.phi().values().iter().zip(s.phi_t().values()).zip(px.values()) {
        let kin = 0.5 * (t * t + x * x);
        t00.push(kin + 1.0 - f.cos());
        t01.push(t * x);
        t11.push(kin - 1.0 + f.cos());
    }
    Ok(EmTensor {
        t00: Field::checked(g, t00)?,
        t01: Field::checked(g, t01)?,
        t11: Field::checked(g, t11)?,
    })
}

fn neighbours(traj: &Trajectory, t: f64) -> Result<(usize, f64)> {
    let i = traj.index_of(t)?;
    if i == 0 || i + 1 >= traj.len() {
        return Err(SgError::InsufficientData(format!(
            "t = {t} needs snapshots on both sides"
        )));
    }
    Ok((i, traj.interval()))
}

/// `f_tt - f_xx + sin f` at snapshot `t`: centred second differences in
/// time across snapshots, fourth-order differences in space.
pub fn pde_residual(traj: &Trajectory, t: f64) -> Result<Field> {
    let (i, h) = neighbours(traj, t)?;
    let st = traj.states();
    let f = st[i].phi();
    let fxx = spatial_derivative(f, 2)?;
    let (a, b) = (st[i - 1].phi().values(), st[i + 1].phi().values());
    let r = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| (b[j] - 2.0 * v + a[j]) / (h * h) - fxx[j] + v.sin())
        .collect();
    Field::checked(*f.grid(), r)
}

/// `(d_t T00 - d_x T01, d_t T01 - d_x T11)` at snapshot `t`.
pub fn em_conservation_residual(traj: &Trajectory, t: f64) -> Result<(Field, Field)> {
    let (i, h) = neighbours(traj, t)?;
    let st = traj.states();
    let before = em_tensor(&st[i - 1])?;
    let here = em_tensor(&st[i])?;
    let after = em_tensor(&st[i + 1])?;
    let dt = |a: &Field, b: &Field| b.try_sub(a).map(|d| d.scale(0.5 / h));
    let r0 = dt(&before.t00, &after.t00)?.try_sub(&spatial_derivative(&here.t01, 1)?)?;
    let r1 = dt(&before.t01, &after.t01)?.try_sub(&spatial_derivative(&here.t11, 1)?)?;
    Ok((r0, r1))
}
