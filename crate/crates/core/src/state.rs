//! Phase-space states `(phi, phi_t)` with a topology tag.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SgError};
use crate::field::spectral::{ensure_periodic, spectral_derivative_raw};
use crate::field::{pair_energy_norm, Field, Grid};

/// Tolerance on boundary values when checking a topology tag.
pub const TOPOLOGY_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    /// `phi -> 0` at both ends.
    Zero,
    /// `phi -> 0` at the left end and `2 pi` at the right end.
    Kink,
    /// `phi -> 0` at the left end and `-2 pi` at the right end.
    Antikink,
}

impl Topology {
    pub(crate) fn sign(self) -> f64 {
        match self {
            Topology::Zero => 0.0,
            Topology::Kink => 1.0,
            Topology::Antikink => -1.0,
        }
    }

    fn right_limit(self) -> f64 {
        2.0 * PI * self.sign()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    phi: Field,
    phi_t: Field,
    time: f64,
    topology: Topology,
}

impl State {
    /// Checked constructor: both components share a grid and the boundary
    /// values match the topology within [`TOPOLOGY_TOL`].
    pub fn new(phi: Field, phi_t: Field, time: f64, topology: Topology) -> Result<Self> {
        phi.same_grid(&phi_t)?;
        if !time.is_finite() {
            return Err(SgError::InvalidArgument("non-finite time".into()));
        }
        let v = phi.values();
        let left = v[0].abs();
        let right = (v[v.len() - 1] - topology.right_limit()).abs();
        if left > TOPOLOGY_TOL || right > TOPOLOGY_TOL {
            return Err(SgError::Topology(format!(
                "{topology:?} state has boundary values {} and {}",
                v[0],
                v[v.len() - 1]
            )));
        }
        Ok(State::raw(phi, phi_t, time, topology))
    }

    pub(crate) fn raw(phi: Field, phi_t: Field, time: f64, topology: Topology) -> Self {
        State {
            phi,
            phi_t,
            time,
            topology,
        }
    }

    pub fn phi(&self) -> &Field {
        &self.phi
    }
    pub fn phi_t(&self) -> &Field {
        &self.phi_t
    }
    pub fn time(&self) -> f64 {
        self.time
    }
    pub fn topology(&self) -> Topology {
        self.topology
    }
    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    pub fn into_parts(self) -> (Field, Field, f64, Topology) {
        (self.phi, self.phi_t, self.time, self.topology)
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    /// `H^1 x L^2` distance to `reference`.
    pub fn pair_distance(&self, reference: &State) -> Result<f64> {
        let u0 = self.phi.try_sub(&reference.phi)?;
        let u1 = self.phi_t.try_sub(&reference.phi_t)?;
        pair_energy_norm(&u0, &u1)
    }

    /// Spectral x-derivative of `phi` honouring the topology.
    pub fn phi_x(&self) -> Result<Field> {
        smooth_derivative(&self.phi, 1, self.topology)
    }
}

/// Static (anti)kink `sign * 4 arctan(e^(x - c))` used to make kink fields
/// periodic before spectral operations.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Background {
    pub sign: f64,
    pub center: f64,
}

impl Background {
    pub fn none() -> Self {
        Background {
            sign: 0.0,
            center: 0.0,
        }
    }

    pub fn for_field(phi: &Field, topology: Topology) -> Self {
        let sign = topology.sign();
        if sign == 0.0 {
            return Background::none();
        }
        let g = phi.grid();
        let center = crossing(phi, sign * PI).unwrap_or(0.5 * (g.x_min() + g.x_max()));
        Background { sign, center }
    }

    /// `order`-th derivative of the background at `x` (order <= 4).
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        if self.sign == 0.0 {
            return 0.0;
        }
        let z = x - self.center;
        let s = 1.0 / z.cosh();
        let t = z.tanh();
        let v = match order {
            0 => static_kink(z),
            1 => 2.0 * s,
            2 => -2.0 * s * t,
            3 => 2.0 * s * (t * t - s * s),
            4 => -2.0 * s * t * t * t + 10.0 * s * s * s * t,
            _ => unreachable!("background derivative order"),
        };
        self.sign * v
    }

    pub fn sample(&self, grid: &Grid, order: u32) -> Vec<f64> {
        grid.points().map(|x| self.derivative(x, order)).collect()
    }
}

/// `4 arctan(e^z)` without overflow.
pub(crate) fn static_kink(z: f64) -> f64 {
    if z > 0.0 {
        2.0 * PI - 4.0 * (-z).exp().atan()
    } else {
        4.0 * z.exp().atan()
    }
}

/// First node interval where `phi` crosses `level`, linearly interpolated.
fn crossing(phi: &Field, level: f64) -> Option<f64> {
    let v = phi.values();
    let g = phi.grid();
    v.windows(2).enumerate().find_map(|(i, w)| {
        let (a, b) = (w[0] - level, w[1] - level);
        if a == 0.0 {
            Some(g.x(i))
        } else if a * b < 0.0 {
            Some(g.x(i) + g.dx() * a / (a - b))
        } else {
            None
        }
    })
}

/// Spectral derivative that subtracts a static kink background for kink
/// topologies, so that only a periodic remainder is differentiated.
pub fn smooth_derivative(f: &Field, order: u32, topology: Topology) -> Result<Field> {
    if order > 4 {
        return Err(SgError::InvalidArgument(format!("derivative order {order}")));
    }
    let g = *f.grid();
    let bg = Background::for_field(f, topology);
    let w: Vec<f64> = f
        .values()
        .iter()
        .zip(g.points())
        .map(|(v, x)| v - bg.derivative(x, 0))
        .collect();
    ensure_periodic(&w)?;
    let dw = spectral_derivative_raw(&g, &w, order);
    Field::checked(
        g,
        dw.into_iter()
            .zip(g.points())
            .map(|(d, x)| d + bg.derivative(x, order))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kink(g: Grid, c: f64) -> Field {
        Field::from_fn(g, |x| static_kink(x - c)).unwrap()
    }

    #[test]
    fn topology_is_checked() {
        let g = Grid::new(-32.0, 32.0, 256).unwrap();
        let k = kink(g, 1.0);
        assert!(State::new(k.clone(), Field::zeros(g), 0.0, Topology::Kink).is_ok());
        assert!(State::new(k.clone(), Field::zeros(g), 0.0, Topology::Zero).is_err());
        assert!(State::new(k.scale(-1.0), Field::zeros(g), 0.0, Topology::Antikink).is_ok());
    }

    #[test]
    fn kink_derivatives_with_offset_background() {
        let g = Grid::new(-32.0, 32.0, 512).unwrap();
        // kink of width 1/1.3, background width 1
        let f = Field::from_fn(g, |x| static_kink(1.3 * (x - 2.5))).unwrap();
        let d1 = smooth_derivative(&f, 1, Topology::Kink).unwrap();
        let d3 = smooth_derivative(&f, 3, Topology::Kink).unwrap();
        for (i, x) in g.points().enumerate() {
            let z = 1.3 * (x - 2.5);
            let (s, t) = (1.0 / z.cosh(), z.tanh());
            assert!((d1[i] - 2.6 * s).abs() < 1e-11);
            let want3 = 2.0 * 1.3f64.powi(3) * s * (t * t - s * s);
            assert!((d3[i] - want3).abs() < 1e-9);
        }
    }

    #[test]
    fn background_derivatives_match_finite_differences() {
        let bg = Background {
            sign: 1.0,
            center: 0.4,
        };
        let h = 1e-4;
        for &x in &[-2.0, 0.1, 1.7] {
            for k in 0..4 {
                let fd = (bg.derivative(x + h, k) - bg.derivative(x - h, k)) / (2.0 * h);
                assert!((fd - bg.derivative(x, k + 1)).abs() < 1e-7);
            }
        }
    }
}
