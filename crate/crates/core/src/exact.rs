//! Closed-form solutions: kinks, breathers, wobbling kinks and boosts.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SgError};
use crate::field::{Field, Grid};
use crate::state::{static_kink, State, Topology};

/// Tail tolerance for [`sample_state`].
pub const TAIL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinkParams {
    pub beta: f64,
    pub x0: f64,
}

impl KinkParams {
    pub fn new(beta: f64, x0: f64) -> Result<Self> {
        if !(beta.abs() < 1.0) || !x0.is_finite() {
            return Err(SgError::InvalidArgument(format!(
                "kink needs |beta| < 1 and finite x0 (beta = {beta}, x0 = {x0})"
            )));
        }
        Ok(KinkParams { beta, x0 })
    }

    pub fn gamma(&self) -> f64 {
        lorentz_gamma(self.beta)
    }

    /// Backlund parameter `a = sqrt((1 + beta) / (1 - beta))`.
    pub fn a(&self) -> f64 {
        a_of_beta(self.beta)
    }

    /// Center at time `t`.
    pub fn center(&self, t: f64) -> f64 {
        self.beta * t + self.x0
    }
}

pub fn lorentz_gamma(beta: f64) -> f64 {
    1.0 / (1.0 - beta * beta).sqrt()
}

pub fn a_of_beta(beta: f64) -> f64 {
    ((1.0 + beta) / (1.0 - beta)).sqrt()
}

pub fn beta_of_a(a: f64) -> f64 {
    (a * a - 1.0) / (a * a + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreatherParams {
    /// Velocity.
    pub v: f64,
    /// Spatial decay rate, `0 < beta < gamma(v)`.
    pub beta: f64,
    pub x1: f64,
    pub x2: f64,
}

impl BreatherParams {
    pub fn new(v: f64, beta: f64, x1: f64, x2: f64) -> Result<Self> {
        if !(v.abs() < 1.0) || !(beta > 0.0 && beta < lorentz_gamma(v)) {
            return Err(SgError::InvalidArgument(format!(
                "breather needs |v| < 1 and 0 < beta < gamma(v) (v = {v}, beta = {beta})"
            )));
        }
        if !x1.is_finite() || !x2.is_finite() {
            return Err(SgError::InvalidArgument("non-finite breather phase".into()));
        }
        Ok(BreatherParams { v, beta, x1, x2 })
    }

    /// Internal frequency `alpha = sqrt(gamma(v)^2 - beta^2)`.
    pub fn alpha(&self) -> f64 {
        let g = lorentz_gamma(self.v);
        (g * g - self.beta * self.beta).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExactSolution {
    Kink(KinkParams),
    Antikink(KinkParams),
    Breather(BreatherParams),
    /// Wobbling kink with internal parameter `beta`; `beta = 0` is the
    /// static kink.
    WobblingKink { beta: f64 },
    Zero,
    /// `f(gamma (t - beta x), gamma (x - beta t))`.
    Boosted { inner: Box<ExactSolution>, beta: f64 },
}

/// Value and first derivatives at one space-time point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointValue {
    pub f: f64,
    pub f_t: f64,
    pub f_x: f64,
}

impl ExactSolution {
    pub fn wobbling_kink(beta: f64) -> Result<Self> {
        if !(beta.abs() < 1.0) {
            return Err(SgError::InvalidArgument(format!(
                "wobbling kink needs |beta| < 1, got {beta}"
            )));
        }
        Ok(ExactSolution::WobblingKink { beta })
    }

    pub fn topology(&self) -> Topology {
        match self {
            ExactSolution::Kink(_) | ExactSolution::WobblingKink { .. } => Topology::Kink,
            ExactSolution::Antikink(_) => Topology::Antikink,
            ExactSolution::Breather(_) | ExactSolution::Zero => Topology::Zero,
            ExactSolution::Boosted { inner, .. } => inner.topology(),
        }
    }

    pub fn evaluate(&self, t: f64, x: f64) -> PointValue {
        match self {
            ExactSolution::Kink(p) => kink_point(p, t, x),
            ExactSolution::Antikink(p) => {
                let k = kink_point(p, t, x);
                PointValue {
                    f: -k.f,
                    f_t: -k.f_t,
                    f_x: -k.f_x,
                }
            }
            ExactSolution::Breather(p) => breather_point(p, t, x),
            ExactSolution::WobblingKink { beta } => wobbler_point(*beta, t, x),
            ExactSolution::Zero => PointValue {
                f: 0.0,
                f_t: 0.0,
                f_x: 0.0,
            },
            ExactSolution::Boosted { inner, beta } => {
                let g = lorentz_gamma(*beta);
                let p = inner.evaluate(g * (t - beta * x), g * (x - beta * t));
                PointValue {
                    f: p.f,
                    f_t: g * (p.f_t - beta * p.f_x),
                    f_x: g * (p.f_x - beta * p.f_t),
                }
            }
        }
    }

    fn wobbles(&self) -> bool {
        match self {
            ExactSolution::WobblingKink { .. } => true,
            ExactSolution::Boosted { inner, .. } => inner.wobbles(),
            _ => false,
        }
    }
}

fn kink_point(p: &KinkParams, t: f64, x: f64) -> PointValue {
    let g = p.gamma();
    let z = g * (x - p.center(t));
    let s = 1.0 / z.cosh();
    PointValue {
        f: static_kink(z),
        f_t: -2.0 * p.beta * g * s,
        f_x: 2.0 * g * s,
    }
}

fn breather_point(p: &BreatherParams, t: f64, x: f64) -> PointValue {
    let al = p.alpha();
    let th = al * (t - p.v * x - p.x1);
    let eta = p.beta * (x - p.v * t - p.x2);
    let sech = 1.0 / eta.cosh();
    let tanh = eta.tanh();
    let k = p.beta / al;
    let r = k * th.cos() * sech;
    let r_x = k * (th.sin() * al * p.v * sech - th.cos() * sech * tanh * p.beta);
    let r_t = k * (-th.sin() * al * sech + th.cos() * sech * tanh * p.beta * p.v);
    let d = 1.0 + r * r;
    PointValue {
        f: 4.0 * r.atan(),
        f_t: 4.0 * r_t / d,
        f_x: 4.0 * r_x / d,
    }
}

/// `4 arg(U + i V)` with the branch `arg in (-pi/2, 3pi/2]`.
///
/// `U` and `V` are written as sums of exponentials and rescaled by the
/// largest one, so the argument and its logarithmic derivatives stay finite
/// for any `x`.
fn wobbler_point(beta: f64, t: f64, x: f64) -> PointValue {
    let w = (1.0 - beta * beta).sqrt();
    let (c, s) = ((w * t).cos(), (w * t).sin());
    // (coefficient, rate) pairs
    let u_terms = [
        (0.5 * (1.0 + beta), beta),
        (0.5 * (1.0 - beta), -beta),
        (-beta * c, 1.0),
    ];
    let v_terms = [
        (0.5 * (1.0 - beta), 1.0 + beta),
        (0.5 * (1.0 + beta), 1.0 - beta),
        (-beta * c, 0.0),
    ];
    let shift = u_terms
        .iter()
        .chain(&v_terms)
        .map(|&(_, r)| r * x)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum = |terms: &[(f64, f64)], deriv: bool| -> f64 {
        terms
            .iter()
            .map(|&(a, r)| a * if deriv { r } else { 1.0 } * (r * x - shift).exp())
            .sum()
    };
    let z = Complex64::new(sum(&u_terms, false), sum(&v_terms, false));
    let z_x = Complex64::new(sum(&u_terms, true), sum(&v_terms, true));
    let z_t = Complex64::new(beta * w * s * (x - shift).exp(), beta * w * s * (-shift).exp());
    let mut arg = z.im.atan2(z.re);
    if arg < -0.5 * PI {
        arg += 2.0 * PI;
    }
    PointValue {
        f: 4.0 * arg,
        f_t: 4.0 * (z_t / z).im,
        f_x: 4.0 * (z_x / z).im,
    }
}

/// Samples `(f, f_t)` at time `t`, checking that both tails sit within
/// [`TAIL_TOL`] of their asymptotic values.
pub fn sample_state(sol: &ExactSolution, grid: &Grid, t: f64) -> Result<State> {
    let pts: Vec<PointValue> = grid.points().map(|x| sol.evaluate(t, x)).collect();
    let mut f: Vec<f64> = pts.iter().map(|p| p.f).collect();
    if sol.wobbles() {
        unwrap(&mut f, 8.0 * PI);
    }
    let topology = sol.topology();
    let right = 2.0 * PI * topology.sign();
    let gap = f[0].abs().max((f[f.len() - 1] - right).abs());
    if !(gap <= TAIL_TOL) {
        return Err(SgError::TailViolation { gap });
    }
    let phi = Field::new(*grid, f)?;
    let phi_t = Field::new(*grid, pts.iter().map(|p| p.f_t).collect())?;
    Ok(State::raw(phi, phi_t, t, topology))
}

/// Removes jumps larger than half a period between neighbours.
fn unwrap(v: &mut [f64], period: f64) {
    let mut offset = 0.0;
    for i in 1..v.len() {
        let raw = v[i] + offset;
        let d = raw - v[i - 1];
        let k = (d / period).round();
        offset -= k * period;
        v[i] = raw - k * period;
    }
}

/// Kink `Q(t, x; beta, x0)` and the identities used by the Backlund
/// machinery.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinkIdentities {
    pub q: f64,
    pub q_x: f64,
    pub q_t: f64,
    /// `sin(Q/2) = sech(gamma (x - beta t - x0))`.
    pub sin_half: f64,
    /// `cos(Q/2) = -tanh(gamma (x - beta t - x0))`.
    pub cos_half: f64,
}

pub fn kink_identities(p: &KinkParams, t: f64, x: f64) -> KinkIdentities {
    let g = p.gamma();
    let z = g * (x - p.center(t));
    let s = 1.0 / z.cosh();
    KinkIdentities {
        q: static_kink(z),
        q_x: 2.0 * g * s,
        q_t: -2.0 * p.beta * g * s,
        sin_half: s,
        cos_half: -z.tanh(),
    }
}

pub fn lorentz_boost_solution(sol: &ExactSolution, beta: f64) -> Result<ExactSolution> {
    if !(beta.abs() < 1.0) {
        return Err(SgError::InvalidArgument(format!(
            "boost needs |beta| < 1, got {beta}"
        )));
    }
    Ok(ExactSolution::Boosted {
        inner: Box::new(sol.clone()),
        beta,
    })
}

/// `f_tt - f_xx + sin f` of a closed form by centred differences of step
/// `h` in both variables.
pub fn pde_residual_at(sol: &ExactSolution, t: f64, x: f64, h: f64) -> f64 {
    let f = |t, x| sol.evaluate(t, x).f;
    let c = f(t, x);
    let ftt = (f(t + h, x) - 2.0 * c + f(t - h, x)) / (h * h);
    let fxx = (f(t, x + h) - 2.0 * c + f(t, x - h)) / (h * h);
    ftt - fxx + c.sin()
}

/// Sampled kink `Q(t, .; beta, x0)` with its time derivative.
pub fn kink_state(p: &KinkParams, grid: &Grid, t: f64) -> Result<State> {
    sample_state(&ExactSolution::Kink(*p), grid, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kink_at_center_is_pi() {
        let p = KinkParams::new(0.5, 0.0).unwrap();
        let v = ExactSolution::Kink(p).evaluate(0.0, 0.0);
        assert!((v.f - PI).abs() < 1e-14);
        let g = p.gamma();
        assert!((v.f_x - 2.0 * g).abs() < 1e-14);
        assert!((v.f_t + 2.0 * 0.5 * g).abs() < 1e-14);
    }

    #[test]
    fn breather_at_rest_origin() {
        let p = BreatherParams::new(0.0, 0.5, 0.0, 0.0).unwrap();
        let v = ExactSolution::Breather(p).evaluate(0.0, 0.0);
        let want = 4.0 * (0.5 / 0.75f64.sqrt()).atan();
        assert!((v.f - want).abs() < 1e-14);
    }

    #[test]
    fn breather_is_periodic_at_rest() {
        let p = BreatherParams::new(0.0, 0.5, 0.3, -0.2).unwrap();
        let b = ExactSolution::Breather(p);
        let period = 2.0 * PI / p.alpha();
        for &x in &[-2.0, 0.0, 1.1] {
            let a = b.evaluate(0.7, x).f;
            let c = b.evaluate(0.7 + period, x).f;
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn wobbler_matches_extended_precision() {
        let w = ExactSolution::wobbling_kink(0.2).unwrap();
        let v = w.evaluate(1.3, 0.7);
        assert!((v.f - 4.494_491_971_658_076).abs() < 1e-13);
        assert!((v.f_x - 1.670_806_914_875_075_6).abs() < 1e-12);
        assert!((v.f_t + 0.487_312_905_208_239_6).abs() < 1e-12);
        let w = ExactSolution::wobbling_kink(0.5).unwrap();
        assert!((w.evaluate(0.0, -3.0).f + 1.022_002_053_247_665).abs() < 1e-13);
        assert!((w.evaluate(2.5, 1.5).f - 3.844_875_895_774_816_4).abs() < 1e-13);
        assert!((w.evaluate(10.0, 40.0).f - 6.283_185_295_279_112).abs() < 1e-13);
    }

    #[test]
    fn wobbler_is_finite_far_out() {
        let w = ExactSolution::wobbling_kink(0.5).unwrap();
        for &x in &[-900.0, 900.0] {
            let v = w.evaluate(3.0, x);
            assert!(v.f.is_finite() && v.f_x.is_finite() && v.f_t.is_finite());
        }
        assert!((w.evaluate(3.0, 900.0).f - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn wobbler_zero_is_static_kink() {
        let w = ExactSolution::wobbling_kink(0.0).unwrap();
        for &x in &[-5.0, -0.3, 0.0, 2.0] {
            let a = w.evaluate(1.7, x);
            assert!((a.f - static_kink(x)).abs() < 1e-13);
            assert!(a.f_t.abs() < 1e-13);
        }
    }

    #[test]
    fn boosts() {
        let k0 = ExactSolution::Kink(KinkParams::new(0.0, 0.0).unwrap());
        let kb = ExactSolution::Kink(KinkParams::new(0.6, 0.0).unwrap());
        let boosted = lorentz_boost_solution(&k0, 0.6).unwrap();
        let back = lorentz_boost_solution(&boosted, -0.6).unwrap();
        for &(t, x) in &[(0.0, 0.3), (2.0, 1.0), (-1.0, -4.0)] {
            let (a, b) = (boosted.evaluate(t, x), kb.evaluate(t, x));
            assert!((a.f - b.f).abs() < 1e-13);
            assert!((a.f_t - b.f_t).abs() < 1e-13);
            assert!((a.f_x - b.f_x).abs() < 1e-13);
            let (c, d) = (back.evaluate(t, x), k0.evaluate(t, x));
            assert!((c.f - d.f).abs() < 1e-12);
        }
        assert!(lorentz_boost_solution(&k0, 1.0).is_err());
    }

    #[test]
    fn identities() {
        let p = KinkParams::new(-0.3, 1.2).unwrap();
        for &x in &[-3.0, 0.5, 1.2, 6.0] {
            let k = kink_identities(&p, 0.8, x);
            assert!(((k.q / 2.0).sin() - k.sin_half).abs() < 1e-14);
            assert!(((k.q / 2.0).cos() - k.cos_half).abs() < 1e-14);
        }
    }

    #[test]
    fn sampling_checks_tails() {
        let p = KinkParams::new(0.0, 0.0).unwrap();
        let narrow = Grid::new(-8.0, 8.0, 64).unwrap();
        assert!(matches!(
            kink_state(&p, &narrow, 0.0),
            Err(SgError::TailViolation { .. })
        ));
        let wide = Grid::new(-64.0, 64.0, 1024).unwrap();
        let s = kink_state(&p, &wide, 0.0).unwrap();
        assert_eq!(s.topology(), Topology::Kink);
    }

    #[test]
    fn parameter_validation() {
        assert!(KinkParams::new(1.0, 0.0).is_err());
        assert!(BreatherParams::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(BreatherParams::new(0.6, 1.2, 0.0, 0.0).is_ok());
        assert!(ExactSolution::wobbling_kink(-1.0).is_err());
        assert!((beta_of_a(a_of_beta(0.37)) - 0.37).abs() < 1e-15);
    }
}
