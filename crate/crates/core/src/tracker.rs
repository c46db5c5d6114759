//! Kink center tracking and decay diagnostics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SgError};
use crate::exact::{kink_identities, lorentz_gamma, KinkParams};
use crate::field::quadrature::trapezoid;
use crate::field::spectral::BandLimited;
use crate::field::{norm, vector_norm, Field, NormSpec};
use crate::integrator::Trajectory;
use crate::state::{smooth_derivative, Background, State, Topology};

/// Largest center change accepted between consecutive snapshots.
pub const MAX_CENTER_JUMP: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CenterMode {
    /// `int (f - Q(c)) sech(gamma (x - beta t - c)) dx = 0`.
    Orthogonality,
    /// `f(t, beta t + c) = pi`.
    PiLevel,
}

/// Center offset `c` (the kink sits at `beta t + c`).
pub fn solve_center(f: &Field, beta: f64, t: f64, guess: f64, mode: CenterMode) -> Result<f64> {
    match mode {
        CenterMode::Orthogonality => orthogonality_center(f, beta, t, guess),
        CenterMode::PiLevel => pi_level_center(f, beta, t, guess),
    }
}

fn orthogonality_center(f: &Field, beta: f64, t: f64, guess: f64) -> Result<f64> {
    let g = lorentz_gamma(beta);
    let grid = f.grid();
    let eval = |c: f64| {
        let (mut v, mut d) = (Vec::with_capacity(f.len()), Vec::with_capacity(f.len()));
        for (x, &fv) in grid.points().zip(f.values()) {
            let z = g * (x - beta * t - c);
            let s = 1.0 / z.cosh();
            v.push(fv * s);
            d.push(fv * g * s * z.tanh());
        }
        // int Q(c) sech = pi^2 / gamma for every c
        (trapezoid(&v, grid.dx()) - PI * PI / g, trapezoid(&d, grid.dx()))
    };
    let mut c = guess;
    for _ in 0..50 {
        let (v, d) = eval(c);
        if d.abs() < 1e-3 {
            return Err(SgError::SmallDenominator(d));
        }
        let step = (v / d).clamp(-1.0, 1.0);
        c -= step;
        if step.abs() < 1e-13 * c.abs().max(1.0) {
            return Ok(c);
        }
    }
    let (v, _) = eval(c);
    if v.abs() < 1e-10 {
        Ok(c)
    } else {
        Err(SgError::NoConvergence {
            stage: "orthogonality center",
            iterations: 50,
            residual: v.abs(),
        })
    }
}

/// Band-limited interpolant of a kink field (static kink background plus a
/// periodic remainder).
struct KinkInterp {
    bg: Background,
    rest: BandLimited,
}

impl KinkInterp {
    fn new(f: &Field) -> Self {
        let bg = Background::for_field(f, Topology::Kink);
        let w: Vec<f64> = f
            .grid()
            .points()
            .zip(f.values())
            .map(|(x, v)| v - bg.derivative(x, 0))
            .collect();
        KinkInterp {
            bg,
            rest: BandLimited::from_samples(f.grid(), &w),
        }
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        (
            self.rest.eval(x).re + self.bg.derivative(x, 0),
            self.rest.eval_derivative(x, 1).re + self.bg.derivative(x, 1),
        )
    }
}

fn pi_level_center(f: &Field, beta: f64, t: f64, guess: f64) -> Result<f64> {
    let grid = f.grid();
    let target = beta * t + guess;
    let v = f.values();
    // node interval with a sign change of f - pi nearest to the guess
    let bracket = (0..v.len() - 1)
        .filter(|&i| (v[i] - PI) * (v[i + 1] - PI) <= 0.0)
        .map(|i| (i, (grid.x(i) + 0.5 * grid.dx() - target).abs()))
        .filter(|&(_, d)| d <= 2.0)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .ok_or(SgError::NoBracket { near: target })?;
    let interp = KinkInterp::new(f);
    let (mut lo, mut hi) = (grid.x(bracket), grid.x(bracket + 1));
    let rising = v[bracket + 1] > v[bracket];
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        let above = interp.eval(mid).0 > PI;
        if above == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..20 {
        let (fv, fd) = interp.eval(x);
        if fd.abs() < 1e-12 {
            break;
        }
        let step = (fv - PI) / fd;
        x -= step;
        if step.abs() < 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x - beta * t)
}

/// Modulation speed `x' = -int (f_t + beta f_x) sech / int f_x sech`.
pub fn center_velocity(f: &State, beta: f64, center: f64) -> Result<f64> {
    let g = lorentz_gamma(beta);
    let fx = smooth_derivative(f.phi(), 1, f.topology())?;
    let c = beta * f.time() + center;
    let grid = f.grid();
    let (mut num, mut den) = (Vec::with_capacity(fx.len()), Vec::with_capacity(fx.len()));
    for ((x, &ft), &fxv) in grid.points().zip(f.phi_t().values()).zip(fx.values()) {
        let s = 1.0 / (g * (x - c)).cosh();
        num.push((ft + beta * fxv) * s);
        den.push(fxv * s);
    }
    let d = trapezoid(&den, grid.dx());
    // 4 for an exact kink
    if d.abs() < 0.1 {
        return Err(SgError::SmallDenominator(d));
    }
    Ok(-trapezoid(&num, grid.dx()) / d)
}

/// Diagnostics at one snapshot, relative to `Q(t, .; beta, center)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackPoint {
    pub t: f64,
    pub center: f64,
    pub velocity: f64,
    pub diff_linf: f64,
    /// L2+Linf norm of `(f_t - Q_t, f_x - Q_x)`.
    pub diff_deriv_l2plinf: f64,
    pub diff_pair_energy: f64,
    /// `(R, L2 norm of (f - Q, f_t - Q_t, f_x - Q_x) on |x| >= t + R)`.
    pub exterior_l2: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackedTrajectory {
    pub beta: f64,
    pub mode: CenterMode,
    pub points: Vec<TrackPoint>,
}

/// Incremental tracker for runs whose states are not kept.
#[derive(Clone, Debug)]
pub struct Tracker {
    beta: f64,
    mode: CenterMode,
    guess: f64,
    radii: Vec<f64>,
    points: Vec<TrackPoint>,
}

impl Tracker {
    pub fn new(beta: f64, x0_guess: f64, mode: CenterMode) -> Result<Self> {
        KinkParams::new(beta, x0_guess)?;
        Ok(Tracker {
            beta,
            mode,
            guess: x0_guess,
            radii: vec![0.0],
            points: Vec::new(),
        })
    }

    pub fn with_radii(mut self, radii: Vec<f64>) -> Self {
        self.radii = radii;
        self
    }

    pub fn observe(&mut self, f: &State) -> Result<&TrackPoint> {
        if f.topology() != Topology::Kink {
            return Err(SgError::Topology("tracking needs a Kink-topology state".into()));
        }
        let t = f.time();
        let center = solve_center(f.phi(), self.beta, t, self.guess, self.mode)?;
        if let Some(prev) = self.points.last() {
            if (center - prev.center).abs() > MAX_CENTER_JUMP {
                return Err(SgError::NoConvergence {
                    stage: "center continuity",
                    iterations: self.points.len(),
                    residual: (center - prev.center).abs(),
                });
            }
        }
        self.guess = center;
        let p = KinkParams::new(self.beta, center)?;
        let grid = f.grid();
        let fx = smooth_derivative(f.phi(), 1, Topology::Kink)?;
        let n = grid.len();
        let (mut d0, mut dt, mut dx) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for (i, x) in grid.points().enumerate() {
            let k = kink_identities(&p, t, x);
            d0.push(f.phi().values()[i] - k.q);
            dt.push(f.phi_t().values()[i] - k.q_t);
            dx.push(fx.values()[i] - k.q_x);
        }
        let d0 = Field::checked(*grid, d0)?;
        let dt = Field::checked(*grid, dt)?;
        let dx = Field::checked(*grid, dx)?;
        let pair = {
            let sq = |v: &Field| v.values().iter().map(|a| a * a).collect::<Vec<_>>();
            (trapezoid(&sq(&d0), grid.dx()) + trapezoid(&sq(&dx), grid.dx()) + trapezoid(&sq(&dt), grid.dx()))
                .sqrt()
        };
        let exterior_l2 = self
            .radii
            .iter()
            .map(|&r| {
                let sq: Vec<f64> = grid
                    .points()
                    .enumerate()
                    .map(|(i, x)| {
                        if x.abs() >= t + r {
                            d0[i].powi(2) + dt[i].powi(2) + dx[i].powi(2)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                (r, trapezoid(&sq, grid.dx()).sqrt())
            })
            .collect();
        self.points.push(TrackPoint {
            t,
            center,
            velocity: center_velocity(f, self.beta, center)?,
            diff_linf: norm(&d0, NormSpec::Lp(f64::INFINITY))?,
            diff_deriv_l2plinf: vector_norm(&[&dt, &dx], NormSpec::L2PlusLinf)?,
            diff_pair_energy: pair,
            exterior_l2,
        });
        Ok(self.points.last().expect("just pushed"))
    }

    pub fn finish(self) -> TrackedTrajectory {
        TrackedTrajectory {
            beta: self.beta,
            mode: self.mode,
            points: self.points,
        }
    }
}

pub fn track(traj: &Trajectory, beta: f64, x0_guess: f64, mode: CenterMode) -> Result<TrackedTrajectory> {
    let mut tr = Tracker::new(beta, x0_guess, mode)?;
    for s in traj.states() {
        tr.observe(s)?;
    }
    Ok(tr.finish())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExteriorCheck {
    /// Sup over `|x| >= t + R` of `|f - K| + |f_x - K_x| + |f_t - K_t|`.
    pub lhs: f64,
    /// Bound shape at the point where the sup is attained.
    pub bound: f64,
    pub worst_x: f64,
    /// Sup over the region of the pointwise ratio to the bound shape.
    pub ratio_max: f64,
}

/// Bound shape `min(t^-1/4 <|x|-t>^-1/4, <|x|-t>^-s)`.
pub fn exterior_bound(t: f64, x: f64, s: f64) -> f64 {
    let jb = (1.0 + (x.abs() - t).powi(2)).sqrt();
    (t.powf(-0.25) * jb.powf(-0.25)).min(jb.powf(-s))
}

pub fn exterior_decay_check(f: &State, k: &State, r: f64, s: f64) -> Result<ExteriorCheck> {
    f.phi().same_grid(k.phi())?;
    let t = f.time();
    if !(t > 0.0) {
        return Err(SgError::InvalidArgument("exterior check needs t > 0".into()));
    }
    let fx = f.phi_x()?;
    let kx = k.phi_x()?;
    let mut out: Option<ExteriorCheck> = None;
    for (i, x) in f.grid().points().enumerate() {
        if x.abs() < t + r {
            continue;
        }
        let d = (f.phi().values()[i] - k.phi().values()[i]).abs()
            + (fx.values()[i] - kx.values()[i]).abs()
            + (f.phi_t().values()[i] - k.phi_t().values()[i]).abs();
        let b = exterior_bound(t, x, s);
        let e = out.get_or_insert(ExteriorCheck {
            lhs: d,
            bound: b,
            worst_x: x,
            ratio_max: d / b,
        });
        if d > e.lhs {
            e.lhs = d;
            e.bound = b;
            e.worst_x = x;
        }
        e.ratio_max = e.ratio_max.max(d / b);
    }
    out.ok_or_else(|| SgError::InsufficientData(format!("no grid points with |x| >= {}", t + r)))
}

/// Power-law fit `v = C t^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub constant: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `ln v` against `ln t` over samples in `window`.
pub fn fit_decay_exponent(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .copied()
        .collect();
    if pts.len() < 10 {
        return Err(SgError::InsufficientData(format!(
            "{} samples in window, need 10",
            pts.len()
        )));
    }
    if let Some(&(t, v)) = pts.iter().find(|(t, v)| !(*t > 0.0 && *v > 0.0)) {
        return Err(SgError::InvalidArgument(format!(
            "non-positive sample ({t}, {v}) in fit window"
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(DecayFit {
        exponent: slope,
        constant: intercept.exp(),
        r_squared: r2,
    })
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, r^2)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (a, b, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::kink_state;
    use crate::field::Grid;

    fn grid() -> Grid {
        Grid::new(-64.0, 64.0, 2048).unwrap()
    }

    #[test]
    fn exact_kink_centers() {
        let g = grid();
        let p = KinkParams::new(0.4, 1.234).unwrap();
        let s = kink_state(&p, &g, 2.0).unwrap();
        for mode in [CenterMode::Orthogonality, CenterMode::PiLevel] {
            let c = solve_center(s.phi(), 0.4, 2.0, 0.5, mode).unwrap();
            assert!((c - 1.234).abs() < 1e-9, "{mode:?} {c}");
        }
        assert!(center_velocity(&s, 0.4, 1.234).unwrap().abs() < 1e-10);
    }

    #[test]
    fn no_bracket_far_from_kink() {
        let g = grid();
        let s = kink_state(&KinkParams::new(0.0, 0.0).unwrap(), &g, 0.0).unwrap();
        assert!(matches!(
            solve_center(s.phi(), 0.0, 0.0, 10.0, CenterMode::PiLevel),
            Err(SgError::NoBracket { .. })
        ));
    }

    #[test]
    fn tracking_exact_kink() {
        let g = grid();
        let p = KinkParams::new(0.2, -1.0).unwrap();
        let states = (0..5)
            .map(|i| kink_state(&p, &g, i as f64).unwrap())
            .collect();
        let traj = Trajectory::from_states(states).unwrap();
        let tr = track(&traj, 0.2, -0.8, CenterMode::Orthogonality).unwrap();
        for pt in &tr.points {
            assert!((pt.center + 1.0).abs() < 1e-9);
            assert!(pt.diff_linf < 1e-10);
            assert!(pt.diff_pair_energy < 1e-9);
        }
    }

    #[test]
    fn decay_fit_recovers_exponent() {
        let series: Vec<(f64, f64)> = (1..=50).map(|i| (i as f64, 3.0 * (i as f64).powf(-0.7))).collect();
        let f = fit_decay_exponent(&series, (5.0, 50.0)).unwrap();
        assert!((f.exponent + 0.7).abs() < 1e-12);
        assert!((f.constant - 3.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_decay_exponent(&series, (45.0, 50.0)).is_err());
        let mut bad = series.clone();
        bad[10].1 = 0.0;
        assert!(fit_decay_exponent(&bad, (1.0, 50.0)).is_err());
    }

    #[test]
    fn exterior_bound_shape() {
        assert!((exterior_bound(16.0, 16.0, 1.0) - 0.5).abs() < 1e-15);
        let far = exterior_bound(16.0, 116.0, 1.0);
        assert!((far - 1.0 / (1.0f64 + 1e4).sqrt()).abs() < 1e-15);
    }
}
