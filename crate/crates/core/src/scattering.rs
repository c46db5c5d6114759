//! Complex reduction, wave packets and the modified-scattering profile `W`.
//!
//! For zero-topology data `u = phi + i <D>^-1 phi_t` behaves for large `t`
//! like `t^-1/2 W(x/rho) exp(-i rho + i |W|^2 ln t / (32 <x/rho>))` inside
//! the light cone, `rho = sqrt(t^2 - x^2)`.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SgError};
use crate::exact::lorentz_gamma;
use crate::field::quadrature::{LocalInterp, GAUSS4};
use crate::field::spectral::{apply_symbol, ensure_periodic, upsample};
use crate::field::{bessel_multiplier, spatial_derivative, ComplexField, Field, Grid};
use crate::io::read_rows;
use crate::state::{State, Topology};
use crate::tracker::{fit_decay_exponent, linear_fit, DecayFit};

/// Coefficient of the logarithmic phase correction `(c/<xi>) |W|^2 ln t`.
pub const RESONANT_COEFFICIENT: f64 = 1.0 / 32.0;

/// Extraction needs the solution well into the asymptotic regime.
pub const MIN_EXTRACTION_TIME: f64 = 100.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn jb(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// `u = phi + i <D>^-1 phi_t`.
pub fn to_complex_u(s: &State) -> Result<ComplexField> {
    if s.topology() != Topology::Zero {
        return Err(SgError::Topology(format!(
            "complex reduction needs zero topology, got {:?}",
            s.topology()
        )));
    }
    let q = bessel_multiplier(s.phi_t(), -1.0)?;
    let v = s
        .phi()
        .values()
        .iter()
        .zip(q.values())
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    Field::new(*s.grid(), v)
}

/// Free Klein-Gordon flow `u(t) = exp(-i t <D>) u0`.
pub fn free_evolution(u0: &ComplexField, t: f64) -> Result<ComplexField> {
    ensure_periodic(u0.values())?;
    let v = apply_symbol(u0.grid(), u0.values(), false, |k| {
        Complex64::from_polar(1.0, -t * jb(k))
    });
    Field::new(*u0.grid(), v)
}

/// `Z phi = t phi_x + x phi_t`.
pub fn lorentz_boost_field(s: &State) -> Result<Field> {
    let dx = spatial_derivative(s.phi(), 1)?;
    let t = s.time();
    let v = dx
        .values()
        .iter()
        .zip(s.phi_t().values())
        .zip(s.grid().points())
        .map(|((&fx, &ft), x)| t * fx + x * ft)
        .collect();
    Field::new(*s.grid(), v)
}

/// Packet profile `chi(y) = 315/(256 c) (1 - (y/c)^2)^4` on `(-c, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePacketSpec {
    chi_radius: f64,
}

impl Default for WavePacketSpec {
    fn default() -> Self {
        WavePacketSpec { chi_radius: 0.2 }
    }
}

impl WavePacketSpec {
    pub fn new(chi_radius: f64) -> Result<Self> {
        if !(chi_radius > 0.0 && chi_radius < 0.25) {
            return Err(SgError::InvalidArgument(format!(
                "chi radius {chi_radius} outside (0, 0.25)"
            )));
        }
        Ok(WavePacketSpec { chi_radius })
    }

    pub fn chi_radius(&self) -> f64 {
        self.chi_radius
    }

    pub fn chi(&self, y: f64) -> f64 {
        let c = self.chi_radius;
        let s = y / c;
        if s.abs() >= 1.0 {
            return 0.0;
        }
        315.0 / (256.0 * c) * (1.0 - s * s).powi(4)
    }

    /// Half-width of the packet support around `x = v t`.
    pub fn half_width(&self, t: f64, v: f64) -> f64 {
        let j = 1.0 / (1.0 - v * v).sqrt();
        self.chi_radius * t.sqrt() * j.powf(-1.5)
    }

    /// `Psi_v(t, x) = <xi_v>^3/2 chi(t^-1/2 <xi_v>^3/2 (x - v t)) e^{-i rho}`.
    pub fn packet(&self, t: f64, v: f64, x: f64) -> Complex64 {
        if x.abs() >= t {
            return Complex64::new(0.0, 0.0);
        }
        let j = 1.0 / (1.0 - v * v).sqrt();
        let a = j.powf(1.5);
        let rho = (t * t - x * x).sqrt();
        Complex64::from_polar(a * self.chi((x - v * t) * a / t.sqrt()), -rho)
    }

    pub fn packet_field(&self, grid: &Grid, t: f64, v: f64) -> Result<ComplexField> {
        Field::from_fn(*grid, |x| self.packet(t, v, x))
    }

    fn check(&self, grid: &Grid, t: f64, v: f64) -> Result<(f64, f64)> {
        if !(v.abs() < 1.0) {
            return Err(SgError::InvalidArgument(format!("packet velocity {v}")));
        }
        let r = self.half_width(t, v);
        let (lo, hi) = (v * t - r, v * t + r);
        if lo <= grid.x_min() || hi >= grid.x_last() {
            return Err(SgError::OutOfRange {
                x: if lo <= grid.x_min() { lo } else { hi },
            });
        }
        if lo <= -t || hi >= t {
            return Err(SgError::InvalidArgument(format!(
                "packet at v = {v} leaves the light cone at t = {t}"
            )));
        }
        Ok((lo, hi))
    }
}

/// Refined complex samples with local interpolation.
struct FineU {
    re: Field,
    im: Field,
}

impl FineU {
    fn new(u: &ComplexField, factor: usize) -> Result<Self> {
        ensure_periodic(u.values())?;
        let g = u.grid();
        let fine = if factor > 1 {
            upsample(u.values(), factor)
        } else {
            u.values().to_vec()
        };
        let fg = Grid::new(g.x_min(), g.x_max(), g.len() * factor)?;
        Ok(FineU {
            re: Field::new(fg, fine.iter().map(|c| c.re).collect())?,
            im: Field::new(fg, fine.iter().map(|c| c.im).collect())?,
        })
    }

    fn interp(&self) -> (LocalInterp<'_>, LocalInterp<'_>) {
        (LocalInterp::new(&self.re), LocalInterp::new(&self.im))
    }
}

const PACKET_CELLS: usize = 16;

/// `gamma(t, v) = int u conj(Psi_v) dx` for each velocity.
pub fn gamma_profile(
    u: &ComplexField,
    t: f64,
    v_list: &[f64],
    spec: &WavePacketSpec,
) -> Result<Vec<Complex64>> {
    if !(t >= 1.0) {
        return Err(SgError::InvalidArgument(format!("gamma profile needs t >= 1, got {t}")));
    }
    let mut supports = Vec::with_capacity(v_list.len());
    for &v in v_list {
        supports.push(spec.check(u.grid(), t, v)?);
    }
    let r_min = supports
        .iter()
        .map(|(lo, hi)| 0.5 * (hi - lo))
        .fold(f64::INFINITY, f64::min);
    // about eight refined cells per packet half-width
    let mut factor = 1;
    while factor < 32 && u.grid().dx() / factor as f64 > r_min / 8.0 {
        factor *= 2;
    }
    let fine = FineU::new(u, factor)?;
    let (re, im) = fine.interp();
    let out = v_list
        .iter()
        .zip(&supports)
        .map(|(&v, &(lo, hi))| {
            let h = (hi - lo) / PACKET_CELLS as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..PACKET_CELLS {
                let a = lo + c as f64 * h;
                for (s, w) in GAUSS4 {
                    let x = a + s * h;
                    let ux = Complex64::new(re.eval(x), im.eval(x));
                    acc += ux * spec.packet(t, v, x).conj() * (w * h);
                }
            }
            acc
        })
        .collect();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtractionMethod {
    /// Wave-packet pairing `gamma(t, v)`.
    WavePacket,
    /// Pointwise `sqrt(t) e^{i rho} u(t, v t)`.
    StationaryPhase,
}

/// Extracted profile `W` on a `xi` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileW {
    pub xi: Vec<f64>,
    pub w: Vec<Complex64>,
    pub time: f64,
    pub method: ExtractionMethod,
}

impl ProfileW {
    pub fn new(xi: Vec<f64>, w: Vec<Complex64>, time: f64, method: ExtractionMethod) -> Result<Self> {
        check_xi_grid(&xi)?;
        if w.len() != xi.len() {
            return Err(SgError::LengthMismatch {
                expected: xi.len(),
                got: w.len(),
            });
        }
        Ok(ProfileW { xi, w, time, method })
    }

    /// Identically zero profile.
    pub fn zero(xi: Vec<f64>, time: f64) -> Result<Self> {
        let w = vec![Complex64::new(0.0, 0.0); xi.len()];
        Self::new(xi, w, time, ExtractionMethod::WavePacket)
    }

    /// Linear interpolation in `xi`.
    pub fn eval(&self, xi: f64) -> Result<Complex64> {
        let n = self.xi.len();
        if !(xi >= self.xi[0] && xi <= self.xi[n - 1]) {
            return Err(SgError::OutOfRange { x: xi });
        }
        let j = self.xi.partition_point(|&s| s <= xi).clamp(1, n - 1);
        let (a, b) = (self.xi[j - 1], self.xi[j]);
        let s = (xi - a) / (b - a);
        Ok(self.w[j - 1] * (1.0 - s) + self.w[j] * s)
    }

    /// Like [`ProfileW::eval`] but zero outside the sampled range.
    pub fn eval_or_zero(&self, xi: f64) -> Complex64 {
        self.eval(xi).unwrap_or_default()
    }

    pub fn sup_abs(&self) -> f64 {
        self.w.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sup of `|W1 - W2|` over the common grid, relative to `other`.
    pub fn relative_distance(&self, other: &ProfileW) -> Result<f64> {
        if self.xi != other.xi {
            return Err(SgError::InvalidArgument("profiles on different xi grids".into()));
        }
        let d = self
            .w
            .iter()
            .zip(&other.w)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Ok(d / other.sup_abs())
    }

    /// Power-law fit `C <xi>^p` of the decreasing envelope
    /// `sup_{|xi'| >= |xi|} |W(xi')|`.
    pub fn envelope_fit(&self) -> Result<DecayFit> {
        let mut idx: Vec<usize> = (0..self.xi.len()).collect();
        idx.sort_by(|&a, &b| self.xi[b].abs().total_cmp(&self.xi[a].abs()));
        let mut env = 0.0f64;
        let mut pts = Vec::with_capacity(idx.len());
        for i in idx {
            env = env.max(self.w[i].norm());
            if env > 0.0 {
                pts.push((jb(self.xi[i]), env));
            }
        }
        pts.reverse();
        fit_decay_exponent(&pts, (1.0, f64::INFINITY))
    }

    /// Rows `xi, Re W, Im W, |W|`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "xi,re,im,abs")?;
        for (x, c) in self.xi.iter().zip(&self.w) {
            writeln!(w, "{},{},{},{}", x, c.re, c.im, c.norm())?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, time: f64, method: ExtractionMethod) -> Result<Self> {
        let rows = read_rows(r, 4)?;
        let xi = rows.iter().map(|r| r[0]).collect();
        let w = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
        Self::new(xi, w, time, method)
    }
}

fn check_xi_grid(xi: &[f64]) -> Result<()> {
    if xi.len() < 2 {
        return Err(SgError::InsufficientData("xi grid needs two samples".into()));
    }
    if xi.iter().any(|x| !x.is_finite()) || xi.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SgError::InvalidArgument("xi grid must increase strictly".into()));
    }
    Ok(())
}

/// `xi` from -8 to 8 in steps of 0.1.
pub fn default_xi_grid() -> Vec<f64> {
    (-80..=80).map(|i| i as f64 / 10.0).collect()
}

/// Removes the log phase: `gamma exp(-i c <xi>^-1 |gamma|^2 ln t)`.
fn strip_log_phase(g: Complex64, xi: f64, t: f64) -> Complex64 {
    g * Complex64::from_polar(1.0, -RESONANT_COEFFICIENT / jb(xi) * g.norm_sqr() * t.ln())
}

/// Extracts `W` from the final snapshot of `traj`.
pub fn extract_w(
    traj: &crate::integrator::Trajectory,
    xi_grid: &[f64],
    spec: &WavePacketSpec,
    method: ExtractionMethod,
) -> Result<ProfileW> {
    let last = traj
        .last()
        .ok_or_else(|| SgError::InsufficientData("empty trajectory".into()))?;
    extract_w_at(last, xi_grid, spec, method)
}

/// Extracts `W` from a single snapshot at `t >= 100`.
pub fn extract_w_at(
    s: &State,
    xi_grid: &[f64],
    spec: &WavePacketSpec,
    method: ExtractionMethod,
) -> Result<ProfileW> {
    check_xi_grid(xi_grid)?;
    let t = s.time();
    if t < MIN_EXTRACTION_TIME {
        return Err(SgError::InsufficientData(format!(
            "extraction at t = {t}, need t >= {MIN_EXTRACTION_TIME}"
        )));
    }
    let u = to_complex_u(s)?;
    let vs: Vec<f64> = xi_grid.iter().map(|&xi| xi / jb(xi)).collect();
    let w = match method {
        ExtractionMethod::WavePacket => gamma_profile(&u, t, &vs, spec)?
            .into_iter()
            .zip(xi_grid)
            .map(|(g, &xi)| strip_log_phase(g, xi, t))
            .collect(),
        ExtractionMethod::StationaryPhase => {
            for &v in &vs {
                spec.check(u.grid(), t, v)?;
            }
            let fine = FineU::new(&u, 8)?;
            let (re, im) = fine.interp();
            vs.iter()
                .zip(xi_grid)
                .map(|(&v, &xi)| {
                    let x = v * t;
                    let rho = t / jb(xi);
                    let z = Complex64::new(re.eval(x), im.eval(x))
                        * Complex64::from_polar(t.sqrt(), rho);
                    strip_log_phase(z, xi, t)
                })
                .collect()
        }
    };
    ProfileW::new(xi_grid.to_vec(), w, t, method)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PredictionTarget {
    /// `t^-1/2 <xi>^l W(xi) e^{-i rho + ...}`.
    U { l: f64 },
    /// `f - K~` for a kink at `beta t + center`.
    KinkDiff { beta: f64, center: f64 },
    /// `(f_x - K~_x, f_t - K~_0)`.
    KinkDerivDiff { beta: f64, center: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Prediction {
    Complex(Complex64),
    Real(f64),
    Pair(f64, f64),
}

impl Prediction {
    pub fn magnitude(&self) -> f64 {
        match *self {
            Prediction::Complex(c) => c.norm(),
            Prediction::Real(r) => r.abs(),
            Prediction::Pair(a, b) => a.hypot(b),
        }
    }

    fn zero_like(target: PredictionTarget) -> Self {
        match target {
            PredictionTarget::U { .. } => Prediction::Complex(Complex64::new(0.0, 0.0)),
            PredictionTarget::KinkDiff { .. } => Prediction::Real(0.0),
            PredictionTarget::KinkDerivDiff { .. } => Prediction::Pair(0.0, 0.0),
        }
    }
}

/// `W(xi) exp(-i rho + i c |W|^2 ln t / <xi>)` with its `xi` and `rho`.
fn modulated(w: Complex64, t: f64, x: f64) -> (Complex64, f64) {
    let rho = (t * t - x * x).sqrt();
    let xi = x / rho;
    let phase = -rho + RESONANT_COEFFICIENT / jb(xi) * w.norm_sqr() * t.ln();
    (w * Complex64::from_polar(1.0, phase), xi)
}

/// `(A_W, B_W)` at `(t, x)`; `W` is read through `lookup`.
fn a_b(
    lookup: &dyn Fn(f64) -> Result<Complex64>,
    t: f64,
    x: f64,
    beta: f64,
    center: f64,
) -> Result<(f64, f64)> {
    if x.abs() >= t {
        return Ok((0.0, 0.0));
    }
    let rho = (t * t - x * x).sqrt();
    let (e, xi) = modulated(lookup(x / rho)?, t, x);
    let g = lorentz_gamma(beta);
    let cos_half = -(g * (x - beta * t - center)).tanh();
    let s = t.powf(-0.5);
    let a = s * ((-I * jb(xi) - beta * g * cos_half) * e).re;
    let b = s * ((I * xi + g * cos_half) * e).re;
    Ok((a, b))
}

/// Weights `e^{-gamma |.|}` below `e^{-36}` are dropped.
const KERNEL_CUTOFF: f64 = 36.0;
const CELL: f64 = 0.05;

/// Gauss rule over `[a, b]` split at the light cone.
fn cone_integral(a: f64, b: f64, t: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (lo, hi) = (lo.max(-t), hi.min(t));
    if !(hi > lo) {
        return 0.0;
    }
    let cells = ((hi - lo) / CELL).ceil().max(1.0) as usize;
    let h = (hi - lo) / cells as f64;
    let mut acc = 0.0;
    for c in 0..cells {
        let x0 = lo + c as f64 * h;
        for (s, w) in GAUSS4 {
            acc += w * f(x0 + s * h);
        }
    }
    sign * acc * h
}

fn kink_diff(w: &ProfileW, t: f64, x: f64, beta: f64, center: f64) -> f64 {
    let g = lorentz_gamma(beta);
    let c = beta * t + center;
    let lookup = |xi: f64| Ok(w.eval_or_zero(xi));
    let a_of = |y: f64| a_b(&lookup, t, y, beta, center).map(|p| p.0).unwrap_or(0.0);
    let reach = KERNEL_CUTOFF / g;
    // cosh(g(y - c)) / cosh(g(x - c)) is below e^{-36} once |x - y| > reach
    let start = if (x - c).abs() > reach { x - reach * (x - c).signum() } else { c };
    let ln_cosh = |z: f64| z.abs() + (-2.0 * z.abs()).exp().ln_1p() - std::f64::consts::LN_2;
    let first = cone_integral(start, x, t, &|y| {
        (ln_cosh(g * (y - c)) - ln_cosh(g * (x - c))).exp() * a_of(y)
    });
    let tail = |y: f64| (-g * (y - c).abs()).exp() * a_of(y);
    let second = cone_integral(c, c + reach, t, &tail) - cone_integral(c - reach, c, t, &tail);
    first - second / (2.0 * (g * (x - c)).cosh())
}

/// Evaluates the asymptotic prediction at `(t, x)`; exactly zero for `|x| >= t`.
///
/// `U` interpolates `W` and fails outside its sampled range. The kink
/// targets integrate over the light cone and take `W = 0` beyond the range.
pub fn predict_asymptotics(w: &ProfileW, t: f64, x: f64, target: PredictionTarget) -> Result<Prediction> {
    if !(t > 0.0) {
        return Err(SgError::InvalidArgument(format!("prediction needs t > 0, got {t}")));
    }
    if x.abs() >= t {
        return Ok(Prediction::zero_like(target));
    }
    match target {
        PredictionTarget::U { l } => {
            let rho = (t * t - x * x).sqrt();
            let (e, xi) = modulated(w.eval(x / rho)?, t, x);
            Ok(Prediction::Complex(e * (jb(xi).powf(l) / t.sqrt())))
        }
        PredictionTarget::KinkDiff { beta, center } => {
            Ok(Prediction::Real(kink_diff(w, t, x, beta, center)))
        }
        PredictionTarget::KinkDerivDiff { beta, center } => {
            let d = kink_diff(w, t, x, beta, center);
            let lookup = |xi: f64| Ok(w.eval_or_zero(xi));
            let (a, b) = a_b(&lookup, t, x, beta, center)?;
            let g = lorentz_gamma(beta);
            let cos_half = -(g * (x - beta * t - center)).tanh();
            Ok(Prediction::Pair(a + g * cos_half * d, b - beta * g * cos_half * d))
        }
    }
}

/// `U(l)` on every grid node (zero outside the sampled `xi` range).
pub fn predict_u_field(w: &ProfileW, t: f64, grid: &Grid, l: f64) -> Result<ComplexField> {
    Field::from_fn(*grid, |x| {
        if x.abs() >= t {
            return Complex64::new(0.0, 0.0);
        }
        let rho = (t * t - x * x).sqrt();
        let (e, xi) = modulated(w.eval_or_zero(x / rho), t, x);
        e * (jb(xi).powf(l) / t.sqrt())
    })
}

/// `KinkDiff` on every grid node.
pub fn predict_kink_diff_field(w: &ProfileW, t: f64, grid: &Grid, beta: f64, center: f64) -> Result<Field> {
    Field::from_fn(*grid, |x| {
        if x.abs() >= t {
            0.0
        } else {
            kink_diff(w, t, x, beta, center)
        }
    })
}

/// Affine fit of the phase of `sqrt(t) e^{it} u(t, 0)` against `ln t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseLaw {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `|W(0)|` read off the last sample.
    pub w0_abs: f64,
    /// `RESONANT_COEFFICIENT |W(0)|^2`.
    pub predicted_slope: f64,
    pub relative_error: f64,
}

fn unwrap(phases: &mut [f64]) {
    for i in 1..phases.len() {
        let d = phases[i] - phases[i - 1];
        let k = (d / std::f64::consts::TAU).round();
        phases[i] -= k * std::f64::consts::TAU;
    }
}

/// Fits the log-phase drift of `u(t, 0)` samples inside `window`.
///
/// With a `reference` (the free evolution of the same data sampled at the
/// same times) its phase is subtracted first, which removes the linear
/// `O(1/t)` corrections.
pub fn phase_law(
    samples: &[(f64, Complex64)],
    reference: Option<&[(f64, Complex64)]>,
    window: (f64, f64),
) -> Result<PhaseLaw> {
    let pick = |s: &[(f64, Complex64)]| -> Vec<(f64, Complex64)> {
        s.iter()
            .filter(|(t, _)| *t >= window.0 && *t <= window.1)
            .copied()
            .collect()
    };
    let pts = pick(samples);
    if pts.len() < 3 {
        return Err(SgError::InsufficientData(format!(
            "{} phase samples in window",
            pts.len()
        )));
    }
    let z = |&(t, u): &(f64, Complex64)| u * Complex64::from_polar(t.sqrt(), t);
    let mut ph: Vec<f64> = pts.iter().map(|p| z(p).arg()).collect();
    unwrap(&mut ph);
    if let Some(r) = reference {
        let rp = pick(r);
        if rp.len() != pts.len() || rp.iter().zip(&pts).any(|(a, b)| (a.0 - b.0).abs() > 1e-9) {
            return Err(SgError::InvalidArgument("reference samples at different times".into()));
        }
        let mut rph: Vec<f64> = rp.iter().map(|p| z(p).arg()).collect();
        unwrap(&mut rph);
        for (a, b) in ph.iter_mut().zip(rph) {
            *a -= b;
        }
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ph);
    let w0_abs = z(pts.last().expect("nonempty")).norm();
    let predicted_slope = RESONANT_COEFFICIENT * w0_abs * w0_abs;
    Ok(PhaseLaw {
        slope,
        intercept,
        r_squared,
        w0_abs,
        predicted_slope,
        relative_error: (slope - predicted_slope).abs() / predicted_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::inner_product;

    fn zero_state(g: Grid, t: f64, phi: impl Fn(f64) -> f64, phi_t: impl Fn(f64) -> f64) -> State {
        State::new(
            Field::from_fn(g, phi).unwrap(),
            Field::from_fn(g, phi_t).unwrap(),
            t,
            Topology::Zero,
        )
        .unwrap()
    }

    #[test]
    fn chi_has_unit_mass() {
        for c in [0.05, 0.2, 0.249] {
            let spec = WavePacketSpec::new(c).unwrap();
            let mut acc = 0.0;
            let n = 64;
            let h = 2.0 * c / n as f64;
            for k in 0..n {
                for (s, w) in GAUSS4 {
                    acc += w * h * spec.chi(-c + (k as f64 + s) * h);
                }
            }
            assert!((acc - 1.0).abs() < 1e-10, "{c}: {acc}");
            assert_eq!(spec.chi(c), 0.0);
            assert!(spec.chi(0.3 * c) > 0.0);
        }
        assert!(WavePacketSpec::new(0.25).is_err());
        assert!(WavePacketSpec::new(0.0).is_err());
    }

    #[test]
    fn complex_reduction() {
        let g = Grid::new(-32.0, 32.0, 4096).unwrap();
        let k = std::f64::consts::PI / 4.0;
        let s = zero_state(g, 0.0, |_| 0.0, |x| (k * x).cos());
        let u = to_complex_u(&s).unwrap();
        for (x, c) in g.points().zip(u.values()) {
            assert!(c.re.abs() < 1e-15);
            assert!((c.im - (k * x).cos() / jb(k)).abs() < 1e-12);
        }
        let s = zero_state(g, 0.0, |x| (-x * x).exp(), |x| x * (-x * x).exp());
        let u = to_complex_u(&s).unwrap();
        assert!(u.values().iter().zip(s.phi().values()).all(|(c, p)| c.re == *p));
        let kink = crate::exact::kink_state(&crate::exact::KinkParams::new(0.0, 0.0).unwrap(), &g, 0.0).unwrap();
        assert!(matches!(to_complex_u(&kink), Err(SgError::Topology(_))));
    }

    #[test]
    fn packet_normalization_probe() {
        let g = Grid::new(-256.0, 256.0, 8192).unwrap();
        let spec = WavePacketSpec::default();
        let (t, v) = (144.0, 0.3);
        let psi = spec.packet_field(&g, t, v).unwrap();
        let n2 = inner_product(&psi, &psi).unwrap().re;
        let u = psi.map(|c| c / n2).unwrap();
        let gam = gamma_profile(&u, t, &[v], &spec).unwrap()[0];
        assert!((gam - 1.0).norm() < 1e-3, "{gam}");
        let z = ComplexField::zeros(g);
        assert_eq!(gamma_profile(&z, t, &[0.0, 0.5], &spec).unwrap(), vec![Complex64::default(); 2]);
    }

    #[test]
    fn packet_support_checks() {
        let g = Grid::new(-64.0, 64.0, 1024).unwrap();
        let spec = WavePacketSpec::default();
        let z = ComplexField::zeros(g);
        assert!(gamma_profile(&z, 100.0, &[0.9], &spec).is_err());
        assert!(gamma_profile(&z, 0.5, &[0.0], &spec).is_err());
        assert!(gamma_profile(&z, 10.0, &[1.0], &spec).is_err());
    }

    #[test]
    fn free_gaussian_profile() {
        // linear W(0) for eps e^{-x^2} in both components has modulus eps
        let eps = 0.05;
        let g = Grid::new(-256.0, 256.0, 4096).unwrap();
        let s0 = zero_state(g, 0.0, |x| eps * (-x * x).exp(), |x| eps * (-x * x).exp());
        let u0 = to_complex_u(&s0).unwrap();
        let t = 200.0;
        let ut = free_evolution(&u0, t).unwrap();
        let phi = ut.re();
        let phi_t = bessel_multiplier(&ut.im(), 1.0).unwrap();
        let st = State::new(phi, phi_t, t, Topology::Zero).unwrap();
        let xi = default_xi_grid();
        let wp = extract_w_at(&st, &xi, &WavePacketSpec::default(), ExtractionMethod::WavePacket).unwrap();
        let sp = extract_w_at(&st, &xi, &WavePacketSpec::default(), ExtractionMethod::StationaryPhase).unwrap();
        let w0 = wp.eval(0.0).unwrap().norm();
        assert!((w0 - eps).abs() < 0.02 * eps, "{w0}");
        assert!(wp.relative_distance(&sp).unwrap() < 0.01);
        assert!(wp.envelope_fit().unwrap().exponent <= -1.0);
        let early = st.clone().with_time(50.0);
        assert!(matches!(
            extract_w_at(&early, &xi, &WavePacketSpec::default(), ExtractionMethod::WavePacket),
            Err(SgError::InsufficientData(_))
        ));
    }

    #[test]
    fn predictions_on_the_axis_and_outside_the_cone() {
        let xi = default_xi_grid();
        let w: Vec<Complex64> = xi.iter().map(|&x| Complex64::new(0.03, 0.01) / (1.0 + x * x)).collect();
        let p = ProfileW::new(xi.clone(), w, 300.0, ExtractionMethod::WavePacket).unwrap();
        let t = 300.0;
        let u0 = predict_asymptotics(&p, t, 0.0, PredictionTarget::U { l: 0.0 }).unwrap();
        assert!((u0.magnitude() - p.eval(0.0).unwrap().norm() / t.sqrt()).abs() < 1e-15);
        for target in [
            PredictionTarget::U { l: 1.0 },
            PredictionTarget::KinkDiff { beta: 0.2, center: 0.0 },
            PredictionTarget::KinkDerivDiff { beta: 0.2, center: 0.0 },
        ] {
            for x in [300.0, -300.0, 412.0] {
                assert_eq!(predict_asymptotics(&p, t, x, target).unwrap().magnitude(), 0.0);
            }
        }
        let z = ProfileW::zero(xi, t).unwrap();
        for x in [-100.0, 0.0, 3.0] {
            for target in [
                PredictionTarget::U { l: 0.0 },
                PredictionTarget::KinkDiff { beta: -0.3, center: 1.0 },
                PredictionTarget::KinkDerivDiff { beta: -0.3, center: 1.0 },
            ] {
                assert_eq!(predict_asymptotics(&z, t, x, target).unwrap().magnitude(), 0.0);
            }
        }
        assert!(matches!(
            predict_asymptotics(&p, t, 299.9, PredictionTarget::U { l: 0.0 }),
            Err(SgError::OutOfRange { .. })
        ));
    }

    #[test]
    fn kink_diff_derivative_matches_printed_relation() {
        let xi = default_xi_grid();
        let w: Vec<Complex64> = xi.iter().map(|&x| Complex64::new(0.04, -0.02) * (-x * x / 4.0).exp()).collect();
        let p = ProfileW::new(xi, w, 200.0, ExtractionMethod::WavePacket).unwrap();
        let (t, beta, c) = (200.0, 0.2, 0.5);
        let target = PredictionTarget::KinkDiff { beta, center: c };
        let h = 1e-3;
        for x in [-20.0, 38.0, 41.3, 45.0, 70.0] {
            let d = |x: f64| match predict_asymptotics(&p, t, x, target).unwrap() {
                Prediction::Real(r) => r,
                _ => unreachable!(),
            };
            let num = (d(x + h) - d(x - h)) / (2.0 * h);
            let Prediction::Pair(fx, _) =
                predict_asymptotics(&p, t, x, PredictionTarget::KinkDerivDiff { beta, center: c }).unwrap()
            else {
                unreachable!()
            };
            assert!((num - fx).abs() < 1e-6 * (1.0 + fx.abs()), "{x}: {num} vs {fx}");
        }
    }

    #[test]
    fn profile_csv_roundtrip() {
        let xi = vec![-1.0, 0.0, 0.5];
        let w = vec![Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.0), Complex64::new(1e-9, 7.0)];
        let p = ProfileW::new(xi, w, 400.0, ExtractionMethod::StationaryPhase).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = ProfileW::read_csv(buf.as_slice(), 400.0, ExtractionMethod::StationaryPhase).unwrap();
        assert_eq!(back, p);
        assert!((p.eval(0.25).unwrap() - Complex64::new(-0.15 + 5e-10, 3.5)).norm() < 1e-15);
        assert!(p.eval(0.6).is_err());
    }

    #[test]
    fn boost_of_traveling_wave() {
        let g = Grid::new(-32.0, 32.0, 4096).unwrap();
        let beta = 0.4;
        let t = 3.0;
        let prof = |z: f64| (-z * z).exp();
        let dprof = |z: f64| -2.0 * z * (-z * z).exp();
        let s = zero_state(g, t, |x| prof(x - beta * t), |x| -beta * dprof(x - beta * t));
        let z = lorentz_boost_field(&s).unwrap();
        for (x, v) in g.points().zip(z.values()) {
            assert!((v - (t - beta * x) * dprof(x - beta * t)).abs() < 1e-5);
        }
        let zero = zero_state(g, t, |_| 0.0, |_| 0.0);
        assert_eq!(lorentz_boost_field(&zero).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn phase_law_recovers_synthetic_drift() {
        let w0 = 0.2f64;
        let lin: Vec<(f64, Complex64)> = (0..=30)
            .map(|i| {
                let t = 100.0 + 10.0 * i as f64;
                (t, Complex64::from_polar(w0 / t.sqrt(), -t + 0.3 + 0.5 / t))
            })
            .collect();
        let nl: Vec<(f64, Complex64)> = lin
            .iter()
            .map(|&(t, u)| (t, u * Complex64::from_polar(1.0, RESONANT_COEFFICIENT * w0 * w0 * t.ln())))
            .collect();
        let fit = phase_law(&nl, Some(&lin), (100.0, 400.0)).unwrap();
        assert!(fit.relative_error < 1e-10, "{fit:?}");
        assert!((fit.w0_abs - w0).abs() < 1e-12);
        let raw = phase_law(&nl, None, (100.0, 400.0)).unwrap();
        assert!(raw.relative_error > 1e-3);
    }
}
