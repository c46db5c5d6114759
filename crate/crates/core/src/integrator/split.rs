use std::sync::Arc;

use num_complex::Complex64;
use rustfft::Fft;

use crate::error::Result;
use crate::field::spectral::{ensure_periodic, plans};
use crate::field::{Field, Grid};
use crate::state::{Background, State, Topology};

pub(super) const STRANG: [f64; 1] = [1.0];

/// Yoshida's sixth-order symmetric composition (solution A).
pub(super) const SIXTH_ORDER: [f64; 7] = {
    const W1: f64 = -1.177_679_984_178_87;
    const W2: f64 = 0.235_573_213_359_357;
    const W3: f64 = 0.784_513_610_477_560;
    const W0: f64 = 1.0 - 2.0 * (W1 + W2 + W3);
    [W3, W2, W1, W0, W1, W2, W3]
};

/// Splitting for `w = phi - B` with `B` a static (anti)kink or zero:
/// `w_tt - w_xx + w = w - sin(B + w) + sin B`. The left side is advanced
/// exactly in Fourier space, the right side as a kick on `w_t`.
pub(super) struct Split {
    grid: Grid,
    topology: Topology,
    coeffs: &'static [f64],
    bg: Vec<f64>,
    sin_bg: Vec<f64>,
    omega: Vec<f64>,
    w: Vec<f64>,
    v: Vec<f64>,
    spec: Vec<Complex64>,
    out: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    rotations: Vec<(f64, Vec<(f64, f64)>)>,
}

impl Split {
    pub fn new(s0: &State, coeffs: &'static [f64]) -> Result<Self> {
        let grid = *s0.grid();
        let n = grid.len();
        let bgf = Background::for_field(s0.phi(), s0.topology());
        let bg = bgf.sample(&grid, 0);
        let w: Vec<f64> = s0
            .phi()
            .values()
            .iter()
            .zip(&bg)
            .map(|(p, b)| p - b)
            .collect();
        ensure_periodic(&w)?;
        ensure_periodic(s0.phi_t().values())?;
        let p = plans(n);
        Ok(Split {
            grid,
            topology: s0.topology(),
            coeffs,
            sin_bg: bg.iter().map(|b| b.sin()).collect(),
            bg,
            omega: grid.wavenumbers().iter().map(|k| (1.0 + k * k).sqrt()).collect(),
            w,
            v: s0.phi_t().values().to_vec(),
            spec: vec![Complex64::new(0.0, 0.0); n],
            out: vec![Complex64::new(0.0, 0.0); n],
            fwd: p.fwd,
            inv: p.inv,
            rotations: Vec::new(),
        })
    }

    pub fn step(&mut self, h: f64) {
        let c = self.coeffs;
        self.kick(0.5 * c[0] * h);
        for i in 0..c.len() {
            self.drift(c[i] * h);
            let next = if i + 1 < c.len() {
                0.5 * (c[i] + c[i + 1])
            } else {
                0.5 * c[i]
            };
            self.kick(next * h);
        }
    }

    fn kick(&mut self, tau: f64) {
        for i in 0..self.w.len() {
            let w = self.w[i];
            self.v[i] += tau * (w - (self.bg[i] + w).sin() + self.sin_bg[i]);
        }
    }

    fn rotation(&mut self, tau: f64) -> usize {
        if let Some(i) = self.rotations.iter().position(|(t, _)| *t == tau) {
            return i;
        }
        if self.rotations.len() >= 16 {
            self.rotations.remove(0);
        }
        let r = self
            .omega
            .iter()
            .map(|&om| ((om * tau).cos(), (om * tau).sin()))
            .collect();
        self.rotations.push((tau, r));
        self.rotations.len() - 1
    }

    /// Exact Klein-Gordon flow; `w + i v` is transformed once and the real
    /// parts are separated by Hermitian symmetry.
    fn drift(&mut self, tau: f64) {
        let n = self.w.len();
        for i in 0..n {
            self.spec[i] = Complex64::new(self.w[i], self.v[i]);
        }
        self.fwd.process(&mut self.spec);
        let r = self.rotation(tau);
        let rot = &self.rotations[r].1;
        let half_i = Complex64::new(0.0, -0.5);
        for j in 0..n {
            let m = (n - j) % n;
            let (zj, zm) = (self.spec[j], self.spec[m].conj());
            let wh = (zj + zm) * 0.5;
            let vh = (zj - zm) * half_i;
            let (c, s) = rot[j];
            let om = self.omega[j];
            let w2 = wh * c + vh * (s / om);
            let v2 = vh * c - wh * (om * s);
            self.out[j] = w2 + Complex64::new(-v2.im, v2.re);
        }
        self.inv.process(&mut self.out);
        let scale = 1.0 / n as f64;
        for i in 0..n {
            self.w[i] = self.out[i].re * scale;
            self.v[i] = self.out[i].im * scale;
        }
    }

    pub fn sup(&self) -> f64 {
        self.w
            .iter()
            .chain(&self.v)
            .fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
    }

    pub fn state(&self, time: f64) -> State {
        let phi = self.w.iter().zip(&self.bg).map(|(w, b)| w + b).collect();
        State::raw(
            Field::raw(self.grid, phi),
            Field::raw(self.grid, self.v.clone()),
            time,
            self.topology,
        )
    }
}
