use crate::field::{spatial_derivative, Field, Grid};
use crate::state::{State, Topology};

/// Cells held at their initial values at each end.
const CLAMP: usize = 2;

/// Leapfrog in velocity form: identical positions to the three-level
/// scheme `f+ = 2f - f- + dt^2 (D2 f - sin f)` started with a Taylor step,
/// but self-starting, so the step may change between calls.
pub(super) struct Leapfrog {
    grid: Grid,
    topology: Topology,
    f: Vec<f64>,
    p: Vec<f64>,
    acc: Vec<f64>,
}

impl Leapfrog {
    pub fn new(s0: &State) -> Self {
        let f = s0.phi().values().to_vec();
        let p = s0.phi_t().values().to_vec();
        let grid = *s0.grid();
        let acc = accel(&grid, &f);
        Leapfrog {
            grid,
            topology: s0.topology(),
            f,
            p,
            acc,
        }
    }

    pub fn step(&mut self, h: f64) {
        let n = self.f.len();
        for i in CLAMP..n - CLAMP {
            self.p[i] += 0.5 * h * self.acc[i];
            self.f[i] += h * self.p[i];
        }
        self.acc = accel(&self.grid, &self.f);
        for i in CLAMP..n - CLAMP {
            self.p[i] += 0.5 * h * self.acc[i];
        }
    }

    pub fn sup(&self) -> f64 {
        self.f
            .iter()
            .chain(&self.p)
            .fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
    }

    pub fn state(&self, time: f64) -> State {
        State::raw(
            Field::raw(self.grid, self.f.clone()),
            Field::raw(self.grid, self.p.clone()),
            time,
            self.topology,
        )
    }
}

fn accel(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let fxx = spatial_derivative(&Field::raw(*grid, f.to_vec()), 2)
        .map(Field::into_values)
        .unwrap_or_else(|_| vec![f64::NAN; f.len()]);
    fxx.iter().zip(f).map(|(d, v)| d - v.sin()).collect()
}
