//! Time integration of `f_tt - f_xx + sin f = 0`.

mod diagnostics;
mod leapfrog;
mod split;

pub use diagnostics::{
    conserved_quantities, em_conservation_residual, em_tensor, pde_residual, Conserved, EmTensor,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SgError};
use crate::state::State;

use leapfrog::Leapfrog;
use split::Split;

/// Sup-norm threshold above which a run is declared blown up.
pub const BLOWUP: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Second-order leapfrog with fourth-order finite differences, written
    /// in kick-drift-kick form.
    Leapfrog,
    /// Strang splitting: exact Klein-Gordon flow plus a nonlinear kick.
    StrangSplitSpectral,
    /// Sixth-order symmetric composition of Strang steps.
    SixthOrderSplitSpectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scheme {
    pub kind: SchemeKind,
    pub dt: f64,
}

impl Scheme {
    pub fn new(kind: SchemeKind, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SgError::InvalidArgument(format!("time step {dt}")));
        }
        Ok(Scheme { kind, dt })
    }
}

enum Engine {
    Leapfrog(Leapfrog),
    Split(Split),
}

/// Incremental integrator; steps never exceed the scheme's `dt`.
pub struct Stepper {
    engine: Engine,
    scheme: Scheme,
    time: f64,
}

impl Stepper {
    pub fn new(s0: &State, scheme: Scheme) -> Result<Self> {
        let engine = match scheme.kind {
            SchemeKind::Leapfrog => {
                let limit = 0.9 * s0.grid().dx();
                if scheme.dt > limit {
                    return Err(SgError::Cfl {
                        dt: scheme.dt,
                        limit,
                    });
                }
                Engine::Leapfrog(Leapfrog::new(s0))
            }
            SchemeKind::StrangSplitSpectral => Engine::Split(Split::new(s0, &split::STRANG)?),
            SchemeKind::SixthOrderSplitSpectral => {
                Engine::Split(Split::new(s0, &split::SIXTH_ORDER)?)
            }
        };
        Ok(Stepper {
            engine,
            scheme,
            time: s0.time(),
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Advances by exactly `h` in one step (`h` may be negative).
    pub fn step(&mut self, h: f64) -> Result<()> {
        match &mut self.engine {
            Engine::Leapfrog(e) => e.step(h),
            Engine::Split(e) => e.step(h),
        }
        self.time += h;
        let sup = match &self.engine {
            Engine::Leapfrog(e) => e.sup(),
            Engine::Split(e) => e.sup(),
        };
        if !(sup <= BLOWUP) {
            return Err(SgError::BlowUp { time: self.time });
        }
        Ok(())
    }

    /// Advances to `t` with equal steps no larger than the scheme's `dt`.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let span = t - self.time;
        if span < -1e-12 {
            return Err(SgError::InvalidArgument(format!(
                "cannot advance backwards from {} to {t}",
                self.time
            )));
        }
        let steps = (span / self.scheme.dt - 1e-9).ceil().max(0.0) as usize;
        if steps == 0 {
            self.time = t;
            return Ok(());
        }
        let h = span / steps as f64;
        let start = self.time;
        for i in 0..steps {
            self.step(h)?;
            self.time = start + (i + 1) as f64 * h;
        }
        self.time = t;
        Ok(())
    }

    pub fn state(&self) -> State {
        match &self.engine {
            Engine::Leapfrog(e) => e.state(self.time),
            Engine::Split(e) => e.state(self.time),
        }
    }
}

/// Named scalar observations of one snapshot.
pub type Observation = Vec<(String, f64)>;

/// Time-ordered snapshots with uniform spacing plus observer records.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<State>,
    records: BTreeMap<String, Vec<(f64, f64)>>,
}

impl Trajectory {
    /// Builds a trajectory from states with strictly increasing, uniformly
    /// spaced times on a common grid.
    pub fn from_states(states: Vec<State>) -> Result<Self> {
        if states.is_empty() {
            return Err(SgError::InsufficientData("empty trajectory".into()));
        }
        let times: Vec<f64> = states.iter().map(|s| s.time()).collect();
        if times.len() > 1 {
            let h = times[1] - times[0];
            if !(h > 0.0) {
                return Err(SgError::InvalidArgument("times must increase".into()));
            }
            for w in times.windows(2) {
                if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
                    return Err(SgError::InvalidArgument(
                        "snapshot spacing must be uniform".into(),
                    ));
                }
            }
        }
        for s in &states[1..] {
            s.phi().same_grid(states[0].phi())?;
            if s.topology() != states[0].topology() {
                return Err(SgError::Topology("mixed topologies".into()));
            }
        }
        Ok(Trajectory {
            times,
            states,
            records: BTreeMap::new(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Snapshot spacing (zero for a single snapshot).
    pub fn interval(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }

    pub fn records(&self) -> &BTreeMap<String, Vec<(f64, f64)>> {
        &self.records
    }

    pub fn record(&self, name: &str) -> Option<&[(f64, f64)]> {
        self.records.get(name).map(|v| v.as_slice())
    }

    /// Index of the snapshot at time `t`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * self.interval().max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or_else(|| SgError::InvalidArgument(format!("no snapshot at t = {t}")))
    }

    pub fn state_at(&self, t: f64) -> Result<&State> {
        Ok(&self.states[self.index_of(t)?])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub snapshot_every: f64,
    /// Keep the snapshot states (observer records are always kept).
    pub keep_states: bool,
}

/// Evolves `s0` to `t_end`, keeping snapshots every `snapshot_every`.
pub fn evolve(s0: &State, scheme: Scheme, t_end: f64, snapshot_every: f64) -> Result<Trajectory> {
    evolve_observed(
        s0,
        scheme,
        EvolveOptions {
            t_end,
            snapshot_every,
            keep_states: true,
        },
        |_| Ok(Vec::new()),
    )
}

/// Like [`evolve`], calling `observer` at every snapshot.
pub fn evolve_observed<F>(
    s0: &State,
    scheme: Scheme,
    opts: EvolveOptions,
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(&State) -> Result<Observation>,
{
    let t0 = s0.time();
    let every = opts.snapshot_every;
    if !(every > 0.0) {
        return Err(SgError::InvalidArgument("snapshot interval must be positive".into()));
    }
    let count = (opts.t_end - t0) / every;
    let n_snap = count.round();
    if n_snap < 0.0 || (count - n_snap).abs() > 1e-6 {
        return Err(SgError::InvalidArgument(format!(
            "t_end - t0 = {} is not a multiple of the snapshot interval {every}",
            opts.t_end - t0
        )));
    }
    let mut stepper = Stepper::new(s0, scheme)?;
    let mut traj = Trajectory::default();
    for k in 0..=n_snap as usize {
        let t = t0 + k as f64 * every;
        stepper.advance_to(t)?;
        let s = stepper.state();
        for (name, v) in observer(&s)? {
            traj.records.entry(name).or_default().push((t, v));
        }
        traj.times.push(t);
        if opts.keep_states {
            traj.states.push(s);
        }
    }
    Ok(traj)
}
