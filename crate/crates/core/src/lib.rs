//! Numerical laboratory for sine-Gordon kinks: `f_tt - f_xx + sin f = 0`.

pub mod error;
pub mod backlund;
pub mod exact;
pub mod field;
pub mod integrator;
pub mod io;
pub mod scattering;
pub mod state;
pub mod tracker;

pub use error::{Result, SgError};
pub use field::{ComplexField, Field, Grid};
pub use state::{State, Topology};
