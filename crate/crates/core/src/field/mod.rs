//! Uniform grids and sampled fields.

mod derivative;
mod norm;
pub(crate) mod quadrature;
pub(crate) mod spectral;

pub use derivative::spatial_derivative;
pub use norm::{norm, pair_energy_norm, vector_norm, NormSpec};
pub use quadrature::{inner_product, integrate};
pub use spectral::{bessel_multiplier, spectral_derivative, spectral_sum, BandLimited};

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SgError};

/// Uniform grid `x_i = x_min + i * dx`, `dx = (x_max - x_min) / n`.
///
/// The right endpoint is not a node, so the grid doubles as a periodic grid
/// for spectral operations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl TryFrom<GridSpec> for Grid {
    type Error = SgError;
    fn try_from(g: GridSpec) -> Result<Self> {
        Grid::new(g.x_min, g.x_max, g.n)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            x_min: g.x_min,
            x_max: g.x_max,
            n: g.n,
        }
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(SgError::InvalidGrid("non-finite bounds".into()));
        }
        if x_max <= x_min {
            return Err(SgError::InvalidGrid(format!(
                "x_max ({x_max}) must exceed x_min ({x_min})"
            )));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(SgError::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 16"
            )));
        }
        Ok(Grid {
            x_min,
            x_max,
            n,
            dx: (x_max - x_min) / n as f64,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Last node, `x_max - dx`.
    pub fn x_last(&self) -> f64 {
        self.x(self.n - 1)
    }

    /// Whether `x` lies in `[x_0, x_{n-1}]`.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_last()
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.dx).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        let base = 2.0 * std::f64::consts::PI / self.length();
        (0..n)
            .map(|j| {
                let m = if j < n / 2 { j } else { j - n };
                base * m as f64
            })
            .collect()
    }
}

/// Scalar type of field samples.
pub trait Sample:
    Copy
    + Default
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn to_complex(self) -> Complex64;
    /// Real types keep the real part.
    fn from_complex(c: Complex64) -> Self;
    fn from_real(r: f64) -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    fn finite(self) -> bool;
}

impl Sample for f64 {
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(c: Complex64) -> Self {
        c.re
    }
    fn from_real(r: f64) -> Self {
        r
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Sample for Complex64 {
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(c: Complex64) -> Self {
        c
    }
    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Samples on a [`Grid`]; every sample is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T = f64> {
    grid: Grid,
    values: Vec<T>,
}

pub type ComplexField = Field<Complex64>;

impl<T: Sample> Field<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SgError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.finite()) {
            return Err(SgError::NonFinite { index });
        }
        Ok(Field { grid, values })
    }

    /// Caller guarantees length and finiteness.
    pub(crate) fn raw(grid: Grid, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub(crate) fn checked(grid: Grid, values: Vec<T>) -> Result<Self> {
        Self::new(grid, values)
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> T) -> Result<Self> {
        Self::new(grid, grid.points().map(f).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![T::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise map with access to the node coordinate.
    pub fn map_x(&self, f: impl Fn(f64, T) -> T) -> Result<Self> {
        Self::new(
            self.grid,
            self.grid
                .points()
                .zip(&self.values)
                .map(|(x, &v)| f(x, v))
                .collect(),
        )
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.same_grid(other)?;
        Self::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        Field::raw(self.grid, self.values.iter().map(|&v| v * c).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    pub fn same_grid<U>(&self, other: &Field<U>) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(SgError::GridMismatch)
        }
    }

    pub fn to_complex(&self) -> ComplexField {
        Field::raw(
            self.grid,
            self.values.iter().map(|v| v.to_complex()).collect(),
        )
    }
}

impl ComplexField {
    pub fn re(&self) -> Field<f64> {
        Field::raw(self.grid, self.values.iter().map(|c| c.re).collect())
    }
    pub fn im(&self) -> Field<f64> {
        Field::raw(self.grid, self.values.iter().map(|c| c.im).collect())
    }
}

impl std::ops::Index<usize> for Field<f64> {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
