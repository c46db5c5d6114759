use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Field, Grid, Sample};
use crate::error::{Result, SgError};

/// Boundary jump above which a field is treated as non-periodic.
pub(crate) const PERIODIC_TOL: f64 = 1e-3;

#[derive(Clone)]
pub(crate) struct Plans {
    pub fwd: Arc<dyn Fft<f64>>,
    pub inv: Arc<dyn Fft<f64>>,
}

pub(crate) fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Plans {
                fwd: planner.plan_fft_forward(n),
                inv: planner.plan_fft_inverse(n),
            }
        })
        .clone()
}

pub(crate) fn fft(buf: &mut [Complex64]) {
    plans(buf.len()).fwd.process(buf);
}

/// Normalized inverse transform.
pub(crate) fn ifft(buf: &mut [Complex64]) {
    let n = buf.len();
    plans(n).inv.process(buf);
    let s = 1.0 / n as f64;
    for c in buf.iter_mut() {
        *c *= s;
    }
}

pub(crate) fn ensure_periodic<T: Sample>(v: &[T]) -> Result<()> {
    let jump = (v[0] - v[v.len() - 1]).modulus();
    if jump > PERIODIC_TOL {
        Err(SgError::NonPeriodic { jump })
    } else {
        Ok(())
    }
}

/// Multiply the spectrum by `symbol(k)`. `odd` zeroes the Nyquist mode.
pub(crate) fn apply_symbol<T: Sample>(
    grid: &Grid,
    v: &[T],
    odd: bool,
    symbol: impl Fn(f64) -> Complex64,
) -> Vec<T> {
    let n = v.len();
    let mut buf: Vec<Complex64> = v.iter().map(|x| x.to_complex()).collect();
    fft(&mut buf);
    for (c, k) in buf.iter_mut().zip(grid.wavenumbers()) {
        *c *= symbol(k);
    }
    if odd {
        buf[n / 2] = Complex64::new(0.0, 0.0);
    }
    ifft(&mut buf);
    buf.into_iter().map(T::from_complex).collect()
}

/// Fourier multiplier with symbol `<xi>^l`.
///
/// The field must decay to a common value at both ends; a kink profile is
/// rejected with [`SgError::NonPeriodic`].
pub fn bessel_multiplier<T: Sample>(f: &Field<T>, l: f64) -> Result<Field<T>> {
    ensure_periodic(f.values())?;
    let out = apply_symbol(f.grid(), f.values(), false, |k| {
        Complex64::new((1.0 + k * k).powf(0.5 * l), 0.0)
    });
    Field::checked(*f.grid(), out)
}

/// Spectral derivative of a periodic field.
pub fn spectral_derivative<T: Sample>(f: &Field<T>, order: u32) -> Result<Field<T>> {
    ensure_periodic(f.values())?;
    Field::checked(*f.grid(), spectral_derivative_raw(f.grid(), f.values(), order))
}

pub(crate) fn spectral_derivative_raw<T: Sample>(grid: &Grid, v: &[T], order: u32) -> Vec<T> {
    let i = Complex64::new(0.0, 1.0);
    apply_symbol(grid, v, order % 2 == 1, |k| (i * k).powu(order))
}

/// Parseval sum `dx/n * sum |f_hat|^2` of the periodic extension.
pub fn spectral_sum<T: Sample>(f: &Field<T>) -> f64 {
    let n = f.len();
    let mut buf: Vec<Complex64> = f.values().iter().map(|x| x.to_complex()).collect();
    fft(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).sum::<f64>() * f.grid().dx() / n as f64
}

/// Band-limited samples on the grid refined by `factor` (zero padding).
pub(crate) fn upsample(v: &[Complex64], factor: usize) -> Vec<Complex64> {
    let n = v.len();
    let m = n * factor;
    let mut buf = v.to_vec();
    fft(&mut buf);
    let mut big = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..n / 2 {
        big[j] = buf[j];
    }
    for j in n / 2 + 1..n {
        big[m - n + j] = buf[j];
    }
    // split the Nyquist mode symmetrically
    big[n / 2] = buf[n / 2] * 0.5;
    big[m - n / 2] = buf[n / 2] * 0.5;
    ifft(&mut big);
    let s = factor as f64;
    big.iter_mut().for_each(|c| *c *= s);
    big
}

/// Trigonometric interpolant of periodic samples, evaluable off-grid.
#[derive(Clone, Debug)]
pub struct BandLimited {
    x0: f64,
    coef: Vec<Complex64>,
    k: Vec<f64>,
}

impl BandLimited {
    pub fn new<T: Sample>(f: &Field<T>) -> Result<Self> {
        ensure_periodic(f.values())?;
        Ok(Self::from_samples(f.grid(), f.values()))
    }

    pub(crate) fn from_samples<T: Sample>(grid: &Grid, v: &[T]) -> Self {
        let n = v.len();
        let mut coef: Vec<Complex64> = v.iter().map(|x| x.to_complex()).collect();
        fft(&mut coef);
        let s = 1.0 / n as f64;
        coef.iter_mut().for_each(|c| *c *= s);
        let mut k = grid.wavenumbers();
        // Nyquist as a cosine: half at +k, half at -k
        let kn = k[n / 2];
        coef[n / 2] *= 0.5;
        coef.push(coef[n / 2]);
        k.push(-kn);
        BandLimited {
            x0: grid.x_min(),
            coef,
            k,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.eval_derivative(x, 0)
    }

    pub fn eval_derivative(&self, x: f64, order: u32) -> Complex64 {
        let y = x - self.x0;
        let i = Complex64::new(0.0, 1.0);
        self.coef
            .iter()
            .zip(&self.k)
            .map(|(c, &k)| c * (i * k).powu(order) * Complex64::from_polar(1.0, k * y))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::quadrature::inner_product;

    fn gauss_grid() -> Grid {
        Grid::new(-16.0, 16.0, 256).unwrap()
    }

    #[test]
    fn bessel_of_zero_order_is_identity() {
        let g = gauss_grid();
        let f = Field::from_fn(g, |x| (-x * x).exp() * x).unwrap();
        let h = bessel_multiplier(&f, 0.0).unwrap();
        for (a, b) in f.values().iter().zip(h.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn bessel_orders_compose() {
        let g = gauss_grid();
        let f = Field::from_fn(g, |x| (-x * x / 2.0).exp()).unwrap();
        let h = bessel_multiplier(&bessel_multiplier(&f, 1.0).unwrap(), -1.0).unwrap();
        for (a, b) in f.values().iter().zip(h.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bessel_two_is_one_minus_laplacian() {
        let g = gauss_grid();
        let f = Field::from_fn(g, |x| (-x * x).exp()).unwrap();
        let h = bessel_multiplier(&f, 2.0).unwrap();
        for (x, v) in g.points().zip(h.values()) {
            let e = (-x * x).exp();
            let want = e - (4.0 * x * x - 2.0) * e;
            assert!((v - want).abs() < 1e-10);
        }
    }

    #[test]
    fn kink_profile_is_rejected() {
        let g = gauss_grid();
        let f = Field::from_fn(g, |x| 4.0 * x.exp().atan()).unwrap();
        assert!(matches!(
            bessel_multiplier(&f, 1.0),
            Err(SgError::NonPeriodic { .. })
        ));
    }

    #[test]
    fn parseval() {
        let g = gauss_grid();
        let f = Field::from_fn(g, |x| Complex64::new((-x * x).exp(), x * (-x * x).exp())).unwrap();
        let a = inner_product(&f, &f).unwrap().re;
        let b = spectral_sum(&f);
        assert!(((a - b) / a).abs() < 1e-10);
    }

    #[test]
    fn spectral_derivative_of_gaussian() {
        let g = gauss_grid();
        let f = Field::from_fn(g, |x| (-x * x).exp()).unwrap();
        let d = spectral_derivative(&f, 3).unwrap();
        for (x, v) in g.points().zip(d.values()) {
            let want = (12.0 * x - 8.0 * x * x * x) * (-x * x).exp();
            assert!((v - want).abs() < 1e-10);
        }
    }

    #[test]
    fn upsample_and_band_limited_agree() {
        let g = gauss_grid();
        let f = Field::from_fn(g, |x| Complex64::new((-x * x / 3.0).exp(), 0.0)).unwrap();
        let up = upsample(f.values(), 4);
        let bl = BandLimited::new(&f).unwrap();
        for j in [1usize, 5, 511, 600] {
            let x = g.x_min() + j as f64 * g.dx() / 4.0;
            let want = (-x * x / 3.0).exp();
            assert!((up[j].re - want).abs() < 1e-12);
            assert!((bl.eval(x).re - want).abs() < 1e-12);
        }
        let x = 0.3;
        assert!((bl.eval_derivative(x, 1).re + 2.0 * x / 3.0 * (-x * x / 3.0).exp()).abs() < 1e-12);
    }
}
