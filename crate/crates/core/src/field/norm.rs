use serde::{Deserialize, Serialize};

use super::derivative::spatial_derivative;
use super::spectral::{apply_symbol, ensure_periodic};
use super::{Field, Sample};
use crate::error::{Result, SgError};
use num_complex::Complex64;

/// Norm selector.
///
/// `Lp(f64::INFINITY)` is the sup norm. `PairEnergy` is the `H^1 x L^2`
/// norm of a pair and is only meaningful through [`pair_energy_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormSpec {
    Lp(f64),
    L2PlusLinf,
    WeightedSobolev { m: f64, s: f64 },
    PairEnergy,
}

pub fn norm<T: Sample>(f: &Field<T>, spec: NormSpec) -> Result<f64> {
    match spec {
        NormSpec::Lp(_) | NormSpec::L2PlusLinf => {
            let mags: Vec<f64> = f.values().iter().map(|v| v.modulus()).collect();
            magnitude_norm(&mags, f.grid().dx(), spec)
        }
        NormSpec::WeightedSobolev { m, s } => weighted_sobolev(f, m, s),
        NormSpec::PairEnergy => Err(SgError::InvalidArgument(
            "PairEnergy needs a pair; use pair_energy_norm".into(),
        )),
    }
}

/// Lp or L2+Linf norm of the pointwise Euclidean magnitude of a vector field.
pub fn vector_norm(components: &[&Field<f64>], spec: NormSpec) -> Result<f64> {
    let first = components
        .first()
        .ok_or_else(|| SgError::InvalidArgument("no components".into()))?;
    let mut sq = vec![0.0; first.len()];
    for c in components {
        first.same_grid(c)?;
        for (s, v) in sq.iter_mut().zip(c.values()) {
            *s += v * v;
        }
    }
    let mags: Vec<f64> = sq.into_iter().map(f64::sqrt).collect();
    magnitude_norm(&mags, first.grid().dx(), spec)
}

/// `H^1 x L^2` norm of `(u0, u1)`.
pub fn pair_energy_norm(u0: &Field<f64>, u1: &Field<f64>) -> Result<f64> {
    u0.same_grid(u1)?;
    let du = spatial_derivative(u0, 1)?;
    let l2sq = |f: &Field<f64>| weighted_sum(&f.values().iter().map(|v| v * v).collect::<Vec<_>>(), f.grid().dx());
    Ok((l2sq(u0) + l2sq(&du) + l2sq(u1)).sqrt())
}

fn weighted_sum(v: &[f64], dx: f64) -> f64 {
    super::quadrature::trapezoid(v, dx)
}

fn magnitude_norm(m: &[f64], dx: f64, spec: NormSpec) -> Result<f64> {
    match spec {
        NormSpec::Lp(p) if p.is_infinite() && p > 0.0 => Ok(m.iter().fold(0.0, |a, &b| a.max(b))),
        NormSpec::Lp(p) if p >= 1.0 => {
            let pw: Vec<f64> = m.iter().map(|v| v.powf(p)).collect();
            Ok(weighted_sum(&pw, dx).powf(1.0 / p))
        }
        NormSpec::Lp(p) => Err(SgError::InvalidArgument(format!("Lp needs p >= 1, got {p}"))),
        NormSpec::L2PlusLinf => Ok(l2_plus_linf(m, dx)),
        _ => Err(SgError::InvalidArgument(format!(
            "{spec:?} is not defined on magnitudes"
        ))),
    }
}

/// `inf_lambda ||(|g| - lambda)_+||_2 + lambda`, by golden-section search.
///
/// The objective is convex in lambda; the endpoints give the L2 and sup
/// norms, so the result never exceeds either.
fn l2_plus_linf(m: &[f64], dx: f64) -> f64 {
    let h = |lam: f64| {
        let sq: Vec<f64> = m.iter().map(|&v| (v - lam).max(0.0).powi(2)).collect();
        weighted_sum(&sq, dx).sqrt() + lam
    };
    let top = m.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut best = h(0.0).min(top);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, top);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    for _ in 0..80 {
        if hc < hd {
            b = d;
            d = c;
            hd = hc;
            c = b - r * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + r * (b - a);
            hd = h(d);
        }
        best = best.min(hc).min(hd);
        if (b - a) <= 1e-14 * top.max(1e-300) {
            break;
        }
    }
    best
}

fn binomial(m: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// `||<D>^m (<x>^s g)||_2`.
///
/// Integer `m` uses finite differences, `sum_j C(m, j) ||<x>^s d^j g||^2`,
/// which matches the Fourier definition at `s = 0` and works on any
/// topology. Fractional `m` is computed spectrally and needs a field that
/// decays at both ends.
fn weighted_sobolev<T: Sample>(f: &Field<T>, m: f64, s: f64) -> Result<f64> {
    if !(m >= 0.0) || !s.is_finite() {
        return Err(SgError::InvalidArgument(format!(
            "WeightedSobolev needs m >= 0, finite s (m = {m}, s = {s})"
        )));
    }
    let grid = *f.grid();
    let weight = |x: f64| (1.0 + x * x).powf(0.5 * s);
    let dx = grid.dx();
    let weighted_l2sq = |g: &Field<T>| {
        let sq: Vec<f64> = grid
            .points()
            .zip(g.values())
            .map(|(x, v)| (weight(x) * v.modulus()).powi(2))
            .collect();
        weighted_sum(&sq, dx)
    };
    if m.fract() == 0.0 {
        let mi = m as u32;
        let mut total = 0.0;
        let mut dj = f.clone();
        for j in 0..=mi {
            if j > 0 {
                dj = spatial_derivative(&dj, 1)?;
            }
            total += binomial(mi, j) * weighted_l2sq(&dj);
        }
        Ok(total.sqrt())
    } else {
        let wg: Vec<Complex64> = grid
            .points()
            .zip(f.values())
            .map(|(x, v)| v.to_complex() * weight(x))
            .collect();
        ensure_periodic(&wg)?;
        let out = apply_symbol(&grid, &wg, false, |k| {
            Complex64::new((1.0 + k * k).powf(0.5 * m), 0.0)
        });
        let sq: Vec<f64> = out.iter().map(|c| c.norm_sqr()).collect();
        Ok(weighted_sum(&sq, dx).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn grid() -> Grid {
        Grid::new(-16.0, 16.0, 512).unwrap()
    }

    #[test]
    fn gaussian_lp_norms() {
        let f = Field::from_fn(grid(), |x| (-x * x).exp()).unwrap();
        let l2 = norm(&f, NormSpec::Lp(2.0)).unwrap();
        assert!((l2 - (std::f64::consts::PI / 2.0).sqrt().sqrt()).abs() < 1e-12);
        let l1 = norm(&f, NormSpec::Lp(1.0)).unwrap();
        assert!((l1 - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert_eq!(norm(&f, NormSpec::Lp(f64::INFINITY)).unwrap(), 1.0);
        assert!(norm(&f, NormSpec::Lp(0.5)).is_err());
    }

    #[test]
    fn l2_plus_linf_is_below_both() {
        let f = Field::from_fn(grid(), |x| (-x * x).exp() + 0.01 * (x / 3.0).cos()).unwrap();
        let a = norm(&f, NormSpec::L2PlusLinf).unwrap();
        let l2 = norm(&f, NormSpec::Lp(2.0)).unwrap();
        let li = norm(&f, NormSpec::Lp(f64::INFINITY)).unwrap();
        assert!(a <= l2.min(li) + 1e-15);
        assert!(a > 0.0);
    }

    #[test]
    fn sobolev_zero_is_l2() {
        let f = Field::from_fn(grid(), |x| x * (-x * x).exp()).unwrap();
        let a = norm(&f, NormSpec::WeightedSobolev { m: 0.0, s: 0.0 }).unwrap();
        let b = norm(&f, NormSpec::Lp(2.0)).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn integer_and_fractional_sobolev_agree_at_integers() {
        let f = Field::from_fn(grid(), |x| (-x * x).exp()).unwrap();
        let a = norm(&f, NormSpec::WeightedSobolev { m: 2.0, s: 0.0 }).unwrap();
        let b = norm(&f, NormSpec::WeightedSobolev { m: 2.0 + 1e-12, s: 0.0 }).unwrap();
        assert!(((a - b) / b).abs() < 1e-4, "{a} {b}");
    }

    #[test]
    fn pair_energy_of_gaussian() {
        let g = grid();
        let u0 = Field::from_fn(g, |x| (-x * x).exp()).unwrap();
        let u1 = Field::zeros(g);
        let pi = std::f64::consts::PI;
        // ||g||^2 = sqrt(pi/2), ||g'||^2 = sqrt(pi/2)
        let want = (2.0 * (pi / 2.0).sqrt()).sqrt();
        let got = pair_energy_norm(&u0, &u1).unwrap();
        assert!((got - want).abs() < 1e-5, "{got} {want}");
    }

    #[test]
    fn pair_energy_spec_needs_pair() {
        let f = Field::<f64>::zeros(grid());
        assert!(norm(&f, NormSpec::PairEnergy).is_err());
    }
}
