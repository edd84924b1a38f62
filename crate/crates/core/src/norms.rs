//! Lebesgue, Sobolev and Slobodeckij norms on sample fields, and the
//! pointwise nonlinearity `|f|^{p-2} f`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::grid::{Grid1D, Topology};

/// A norm family together with its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormSpec {
    Lp(f64),
    W1q(f64),
    SlobodeckijHs(f64),
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NormSpec::Lp(p) => check_exponent("p", p),
            NormSpec::W1q(q) => check_exponent("q", q),
            NormSpec::SlobodeckijHs(s) => {
                if s > 0.0 && s < 1.0 {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!("s must lie in (0, 1), got {s}")))
                }
            }
        }
    }

    pub fn evaluate(&self, f: &SpinorField) -> Result<f64> {
        match *self {
            NormSpec::Lp(p) => lp_norm(f, p),
            NormSpec::W1q(q) => w1q_norm(f, q),
            NormSpec::SlobodeckijHs(s) => slobodeckij_norm(f, s),
        }
    }
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{name} must lie in (1, inf), got {p}"
        )))
    }
}

/// `(sum_x w_x |f(x)|^p)^{1/p}` with the grid's quadrature weights.
pub fn lp_norm(f: &SpinorField, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    f.validate()?;
    Ok(lp_unchecked(f, p))
}

fn lp_unchecked(f: &SpinorField, p: f64) -> f64 {
    let grid = f.grid();
    (0..grid.n_points())
        .map(|j| grid.weight(j) * f.modulus(j).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Componentwise grid derivative: spectral on circles, second order finite
/// differences (central inside, one-sided at the ends) on intervals.
pub fn derivative(f: &SpinorField) -> SpinorField {
    let grid = *f.grid();
    let r = f.rank();
    let n = grid.n_points();
    let mut out = SpinorField::zeros(grid, r);
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    let mut planner = FftPlanner::new();
    for c in 0..r {
        for (j, z) in column.iter_mut().enumerate() {
            *z = f.values()[j * r + c];
        }
        let d = match grid.topology() {
            Topology::Circle => spectral_derivative(&grid, &column, &mut planner),
            Topology::Interval => fd_derivative(grid.spacing(), &column),
        };
        let vals = out.values_mut();
        for (j, z) in d.into_iter().enumerate() {
            vals[j * r + c] = z;
        }
    }
    out
}

fn spectral_derivative(
    grid: &Grid1D,
    samples: &[Complex64],
    planner: &mut FftPlanner<f64>,
) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    let base = 2.0 * PI / grid.length();
    for (k, z) in buf.iter_mut().enumerate() {
        // signed wavenumber; the unpaired Nyquist mode of even N is dropped
        let kk = if 2 * k < n {
            k as f64
        } else if 2 * k == n {
            0.0
        } else {
            k as f64 - n as f64
        };
        *z *= Complex64::new(0.0, base * kk) / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}

fn fd_derivative(h: f64, u: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..n - 1 {
        d[j] = (u[j + 1] - u[j - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
    d
}

/// Dense scalar matrix of [`derivative`] on `grid`.
pub fn derivative_matrix(grid: &Grid1D) -> DMatrix<Complex64> {
    let n = grid.n_points();
    let mut m = DMatrix::zeros(n, n);
    let mut e = SpinorField::zeros(*grid, 1);
    for j in 0..n {
        e.values_mut()[j] = Complex64::new(1.0, 0.0);
        let d = derivative(&e);
        for i in 0..n {
            m[(i, j)] = d.values()[i];
        }
        e.values_mut()[j] = Complex64::new(0.0, 0.0);
    }
    m
}

/// `(||f||_q^q + ||f'||_q^q)^{1/q}`.
pub fn w1q_norm(f: &SpinorField, q: f64) -> Result<f64> {
    check_exponent("q", q)?;
    f.validate()?;
    let df = derivative(f);
    Ok((lp_unchecked(f, q).powf(q) + lp_unchecked(&df, q).powf(q)).powf(1.0 / q))
}

/// Kernel `w_x w_y / |x - y|^{1+2s}` off the diagonal, zero on it.
pub(crate) fn slobodeckij_kernel(grid: &Grid1D, s: f64) -> DMatrix<f64> {
    let n = grid.n_points();
    let w = grid.weights();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            w[i] * w[j] / grid.distance(i, j).powf(1.0 + 2.0 * s)
        }
    })
}

/// Scalar quadratic form of the squared Slobodeckij norm:
/// `W + 2 (diag(K 1) - K)`.
pub fn slobodeckij_form(grid: &Grid1D, s: f64) -> DMatrix<f64> {
    let k = slobodeckij_kernel(grid, s);
    let n = grid.n_points();
    let mut q = k.scale(-2.0);
    for i in 0..n {
        q[(i, i)] = grid.weight(i) + 2.0 * k.row(i).sum();
    }
    q
}

/// `(||f||_{L^2}^2 + sum_{x != y} w_x w_y |f(x) - f(y)|^2 / |x - y|^{1+2s})^{1/2}`,
/// using arc distance on circles.
pub fn slobodeckij_norm(f: &SpinorField, s: f64) -> Result<f64> {
    NormSpec::SlobodeckijHs(s).validate()?;
    f.validate()?;
    let grid = f.grid();
    let n = grid.n_points();
    let r = f.rank();
    let w = grid.weights();
    let mut seminorm = 0.0;
    for i in 0..n {
        let fi = f.at(i);
        for j in (i + 1)..n {
            let fj = f.at(j);
            let diff: f64 = (0..r).map(|c| (fi[c] - fj[c]).norm_sqr()).sum();
            seminorm += w[i] * w[j] * diff / grid.distance(i, j).powf(1.0 + 2.0 * s);
        }
    }
    // each unordered pair appears twice in the double integral
    let l2 = f.l2_norm();
    Ok((l2 * l2 + 2.0 * seminorm).sqrt())
}

/// Pointwise `|f(x)|^{p-2} f(x)`, with value zero wherever `f(x) = 0`.
pub fn nonlinearity(f: &SpinorField, p: f64) -> Result<SpinorField> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::Parameter(format!(
            "nonlinearity exponent p must be >= 2, got {p}"
        )));
    }
    if p == 2.0 {
        return Ok(f.clone());
    }
    Ok(modulus_power(f, p - 2.0))
}

/// Pointwise `|f(x)|^{e} f(x)` for any real `e`, zero where `f(x) = 0`.
pub(crate) fn modulus_power(f: &SpinorField, e: f64) -> SpinorField {
    let r = f.rank();
    let mut out = f.clone();
    let n = f.grid().n_points();
    for j in 0..n {
        let m = f.modulus(j);
        let factor = if m == 0.0 { 0.0 } else { m.powf(e) };
        for z in &mut out.values_mut()[j * r..(j + 1) * r] {
            *z *= factor;
        }
    }
    out
}
