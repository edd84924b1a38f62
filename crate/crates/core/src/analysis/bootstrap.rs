//! Reciprocal Lebesgue exponents of the regularity bootstrap.
//!
//! Starting from `1/l0`, each round applies `r -> (p - 1) r - 1/n` until the
//! value turns negative; a zero value (`l = inf`) takes one more round. The
//! affine recursion has the closed form `(p - 1)^M (1/l0 - c) + c` with
//! `c = 1/(n (p - 2))`.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_STEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapTrace {
    pub n: u32,
    pub p: f64,
    pub l0: f64,
    /// `1/l^{(M)}` for `M = 0, 1, ...`.
    pub reciprocals: Vec<f64>,
    pub closed_form: Vec<f64>,
    /// First index with a negative reciprocal.
    pub m_star: Option<usize>,
    /// Largest `|recursion - closed form| / max(1, |closed form|)`.
    pub max_deviation: f64,
}

/// Fixed point `1/(n (p - 2))` of the recursion.
pub fn fixed_point(n: u32, p: f64) -> f64 {
    1.0 / (n as f64 * (p - 2.0))
}

/// Upper end `(2n - 2)/(n - 2)` of the admissible exponent range.
pub fn max_exponent(n: u32) -> f64 {
    let n = n as f64;
    (2.0 * n - 2.0) / (n - 2.0)
}

pub fn closed_form(n: u32, p: f64, l0: f64, m: usize) -> f64 {
    let c = fixed_point(n, p);
    (p - 1.0).powi(m as i32) * (1.0 / l0 - c) + c
}

pub fn bootstrap_exponents(n: u32, p: f64, l0: f64) -> Result<BootstrapTrace> {
    if n < 3 {
        return Err(Error::Parameter(format!("n must be >= 3, got {n}")));
    }
    if !(p > 2.0) {
        return Err(Error::Parameter(format!("p must exceed 2, got {p}")));
    }
    if !(p < max_exponent(n)) {
        return Err(Error::Parameter(format!(
            "p = {p} must lie below (2n-2)/(n-2) = {}",
            max_exponent(n)
        )));
    }
    if !(l0 > 0.0 && l0.is_finite()) {
        return Err(Error::Parameter(format!("l0 must be positive, got {l0}")));
    }
    let inv_n = 1.0 / n as f64;
    let mut reciprocals = vec![1.0 / l0];
    let mut m_star = None;
    while reciprocals.len() <= MAX_STEPS {
        let last = *reciprocals.last().expect("non-empty");
        if last < 0.0 {
            m_star = Some(reciprocals.len() - 1);
            break;
        }
        reciprocals.push((p - 1.0) * last - inv_n);
    }
    if m_star.is_none() && reciprocals.last().is_some_and(|&r| r < 0.0) {
        m_star = Some(reciprocals.len() - 1);
    }
    let closed: Vec<f64> = (0..reciprocals.len())
        .map(|m| closed_form(n, p, l0, m))
        .collect();
    let max_deviation = reciprocals
        .iter()
        .zip(&closed)
        .map(|(r, c)| (r - c).abs() / c.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(BootstrapTrace {
        n,
        p,
        l0,
        reciprocals,
        closed_form: closed,
        m_star,
        max_deviation,
    })
}
