//! The scale-invariant functional
//! `F(phi) = (int |D phi|^q)^{(n+1)/n} / |int Re <D phi, phi>|`, `q = 2n/(n+1)`,
//! and the transformation `Psi = |D phi|^{q-2} D phi` linking its
//! Euler-Lagrange equation to `D Psi = mu |Psi|^{p-2} Psi`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::norms::{lp_norm, modulus_power, nonlinearity};
use crate::spectral::SpectralData;

/// Denominators below this are rejected.
pub const PAIRING_FLOOR: f64 = 1e-12;

/// `2n/(n+1)`.
pub fn dual_exponent(n: u32) -> f64 {
    let n = n as f64;
    2.0 * n / (n + 1.0)
}

/// `D_P phi` for `phi` projected onto the constraint space.
fn d_constrained(spec: &SpectralData, phi: &SpinorField) -> Result<SpinorField> {
    let op = spec.operator()?;
    let c = op.project(phi)?;
    Ok(op.embed(&op.apply_coords(&c)))
}

pub fn variational_functional(spec: &SpectralData, phi: &SpinorField, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Parameter(format!("n must be >= 2, got {n}")));
    }
    phi.validate()?;
    let q = dual_exponent(n);
    let dphi = d_constrained(spec, phi)?;
    let pairing = dphi.inner(phi)?.re.abs();
    if pairing < PAIRING_FLOOR {
        return Err(Error::DegeneratePairing(pairing));
    }
    let nf = n as f64;
    Ok(lp_norm(&dphi, q)?.powf(q * (nf + 1.0) / nf) / pairing)
}

/// `|D phi|^{q-2} D phi`, zero where `D phi` vanishes.
pub fn el_transform(spec: &SpectralData, phi: &SpinorField, q: f64) -> Result<SpinorField> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::Parameter(format!("q must exceed 1, got {q}")));
    }
    phi.validate()?;
    let dphi = d_constrained(spec, phi)?;
    Ok(modulus_power(&dphi, q - 2.0))
}

/// `|| D(|D phi|^{q-2} D phi) - mu D phi ||_{L^2}`.
pub fn el_q_residual(spec: &SpectralData, phi: &SpinorField, q: f64, mu: f64) -> Result<f64> {
    let op = spec.operator()?;
    let psi = el_transform(spec, phi, q)?;
    let dpsi = op.apply_d(&psi)?;
    let dphi = d_constrained(spec, phi)?;
    Ok(dpsi.axpy(Complex64::new(-mu, 0.0), &dphi)?.l2_norm())
}

/// `|| D Psi - mu |Psi|^{p-2} Psi ||_{L^2}`.
pub fn el_p_residual(spec: &SpectralData, psi: &SpinorField, p: f64, mu: f64) -> Result<f64> {
    let op = spec.operator()?;
    let dpsi = op.apply_d(psi)?;
    let nl = nonlinearity(psi, p)?;
    Ok(dpsi.axpy(Complex64::new(-mu, 0.0), &nl)?.l2_norm())
}

/// Preimage `phi = D_P^{-1}(|Psi|^{p-2} Psi)`; its transform returns `Psi`
/// when `q` is the conjugate exponent of `p`.
pub fn el_preimage(spec: &SpectralData, psi: &SpinorField, p: f64) -> Result<SpinorField> {
    let nl = nonlinearity(psi, p)?;
    spec.apply_inverse(&nl, Complex64::new(0.0, 0.0))
}
