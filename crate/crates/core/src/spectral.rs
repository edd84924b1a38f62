//! Eigendecomposition of `D_P` and the functional calculus built on it:
//! inverse and resolvent, `|D_P|^s`, the positive/negative splitting, graph
//! norms, and empirical regularity constants.
//!
//! Field-level operations project their input onto the constraint space, act
//! on eigen-coefficients, and embed the result back. The `*_coords` variants
//! work directly in constrained coordinates.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::AssembledOperator;
use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::norms::{derivative_matrix, slobodeckij_form};

/// Minimal distance between a shift and the spectrum.
pub const SHIFT_GUARD: f64 = 1e-8;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    lambda1: f64,
    zero_tol: f64,
    invertible: bool,
    operator: Option<AssembledOperator>,
}

/// Decomposes an assembled operator.
pub fn decompose(op: &AssembledOperator) -> Result<SpectralData> {
    let mut data = SpectralData::from_matrix(op.matrix().clone())?;
    data.operator = Some(op.clone());
    Ok(data)
}

impl SpectralData {
    /// Decomposes a bare Hermitian matrix. Field-level operations are not
    /// available on the result.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        let m = matrix.nrows();
        if m == 0 || matrix.ncols() != m {
            return Err(Error::Numerical(format!(
                "expected a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let eig = SymmetricEigen::try_new(matrix.clone(), EIG_EPS, EIG_MAX_ITER).ok_or_else(|| {
            Error::Numerical(format!(
                "Hermitian eigensolver did not converge within {EIG_MAX_ITER} sweeps (dimension {m})"
            ))
        })?;

        let max_abs = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
        let zero_tol = 1e-10 * max_abs.max(1.0);
        let order = modulus_order(eig.eigenvalues.as_slice());
        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = DMatrix::from_fn(m, m, |i, j| eig.eigenvectors[(i, order[j])]);

        for (k, &lam) in eigenvalues.iter().enumerate() {
            let v = eigenvectors.column(k);
            let res = (&matrix * v - v * Complex64::new(lam, 0.0)).norm();
            if res > 1e-9 * lam.abs().max(1.0) {
                return Err(Error::Numerical(format!(
                    "eigenpair {k} (lambda = {lam}) has residual {res:e}"
                )));
            }
        }
        let gram = eigenvectors.adjoint() * &eigenvectors;
        let dev = (gram - DMatrix::<Complex64>::identity(m, m)).camax();
        if dev > 1e-10 {
            return Err(Error::Numerical(format!(
                "eigenvectors deviate from orthonormality by {dev:e}"
            )));
        }

        let lambda1 = eigenvalues[0];
        let invertible = lambda1.abs() > zero_tol;
        Ok(Self {
            eigenvalues,
            eigenvectors,
            lambda1,
            zero_tol,
            invertible,
            operator: None,
        })
    }

    /// Eigenvalues sorted by modulus, positive first on ties.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Coordinate eigenvectors, one per column.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn invertible(&self) -> bool {
        self.invertible
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues treated as zero modes.
    pub fn zero_modes(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|l| self.is_zero(*l))
            .collect()
    }

    fn is_zero(&self, lam: f64) -> bool {
        lam.abs() <= self.zero_tol
    }

    pub fn operator(&self) -> Result<&AssembledOperator> {
        self.operator
            .as_ref()
            .ok_or_else(|| Error::Config("spectral data has no attached operator".into()))
    }

    /// `k`-th eigenfunction as a grid field (unit quadrature norm).
    pub fn eigenfunction(&self, k: usize) -> Result<SpinorField> {
        let col: DVector<Complex64> = self.eigenvectors.column(k).into_owned();
        Ok(self.operator()?.embed(&col))
    }

    /// Eigen-coefficients `<phi_k, f>` of coordinates `c`.
    pub fn coefficients(&self, c: &DVector<Complex64>) -> DVector<Complex64> {
        self.eigenvectors.adjoint() * c
    }

    /// Coordinates from eigen-coefficients.
    pub fn synthesize(&self, y: &DVector<Complex64>) -> DVector<Complex64> {
        &self.eigenvectors * y
    }

    fn map_coefficients(
        &self,
        c: &DVector<Complex64>,
        f: impl Fn(f64) -> Complex64,
    ) -> DVector<Complex64> {
        let mut y = self.coefficients(c);
        for (yk, &lam) in y.iter_mut().zip(&self.eigenvalues) {
            *yk *= f(lam);
        }
        self.synthesize(&y)
    }

    fn lift_map(
        &self,
        f: &SpinorField,
        map: impl Fn(&DVector<Complex64>) -> Result<DVector<Complex64>>,
    ) -> Result<SpinorField> {
        let op = self.operator()?;
        let c = op.project(f)?;
        Ok(op.embed(&map(&c)?))
    }

    /// `(scale * D_P - shift)^{-1}` in coordinates.
    pub fn apply_resolvent_coords(
        &self,
        c: &DVector<Complex64>,
        scale: f64,
        shift: Complex64,
    ) -> Result<DVector<Complex64>> {
        let mut worst: Option<(f64, f64)> = None;
        for &lam in &self.eigenvalues {
            let d = (scale * lam - shift).norm();
            if worst.is_none_or(|(_, w)| d < w) {
                worst = Some((lam, d));
            }
        }
        if let Some((lam, d)) = worst {
            let singular = if shift == Complex64::new(0.0, 0.0) {
                self.is_zero(lam) || d <= SHIFT_GUARD
            } else {
                d <= SHIFT_GUARD
            };
            if singular {
                return Err(Error::NearSingular {
                    shift,
                    eigenvalue: lam,
                    distance: d,
                });
            }
        }
        Ok(self.map_coefficients(c, |lam| (scale * lam - shift).inv()))
    }

    /// `(D_P - a)^{-1}` in coordinates.
    pub fn apply_inverse_coords(
        &self,
        c: &DVector<Complex64>,
        shift: Complex64,
    ) -> Result<DVector<Complex64>> {
        self.apply_resolvent_coords(c, 1.0, shift)
    }

    /// `sum_k (lambda_k - a)^{-1} <phi_k, f> phi_k`.
    pub fn apply_inverse(&self, f: &SpinorField, shift: Complex64) -> Result<SpinorField> {
        self.lift_map(f, |c| self.apply_inverse_coords(c, shift))
    }

    fn check_power(&self, s: f64) -> Result<()> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::Parameter(format!("s must lie in (0, 1], got {s}")));
        }
        if s < 1.0 && !self.invertible {
            return Err(Error::SingularPower { s });
        }
        Ok(())
    }

    /// `|D_P|^s` in coordinates.
    pub fn apply_fractional_coords(
        &self,
        s: f64,
        c: &DVector<Complex64>,
    ) -> Result<DVector<Complex64>> {
        self.check_power(s)?;
        Ok(self.map_coefficients(c, |lam| Complex64::new(lam.abs().powf(s), 0.0)))
    }

    /// `sum_k |lambda_k|^s <phi_k, f> phi_k`.
    pub fn apply_fractional(&self, s: f64, f: &SpinorField) -> Result<SpinorField> {
        self.lift_map(f, |c| self.apply_fractional_coords(s, c))
    }

    /// Orthogonal projections onto positive and negative spectral subspaces.
    pub fn split_pm_coords(
        &self,
        c: &DVector<Complex64>,
    ) -> Result<(DVector<Complex64>, DVector<Complex64>)> {
        if let Some(&lam) = self.eigenvalues.iter().find(|l| self.is_zero(**l)) {
            return Err(Error::UndefinedSplitting { eigenvalue: lam });
        }
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let plus = self.map_coefficients(c, |l| if l > 0.0 { one } else { zero });
        let minus = self.map_coefficients(c, |l| if l < 0.0 { one } else { zero });
        Ok((plus, minus))
    }

    pub fn split_pm(&self, f: &SpinorField) -> Result<(SpinorField, SpinorField)> {
        let op = self.operator()?;
        let (p, m) = self.split_pm_coords(&op.project(f)?)?;
        Ok((op.embed(&p), op.embed(&m)))
    }

    /// `(sum_k |y_k|^2 (1 + |lambda_k|^{2s}))^{1/2}` in coordinates.
    pub fn graph_norm_coords(&self, s: f64, c: &DVector<Complex64>) -> Result<f64> {
        self.check_power(s)?;
        Ok(self.graph_norm_unchecked(s, c))
    }

    /// Graph norm that treats `0^s` as `0` even when zero modes are present.
    pub(crate) fn graph_norm_unchecked(&self, s: f64, c: &DVector<Complex64>) -> f64 {
        self.coefficients(c)
            .iter()
            .zip(&self.eigenvalues)
            .map(|(y, &lam)| {
                let w = if self.is_zero(lam) {
                    0.0
                } else {
                    lam.abs().powf(2.0 * s)
                };
                y.norm_sqr() * (1.0 + w)
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn graph_norm(&self, s: f64, f: &SpinorField) -> Result<f64> {
        let c = self.operator()?.project(f)?;
        self.graph_norm_coords(s, &c)
    }
}

/// Sort permutation by increasing modulus; eigenvalues of equal modulus (to
/// relative precision) are grouped and the positive ones come first.
fn modulus_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .abs()
            .total_cmp(&values[b].abs())
            .then(values[b].total_cmp(&values[a]))
    });
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale;
    let mut start = 0;
    while start < idx.len() {
        let base = values[idx[start]].abs();
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]].abs() - base <= tol {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        start = end;
    }
    idx
}

/// Empirical regularity constants of `D_P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstants {
    /// `max ||psi||_{W^{1,2}}^2 / (||psi||^2 + ||D_P psi||^2)`.
    pub c1_emp: f64,
    /// `max ||psi||_{H^{1/2}}^2 / ||psi||_{H^{1/2}_D}^2` (Slobodeckij numerator).
    pub c_half_emp: f64,
    /// `2 c1 c_h^2 iota^2`.
    pub c_half_formula: f64,
}

/// [`estimate_constants_with`] for `c_h = iota = 1`.
pub fn estimate_constants(spec: &SpectralData) -> Result<EmpiricalConstants> {
    estimate_constants_with(spec, 1.0, 1.0)
}

/// Both constants are the largest eigenvalue of a generalized Hermitian
/// problem `A y = mu B y`, where `B` is the diagonal graph-norm form in the
/// eigenbasis.
pub fn estimate_constants_with(
    spec: &SpectralData,
    c_h: f64,
    iota: f64,
) -> Result<EmpiricalConstants> {
    let op = spec.operator()?;
    let map = op.constraint_map();
    let grid = op.spec().grid;
    let r = op.spec().rank();
    let v = spec.eigenvectors();

    // W^{1,2}: ||psi||^2 is the identity in orthonormal coordinates
    let g = derivative_matrix(&grid);
    let n = grid.n_points();
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let mut ge = DMatrix::<Complex64>::zeros(n * r, map.dim());
    for (a, col) in map.columns().iter().enumerate() {
        for &(idx, coef) in col {
            let (node, comp) = (idx / r, idx % r);
            for i in 0..n {
                ge[(i * r + comp, a)] += g[(i, node)] * (coef * sqrt_w[i]);
            }
        }
    }
    let m = spec.dim();
    let a1 = DMatrix::<Complex64>::identity(m, m) + ge.adjoint() * ge;
    let denom1: Vec<f64> = spec.eigenvalues().iter().map(|l| 1.0 + l * l).collect();
    let c1_emp = max_generalized(&(v.adjoint() * a1 * v), &denom1)?;

    let q = slobodeckij_form(&grid, 0.5).map(|x| Complex64::new(x, 0.0));
    let a_half = map.compress_nodal(&q);
    let denom_half: Vec<f64> = spec.eigenvalues().iter().map(|l| 1.0 + l.abs()).collect();
    let c_half_emp = max_generalized(&(v.adjoint() * a_half * v), &denom_half)?;

    Ok(EmpiricalConstants {
        c1_emp,
        c_half_emp,
        c_half_formula: 2.0 * c1_emp * c_h * c_h * iota * iota,
    })
}

fn max_generalized(a: &DMatrix<Complex64>, diag: &[f64]) -> Result<f64> {
    if let Some(d) = diag.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::DegenerateForm(format!(
            "denominator form has non-positive entry {d}"
        )));
    }
    let scale: Vec<f64> = diag.iter().map(|d| d.sqrt().recip()).collect();
    let s = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * scale[i] * scale[j]);
    let s = (&s + s.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(s, EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Numerical("generalized eigenproblem did not converge".into()))?;
    Ok(eig.eigenvalues.max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, ModelSpec};
    use crate::norms::{slobodeckij_norm, w1q_norm};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag(a: f64, b: f64) -> SpectralData {
        SpectralData::from_matrix(DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(a, 0.0),
            c(b, 0.0),
        ])))
        .unwrap()
    }

    fn antiperiodic(n: usize) -> SpectralData {
        decompose(&assemble(&ModelSpec::antiperiodic(1.0, n).unwrap()).unwrap()).unwrap()
    }

    fn pseudo_random(m: usize, seed: u64) -> DVector<Complex64> {
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        DVector::from_fn(m, |_, _| c(next(), next()))
    }

    #[test]
    fn diagonal_ordering_and_inverse() {
        let d = diag(-1.0, 2.0);
        assert_eq!(d.eigenvalues(), &[-1.0, 2.0]);
        assert_eq!(d.lambda1(), -1.0);
        assert!(d.invertible());
        let f = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let x = d.apply_inverse_coords(&f, c(0.0, 0.0)).unwrap();
        assert!((x[0] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(0.5, 0.0)).norm() < 1e-15);
        let (p, m) = d.split_pm_coords(&f).unwrap();
        assert!((p - DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)])).norm() < 1e-15);
        assert!((m - DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).norm() < 1e-15);
    }

    #[test]
    fn tie_prefers_positive() {
        let d = diag(-2.0, 2.0);
        assert_eq!(d.lambda1(), 2.0);
        assert_eq!(
            modulus_order(&[3.0, -1.0, 1.0, -3.0, 0.5]),
            vec![4, 2, 1, 0, 3]
        );
    }

    #[test]
    fn near_singular_shift_names_the_eigenvalue() {
        let d = diag(-1.0, 2.0);
        let f = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        match d.apply_inverse_coords(&f, c(2.0 + 1e-10, 0.0)) {
            Err(Error::NearSingular { eigenvalue, .. }) => assert_eq!(eigenvalue, 2.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(d.apply_inverse_coords(&f, c(2.0, 1e-3)).is_ok());
    }

    #[test]
    fn antiperiodic_spectrum() {
        let s = antiperiodic(256);
        assert!(s.invertible());
        assert!((s.lambda1() - PI).abs() < 1e-6 * PI);
        let moduli: Vec<f64> = s.eigenvalues().iter().map(|l| l.abs()).collect();
        assert!((moduli[2] - 3.0 * PI).abs() < 1e-6 * 3.0 * PI);
        assert!((moduli[4] - 5.0 * PI).abs() < 1e-6 * 5.0 * PI);
        assert!(moduli.iter().all(|&m| m > 0.5 * PI));
    }

    #[test]
    fn periodic_kernel_is_detected() {
        let op = assemble(&ModelSpec::periodic(2.0 * PI, 64).unwrap()).unwrap();
        let s = decompose(&op).unwrap();
        assert!(!s.invertible());
        assert_eq!(s.zero_modes().len(), 1);
        let one = SpinorField::constant(op.spec().grid, &[c(1.0, 0.0)]);
        let d1 = op.apply_d(&one).unwrap();
        assert!(d1.l2_norm() < 1e-12);
        assert!(matches!(
            s.apply_fractional(0.5, &one),
            Err(Error::SingularPower { .. })
        ));
        assert!(matches!(
            s.split_pm(&one),
            Err(Error::UndefinedSplitting { .. })
        ));
        assert!(matches!(
            s.apply_inverse(&one, c(0.0, 0.0)),
            Err(Error::NearSingular { .. })
        ));
        assert!(s.apply_fractional(1.0, &one).is_ok());
    }

    #[test]
    fn single_mode_calculus() {
        let s = antiperiodic(256);
        let grid = s.operator().unwrap().spec().grid;
        let e = SpinorField::scalar(grid, |x| Complex64::from_polar(1.0, PI * x));
        let inv = s.apply_inverse(&e, c(0.0, 0.0)).unwrap();
        let half = s.apply_fractional(0.5, &e).unwrap();
        for j in 0..grid.n_points() {
            assert!((inv.values()[j] - e.values()[j] / PI).norm() < 1e-10);
            assert!((half.values()[j] - e.values()[j] * PI.sqrt()).norm() < 1e-10);
        }
        let (p, m) = s.split_pm(&e).unwrap();
        assert!(p.sub_field(&e).unwrap().l2_norm() < 1e-10);
        assert!(m.l2_norm() < 1e-10);
    }

    #[test]
    fn calculus_identities_on_random_coordinates() {
        let s = antiperiodic(128);
        let op = s.operator().unwrap();
        for seed in 0..10 {
            let cvec = pseudo_random(s.dim(), seed);
            let f = op.embed(&cvec);
            let half = s
                .apply_fractional(0.5, &s.apply_fractional(0.5, &f).unwrap())
                .unwrap();
            let full = s.apply_fractional(1.0, &f).unwrap();
            assert!(half.sub_field(&full).unwrap().l2_norm() <= 1e-10 * full.l2_norm());

            let df = op.embed(&op.apply_coords(&cvec));
            let back = s.apply_inverse(&df, c(0.0, 0.0)).unwrap();
            assert!(back.sub_field(&f).unwrap().l2_norm() <= 1e-9 * f.l2_norm());

            let (p, m) = s.split_pm(&f).unwrap();
            let lhs = f.l2_norm().powi(2);
            let rhs = p.l2_norm().powi(2) + m.l2_norm().powi(2);
            assert!((lhs - rhs).abs() <= 1e-10 * lhs);

            // |D_P| f = D_P f+ - D_P f-
            let dp = op.embed(&op.apply_coords(&op.project(&p).unwrap()));
            let dm = op.embed(&op.apply_coords(&op.project(&m).unwrap()));
            let signed = dp.sub_field(&dm).unwrap();
            assert!(signed.sub_field(&full).unwrap().l2_norm() <= 1e-9 * full.l2_norm());

            let g = s.graph_norm(0.5, &f).unwrap().powi(2);
            let parseval =
                f.l2_norm().powi(2) + s.apply_fractional(0.5, &f).unwrap().l2_norm().powi(2);
            assert!((g - parseval).abs() <= 1e-10 * g);

            let inv_norm = s.apply_inverse(&f, c(0.0, 0.0)).unwrap().l2_norm();
            assert!(inv_norm <= f.l2_norm() / s.lambda1().abs() + 1e-10);

            // commutation with the splitting
            let fp = s.apply_fractional(0.5, &p).unwrap();
            let (pf, _) = s.split_pm(&s.apply_fractional(0.5, &f).unwrap()).unwrap();
            assert!(fp.sub_field(&pf).unwrap().l2_norm() <= 1e-10 * pf.l2_norm().max(1.0));

            let recon = s.synthesize(&s.coefficients(&cvec));
            assert!((recon - &cvec).norm() <= 1e-10 * cvec.norm());
        }
    }

    #[test]
    fn constants_dominate_eigenfunction_quotients() {
        let s = antiperiodic(64);
        let k = estimate_constants(&s).unwrap();
        for idx in 0..s.dim() {
            let phi = s.eigenfunction(idx).unwrap();
            let lam = s.eigenvalues()[idx];
            let q1 = w1q_norm(&phi, 2.0).unwrap().powi(2) / (1.0 + lam * lam);
            assert!(k.c1_emp >= q1 * (1.0 - 1e-12), "{} < {q1}", k.c1_emp);
            let qh = slobodeckij_norm(&phi, 0.5).unwrap().powi(2) / (1.0 + lam.abs());
            assert!(
                k.c_half_emp >= qh * (1.0 - 1e-12),
                "{} < {qh}",
                k.c_half_emp
            );
        }
        assert!((k.c_half_formula - 2.0 * k.c1_emp).abs() < 1e-15);
    }

    #[test]
    fn constants_for_bag_model() {
        let op = assemble(&ModelSpec::bag(1.0, 48).unwrap()).unwrap();
        let s = decompose(&op).unwrap();
        assert!((s.lambda1() - 0.5 * PI).abs() < 1e-9);
        let k = estimate_constants_with(&s, 1.0, 2.0).unwrap();
        assert!(k.c1_emp > 0.0 && k.c_half_emp > 0.0);
        assert!((k.c_half_formula - 8.0 * k.c1_emp).abs() < 1e-12 * k.c1_emp);
    }
}
