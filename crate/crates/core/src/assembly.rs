//! Model operators `D` with boundary operator `P`, and their compression
//! `D_P` to the discrete kernel of `P`.
//!
//! Three models are available:
//!
//! * `periodic`: `D = -i d/dx` on a circle (no boundary; `D_P` has a kernel).
//! * `antiperiodic`: `D = -i d/dx` on `[0, L]` with `P u = u(L) + u(0)`.
//! * `bag1d`: `D = -i sigma_1 d/dx` on `[0, L]` acting on 2-spinors with
//!   rank-one projectors `P_0 = (1 - sigma_3)/2` at `x = 0` and
//!   `P_L = (1 + sigma_3)/2` at `x = L`.
//!
//! Constrained coordinates are orthonormal in the quadrature inner product.
//! Every model's discrete kernel of `P` is spanned by exact eigenfunctions of
//! `D_P` (Fourier, half-integer Fourier, cosine/sine), and the operator matrix
//! is assembled from that basis and then symmetrized.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::grid::{Grid1D, Topology};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `-i d/dx` on scalar fields.
    ScalarDerivative,
    /// `-i sigma_1 d/dx` on 2-spinors.
    Dirac2Spinor,
}

impl OperatorKind {
    pub fn rank(&self) -> usize {
        match self {
            OperatorKind::ScalarDerivative => 1,
            OperatorKind::Dirac2Spinor => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Antiperiodic,
    Bag1d,
    Periodic,
}

impl BoundaryCondition {
    /// Endpoint projectors `(P_0, P_L)` of the bag condition.
    pub fn bag_projectors() -> (Matrix2<Complex64>, Matrix2<Complex64>) {
        let one = Complex64::new(1.0, 0.0);
        let p0 = Matrix2::new(ZERO, ZERO, ZERO, one);
        let pl = Matrix2::new(one, ZERO, ZERO, ZERO);
        (p0, pl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub grid: Grid1D,
    pub operator: OperatorKind,
    pub bc: BoundaryCondition,
}

impl ModelSpec {
    pub fn new(grid: Grid1D, operator: OperatorKind, bc: BoundaryCondition) -> Result<Self> {
        let spec = Self { grid, operator, bc };
        spec.validate()?;
        Ok(spec)
    }

    /// `-i d/dx` on `[0, length]` with `u(L) = -u(0)`.
    pub fn antiperiodic(length: f64, n_points: usize) -> Result<Self> {
        Self::new(
            Grid1D::interval(length, n_points)?,
            OperatorKind::ScalarDerivative,
            BoundaryCondition::Antiperiodic,
        )
    }

    /// `-i d/dx` on the circle of circumference `length`.
    pub fn periodic(length: f64, n_points: usize) -> Result<Self> {
        Self::new(
            Grid1D::circle(length, n_points)?,
            OperatorKind::ScalarDerivative,
            BoundaryCondition::Periodic,
        )
    }

    /// `-i sigma_1 d/dx` on `[0, length]` with the bag projectors.
    pub fn bag(length: f64, n_points: usize) -> Result<Self> {
        Self::new(
            Grid1D::interval(length, n_points)?,
            OperatorKind::Dirac2Spinor,
            BoundaryCondition::Bag1d,
        )
    }

    pub fn rank(&self) -> usize {
        self.operator.rank()
    }

    pub fn validate(&self) -> Result<()> {
        use BoundaryCondition::*;
        use OperatorKind::*;
        let ok = matches!(
            (self.operator, self.bc, self.grid.topology()),
            (ScalarDerivative, Antiperiodic, Topology::Interval)
                | (ScalarDerivative, Periodic, Topology::Circle)
                | (Dirac2Spinor, Bag1d, Topology::Interval)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "incompatible model: {:?} with {:?} boundary on a {:?} grid",
                self.operator,
                self.bc,
                self.grid.topology()
            )))
        }
    }

    fn check_field(&self, f: &SpinorField) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::Mismatch(format!(
                "field grid {:?} does not match model grid {:?}",
                f.grid(),
                self.grid
            )));
        }
        if f.rank() != self.rank() {
            return Err(Error::Mismatch(format!(
                "field rank {} does not match operator rank {}",
                f.rank(),
                self.rank()
            )));
        }
        Ok(())
    }

    /// Constant field carrying the boundary data of `f`; `f - lift(f)`
    /// satisfies the homogeneous boundary condition.
    pub fn lift(&self, f: &SpinorField) -> Result<SpinorField> {
        self.check_field(f)?;
        let n = self.grid.n_points();
        Ok(match self.bc {
            BoundaryCondition::Periodic => SpinorField::zeros(self.grid, 1),
            BoundaryCondition::Antiperiodic => {
                let b = 0.5 * (f.at(0)[0] + f.at(n - 1)[0]);
                SpinorField::constant(self.grid, &[b])
            }
            BoundaryCondition::Bag1d => {
                SpinorField::constant(self.grid, &[f.at(n - 1)[0], f.at(0)[1]])
            }
        })
    }

    /// Size of `P(u - g)` at the boundary; zero when `P u = P g`.
    pub fn boundary_residual(&self, u: &SpinorField, g: &SpinorField) -> Result<f64> {
        self.check_field(u)?;
        self.check_field(g)?;
        let d = u.sub_field(g)?;
        let n = self.grid.n_points();
        Ok(match self.bc {
            BoundaryCondition::Periodic => 0.0,
            BoundaryCondition::Antiperiodic => (d.at(n - 1)[0] + d.at(0)[0]).norm(),
            BoundaryCondition::Bag1d => {
                let (p0, pl) = BoundaryCondition::bag_projectors();
                let left = p0 * nalgebra::Vector2::new(d.at(0)[0], d.at(0)[1]);
                let right = pl * nalgebra::Vector2::new(d.at(n - 1)[0], d.at(n - 1)[1]);
                left.norm() + right.norm()
            }
        })
    }
}

/// Linear embedding of constrained coordinates into grid fields.
///
/// Coordinate `a` maps to a handful of `(flat index, coefficient)` entries,
/// where the flat index is `node * rank + component`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMap {
    grid: Grid1D,
    rank: usize,
    columns: Vec<Vec<(usize, f64)>>,
}

impl ConstraintMap {
    fn new(spec: &ModelSpec) -> Self {
        let grid = spec.grid;
        let n = grid.n_points();
        let inv_sqrt_w = |j: usize| 1.0 / grid.weight(j).sqrt();
        let columns = match spec.bc {
            BoundaryCondition::Periodic => (0..n).map(|j| vec![(j, inv_sqrt_w(j))]).collect(),
            BoundaryCondition::Antiperiodic => {
                let h = grid.spacing();
                let s = 1.0 / h.sqrt();
                let mut cols = vec![vec![(0, s), (n - 1, -s)]];
                cols.extend((1..n - 1).map(|j| vec![(j, inv_sqrt_w(j))]));
                cols
            }
            BoundaryCondition::Bag1d => {
                // upper component free except at x = L, lower except at x = 0
                let mut cols: Vec<Vec<(usize, f64)>> =
                    (0..n - 1).map(|j| vec![(2 * j, inv_sqrt_w(j))]).collect();
                cols.extend((1..n).map(|j| vec![(2 * j + 1, inv_sqrt_w(j))]));
                cols
            }
        };
        Self {
            grid,
            rank: spec.rank(),
            columns,
        }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<(usize, f64)>] {
        &self.columns
    }

    pub fn embed(&self, coords: &DVector<Complex64>) -> SpinorField {
        assert_eq!(coords.len(), self.dim(), "coordinate length mismatch");
        let mut f = SpinorField::zeros(self.grid, self.rank);
        let vals = f.values_mut();
        for (col, &c) in self.columns.iter().zip(coords.iter()) {
            for &(idx, coef) in col {
                vals[idx] += coef * c;
            }
        }
        f
    }

    /// `E^* W f`: the quadrature-orthogonal projection onto the constraint
    /// space, expressed in coordinates.
    pub fn project(&self, f: &SpinorField) -> DVector<Complex64> {
        let vals = f.values();
        DVector::from_iterator(
            self.dim(),
            self.columns.iter().map(|col| {
                col.iter()
                    .map(|&(idx, coef)| coef * self.grid.weight(idx / self.rank) * vals[idx])
                    .sum::<Complex64>()
            }),
        )
    }

    /// Dense `(N r) x m` matrix of the embedding.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut e = DMatrix::zeros(self.grid.n_points() * self.rank, self.dim());
        for (a, col) in self.columns.iter().enumerate() {
            for &(idx, coef) in col {
                e[(idx, a)] = Complex64::new(coef, 0.0);
            }
        }
        e
    }

    /// `E^* (B (x) I_r) E` for a scalar nodal matrix `B`.
    pub fn compress_nodal(&self, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let m = self.dim();
        let r = self.rank;
        let mut out = DMatrix::zeros(m, m);
        for (a, ca) in self.columns.iter().enumerate() {
            for (bi, cb) in self.columns.iter().enumerate() {
                let mut acc = ZERO;
                for &(ia, ea) in ca {
                    for &(ib, eb) in cb {
                        if ia % r == ib % r {
                            acc += ea * eb * b[(ia / r, ib / r)];
                        }
                    }
                }
                out[(a, bi)] = acc;
            }
        }
        out
    }
}

/// Hermitian matrix of `D_P` on constrained coordinates.
#[derive(Debug, Clone)]
pub struct AssembledOperator {
    spec: ModelSpec,
    matrix: DMatrix<Complex64>,
    constraint: ConstraintMap,
}

/// Builds `D_P` for a model.
pub fn assemble(spec: &ModelSpec) -> Result<AssembledOperator> {
    spec.validate()?;
    let constraint = ConstraintMap::new(spec);
    let raw = match spec.bc {
        BoundaryCondition::Periodic => periodic_matrix(&spec.grid),
        BoundaryCondition::Antiperiodic => antiperiodic_matrix(&spec.grid),
        BoundaryCondition::Bag1d => bag_matrix(&spec.grid),
    };
    let matrix = (&raw + raw.adjoint()).scale(0.5);
    Ok(AssembledOperator {
        spec: *spec,
        matrix,
        constraint,
    })
}

/// Toeplitz-type matrix `M_ab = (1/m) sum_k mu_k e^{i theta_k (a - b)}`.
fn fourier_matrix(m: usize, modes: &[(f64, f64)]) -> DMatrix<Complex64> {
    // modes: (phase per index step, eigenvalue)
    let table: Vec<Complex64> = (0..2 * m - 1)
        .map(|t| {
            let d = t as f64 - (m as f64 - 1.0);
            modes
                .iter()
                .map(|&(theta, mu)| mu * Complex64::from_polar(1.0, theta * d))
                .sum::<Complex64>()
                / m as f64
        })
        .collect();
    DMatrix::from_fn(m, m, |a, b| table[a + m - 1 - b])
}

fn periodic_matrix(grid: &Grid1D) -> DMatrix<Complex64> {
    let n = grid.n_points();
    let lo = -((n as i64 - 1) / 2);
    let modes: Vec<(f64, f64)> = (lo..lo + n as i64)
        .map(|k| {
            (
                2.0 * PI * k as f64 / n as f64,
                2.0 * PI * k as f64 / grid.length(),
            )
        })
        .collect();
    fourier_matrix(n, &modes)
}

fn antiperiodic_matrix(grid: &Grid1D) -> DMatrix<Complex64> {
    let m = grid.n_points() - 1;
    // odd wavenumbers o with o * pi / L; m of them, symmetric when m is even
    let o_min = if m.is_multiple_of(2) {
        -(m as i64 - 1)
    } else {
        -(m as i64 - 2)
    };
    let modes: Vec<(f64, f64)> = (0..m as i64)
        .map(|k| {
            let o = (o_min + 2 * k) as f64;
            (PI * o / m as f64, PI * o / grid.length())
        })
        .collect();
    fourier_matrix(m, &modes)
}

fn bag_matrix(grid: &Grid1D) -> DMatrix<Complex64> {
    let m = grid.n_points() - 1;
    let l = grid.length();
    let w = grid.weights();
    // S(t) = sum_k mu_k sin(theta_k t), theta_k = (k + 1/2) pi / m, t in [-m, 2m]
    let s_table: Vec<f64> = (0..=3 * m)
        .map(|idx| {
            let t = idx as f64 - m as f64;
            (0..m)
                .map(|k| {
                    let kh = k as f64 + 0.5;
                    (kh * PI / l) * (kh * PI * t / m as f64).sin()
                })
                .sum()
        })
        .collect();
    let s = |t: i64| s_table[(t + m as i64) as usize];
    let mut mat = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        // upper component at node i
        for j in 1..=m {
            // lower component at node j
            let (ii, jj) = (i as i64, j as i64);
            let val = (w[i] * w[j]).sqrt() / l * (s(ii + jj) - s(ii - jj));
            let entry = Complex64::new(0.0, -val);
            mat[(i, m + j - 1)] = entry;
            mat[(m + j - 1, i)] = entry.conj();
        }
    }
    mat
}

impl AssembledOperator {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn constraint_map(&self) -> &ConstraintMap {
        &self.constraint
    }

    pub fn dim(&self) -> usize {
        self.constraint.dim()
    }

    /// `max |M - M^*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    pub fn embed(&self, coords: &DVector<Complex64>) -> SpinorField {
        self.constraint.embed(coords)
    }

    pub fn project(&self, f: &SpinorField) -> Result<DVector<Complex64>> {
        self.spec.check_field(f)?;
        Ok(self.constraint.project(f))
    }

    /// Matrix action on coordinates.
    pub fn apply_coords(&self, coords: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * coords
    }

    /// Applies the differential operator to an arbitrary field: the boundary
    /// lift is constant (derivative zero) and the remainder is differentiated
    /// in the constrained basis.
    pub fn apply_d(&self, f: &SpinorField) -> Result<SpinorField> {
        let homogeneous = f.sub_field(&self.spec.lift(f)?)?;
        let c = self.constraint.project(&homogeneous);
        Ok(self.constraint.embed(&(&self.matrix * c)))
    }

    /// Writes the matrix row-major as little-endian `(re, im)` f64 pairs.
    pub fn write_dense_dump<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                let z = self.matrix[(i, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Applies the model's differential operator without boundary condition.
pub fn apply_d(spec: &ModelSpec, f: &SpinorField) -> Result<SpinorField> {
    assemble(spec)?.apply_d(f)
}

/// See [`ModelSpec::boundary_residual`].
pub fn boundary_residual(spec: &ModelSpec, u: &SpinorField, g: &SpinorField) -> Result<f64> {
    spec.boundary_residual(u, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_eigs(op: &AssembledOperator) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(op.matrix().clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn incompatible_specs_are_rejected() {
        let g = Grid1D::interval(1.0, 16).unwrap();
        assert!(ModelSpec::new(
            g,
            OperatorKind::Dirac2Spinor,
            BoundaryCondition::Antiperiodic
        )
        .is_err());
        assert!(ModelSpec::new(
            g,
            OperatorKind::ScalarDerivative,
            BoundaryCondition::Periodic
        )
        .is_err());
        let circ = Grid1D::circle(1.0, 16).unwrap();
        assert!(ModelSpec::new(
            circ,
            OperatorKind::ScalarDerivative,
            BoundaryCondition::Antiperiodic
        )
        .is_err());
        assert!(matches!(
            ModelSpec::antiperiodic(1.0, 4),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn bag_projectors_are_rank_one_hermitian_idempotents() {
        let (p0, pl) = BoundaryCondition::bag_projectors();
        for p in [p0, pl] {
            assert!((p * p - p).camax() < 1e-15);
            assert!((p.adjoint() - p).camax() < 1e-15);
            let trace = p[(0, 0)] + p[(1, 1)];
            assert!((trace - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constraint_columns_are_orthonormal() {
        for spec in [
            ModelSpec::antiperiodic(1.0, 20).unwrap(),
            ModelSpec::periodic(2.0, 17).unwrap(),
            ModelSpec::bag(1.5, 19).unwrap(),
        ] {
            let op = assemble(&spec).unwrap();
            let e = op.constraint_map().to_dense();
            let w: Vec<f64> = spec
                .grid
                .weights()
                .iter()
                .flat_map(|&w| std::iter::repeat_n(w, spec.rank()))
                .collect();
            let wm = DMatrix::from_diagonal(&DVector::from_iterator(
                w.len(),
                w.iter().map(|&x| c(x, 0.0)),
            ));
            let gram = e.adjoint() * wm * &e;
            let id = DMatrix::<Complex64>::identity(op.dim(), op.dim());
            assert!((gram - id).camax() < 1e-12);
        }
    }

    #[test]
    fn periodic_spectrum_is_the_integers() {
        let op = assemble(&ModelSpec::periodic(2.0 * PI, 64).unwrap()).unwrap();
        let eigs = sorted_eigs(&op);
        for (i, e) in eigs.iter().enumerate() {
            let k = i as f64 - 31.0;
            assert!((e - k).abs() < 1e-10, "{e} vs {k}");
        }
    }

    #[test]
    fn antiperiodic_spectrum_is_odd_multiples_of_pi() {
        let op = assemble(&ModelSpec::antiperiodic(1.0, 64).unwrap()).unwrap();
        assert!(op.hermiticity_defect() <= 1e-12 * op.matrix().norm());
        let min = sorted_eigs(&op)
            .iter()
            .map(|e| e.abs())
            .fold(f64::INFINITY, f64::min);
        assert!((min - PI).abs() < 1e-10);
    }

    #[test]
    fn bag_spectrum_is_half_integer_multiples_of_pi() {
        let op = assemble(&ModelSpec::bag(1.0, 33).unwrap()).unwrap();
        assert!(op.hermiticity_defect() <= 1e-12 * op.matrix().norm());
        let mut moduli: Vec<f64> = sorted_eigs(&op).iter().map(|e| e.abs()).collect();
        moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, m) in moduli.iter().enumerate() {
            let expected = (i / 2) as f64 * PI + 0.5 * PI;
            assert!((m - expected).abs() < 1e-9 * expected, "{m} vs {expected}");
        }
    }

    #[test]
    fn apply_d_on_constants_and_modes() {
        let spec = ModelSpec::antiperiodic(1.0, 256).unwrap();
        let op = assemble(&spec).unwrap();
        let k = SpinorField::constant(spec.grid, &[c(0.3, -2.0)]);
        assert!(op
            .apply_d(&k)
            .unwrap()
            .values()
            .iter()
            .all(|z| z.norm() < 1e-12));

        let e = SpinorField::scalar(spec.grid, |x| Complex64::from_polar(1.0, PI * x));
        let de = op.apply_d(&e).unwrap();
        for (a, b) in de.values().iter().zip(e.values()) {
            assert!((a - PI * b).norm() < 1e-6);
        }

        let bag = ModelSpec::bag(1.0, 64).unwrap();
        let k2 = SpinorField::constant(bag.grid, &[c(1.0, 0.0), c(0.0, 2.0)]);
        assert!(apply_d(&bag, &k2)
            .unwrap()
            .values()
            .iter()
            .all(|z| z.norm() < 1e-12));

        let per = ModelSpec::periodic(2.0 * PI, 32).unwrap();
        let k3 = SpinorField::constant(per.grid, &[c(1.0, 1.0)]);
        assert!(apply_d(&per, &k3)
            .unwrap()
            .values()
            .iter()
            .all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn apply_d_on_bag_eigenfunction_swaps_components() {
        // (cos(mu x), i sin(mu x)) with mu = pi/2 is an eigenfunction
        let spec = ModelSpec::bag(1.0, 64).unwrap();
        let mu = 0.5 * PI;
        let f = SpinorField::from_fn(spec.grid, 2, |x, out| {
            out[0] = c((mu * x).cos(), 0.0);
            out[1] = c(0.0, (mu * x).sin());
        });
        let df = apply_d(&spec, &f).unwrap();
        for (a, b) in df.values().iter().zip(f.values()) {
            assert!((a - mu * b).norm() < 1e-10);
        }
    }

    #[test]
    fn boundary_residual_cases() {
        let spec = ModelSpec::antiperiodic(1.0, 32).unwrap();
        let g = SpinorField::scalar(spec.grid, |x| c(x, 1.0 - x));
        assert_eq!(spec.boundary_residual(&g, &g).unwrap(), 0.0);
        let one = SpinorField::constant(spec.grid, &[c(1.0, 0.0)]);
        let u = g.add_field(&one).unwrap();
        assert!((spec.boundary_residual(&u, &g).unwrap() - 2.0).abs() < 1e-15);

        let op = assemble(&spec).unwrap();
        let coords = DVector::from_fn(op.dim(), |i, _| c((i as f64).sin(), (i as f64).cos()));
        let u = g.add_field(&op.embed(&coords)).unwrap();
        assert!(spec.boundary_residual(&u, &g).unwrap() < 1e-12);

        let bag = ModelSpec::bag(1.0, 32).unwrap();
        let bop = assemble(&bag).unwrap();
        let coords = DVector::from_fn(bop.dim(), |i, _| c(1.0 + i as f64, -0.5));
        let g = SpinorField::constant(bag.grid, &[c(0.2, 0.0), c(0.0, 0.7)]);
        let u = g.add_field(&bop.embed(&coords)).unwrap();
        assert!(bag.boundary_residual(&u, &g).unwrap() < 1e-12);
    }

    #[test]
    fn dense_dump_layout() {
        let op = assemble(&ModelSpec::antiperiodic(1.0, 9).unwrap()).unwrap();
        let mut buf = Vec::new();
        op.write_dense_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 * 8 * 16);
        let re = f64::from_le_bytes(buf[16..24].try_into().unwrap());
        let im = f64::from_le_bytes(buf[24..32].try_into().unwrap());
        assert_eq!(c(re, im), op.matrix()[(0, 1)]);
    }

    #[test]
    fn lift_removes_boundary_data() {
        for spec in [
            ModelSpec::antiperiodic(1.0, 16).unwrap(),
            ModelSpec::bag(1.0, 16).unwrap(),
        ] {
            let f = SpinorField::from_fn(spec.grid, spec.rank(), |x, out| {
                for (k, z) in out.iter_mut().enumerate() {
                    *z = c(1.0 + x * x + k as f64, x.sin());
                }
            });
            let h = f.sub_field(&spec.lift(&f).unwrap()).unwrap();
            let zero = SpinorField::zeros(spec.grid, spec.rank());
            assert!(spec.boundary_residual(&h, &zero).unwrap() < 1e-15);
        }
    }
}
