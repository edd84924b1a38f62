//! Spectral fixed-point solver for nonlinear Dirac-type boundary value
//! problems `D u = lambda |u|^{p-2} u`, `P u = P g` on one-dimensional model
//! domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`], [`field`], [`norms`]: sample grids, spinor fields, quadrature
//!   norms and the pointwise nonlinearity.
//! * [`assembly`]: model operators and their compression to the kernel of the
//!   boundary operator.
//! * [`spectral`]: eigendecomposition and functional calculus of `D_P`.
//! * [`scheme`]: the fixed-point iteration and solution verification.
//! * [`analysis`]: explicit sufficient conditions, exponent arithmetic, the
//!   variational functional and Gagliardo-Nirenberg ratio estimators.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod field;
pub mod grid;
pub mod norms;
pub mod scheme;
pub mod spectral;
pub mod text;

pub use num_complex::Complex64 as C64;

pub use assembly::{
    apply_d, assemble, boundary_residual, AssembledOperator, BoundaryCondition, ConstraintMap,
    ModelSpec, OperatorKind,
};
pub use error::{Error, Result};
pub use field::SpinorField;
pub use grid::{Grid1D, Topology};
pub use norms::{lp_norm, nonlinearity, slobodeckij_norm, w1q_norm, NormSpec};
pub use scheme::{
    run, scale_problem, step, verify_solution, IterationReport, IterationState, OperatorScaling,
    ReportSummary, SchemeConfig, Verdict,
};
pub use spectral::{decompose, EmpiricalConstants, SpectralData};
pub use text::format_float;
