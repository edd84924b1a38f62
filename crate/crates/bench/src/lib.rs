//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use diracfp::{assemble, decompose, ModelSpec, SpectralData, SpinorField, C64};

/// Decomposed antiperiodic model on `[0, 1]` with `n` nodes.
pub fn antiperiodic(n: usize) -> SpectralData {
    let spec = ModelSpec::antiperiodic(1.0, n).expect("valid model");
    decompose(&assemble(&spec).expect("assembles")).expect("decomposes")
}

/// `beta e^{i pi x}` on the model grid.
pub fn mode(spec: &SpectralData, beta: f64) -> SpinorField {
    let grid = spec.operator().expect("operator attached").spec().grid;
    SpinorField::scalar(grid, |x| C64::from_polar(beta, PI * x))
}
