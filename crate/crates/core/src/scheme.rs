//! Fixed-point iteration for `D u = lambda |u|^{p-2} u`, `P u = P g`.
//!
//! Each step solves the linear problem
//!
//! ```text
//! (R D_P - a) u~_{k+1} = R lambda |u_k|^{p-2} u_k - a u~_k - R D g,
//! u_{k+1} = u~_{k+1} + g,
//! ```
//!
//! in constrained coordinates, where `u~ = u - g`. Any fixed point solves the
//! original problem for every admissible shift `a` and scaling `R`.

use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::AssembledOperator;
use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::norms::{nonlinearity, w1q_norm};
use crate::spectral::SpectralData;
use crate::text::format_float;

/// Multiplier `R` applied to `D_P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorScaling {
    Fixed(f64),
    /// `R = 2 / |lambda_1|`.
    Auto,
}

impl Default for OperatorScaling {
    fn default() -> Self {
        OperatorScaling::Fixed(1.0)
    }
}

impl OperatorScaling {
    pub fn resolve(&self, spec: &SpectralData) -> Result<f64> {
        match *self {
            OperatorScaling::Fixed(r) if r > 0.0 && r.is_finite() => Ok(r),
            OperatorScaling::Fixed(r) => {
                Err(Error::Parameter(format!("R must be positive, got {r}")))
            }
            OperatorScaling::Auto if spec.invertible() => Ok(2.0 / spec.lambda1().abs()),
            OperatorScaling::Auto => Err(Error::Parameter(
                "R = auto needs an invertible operator".into(),
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub lambda: Complex64,
    pub p: f64,
    pub g: SpinorField,
    pub a: Complex64,
    pub scaling: OperatorScaling,
    /// Initial iterate; `g` when absent.
    pub f0: Option<SpinorField>,
    pub xi: f64,
    pub lambda_cap: f64,
    pub max_iter: usize,
    pub tol_cauchy: f64,
    pub tol_residual: f64,
}

impl SchemeConfig {
    pub const DEFAULT_MAX_ITER: usize = 200;
    pub const DEFAULT_TOL_CAUCHY: f64 = 1e-10;
    pub const DEFAULT_TOL_RESIDUAL: f64 = 1e-8;

    /// Defaults: `a = 0`, `R = 1`, `Xi = Lambda = 1`, `f0 = g`.
    pub fn new(lambda: Complex64, p: f64, g: SpinorField) -> Self {
        Self {
            lambda,
            p,
            g,
            a: Complex64::new(0.0, 0.0),
            scaling: OperatorScaling::default(),
            f0: None,
            xi: 1.0,
            lambda_cap: 1.0,
            max_iter: Self::DEFAULT_MAX_ITER,
            tol_cauchy: Self::DEFAULT_TOL_CAUCHY,
            tol_residual: Self::DEFAULT_TOL_RESIDUAL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return bad(format!("p must be >= 2, got {}", self.p));
        }
        if !(self.tol_cauchy > 0.0 && self.tol_residual > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if !(self.xi > 0.0 && self.lambda_cap > 0.0) {
            return bad("Xi and Lambda must be positive".into());
        }
        if !(self.lambda.re.is_finite() && self.lambda.im.is_finite())
            || !(self.a.re.is_finite() && self.a.im.is_finite())
        {
            return bad("lambda and a must be finite".into());
        }
        self.g.validate()?;
        if let Some(f0) = &self.f0 {
            f0.validate()?;
            f0.ensure_compatible(&self.g)?;
        }
        Ok(())
    }

    pub fn initial(&self) -> &SpinorField {
        self.f0.as_ref().unwrap_or(&self.g)
    }

    /// Iterates stay at `u_1` when the step map ignores its argument.
    fn is_constant_map(&self) -> bool {
        self.lambda == Complex64::new(0.0, 0.0) && self.a == Complex64::new(0.0, 0.0)
    }
}

/// Snapshot after step `k` (`k = 0` is the initial iterate).
#[derive(Debug, Clone)]
pub struct IterationState {
    pub k: usize,
    pub u: SpinorField,
    pub u_tilde: SpinorField,
    /// `||u_k - u_{k-1}||` in the `H^{1/2}_D` graph norm; absent for `k = 0`.
    pub delta_h12d: Option<f64>,
    /// `delta_k / delta_{k-1}` when both are defined and the divisor is nonzero.
    pub ratio: Option<f64>,
    pub l2_norm: f64,
    pub h1_norm: f64,
    pub pde_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    MaxIterExceeded,
    Diverged,
    BoundViolated,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::MaxIterExceeded => "max_iter_exceeded",
            Verdict::Diverged => "diverged",
            Verdict::BoundViolated => "bound_violated",
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationReport {
    pub states: Vec<IterationState>,
    /// Observed contraction ratios in step order.
    pub ratios: Vec<f64>,
    pub verdict: Verdict,
    /// Last Cauchy increment; zero when the step map is constant.
    pub final_increment: f64,
    pub pde_residual: f64,
    pub boundary_residual: f64,
    pub bounds_held: bool,
    pub lambda1: f64,
    pub r: f64,
    pub divergence_reason: Option<String>,
}

/// Stable summary written as the solve report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub verdict: Verdict,
    pub iterations: usize,
    pub pde_residual: f64,
    pub boundary_residual: f64,
    pub bounds_held: bool,
    pub lambda1: f64,
    pub conditions_certified: Option<bool>,
    pub final_increment: f64,
    pub max_ratio: Option<f64>,
    pub u_l2: f64,
    pub r: f64,
}

impl IterationReport {
    pub fn iterations(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn final_state(&self) -> &IterationState {
        self.states.last().expect("report holds the initial state")
    }

    pub fn solution(&self) -> &SpinorField {
        &self.final_state().u
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios.iter().copied().reduce(f64::max)
    }

    pub fn summary(&self, conditions_certified: Option<bool>) -> ReportSummary {
        ReportSummary {
            verdict: self.verdict,
            iterations: self.iterations(),
            pde_residual: self.pde_residual,
            boundary_residual: self.boundary_residual,
            bounds_held: self.bounds_held,
            lambda1: self.lambda1,
            conditions_certified,
            final_increment: self.final_increment,
            max_ratio: self.max_ratio(),
            u_l2: self.final_state().l2_norm,
            r: self.r,
        }
    }

    /// `k,delta_H12D,ratio,u_L2,u_H1,pde_residual`; undefined cells are empty.
    pub fn write_trace_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k", "delta_H12D", "ratio", "u_L2", "u_H1", "pde_residual"])?;
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        for s in &self.states {
            w.write_record([
                s.k.to_string(),
                opt(s.delta_h12d),
                opt(s.ratio),
                format_float(s.l2_norm),
                format_float(s.h1_norm),
                format_float(s.pde_residual),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Quantities shared by all steps of a run.
struct Prepared<'a> {
    spec: &'a SpectralData,
    cfg: &'a SchemeConfig,
    r: f64,
    dg: SpinorField,
}

impl<'a> Prepared<'a> {
    fn new(spec: &'a SpectralData, cfg: &'a SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let op = spec.operator()?;
        if op.spec().grid != *cfg.g.grid() || op.spec().rank() != cfg.g.rank() {
            return Err(Error::Mismatch(
                "datum g does not live on the model grid with the operator's rank".into(),
            ));
        }
        let r = cfg.scaling.resolve(spec)?;
        // surface a singular shifted operator before iterating
        spec.apply_resolvent_coords(&DVector::zeros(spec.dim()), r, cfg.a)?;
        let dg = op.apply_d(&cfg.g)?;
        Ok(Self { spec, cfg, r, dg })
    }

    fn step(&self, u_k: &SpinorField, k: usize) -> Result<SpinorField> {
        let op = self.spec.operator()?;
        let cfg = self.cfg;
        let nl = nonlinearity(u_k, cfg.p)?;
        let u_tilde = u_k.sub_field(&cfg.g)?;
        let rhs = nl
            .scale(self.r * cfg.lambda)
            .axpy(-cfg.a, &u_tilde)?
            .axpy(Complex64::new(-self.r, 0.0), &self.dg)?;
        let coords = self
            .spec
            .apply_resolvent_coords(&op.project(&rhs)?, self.r, cfg.a)?;
        let next = op.embed(&coords).add_field(&cfg.g)?;
        if !next.is_finite() {
            return Err(Error::Divergence {
                step: k,
                reason: "non-finite iterate".into(),
            });
        }
        Ok(next)
    }

    fn residual(&self, u: &SpinorField) -> Result<f64> {
        galerkin_residual(self.spec.operator()?, self.cfg, u)
    }

    fn state(&self, k: usize, u: SpinorField, delta: Option<f64>) -> Result<IterationState> {
        let u_tilde = u.sub_field(&self.cfg.g)?;
        let h1_norm = if u.is_finite() {
            w1q_norm(&u, 2.0)?
        } else {
            f64::NAN
        };
        Ok(IterationState {
            k,
            l2_norm: u.l2_norm(),
            h1_norm,
            pde_residual: self.residual(&u)?,
            u_tilde,
            delta_h12d: delta,
            ratio: None,
            u,
        })
    }
}

/// One iteration from `u_k`; returns `u_{k+1}`.
pub fn step(spec: &SpectralData, cfg: &SchemeConfig, u_k: &SpinorField) -> Result<SpinorField> {
    let prep = Prepared::new(spec, cfg)?;
    u_k.validate()?;
    prep.step(u_k, 0)
}

/// Iterates until convergence, divergence or `max_iter`.
pub fn run(spec: &SpectralData, cfg: &SchemeConfig) -> Result<IterationReport> {
    let prep = Prepared::new(spec, cfg)?;
    let op = spec.operator()?;
    let blowup = 10.0 * cfg.xi.max(cfg.lambda_cap).max(1.0);

    let mut states = vec![prep.state(0, cfg.initial().clone(), None)?];
    let mut ratios = Vec::new();
    let mut bounds_held = true;
    let mut verdict = None;
    let mut divergence_reason = None;
    let mut final_increment = f64::NAN;

    for k in 1..=cfg.max_iter {
        let prev = &states[k - 1];
        let next = match prep.step(&prev.u, k) {
            Ok(u) => u,
            Err(Error::Divergence { reason, .. }) => {
                divergence_reason = Some(reason);
                verdict = Some(Verdict::Diverged);
                break;
            }
            Err(e) => return Err(e),
        };
        let diff = op.project(&next.sub_field(&prev.u)?)?;
        let delta = spec.graph_norm_unchecked(0.5, &diff);
        let ratio = prev.delta_h12d.filter(|&d| d > 0.0).map(|d| delta / d);
        let mut state = prep.state(k, next, Some(delta))?;
        state.ratio = ratio;
        ratios.extend(ratio);
        let (l2, h1) = (state.l2_norm, state.h1_norm);
        let pde = state.pde_residual;
        states.push(state);
        final_increment = delta;

        if !(l2.is_finite() && h1.is_finite()) || l2 > blowup || h1 > blowup {
            divergence_reason = Some(format!(
                "iterate norm (L2 {l2:e}, H1 {h1:e}) exceeds {blowup}"
            ));
            verdict = Some(Verdict::Diverged);
            break;
        }
        if l2 > cfg.xi || h1 > cfg.lambda_cap {
            bounds_held = false;
        }
        if cfg.is_constant_map() {
            // u_{k+1} = u_k exactly from here on
            final_increment = 0.0;
            if pde < cfg.tol_residual {
                verdict = Some(Verdict::Converged);
                break;
            }
        }
        let contracting = ratios.last().is_none_or(|&r| r < 1.0);
        if delta < cfg.tol_cauchy && contracting && pde < cfg.tol_residual {
            verdict = Some(Verdict::Converged);
            break;
        }
    }

    let verdict = verdict.unwrap_or(if bounds_held {
        Verdict::MaxIterExceeded
    } else {
        Verdict::BoundViolated
    });
    let last = states.last().expect("initial state present");
    let pde_residual = last.pde_residual;
    let boundary_residual = op.spec().boundary_residual(&last.u, &cfg.g)?;
    Ok(IterationReport {
        states,
        ratios,
        verdict,
        final_increment,
        pde_residual,
        boundary_residual,
        bounds_held,
        lambda1: spec.lambda1(),
        r: prep.r,
        divergence_reason,
    })
}

/// Rescales a problem by `alpha`: `lambda -> alpha lambda` and fields and
/// caps by `alpha^{1/(2-p)}`.
pub fn scale_problem(cfg: &SchemeConfig, alpha: f64) -> Result<SchemeConfig> {
    if cfg.p == 2.0 {
        return Err(Error::UndefinedScaling);
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(cfg.p > 2.0) {
        return Err(Error::Parameter(format!("p must exceed 2, got {}", cfg.p)));
    }
    let t = alpha.powf(1.0 / (2.0 - cfg.p));
    let mut out = cfg.clone();
    out.lambda = cfg.lambda * alpha;
    out.g = cfg.g.scale_real(t);
    out.f0 = cfg.f0.as_ref().map(|f| f.scale_real(t));
    out.xi = cfg.xi * t;
    out.lambda_cap = cfg.lambda_cap * t;
    Ok(out)
}

/// `||D u - lambda Pi(|u|^{p-2} u)||_{L^2}` with `Pi` the quadrature projection
/// onto the constrained space. The part of the nonlinearity outside that space
/// violates the boundary condition at grid level and vanishes as `h -> 0`, so
/// it is not charged to the iteration.
fn galerkin_residual(op: &AssembledOperator, cfg: &SchemeConfig, u: &SpinorField) -> Result<f64> {
    let du = op.apply_d(u)?;
    let nl = op.embed(&op.project(&nonlinearity(u, cfg.p)?)?);
    Ok(du.axpy(-cfg.lambda, &nl)?.l2_norm())
}

/// Residuals `(||D u - lambda Pi(|u|^{p-2} u)||_{L^2}, |P(u - g)|)`.
pub fn verify_solution(
    spec: &SpectralData,
    cfg: &SchemeConfig,
    u: &SpinorField,
) -> Result<(f64, f64)> {
    u.validate()?;
    let op = spec.operator()?;
    let pde = galerkin_residual(op, cfg, u)?;
    let bnd = op.spec().boundary_residual(u, &cfg.g)?;
    Ok((pde, bnd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, ModelSpec};
    use crate::spectral::decompose;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn antiperiodic(n: usize) -> SpectralData {
        decompose(&assemble(&ModelSpec::antiperiodic(1.0, n).unwrap()).unwrap()).unwrap()
    }

    fn grid_of(s: &SpectralData) -> crate::grid::Grid1D {
        s.operator().unwrap().spec().grid
    }

    fn smooth_g(s: &SpectralData) -> SpinorField {
        SpinorField::scalar(grid_of(s), |x| c(1.0 + 0.5 * x, (2.0 * x).sin()))
    }

    #[test]
    fn linear_case_converges_in_one_step() {
        let s = antiperiodic(128);
        let g = smooth_g(&s);
        let cfg = SchemeConfig::new(c(0.0, 0.0), 4.0, g.clone());
        let rep = run(&s, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Converged);
        assert_eq!(rep.iterations(), 1);
        assert!(rep.ratios.is_empty());
        assert!(rep.pde_residual <= 1e-8, "{}", rep.pde_residual);
        assert!(rep.boundary_residual <= 1e-12);

        // u_1 = g - D_P^{-1} D g
        let op = s.operator().unwrap();
        let dg = op.apply_d(&g).unwrap();
        let expected = g
            .sub_field(&s.apply_inverse(&dg, c(0.0, 0.0)).unwrap())
            .unwrap();
        assert!(rep.solution().sub_field(&expected).unwrap().l2_norm() < 1e-12);
    }

    #[test]
    fn zero_data_stays_zero() {
        let s = antiperiodic(64);
        let zero = SpinorField::zeros(grid_of(&s), 1);
        let cfg = SchemeConfig::new(c(3.0, 1.0), 4.0, zero);
        let rep = run(&s, &cfg).unwrap();
        assert_eq!(rep.verdict, Verdict::Converged);
        assert!(rep.states.iter().all(|st| st.u.l2_norm() == 0.0));
    }

    #[test]
    fn states_satisfy_decomposition() {
        let s = antiperiodic(64);
        let g = SpinorField::scalar(grid_of(&s), |x| c(0.1, 0.05 * x));
        let cfg = SchemeConfig::new(c(0.1, 0.0), 4.0, g.clone());
        let rep = run(&s, &cfg).unwrap();
        for st in &rep.states {
            let back = st.u_tilde.add_field(&g).unwrap();
            assert!(back.sub_field(&st.u).unwrap().l2_norm() <= 1e-12);
        }
    }

    #[test]
    fn exact_solution_is_stationary_for_shifts_and_scalings() {
        let s = antiperiodic(256);
        let beta = 0.3;
        let p = 4.0;
        let g = SpinorField::scalar(grid_of(&s), |x| Complex64::from_polar(beta, PI * x));
        let lambda = PI * beta.powf(2.0 - p);
        let mut cfg = SchemeConfig::new(c(lambda, 0.0), p, g.clone());
        let (pde, bnd) = verify_solution(&s, &cfg, &g).unwrap();
        assert!(pde < 1e-9, "{pde}");
        assert_eq!(bnd, 0.0);
        for (a, r) in [
            (c(1.0, 0.0), OperatorScaling::Fixed(1.0)),
            (c(0.0, 2.0), OperatorScaling::Auto),
        ] {
            cfg.a = a;
            cfg.scaling = r;
            let next = step(&s, &cfg, &g).unwrap();
            assert!(next.sub_field(&g).unwrap().l2_norm() < 1e-9);
        }
    }

    #[test]
    fn shift_on_spectrum_is_rejected() {
        let s = antiperiodic(64);
        let mut cfg = SchemeConfig::new(c(0.0, 0.0), 4.0, smooth_g(&s));
        cfg.a = c(PI, 0.0);
        assert!(matches!(run(&s, &cfg), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn large_lambda_diverges_or_stalls() {
        let s = antiperiodic(64);
        let g = SpinorField::scalar(grid_of(&s), |x| c(1.0, x));
        let mut cfg = SchemeConfig::new(c(50.0, 0.0), 4.0, g);
        cfg.max_iter = 50;
        let rep = run(&s, &cfg).unwrap();
        assert_ne!(rep.verdict, Verdict::Converged);
    }

    #[test]
    fn scaling_identity_and_factor() {
        let s = antiperiodic(32);
        let g = smooth_g(&s);
        let cfg = SchemeConfig::new(c(0.2, 0.0), 4.0, g.clone());
        let same = scale_problem(&cfg, 1.0).unwrap();
        assert_eq!(same.g, cfg.g);
        assert_eq!(same.lambda, cfg.lambda);
        let scaled = scale_problem(&cfg, 16.0).unwrap();
        let expected = g.scale_real(0.25);
        assert!(scaled.g.sub_field(&expected).unwrap().l2_norm() < 1e-15);
        assert!((scaled.xi - 0.25).abs() < 1e-15);

        let mut linear = cfg.clone();
        linear.p = 2.0;
        assert!(matches!(
            scale_problem(&linear, 2.0),
            Err(Error::UndefinedScaling)
        ));
    }

    #[test]
    fn trivial_field_fails_inhomogeneous_condition() {
        let s = antiperiodic(32);
        let g = SpinorField::constant(grid_of(&s), &[c(1.0, 0.0)]);
        let cfg = SchemeConfig::new(c(1.0, 0.0), 4.0, g);
        let zero = SpinorField::zeros(grid_of(&s), 1);
        let (_, bnd) = verify_solution(&s, &cfg, &zero).unwrap();
        assert!(bnd > 0.0);
    }

    #[test]
    fn trace_csv_layout() {
        let s = antiperiodic(32);
        let g = SpinorField::scalar(grid_of(&s), |x| Complex64::from_polar(0.1, PI * x));
        let cfg = SchemeConfig::new(c(0.05 * PI, 0.0), 4.0, g);
        let rep = run(&s, &cfg).unwrap();
        let mut buf = Vec::new();
        rep.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("k,delta_H12D,ratio,u_L2,u_H1,pde_residual")
        );
        assert!(lines.next().unwrap().starts_with("0,,,"));
        assert_eq!(text.lines().count(), rep.states.len() + 1);
    }
}
