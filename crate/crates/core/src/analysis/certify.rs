//! Ties a concrete problem to the condition arithmetic: fills in the data
//! norms and `|lambda_1|`, then evaluates the chosen condition family.

use serde::Serialize;

use crate::analysis::conditions::{
    check_conditions, AnalyticConstants, ConditionMode, ConditionReport, Provenance,
};
use crate::error::Result;
use crate::norms::w1q_norm;
use crate::scheme::{OperatorScaling, SchemeConfig};
use crate::spectral::SpectralData;

#[derive(Debug, Clone, Serialize)]
pub struct Certification {
    pub report: ConditionReport,
    /// The run uses the scaling the condition family was derived for.
    pub scaling_matches: bool,
    pub certified: bool,
}

/// Copies `|lambda|`, `|lambda_1|`, `||D g||`, `||g||_{L^2}`, `||g||_{W^{1,2}}`
/// and the caps from the problem into `base`, marking them computed.
pub fn problem_constants(
    spec: &SpectralData,
    cfg: &SchemeConfig,
    base: &AnalyticConstants,
) -> Result<AnalyticConstants> {
    let op = spec.operator()?;
    let mut k = base.clone();
    k.p = cfg.p;
    k.lambda_abs = cfg.lambda.norm();
    k.lambda1_abs = spec.lambda1().abs();
    k.dg_l2 = op.apply_d(&cfg.g)?.l2_norm();
    k.g_l2t = cfg.g.l2_norm();
    k.g_h1t = w1q_norm(&cfg.g, 2.0)?;
    k.xi = cfg.xi;
    k.lambda_cap = cfg.lambda_cap;
    for name in ["lambda_abs", "lambda1_abs", "Dg_L2", "g_L2T", "g_H1T"] {
        k.set_provenance(name, Provenance::Computed);
    }
    Ok(k)
}

/// Evaluates `mode` for the problem. Certification also requires the run's
/// operator scaling to be the one the conditions assume: `R = 2/|lambda_1|`
/// for the C and B families, `R = 1` for the raw family.
pub fn certify(
    spec: &SpectralData,
    cfg: &SchemeConfig,
    base: &AnalyticConstants,
    mode: ConditionMode,
) -> Result<Certification> {
    let k = problem_constants(spec, cfg, base)?;
    let report = check_conditions(&k, mode)?;
    let r = cfg.scaling.resolve(spec)?;
    let expected = match mode {
        ConditionMode::CFinal | ConditionMode::BExplicit => 2.0 / k.lambda1_abs,
        ConditionMode::ARaw => 1.0,
    };
    let scaling_matches = matches!(cfg.scaling, OperatorScaling::Auto)
        && mode != ConditionMode::ARaw
        || (r - expected).abs() <= 1e-12 * expected;
    Ok(Certification {
        certified: report.all_satisfied && scaling_matches,
        report,
        scaling_matches,
    })
}
