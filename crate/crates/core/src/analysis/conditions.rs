//! Exponents, the constant `kappa`, and the sufficient smallness conditions
//! in their three forms: raw (A1)-(A4), explicit caps (B1)-(B3), and the
//! unit-cap final form (C1)-(C3).

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a constant's value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Supplied by configuration without justification.
    Assumed,
    /// Maximum of a sampled ratio; the true constant may be larger.
    EmpiricalLowerBound,
    /// Evaluated from the discrete problem.
    Computed,
}

/// Names of the constants carrying provenance.
pub const CONSTANT_NAMES: [&str; 13] = [
    "c_h",
    "C_h",
    "c1",
    "c_half",
    "K_GN",
    "K_GN2",
    "K_FGN",
    "lambda_abs",
    "lambda1_abs",
    "Dg_L2",
    "g_L2T",
    "g_H1T",
    "Xi_Lambda",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticConstants {
    pub n: u32,
    pub p: f64,
    pub p_a: f64,
    pub c_h: f64,
    #[serde(rename = "C_h")]
    pub big_c_h: f64,
    pub c1: f64,
    pub c_half: f64,
    #[serde(rename = "K_GN")]
    pub k_gn: f64,
    #[serde(rename = "K_GN2")]
    pub k_gn2: f64,
    #[serde(rename = "K_FGN")]
    pub k_fgn: f64,
    pub lambda_abs: f64,
    pub lambda1_abs: f64,
    #[serde(rename = "Dg_L2")]
    pub dg_l2: f64,
    #[serde(rename = "g_L2T")]
    pub g_l2t: f64,
    #[serde(rename = "g_H1T")]
    pub g_h1t: f64,
    #[serde(rename = "Xi")]
    pub xi: f64,
    #[serde(rename = "Lambda")]
    pub lambda_cap: f64,
    pub provenance: BTreeMap<String, Provenance>,
}

impl AnalyticConstants {
    /// Dimension `n` with `p = p_A = 2n/(n-1)`, unit constants (assumed),
    /// `lambda = 0`, `|lambda_1| = 1`, vanishing data and `Xi = Lambda = 1`.
    pub fn new(n: u32) -> Self {
        let crit = critical_exponent(n);
        Self {
            n,
            p: crit,
            p_a: crit,
            c_h: 1.0,
            big_c_h: 1.0,
            c1: 1.0,
            c_half: 1.0,
            k_gn: 1.0,
            k_gn2: 1.0,
            k_fgn: 1.0,
            lambda_abs: 0.0,
            lambda1_abs: 1.0,
            dg_l2: 0.0,
            g_l2t: 0.0,
            g_h1t: 0.0,
            xi: 1.0,
            lambda_cap: 1.0,
            provenance: CONSTANT_NAMES
                .iter()
                .map(|k| (k.to_string(), Provenance::Assumed))
                .collect(),
        }
    }

    pub fn set_provenance(&mut self, name: &str, prov: Provenance) {
        self.provenance.insert(name.to_string(), prov);
    }

    /// Admissible window `[2n/(n-1), 2n/(n-2)]` for `p_A` (unbounded above
    /// for `n = 2`).
    pub fn p_a_window(&self) -> (f64, f64) {
        let n = self.n as f64;
        let hi = if self.n == 2 {
            f64::INFINITY
        } else {
            2.0 * n / (n - 2.0)
        };
        (2.0 * n / (n - 1.0), hi)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Parameter(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return Err(Error::Parameter(format!("p must be >= 2, got {}", self.p)));
        }
        let (lo, hi) = self.p_a_window();
        let in_window = self.p_a.is_finite()
            && self.p_a >= lo * (1.0 - 1e-12)
            && (hi.is_infinite() || self.p_a <= hi * (1.0 + 1e-12));
        if !in_window {
            return Err(Error::Parameter(format!(
                "p_A = {} outside the admissible window [{lo}, {hi}]",
                self.p_a
            )));
        }
        let positive = [
            ("c_h", self.c_h),
            ("C_h", self.big_c_h),
            ("c1", self.c1),
            ("c_half", self.c_half),
            ("K_GN", self.k_gn),
            ("K_GN2", self.k_gn2),
            ("K_FGN", self.k_fgn),
            ("lambda1_abs", self.lambda1_abs),
            ("Xi", self.xi),
            ("Lambda", self.lambda_cap),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let nonneg = [
            ("lambda_abs", self.lambda_abs),
            ("Dg_L2", self.dg_l2),
            ("g_L2T", self.g_l2t),
            ("g_H1T", self.g_h1t),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// `2n/(n-1)`.
pub fn critical_exponent(n: u32) -> f64 {
    let n = n as f64;
    2.0 * n / (n - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub theta_a: f64,
    pub theta_b: f64,
    pub p_b: f64,
    pub kappa: f64,
}

pub fn derive_exponents(k: &AnalyticConstants) -> Result<Exponents> {
    k.validate()?;
    let n = k.n as f64;
    let theta_a = n / 2.0 - n / k.p_a;
    let theta_b = 2.0 * n / ((n - 1.0) * k.p_a);
    let denom = k.p_a - k.p + 2.0;
    if denom <= 0.0 {
        return Err(Error::Parameter(format!(
            "p_B undefined: p_A - p + 2 = {denom} is not positive"
        )));
    }
    let p_b = 2.0 * k.p_a / denom;
    let kappa = 2.0
        * (k.p - 1.0)
        * k.c_h.powf(-2.0 / (n - 1.0) - 2.0)
        * k.big_c_h.powf(2.0 * (1.0 - theta_b))
        * k.c_half.powf(theta_b)
        * k.k_gn2.powf(2.0 / (n - 1.0))
        * k.k_fgn.powi(2);
    Ok(Exponents {
        theta_a,
        theta_b,
        p_b,
        kappa,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionMode {
    /// (C1)-(C3) with `Xi = Lambda = 1` and `R = 2/|lambda_1|`.
    CFinal,
    /// (B1)-(B3) with explicit caps and `R = 2/|lambda_1|`.
    BExplicit,
    /// (A1)-(A4) with `R = 1`.
    ARaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEval {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub satisfied: bool,
}

impl ConditionEval {
    fn new(name: &str, lhs: f64, rhs: f64, strict: bool) -> Self {
        let satisfied = if strict { lhs < rhs } else { lhs <= rhs };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            strict,
            satisfied,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub mode: ConditionMode,
    pub theta_a: f64,
    pub theta_b: f64,
    pub p_b: f64,
    pub kappa: f64,
    pub conditions: Vec<ConditionEval>,
    pub all_satisfied: bool,
    /// Largest `|lambda| / |lambda_1|` allowed by (C3).
    pub c3_ratio_threshold: f64,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub epsilon: Option<f64>,
    pub contraction_bound: Option<f64>,
    pub constants: AnalyticConstants,
}

impl ConditionReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionEval> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

pub fn check_conditions(k: &AnalyticConstants, mode: ConditionMode) -> Result<ConditionReport> {
    let ex = derive_exponents(k)?;
    let n = k.n as f64;
    let inv_l1 = 1.0 / k.lambda1_abs;
    let e = (n + 1.0) / (n - 1.0);
    let nonlinear = k.lambda_abs * k.c_h.powf(-e) * k.k_gn.powf(e);
    let caps = k.xi.powf(1.0 / (n - 1.0)) * k.lambda_cap.powf(n / (n - 1.0));
    let cap_power = k.xi.powf(2.0 * (1.0 - ex.theta_a) / (n - 1.0))
        * k.lambda_cap.powf(2.0 * ex.theta_a / (n - 1.0));
    let c3_ratio_threshold = 1.0 / (ex.kappa * 2f64.powf(1.5) * 3f64.powf(ex.theta_b));
    let sc1 = k.c1.sqrt();

    let (mut a, mut b, mut epsilon, mut contraction_bound) = (None, None, None, None);
    let conditions = match mode {
        ConditionMode::CFinal => {
            let inner = nonlinear + k.dg_l2;
            vec![
                ConditionEval::new("C1", k.big_c_h * inv_l1 * inner + k.g_l2t, 1.0, false),
                ConditionEval::new("C2", 4.0 * sc1 * inv_l1 * inner + k.g_h1t, 1.0, false),
                ConditionEval::new(
                    "C3",
                    ex.kappa * 2f64.powf(1.5) * 3f64.powf(ex.theta_b) * k.lambda_abs * inv_l1,
                    1.0,
                    true,
                ),
            ]
        }
        ConditionMode::BExplicit => {
            let inner = nonlinear * caps + k.dg_l2;
            vec![
                ConditionEval::new("B1", k.big_c_h * inv_l1 * inner + k.g_l2t, k.xi, false),
                ConditionEval::new(
                    "B2",
                    3.0 * sc1 * inv_l1 * inner + k.g_h1t,
                    k.lambda_cap,
                    false,
                ),
                ConditionEval::new(
                    "B3",
                    ex.kappa * 2f64.powf(ex.theta_b) * cap_power * k.lambda_abs * inv_l1,
                    SQRT_2 / 4.0,
                    true,
                ),
            ]
        }
        ConditionMode::ARaw => {
            let inner = nonlinear * caps + k.dg_l2;
            let a_val = inv_l1;
            let eps = 1.0 - a_val;
            let b_val =
                ex.kappa * cap_power * k.lambda_abs * k.lambda1_abs.powf(-(1.0 - ex.theta_b));
            a = Some(a_val);
            b = Some(b_val);
            epsilon = Some(eps);
            contraction_bound = (eps > 0.0).then(|| SQRT_2 * b_val / eps);
            vec![
                ConditionEval::new("A1_L2", k.g_l2t, k.xi, false),
                ConditionEval::new("A1_H1", k.g_h1t, k.lambda_cap, false),
                ConditionEval::new("A2", k.big_c_h * inv_l1 * inner + k.g_l2t, k.xi, false),
                ConditionEval::new(
                    "A3",
                    sc1 * (1.0 + inv_l1) * inner + k.g_h1t,
                    k.lambda_cap,
                    false,
                ),
                ConditionEval::new("A4", b_val, eps / SQRT_2, true),
            ]
        }
    };
    let all_satisfied = conditions.iter().all(|c| c.satisfied);
    Ok(ConditionReport {
        mode,
        theta_a: ex.theta_a,
        theta_b: ex.theta_b,
        p_b: ex.p_b,
        kappa: ex.kappa,
        conditions,
        all_satisfied,
        c3_ratio_threshold,
        a,
        b,
        epsilon,
        contraction_bound,
        constants: k.clone(),
    })
}
