//! Run configuration: sectioned `key = value` text.
//!
//! ```text
//! [model]
//! kind = antiperiodic        # antiperiodic | periodic | bag
//! length = 1
//! n_points = 256
//!
//! [scheme]
//! lambda = 0.05*pi
//! g = 0.1*exp_mode(1)
//! R = auto
//! ```
//!
//! Keys may also be written as `section.key` outside any section. Unknown
//! sections and keys are rejected. Numeric values accept the expression
//! syntax of [`crate::expr`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use diracfp::analysis::{AnalyticConstants, ConditionMode};
use diracfp::{ModelSpec, OperatorScaling, SpinorField, C64};
use thiserror::Error;

use crate::expr::{Expr, Scope};

/// A configuration problem, located by key path and line when known.
#[derive(Debug, Clone, Error, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}, `{k}`: {}", self.msg),
            (Some(l), None) => write!(f, "line {l}: {}", self.msg),
            (None, Some(k)) => write!(f, "`{k}`: {}", self.msg),
            (None, None) => f.write_str(&self.msg),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ValueKind {
    Text,
    Int,
    Real,
    Complex,
    /// Expression in `x`.
    Field,
    /// `auto` or a real.
    Scaling,
    /// `estimate` or a real.
    Estimable,
    Bool,
}

impl ValueKind {
    fn sweepable(self) -> bool {
        matches!(
            self,
            ValueKind::Int
                | ValueKind::Real
                | ValueKind::Complex
                | ValueKind::Scaling
                | ValueKind::Estimable
        )
    }
}

const KEYS: &[(&str, &[(&str, ValueKind)])] = {
    use ValueKind::*;
    &[
        (
            "model",
            &[("kind", Text), ("length", Real), ("n_points", Int)],
        ),
        (
            "scheme",
            &[
                ("lambda", Complex),
                ("p", Real),
                ("g", Field),
                ("g2", Field),
                ("g_scale", Real),
                ("a", Complex),
                ("R", Scaling),
                ("Xi", Real),
                ("Lambda", Real),
                ("max_iter", Int),
                ("tol_cauchy", Real),
                ("tol_residual", Real),
                ("f0", Field),
                ("f0_2", Field),
            ],
        ),
        (
            "constants",
            &[
                ("n", Int),
                ("p_A", Real),
                ("c_h", Real),
                ("C_h", Real),
                ("iota", Real),
                ("c1", Estimable),
                ("c_half", Estimable),
                ("K_GN", Estimable),
                ("K_GN2", Estimable),
                ("K_FGN", Estimable),
                ("mode", Text),
                ("gn_trials", Int),
            ],
        ),
        (
            "output",
            &[("dir", Text), ("seed", Int), ("dump_matrix", Bool)],
        ),
        (
            "sweep",
            &[
                ("param1", Text),
                ("min1", Real),
                ("max1", Real),
                ("count1", Int),
                ("scale1", Text),
                ("param2", Text),
                ("min2", Real),
                ("max2", Real),
                ("count2", Int),
                ("scale2", Text),
            ],
        ),
        ("functional", &[("modes", Int), ("n", Int)]),
        ("bootstrap", &[("n", Int), ("p", Real), ("l0", Real)]),
    ]
};

fn kind_of(path: &str) -> Option<ValueKind> {
    let (sec, key) = path.split_once('.')?;
    KEYS.iter()
        .find(|(s, _)| *s == sec)?
        .1
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    /// Source line; `None` for overrides.
    pub line: Option<usize>,
}

/// Validated key/value pairs before typing, keyed by `section.key`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
    base_dir: PathBuf,
}

impl RawConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = strip_comment(raw_line).trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError {
                    key: None,
                    line: Some(line),
                    msg: "malformed section header".into(),
                })?;
                let name = name.trim();
                if !KEYS.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError {
                        key: Some(name.to_string()),
                        line: Some(line),
                        msg: "unknown section".into(),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError {
                key: None,
                line: Some(line),
                msg: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let path = match (&section, key.contains('.')) {
                (None, true) => key.to_string(),
                (Some(s), _) => format!("{s}.{key}"),
                (None, false) => {
                    return Err(ConfigError {
                        key: Some(key.to_string()),
                        line: Some(line),
                        msg: "key outside any section".into(),
                    })
                }
            };
            if kind_of(&path).is_none() {
                return Err(ConfigError {
                    key: Some(path),
                    line: Some(line),
                    msg: "unknown key".into(),
                });
            }
            let value = value.trim();
            if value.is_empty() {
                return Err(ConfigError {
                    key: Some(path),
                    line: Some(line),
                    msg: "empty value".into(),
                });
            }
            let entry = Entry {
                value: value.to_string(),
                line: Some(line),
            };
            if let Some(prev) = entries.insert(path.clone(), entry) {
                return Err(ConfigError {
                    key: Some(path),
                    line: Some(line),
                    msg: format!(
                        "duplicate key, first set on line {}",
                        prev.line.unwrap_or(0)
                    ),
                });
            }
        }
        Ok(Self {
            entries,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn get(&self, path: &str) -> Option<&Entry> {
        self.entries.get(path)
    }

    /// Replaces a numeric value, as done for sweep points.
    pub fn set_numeric(&mut self, path: &str, value: f64) -> Result<()> {
        match kind_of(path) {
            Some(k) if k.sweepable() => {
                // log-spaced integer axes land within roundoff of integers
                let value = match k {
                    ValueKind::Int
                        if (value - value.round()).abs() <= 1e-9 * value.abs().max(1.0) =>
                    {
                        value.round()
                    }
                    _ => value,
                };
                self.entries.insert(
                    path.to_string(),
                    Entry {
                        value: format!("{value:e}"),
                        line: None,
                    },
                );
                Ok(())
            }
            Some(_) => Err(err(path, None, "not a numeric parameter")),
            None => Err(err(path, None, "unknown parameter")),
        }
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }
}

/// Drops a `#` or `;` comment that is not inside a quoted string.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' | ';' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn err(key: &str, line: Option<usize>, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        key: Some(key.to_string()),
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Antiperiodic,
    Periodic,
    Bag,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Antiperiodic => "antiperiodic",
            ModelKind::Periodic => "periodic",
            ModelKind::Bag => "bag",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub length: f64,
    pub n_points: usize,
}

impl ModelConfig {
    pub fn spec(&self) -> diracfp::Result<ModelSpec> {
        match self.kind {
            ModelKind::Antiperiodic => ModelSpec::antiperiodic(self.length, self.n_points),
            ModelKind::Periodic => ModelSpec::periodic(self.length, self.n_points),
            ModelKind::Bag => ModelSpec::bag(self.length, self.n_points),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSettings {
    pub lambda: C64,
    pub p: f64,
    /// First component of `g` (or the scalar datum).
    pub g: Expr,
    /// Second component for two-component models; zero when absent.
    pub g2: Option<Expr>,
    pub g_scale: f64,
    pub a: C64,
    pub scaling: OperatorScaling,
    pub xi: f64,
    pub lambda_cap: f64,
    pub max_iter: usize,
    pub tol_cauchy: f64,
    pub tol_residual: f64,
    pub f0: Option<Expr>,
    pub f0_2: Option<Expr>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimable {
    Value(f64),
    Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSettings {
    pub n: u32,
    /// Defaults to `2n/(n-1)`.
    pub p_a: Option<f64>,
    pub c_h: f64,
    pub big_c_h: f64,
    pub iota: f64,
    pub c1: Estimable,
    pub c_half: Estimable,
    pub k_gn: Estimable,
    pub k_gn2: Estimable,
    pub k_fgn: Estimable,
    pub mode: ConditionMode,
    pub gn_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
    pub seed: u64,
    pub dump_matrix: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisScale {
    Lin,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                if i == 0 {
                    return self.min;
                }
                if i + 1 == self.count {
                    return self.max;
                }
                match self.scale {
                    AxisScale::Lin => self.min + t * (self.max - self.min),
                    AxisScale::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
}

impl SweepSpec {
    /// Grid points in row-major order, first axis slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            let vals = axis.values();
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalSettings {
    pub modes: usize,
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapSettings {
    pub n: u32,
    pub p: f64,
    pub l0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub scheme: SchemeSettings,
    pub constants: ConstantSettings,
    pub output: OutputSettings,
    pub sweep: Option<SweepSpec>,
    pub functional: FunctionalSettings,
    pub bootstrap: BootstrapSettings,
}

/// Parses and types a configuration; `sample_file` paths resolve against
/// `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig> {
    RunConfig::from_raw(&RawConfig::parse(text, base_dir)?)
}

struct Reader<'a> {
    raw: &'a RawConfig,
}

impl Reader<'_> {
    fn entry(&self, path: &str) -> Option<(&str, Option<usize>)> {
        debug_assert!(kind_of(path).is_some(), "{path} missing from the key table");
        self.raw.get(path).map(|e| (e.value.as_str(), e.line))
    }

    fn expr(&self, path: &str, v: &str, line: Option<usize>) -> Result<Expr> {
        Expr::parse(v, self.raw.base_dir()).map_err(|e| err(path, line, e.to_string()))
    }

    fn complex(&self, path: &str, default: C64) -> Result<C64> {
        let Some((v, line)) = self.entry(path) else {
            return Ok(default);
        };
        let e = self.expr(path, v, line)?;
        if !e.is_constant() {
            return Err(err(
                path,
                line,
                "expected a constant, found a field expression",
            ));
        }
        e.eval(Scope::default())
            .map_err(|e| err(path, line, e.to_string()))
    }

    fn real_opt(&self, path: &str) -> Result<Option<f64>> {
        let Some((_, line)) = self.entry(path) else {
            return Ok(None);
        };
        let v = self.complex(path, C64::new(0.0, 0.0))?;
        if v.im != 0.0 {
            return Err(err(path, line, format!("expected a real number, got {v}")));
        }
        Ok(Some(v.re))
    }

    fn real(&self, path: &str, default: f64) -> Result<f64> {
        Ok(self.real_opt(path)?.unwrap_or(default))
    }

    fn positive(&self, path: &str, default: f64) -> Result<f64> {
        let v = self.real(path, default)?;
        if !(v > 0.0) {
            return Err(err(
                path,
                self.line(path),
                format!("must be positive, got {v}"),
            ));
        }
        Ok(v)
    }

    fn int(&self, path: &str, default: u64, min: u64) -> Result<u64> {
        let Some(v) = self.real_opt(path)? else {
            return Ok(default);
        };
        let line = self.line(path);
        if v.fract() != 0.0 || v < 0.0 || v > u64::MAX as f64 {
            return Err(err(
                path,
                line,
                format!("expected a nonnegative integer, got {v}"),
            ));
        }
        let v = v as u64;
        if v < min {
            return Err(err(path, line, format!("must be at least {min}, got {v}")));
        }
        Ok(v)
    }

    fn line(&self, path: &str) -> Option<usize> {
        self.raw.get(path).and_then(|e| e.line)
    }

    fn field(&self, path: &str) -> Result<Option<Expr>> {
        match self.entry(path) {
            Some((v, line)) => self.expr(path, v, line).map(Some),
            None => Ok(None),
        }
    }

    fn text(&self, path: &str) -> Option<(&str, Option<usize>)> {
        self.entry(path)
    }

    fn estimable(&self, path: &str) -> Result<Estimable> {
        match self.entry(path) {
            Some(("estimate", _)) => Ok(Estimable::Estimate),
            Some(_) => Ok(Estimable::Value(self.positive(path, 1.0)?)),
            None => Ok(Estimable::Value(1.0)),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> std::result::Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            key: None,
            line: None,
            msg: format!("cannot read {}: {e}", path.display()),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        parse_config(&text, base)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let r = Reader { raw };

        let kind = match r.text("model.kind") {
            None | Some(("antiperiodic", _)) => ModelKind::Antiperiodic,
            Some(("periodic", _)) => ModelKind::Periodic,
            Some(("bag", _)) => ModelKind::Bag,
            Some((other, line)) => {
                return Err(err(
                    "model.kind",
                    line,
                    format!("unknown model `{other}` (antiperiodic, periodic, bag)"),
                ))
            }
        };
        let model = ModelConfig {
            kind,
            length: r.positive("model.length", 1.0)?,
            n_points: r.int("model.n_points", 256, 4)? as usize,
        };

        let p = r.real("scheme.p", 4.0)?;
        if !(p >= 2.0) {
            return Err(err(
                "scheme.p",
                r.line("scheme.p"),
                format!("must be >= 2, got {p}"),
            ));
        }
        let scaling = match r.text("scheme.R") {
            None => OperatorScaling::default(),
            Some(("auto", _)) => OperatorScaling::Auto,
            Some(_) => OperatorScaling::Fixed(r.positive("scheme.R", 1.0)?),
        };
        let tol_cauchy = r.positive(
            "scheme.tol_cauchy",
            diracfp::SchemeConfig::DEFAULT_TOL_CAUCHY,
        )?;
        let tol_residual = r.positive(
            "scheme.tol_residual",
            diracfp::SchemeConfig::DEFAULT_TOL_RESIDUAL,
        )?;
        let zero = C64::new(0.0, 0.0);
        let scheme = SchemeSettings {
            lambda: r.complex("scheme.lambda", zero)?,
            p,
            g: r.field("scheme.g")?
                .unwrap_or_else(|| Expr::parse("0", Path::new(".")).expect("literal parses")),
            g2: r.field("scheme.g2")?,
            g_scale: r.real("scheme.g_scale", 1.0)?,
            a: r.complex("scheme.a", zero)?,
            scaling,
            xi: r.positive("scheme.Xi", 1.0)?,
            lambda_cap: r.positive("scheme.Lambda", 1.0)?,
            max_iter: r.int(
                "scheme.max_iter",
                diracfp::SchemeConfig::DEFAULT_MAX_ITER as u64,
                1,
            )? as usize,
            tol_cauchy,
            tol_residual,
            f0: r.field("scheme.f0")?,
            f0_2: r.field("scheme.f0_2")?,
        };
        if kind != ModelKind::Bag {
            for key in ["scheme.g2", "scheme.f0_2"] {
                if raw.get(key).is_some() {
                    return Err(err(
                        key,
                        r.line(key),
                        "only two-component models take a second component",
                    ));
                }
            }
        }

        let n = r.int("constants.n", 2, 2)? as u32;
        let mode = match r.text("constants.mode") {
            None | Some(("C_final", _)) => ConditionMode::CFinal,
            Some(("B_explicit", _)) => ConditionMode::BExplicit,
            Some(("A_raw", _)) => ConditionMode::ARaw,
            Some((other, line)) => {
                return Err(err(
                    "constants.mode",
                    line,
                    format!("unknown mode `{other}` (C_final, B_explicit, A_raw)"),
                ))
            }
        };
        let constants = ConstantSettings {
            n,
            p_a: r.real_opt("constants.p_A")?,
            c_h: r.positive("constants.c_h", 1.0)?,
            big_c_h: r.positive("constants.C_h", 1.0)?,
            iota: r.positive("constants.iota", 1.0)?,
            c1: r.estimable("constants.c1")?,
            c_half: r.estimable("constants.c_half")?,
            k_gn: r.estimable("constants.K_GN")?,
            k_gn2: r.estimable("constants.K_GN2")?,
            k_fgn: r.estimable("constants.K_FGN")?,
            mode,
            gn_trials: r.int("constants.gn_trials", 64, 1)? as usize,
        };
        // surface window violations while the key is still known
        let mut probe = constants.base_constants();
        probe.p = p;
        probe
            .validate()
            .map_err(|e| err("constants.p_A", r.line("constants.p_A"), e.to_string()))?;

        let dump_matrix = match r.text("output.dump_matrix") {
            None | Some(("false", _)) => false,
            Some(("true", _)) => true,
            Some((other, line)) => {
                return Err(err(
                    "output.dump_matrix",
                    line,
                    format!("expected true or false, got `{other}`"),
                ))
            }
        };
        let output = OutputSettings {
            dir: r
                .text("output.dir")
                .map(|(d, _)| PathBuf::from(d.trim_matches('"'))),
            seed: r.int("output.seed", 0, 0)?,
            dump_matrix,
        };

        let sweep = Self::sweep(&r)?;
        let functional = FunctionalSettings {
            modes: r.int("functional.modes", 10, 1)? as usize,
            n: r.int("functional.n", 2, 2)? as u32,
        };
        let bootstrap = BootstrapSettings {
            n: r.int("bootstrap.n", 4, 3)? as u32,
            p: r.real("bootstrap.p", 8.0 / 3.0)?,
            l0: r.positive("bootstrap.l0", 4.0)?,
        };
        Ok(Self {
            model,
            scheme,
            constants,
            output,
            sweep,
            functional,
            bootstrap,
        })
    }

    fn sweep(r: &Reader) -> Result<Option<SweepSpec>> {
        let mut axes = Vec::new();
        for i in 1..=2 {
            let key = |k: &str| format!("sweep.{k}{i}");
            let Some((param, line)) = r.text(&key("param")) else {
                if let Some(stray) = ["min", "max", "count", "scale"]
                    .iter()
                    .map(|k| key(k))
                    .find(|k| r.raw.get(k).is_some())
                {
                    return Err(err(
                        &stray,
                        r.line(&stray),
                        format!("set without sweep.param{i}"),
                    ));
                }
                continue;
            };
            let param = param.to_string();
            match kind_of(&param) {
                Some(k) if k.sweepable() && !param.starts_with("sweep.") => {}
                _ => {
                    return Err(err(
                        &key("param"),
                        line,
                        format!("`{param}` is not a numeric parameter"),
                    ))
                }
            }
            let need = |k: &str| {
                r.real_opt(&key(k))?
                    .ok_or_else(|| err(&key(k), None, "required when the axis is defined"))
            };
            let (min, max) = (need("min")?, need("max")?);
            let count = r.int(&key("count"), 0, 2).and_then(|c| {
                if c == 0 {
                    Err(err(
                        &key("count"),
                        None,
                        "required when the axis is defined",
                    ))
                } else {
                    Ok(c as usize)
                }
            })?;
            let scale = match r.text(&key("scale")) {
                None | Some(("lin", _)) => AxisScale::Lin,
                Some(("log", _)) => AxisScale::Log,
                Some((other, l)) => {
                    return Err(err(
                        &key("scale"),
                        l,
                        format!("expected lin or log, got `{other}`"),
                    ))
                }
            };
            if scale == AxisScale::Log && !(min > 0.0 && max > 0.0) {
                return Err(err(
                    &key("min"),
                    r.line(&key("min")),
                    "log axes need positive bounds",
                ));
            }
            if axes.iter().any(|a: &Axis| a.param == param) {
                return Err(err(
                    &key("param"),
                    line,
                    "both axes sweep the same parameter",
                ));
            }
            axes.push(Axis {
                param,
                min,
                max,
                count,
                scale,
            });
        }
        Ok((!axes.is_empty()).then_some(SweepSpec { axes }))
    }

    /// Builds the datum `g_scale * (g, g2)` on the model grid.
    pub fn datum(&self, spec: &ModelSpec) -> std::result::Result<SpinorField, ConfigError> {
        let g = self
            .field_from(spec, &self.scheme.g, self.scheme.g2.as_ref(), "scheme.g")?
            .scale_real(self.scheme.g_scale);
        Ok(g)
    }

    pub fn initial(
        &self,
        spec: &ModelSpec,
    ) -> std::result::Result<Option<SpinorField>, ConfigError> {
        match &self.scheme.f0 {
            None if self.scheme.f0_2.is_some() => {
                Err(err("scheme.f0_2", None, "set without scheme.f0"))
            }
            None => Ok(None),
            Some(f0) => self
                .field_from(spec, f0, self.scheme.f0_2.as_ref(), "scheme.f0")
                .map(Some),
        }
    }

    fn field_from(
        &self,
        spec: &ModelSpec,
        first: &Expr,
        second: Option<&Expr>,
        key: &str,
    ) -> std::result::Result<SpinorField, ConfigError> {
        let rank = spec.rank();
        let length = spec.grid.length();
        let mut failure = None;
        let field = SpinorField::from_fn(spec.grid, rank, |x, out| {
            let scope = Scope {
                x: Some(x),
                length: Some(length),
            };
            let exprs = [Some(first), second];
            for (c, slot) in out.iter_mut().enumerate() {
                *slot = match exprs.get(c).copied().flatten() {
                    Some(e) => match e.eval(scope) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e.to_string());
                            C64::new(0.0, 0.0)
                        }
                    },
                    None => C64::new(0.0, 0.0),
                };
            }
        });
        match failure {
            Some(msg) => Err(err(key, None, msg)),
            None => Ok(field),
        }
    }
}

impl ConstantSettings {
    /// Constants with configured values; estimable ones set to their value
    /// or 1 when they await estimation. Provenance stays `assumed`.
    pub fn base_constants(&self) -> AnalyticConstants {
        let mut k = AnalyticConstants::new(self.n);
        if let Some(p_a) = self.p_a {
            k.p_a = p_a;
        }
        k.c_h = self.c_h;
        k.big_c_h = self.big_c_h;
        let val = |e: Estimable| match e {
            Estimable::Value(v) => v,
            Estimable::Estimate => 1.0,
        };
        k.c1 = val(self.c1);
        k.c_half = val(self.c_half);
        k.k_gn = val(self.k_gn);
        k.k_gn2 = val(self.k_gn2);
        k.k_fgn = val(self.k_fgn);
        k
    }
}
