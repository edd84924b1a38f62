//! Shared work behind the subcommands: building models, estimating
//! constants, and running a single solve. Expensive results are memoized so
//! sweep points over the same model reuse them.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::sync::{Arc, Mutex, OnceLock};

use anyhow::{anyhow, Context, Result};
use diracfp::analysis::{
    certify, estimate_gn_ratio, AnalyticConstants, Certification, GnEstimate, GnVariant, Provenance,
};
use diracfp::spectral::{estimate_constants_with, EmpiricalConstants};
use diracfp::{assemble, decompose, run, IterationReport, ModelSpec, SchemeConfig, SpectralData};
use serde::Serialize;

use crate::config::{Estimable, ModelConfig, RunConfig};

type Slot<V> = Arc<OnceLock<std::result::Result<V, String>>>;

/// Concurrent memo table; each key is computed once, other callers wait.
struct Memo<K, V> {
    slots: Mutex<HashMap<K, Slot<V>>>,
}

impl<K: Eq + Hash, V: Clone> Memo<K, V> {
    fn new() -> Self {
        Self {
            slots: Mutex::new(HashMap::new()),
        }
    }

    fn get(&self, key: K, f: impl FnOnce() -> Result<V>) -> Result<V> {
        let slot = self
            .slots
            .lock()
            .expect("memo lock poisoned")
            .entry(key)
            .or_default()
            .clone();
        slot.get_or_init(|| f().map_err(|e| format!("{e:#}")))
            .clone()
            .map_err(|e| anyhow!(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct ModelKey {
    kind: &'static str,
    length: u64,
    n_points: usize,
}

impl From<&ModelConfig> for ModelKey {
    fn from(m: &ModelConfig) -> Self {
        Self {
            kind: m.kind.as_str(),
            length: m.length.to_bits(),
            n_points: m.n_points,
        }
    }
}

pub struct Cache {
    spectra: Memo<ModelKey, Arc<SpectralData>>,
    empirical: Memo<(ModelKey, u64, u64), EmpiricalConstants>,
    gn: Memo<(ModelKey, String, usize, u64), GnEstimate>,
}

impl Default for Cache {
    fn default() -> Self {
        Self {
            spectra: Memo::new(),
            empirical: Memo::new(),
            gn: Memo::new(),
        }
    }
}

impl Cache {
    pub fn spectral(&self, model: &ModelConfig) -> Result<Arc<SpectralData>> {
        self.spectra.get(model.into(), || {
            let spec = model.spec()?;
            let op = assemble(&spec).context("assembling the operator")?;
            Ok(Arc::new(
                decompose(&op).context("decomposing the operator")?,
            ))
        })
    }

    pub fn empirical(
        &self,
        model: &ModelConfig,
        c_h: f64,
        iota: f64,
    ) -> Result<EmpiricalConstants> {
        self.empirical
            .get((model.into(), c_h.to_bits(), iota.to_bits()), || {
                let s = self.spectral(model)?;
                estimate_constants_with(&s, c_h, iota).context("estimating c1 and c_half")
            })
    }

    fn gn(
        &self,
        model: &ModelConfig,
        variant: GnVariant,
        trials: usize,
        seed: u64,
    ) -> Result<GnEstimate> {
        let key = (model.into(), format!("{variant:?}"), trials, seed);
        self.gn.get(key, || {
            let grid = model.spec()?.grid;
            estimate_gn_ratio(grid, variant, trials, seed)
                .with_context(|| format!("estimating {variant:?}"))
        })
    }
}

/// Estimates behind the constants that were requested as `estimate`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Estimates {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalConstants>,
    pub gn: BTreeMap<String, GnEstimate>,
}

/// Configured constants with estimates filled in and flagged.
pub fn resolve_constants(cfg: &RunConfig, cache: &Cache) -> Result<(AnalyticConstants, Estimates)> {
    let cs = &cfg.constants;
    let mut k = cs.base_constants();
    k.p = cfg.scheme.p;
    let mut est = Estimates::default();
    if cs.c1 == Estimable::Estimate || cs.c_half == Estimable::Estimate {
        let e = cache.empirical(&cfg.model, cs.c_h, cs.iota)?;
        if cs.c1 == Estimable::Estimate {
            k.c1 = e.c1_emp;
            k.set_provenance("c1", Provenance::EmpiricalLowerBound);
        }
        if cs.c_half == Estimable::Estimate {
            k.c_half = e.c_half_emp;
            k.set_provenance("c_half", Provenance::EmpiricalLowerBound);
        }
        est.empirical = Some(e);
    }
    let gn_targets = [
        ("K_GN", cs.k_gn, GnVariant::First { n: cs.n, p: k.p }),
        (
            "K_GN2",
            cs.k_gn2,
            GnVariant::Second {
                n: cs.n,
                p_a: k.p_a,
            },
        ),
        (
            "K_FGN",
            cs.k_fgn,
            GnVariant::Fractional {
                n: cs.n,
                p_a: k.p_a,
            },
        ),
    ];
    for (name, setting, variant) in gn_targets {
        if setting != Estimable::Estimate {
            continue;
        }
        let g = cache.gn(&cfg.model, variant, cs.gn_trials, cfg.output.seed)?;
        match name {
            "K_GN" => k.k_gn = g.ratio,
            "K_GN2" => k.k_gn2 = g.ratio,
            _ => k.k_fgn = g.ratio,
        }
        k.set_provenance(name, Provenance::EmpiricalLowerBound);
        est.gn.insert(name.to_string(), g);
    }
    Ok((k, est))
}

/// The model, its decomposition, and the typed scheme configuration.
pub struct Problem {
    pub spec: ModelSpec,
    pub spectral: Arc<SpectralData>,
    pub scheme: SchemeConfig,
}

pub fn problem(cfg: &RunConfig, cache: &Cache) -> Result<Problem> {
    let spec = cfg.model.spec()?;
    let spectral = cache.spectral(&cfg.model)?;
    let s = &cfg.scheme;
    let mut scheme = SchemeConfig::new(s.lambda, s.p, cfg.datum(&spec)?);
    scheme.a = s.a;
    scheme.scaling = s.scaling;
    scheme.f0 = cfg.initial(&spec)?;
    scheme.xi = s.xi;
    scheme.lambda_cap = s.lambda_cap;
    scheme.max_iter = s.max_iter;
    scheme.tol_cauchy = s.tol_cauchy;
    scheme.tol_residual = s.tol_residual;
    Ok(Problem {
        spec,
        spectral,
        scheme,
    })
}

pub struct SolveOutcome {
    pub problem: Problem,
    pub report: IterationReport,
    /// `Err` carries why the conditions could not be evaluated.
    pub certification: std::result::Result<Certification, String>,
    pub estimates: Estimates,
}

impl SolveOutcome {
    pub fn certified(&self) -> Option<bool> {
        self.certification.as_ref().ok().map(|c| c.certified)
    }
}

pub fn solve(cfg: &RunConfig, cache: &Cache) -> Result<SolveOutcome> {
    let problem = problem(cfg, cache)?;
    let (base, estimates) = resolve_constants(cfg, cache)?;
    let certification = certify(
        &problem.spectral,
        &problem.scheme,
        &base,
        cfg.constants.mode,
    )
    .map_err(|e| e.to_string());
    let report = run(&problem.spectral, &problem.scheme).context("running the iteration")?;
    Ok(SolveOutcome {
        problem,
        report,
        certification,
        estimates,
    })
}
