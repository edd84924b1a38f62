//! Parameter sweeps: every grid point is a full solve with the swept values
//! substituted into the configuration. Points run on a bounded worker pool
//! and rows are assembled by grid index.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use diracfp::format_float;
use rayon::prelude::*;

use crate::config::{RawConfig, RunConfig};
use crate::pipeline::{self, Cache};

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<f64>,
    pub verdict: String,
    pub iterations: Option<usize>,
    pub pde_residual: Option<f64>,
    pub boundary_residual: Option<f64>,
    pub max_ratio: Option<f64>,
    pub certified: Option<bool>,
    pub error: Option<String>,
}

fn evaluate(
    raw: &RawConfig,
    params: &[String],
    values: &[f64],
    seed: u64,
    cache: &Cache,
) -> Result<SweepRow> {
    let mut raw = raw.clone();
    for (p, v) in params.iter().zip(values) {
        raw.set_numeric(p, *v)?;
    }
    let mut cfg = RunConfig::from_raw(&raw)?;
    cfg.output.seed = seed;
    let out = pipeline::solve(&cfg, cache)?;
    let r = &out.report;
    Ok(SweepRow {
        index: 0,
        values: values.to_vec(),
        verdict: r.verdict.as_str().to_string(),
        iterations: Some(r.iterations()),
        pde_residual: Some(r.pde_residual),
        boundary_residual: Some(r.boundary_residual),
        max_ratio: r.max_ratio(),
        certified: out.certified(),
        error: None,
    })
}

/// Evaluates all points of `cfg.sweep` with at most `workers` threads.
pub fn sweep_rows(
    raw: &RawConfig,
    cfg: &RunConfig,
    workers: usize,
) -> Result<(Vec<String>, Vec<SweepRow>)> {
    let Some(spec) = &cfg.sweep else {
        bail!("the sweep command needs a [sweep] section with param1/min1/max1/count1");
    };
    let params: Vec<String> = spec.axes.iter().map(|a| a.param.clone()).collect();
    let points = spec.points();
    let cache = Cache::default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("starting the worker pool")?;
    let seed = cfg.output.seed;
    let rows = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(index, values)| {
                let mut row =
                    evaluate(raw, &params, values, seed, &cache).unwrap_or_else(|e| SweepRow {
                        index,
                        values: values.clone(),
                        verdict: "error".into(),
                        iterations: None,
                        pde_residual: None,
                        boundary_residual: None,
                        max_ratio: None,
                        certified: None,
                        error: Some(format!("{e:#}")),
                    });
                row.index = index;
                row
            })
            .collect::<Vec<_>>()
    });
    Ok((params, rows))
}

pub fn run_sweep(
    raw: &RawConfig,
    cfg: &RunConfig,
    out: &Path,
    workers: usize,
) -> Result<Vec<PathBuf>> {
    let (params, rows) = sweep_rows(raw, cfg, workers)?;
    let path = out.join("sweep.csv");
    let mut w =
        csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["index".to_string()];
    header.extend(params.iter().cloned());
    header.extend(
        [
            "verdict",
            "iterations",
            "pde_residual",
            "boundary_residual",
            "max_ratio",
            "certified",
            "error",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    for row in &rows {
        let mut rec = vec![row.index.to_string()];
        rec.extend(row.values.iter().map(|&v| format_float(v)));
        rec.push(row.verdict.clone());
        rec.push(row.iterations.map(|i| i.to_string()).unwrap_or_default());
        rec.push(opt(row.pde_residual));
        rec.push(opt(row.boundary_residual));
        rec.push(opt(row.max_ratio));
        rec.push(row.certified.map(|c| c.to_string()).unwrap_or_default());
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(vec![path])
}
