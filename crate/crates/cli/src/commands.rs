//! Subcommand implementations. Each writes its files into `out` and
//! returns the paths it created.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use diracfp::analysis::{
    bootstrap_exponents, check_conditions, problem_constants, variational_functional,
};
use diracfp::format_float;
use serde::Serialize;
use serde_json::json;

use crate::config::{RawConfig, RunConfig};
use crate::pipeline::{self, Cache};
use crate::sweep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Spectrum,
    Solve,
    Check,
    Sweep,
    Bootstrap,
    Functional,
}

pub struct RunContext<'a> {
    pub raw: &'a RawConfig,
    pub cfg: &'a RunConfig,
    pub out: &'a Path,
    pub workers: usize,
}

pub fn run_command(cmd: Command, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(ctx.out)
        .with_context(|| format!("creating output directory {}", ctx.out.display()))?;
    let cache = Cache::default();
    match cmd {
        Command::Spectrum => spectrum(ctx, &cache),
        Command::Solve => solve(ctx, &cache),
        Command::Check => check(ctx, &cache),
        Command::Sweep => sweep::run_sweep(ctx.raw, ctx.cfg, ctx.out, ctx.workers),
        Command::Bootstrap => bootstrap(ctx),
        Command::Functional => functional(ctx, &cache),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn maybe_dump(
    ctx: &RunContext,
    spectral: &diracfp::SpectralData,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    if ctx.cfg.output.dump_matrix {
        let path = ctx.out.join("operator.bin");
        let mut w = create(&path)?;
        spectral.operator()?.write_dense_dump(&mut w)?;
        w.flush()?;
        files.push(path);
    }
    Ok(())
}

fn spectrum(ctx: &RunContext, cache: &Cache) -> Result<Vec<PathBuf>> {
    let cfg = ctx.cfg;
    let s = cache.spectral(&cfg.model)?;
    let mut files = Vec::new();

    let csv_path = ctx.out.join("spectrum.csv");
    let mut w = csv::Writer::from_writer(create(&csv_path)?);
    w.write_record(["k", "lambda_k"])?;
    for (k, l) in s.eigenvalues().iter().enumerate() {
        w.write_record([k.to_string(), format_float(*l)])?;
    }
    w.flush()?;
    files.push(csv_path);

    let mut moduli: Vec<f64> = Vec::new();
    for l in s.eigenvalues() {
        let m = l.abs();
        if moduli
            .last()
            .is_none_or(|&last| m - last > 1e-9 * m.max(1.0))
        {
            moduli.push(m);
        }
        if moduli.len() == 5 {
            break;
        }
    }
    let emp = cache.empirical(&cfg.model, cfg.constants.c_h, cfg.constants.iota)?;
    let json_path = ctx.out.join("spectrum.json");
    write_json(
        &json_path,
        &json!({
            "model": cfg.model.kind.as_str(),
            "length": cfg.model.length,
            "n_points": cfg.model.n_points,
            "dim": s.dim(),
            "lambda1": s.lambda1(),
            "invertible": s.invertible(),
            "smallest_moduli": moduli,
            "c1_emp": emp.c1_emp,
            "c_half_emp": emp.c_half_emp,
            "c_half_formula": emp.c_half_formula,
            "empirical_lower_bound": true,
        }),
    )?;
    files.push(json_path);
    maybe_dump(ctx, &s, &mut files)?;
    Ok(files)
}

fn solve(ctx: &RunContext, cache: &Cache) -> Result<Vec<PathBuf>> {
    let out = pipeline::solve(ctx.cfg, cache)?;
    let mut files = Vec::new();

    let trace = ctx.out.join("trace.csv");
    out.report.write_trace_csv(create(&trace)?)?;
    files.push(trace);

    let (cert_detail, cert_error) = match &out.certification {
        Ok(c) => (
            Some(json!({
                "mode": c.report.mode,
                "all_satisfied": c.report.all_satisfied,
                "scaling_matches": c.scaling_matches,
                "kappa": c.report.kappa,
                "c3_ratio_threshold": c.report.c3_ratio_threshold,
                "conditions": c.report.conditions,
            })),
            None,
        ),
        Err(e) => (None, Some(e.clone())),
    };
    let mut report = serde_json::to_value(out.report.summary(out.certified()))?;
    let obj = report.as_object_mut().expect("summary is an object");
    obj.insert(
        "divergence_reason".into(),
        json!(out.report.divergence_reason),
    );
    obj.insert("certification".into(), json!(cert_detail));
    obj.insert("certification_error".into(), json!(cert_error));
    obj.insert("estimates".into(), serde_json::to_value(&out.estimates)?);
    let report_path = ctx.out.join("report.json");
    write_json(&report_path, &report)?;
    files.push(report_path);

    let sol = ctx.out.join("solution.csv");
    out.report.solution().write_csv(create(&sol)?)?;
    files.push(sol);
    maybe_dump(ctx, &out.problem.spectral, &mut files)?;
    Ok(files)
}

fn check(ctx: &RunContext, cache: &Cache) -> Result<Vec<PathBuf>> {
    let cfg = ctx.cfg;
    let problem = pipeline::problem(cfg, cache)?;
    let (base, estimates) = pipeline::resolve_constants(cfg, cache)?;
    let k = problem_constants(&problem.spectral, &problem.scheme, &base)?;
    let report = check_conditions(&k, cfg.constants.mode)?;
    let scaling = problem.scheme.scaling.resolve(&problem.spectral).ok();
    let path = ctx.out.join("check.json");
    write_json(
        &path,
        &json!({
            "report": report,
            "R": scaling,
            "estimates": estimates,
        }),
    )?;
    Ok(vec![path])
}

fn bootstrap(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let b = ctx.cfg.bootstrap;
    let t = bootstrap_exponents(b.n, b.p, b.l0)?;
    let csv_path = ctx.out.join("bootstrap.csv");
    let mut w = csv::Writer::from_writer(create(&csv_path)?);
    w.write_record(["M", "inv_l", "closed_form", "l"])?;
    for (m, (r, c)) in t.reciprocals.iter().zip(&t.closed_form).enumerate() {
        let l = if *r > 0.0 {
            format_float(1.0 / r)
        } else {
            "inf".into()
        };
        w.write_record([m.to_string(), format_float(*r), format_float(*c), l])?;
    }
    w.flush()?;
    let json_path = ctx.out.join("bootstrap.json");
    write_json(
        &json_path,
        &json!({
            "n": t.n,
            "p": t.p,
            "l0": t.l0,
            "m_star": t.m_star,
            "max_deviation": t.max_deviation,
        }),
    )?;
    Ok(vec![csv_path, json_path])
}

fn functional(ctx: &RunContext, cache: &Cache) -> Result<Vec<PathBuf>> {
    let f = ctx.cfg.functional;
    let s = cache.spectral(&ctx.cfg.model)?;
    let path = ctx.out.join("functional.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["k", "lambda_k", "F", "rel_error"])?;
    for k in 0..f.modes.min(s.dim()) {
        let lam = s.eigenvalues()[k];
        let phi = s.eigenfunction(k)?;
        let (val, rel) = match variational_functional(&s, &phi, f.n) {
            Ok(v) => (
                format_float(v),
                format_float(((v - lam.abs()) / lam.abs()).abs()),
            ),
            // zero modes have a vanishing pairing
            Err(diracfp::Error::DegeneratePairing(_)) => (String::new(), String::new()),
            Err(e) => return Err(e.into()),
        };
        w.write_record([k.to_string(), format_float(lam), val, rel])?;
    }
    w.flush()?;
    Ok(vec![path])
}
