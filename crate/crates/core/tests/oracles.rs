//! Closed-form oracles exercised through the public API.

use std::f64::consts::PI;

use diracfp::analysis::{
    bootstrap_exponents, check_conditions, derive_exponents, variational_functional,
    AnalyticConstants, ConditionMode,
};
use diracfp::spectral::estimate_constants;
use diracfp::{
    assemble, boundary_residual, decompose, lp_norm, nonlinearity, run, scale_problem,
    slobodeckij_norm, verify_solution, w1q_norm, Grid1D, ModelSpec, OperatorScaling, SchemeConfig,
    SpectralData, SpinorField, Verdict, C64,
};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn spectral(spec: &ModelSpec) -> SpectralData {
    decompose(&assemble(spec).unwrap()).unwrap()
}

fn mode(grid: Grid1D, beta: f64, k: f64) -> SpinorField {
    SpinorField::scalar(grid, move |x| C64::from_polar(beta, k * PI * x))
}

fn distinct_moduli(s: &SpectralData, count: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for l in s.eigenvalues() {
        let m = l.abs();
        if out.last().is_none_or(|&last| m - last > 1e-9 * m.max(1.0)) {
            out.push(m);
        }
        if out.len() == count {
            break;
        }
    }
    out
}

#[test]
fn norms_of_unit_modulus_fields() {
    let g = Grid1D::interval(1.0, 257).unwrap();
    let f = mode(g, 1.0, 1.0);
    assert!((lp_norm(&f, 2.0).unwrap() - 1.0).abs() < 1e-12);
    assert!((lp_norm(&f, 4.0).unwrap() - 1.0).abs() < 1e-12);
    assert!(
        nonlinearity(&f, 6.0)
            .unwrap()
            .sub_field(&f)
            .unwrap()
            .l2_norm()
            < 1e-14
    );

    let circle = Grid1D::circle(1.0, 256).unwrap();
    let e2 = mode(circle, 1.0, 2.0);
    let expected = (1.0 + (2.0 * PI).powi(2)).sqrt();
    assert!((w1q_norm(&e2, 2.0).unwrap() - expected).abs() < 1e-6);

    let two = SpinorField::constant(circle, &[c(2.0, 0.0)]);
    assert!(nonlinearity(&two, 4.0)
        .unwrap()
        .values()
        .iter()
        .all(|v| *v == c(8.0, 0.0)));
    assert!((slobodeckij_norm(&two, 0.5).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn slobodeckij_is_resolution_stable() {
    let vals: Vec<f64> = [128, 256]
        .iter()
        .map(|&n| slobodeckij_norm(&mode(Grid1D::circle(1.0, n).unwrap(), 1.0, 2.0), 0.5).unwrap())
        .collect();
    assert!(
        vals[0] / vals[1] < 1.1 && vals[1] / vals[0] < 1.1,
        "{vals:?}"
    );
}

#[test]
fn model_spectra() {
    let anti = spectral(&ModelSpec::antiperiodic(1.0, 256).unwrap());
    for (k, m) in distinct_moduli(&anti, 5).iter().enumerate() {
        let exact = (2 * k + 1) as f64 * PI;
        assert!((m - exact).abs() < 1e-6 * exact);
    }
    assert!(anti.invertible());

    let per = spectral(&ModelSpec::periodic(2.0 * PI, 256).unwrap());
    assert!(!per.invertible());
    assert!(per.lambda1().abs() < 1e-9);
    for (k, m) in distinct_moduli(&per, 4).iter().enumerate() {
        assert!((m - k as f64).abs() < 1e-8);
    }

    let l = 2.0;
    let bag_op = assemble(&ModelSpec::bag(l, 128).unwrap()).unwrap();
    let norm = bag_op.matrix().camax();
    assert!(bag_op.hermiticity_defect() <= 1e-12 * norm);
    let bag = decompose(&bag_op).unwrap();
    for (k, m) in distinct_moduli(&bag, 4).iter().enumerate() {
        let exact = (k as f64 + 0.5) * PI / l;
        assert!((m - exact).abs() < 1e-6 * exact, "k={k}: {m} vs {exact}");
    }
}

#[test]
fn operator_on_modes() {
    let spec = ModelSpec::antiperiodic(1.0, 256).unwrap();
    let s = spectral(&spec);
    let op = s.operator().unwrap();
    let f = mode(spec.grid, 1.0, 1.0);
    let df = op.apply_d(&f).unwrap();
    assert!(df.sub_field(&f.scale_real(PI)).unwrap().l2_norm() < 1e-6);

    let inv = s.apply_inverse(&f, c(0.0, 0.0)).unwrap();
    assert!(inv.sub_field(&f.scale_real(1.0 / PI)).unwrap().l2_norm() < 1e-9);
    let half = s.apply_fractional(0.5, &f).unwrap();
    assert!(half.sub_field(&f.scale_real(PI.sqrt())).unwrap().l2_norm() < 1e-9);
    let (plus, minus) = s.split_pm(&f).unwrap();
    assert!(plus.sub_field(&f).unwrap().l2_norm() < 1e-9);
    assert!(minus.l2_norm() < 1e-9);
    let gn = s.graph_norm(0.5, &f).unwrap();
    assert!((gn - (1.0 + PI).sqrt()).abs() < 1e-9);
}

#[test]
fn boundary_residual_oracles() {
    let spec = ModelSpec::antiperiodic(1.0, 64).unwrap();
    let g = mode(spec.grid, 0.3, 2.0);
    assert_eq!(boundary_residual(&spec, &g, &g).unwrap(), 0.0);
    let shifted = g
        .add_field(&SpinorField::constant(spec.grid, &[c(1.0, 0.0)]))
        .unwrap();
    assert!((boundary_residual(&spec, &shifted, &g).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn empirical_constants_dominate_eigenfunction_quotients() {
    let s = spectral(&ModelSpec::antiperiodic(1.0, 96).unwrap());
    let k = estimate_constants(&s).unwrap();
    for j in 0..6 {
        let phi = s.eigenfunction(j).unwrap();
        let lam = s.eigenvalues()[j];
        let w = w1q_norm(&phi, 2.0).unwrap();
        let q = w * w / (1.0 + lam * lam);
        assert!(k.c1_emp >= q * (1.0 - 1e-9), "mode {j}: {q} > {}", k.c1_emp);
    }
    assert!((k.c_half_formula - 2.0 * k.c1_emp).abs() < 1e-12);
}

#[test]
fn linear_case_and_exact_solution() {
    let spec = ModelSpec::antiperiodic(1.0, 256).unwrap();
    let s = spectral(&spec);
    let g = SpinorField::scalar(spec.grid, |x| c(1.0 + x, 0.5 * (PI * x).sin()));
    let rep = run(&s, &SchemeConfig::new(c(0.0, 0.0), 4.0, g.clone())).unwrap();
    assert_eq!(rep.verdict, Verdict::Converged);
    assert_eq!(rep.iterations(), 1);
    assert!(rep.ratios.is_empty());
    let cfg = SchemeConfig::new(c(0.0, 0.0), 4.0, g);
    let (pde, bnd) = verify_solution(&s, &cfg, rep.solution()).unwrap();
    assert!(pde <= 1e-8 && bnd <= 1e-12, "pde {pde:e}, bnd {bnd:e}");

    let beta: f64 = 0.1;
    let exact = mode(spec.grid, beta, 1.0);
    let cfg = SchemeConfig::new(c(PI * beta.powf(-2.0), 0.0), 4.0, exact.clone());
    let (pde, bnd) = verify_solution(&s, &cfg, &exact).unwrap();
    assert!(pde <= 1e-6 && bnd <= 1e-12);
}

#[test]
fn contraction_run_and_scan() {
    let spec = ModelSpec::antiperiodic(1.0, 128).unwrap();
    let s = spectral(&spec);
    let g = mode(spec.grid, 0.1, 1.0);
    let mut cfg = SchemeConfig::new(c(0.05 * PI, 0.0), 4.0, g);
    cfg.scaling = OperatorScaling::Auto;
    let rep = run(&s, &cfg).unwrap();
    assert_eq!(rep.verdict, Verdict::Converged);
    assert!(rep.ratios.iter().all(|&r| r < 1.0));

    let mut k = AnalyticConstants::new(2);
    k.p = 4.0;
    k.p_a = 4.0;
    k.lambda1_abs = PI;
    let threshold = check_conditions(&k, ConditionMode::CFinal)
        .unwrap()
        .c3_ratio_threshold
        * PI;

    // scanning upward eventually breaks convergence, never below the threshold
    let mut transition = None;
    for j in 0..40 {
        let lam = 0.5 * PI * 1.5f64.powi(j);
        cfg.lambda = c(lam, 0.0);
        cfg.max_iter = 100;
        if run(&s, &cfg).unwrap().verdict != Verdict::Converged {
            transition = Some(lam);
            break;
        }
    }
    let transition = transition.expect("large lambda must fail to converge");
    assert!(transition >= threshold);
}

#[test]
fn scaling_identity_and_exponent() {
    let g = mode(Grid1D::interval(1.0, 32).unwrap(), 1.0, 1.0);
    let cfg = SchemeConfig::new(c(0.2, 0.0), 4.0, g.clone());
    let same = scale_problem(&cfg, 1.0).unwrap();
    assert_eq!(same.g, cfg.g);
    assert_eq!(same.lambda, cfg.lambda);
    let big = scale_problem(&cfg, 16.0).unwrap();
    assert!(big.g.sub_field(&g.scale_real(0.25)).unwrap().l2_norm() < 1e-15);
    assert_eq!(big.lambda, c(3.2, 0.0));
    assert!(scale_problem(&SchemeConfig::new(c(0.2, 0.0), 2.0, g), 2.0).is_err());
}

#[test]
fn condition_and_bootstrap_arithmetic() {
    let mut k = AnalyticConstants::new(2);
    k.p = 4.0;
    k.p_a = 4.0;
    let ex = derive_exponents(&k).unwrap();
    assert_eq!(
        (ex.theta_a, ex.theta_b, ex.p_b, ex.kappa),
        (0.5, 1.0, 4.0, 6.0)
    );
    let t = bootstrap_exponents(4, 8.0 / 3.0, 4.0).unwrap();
    assert_eq!(t.m_star, Some(3));
    assert!((t.reciprocals[3] + 11.0 / 54.0).abs() < 1e-12);
}

#[test]
fn functional_on_bag_eigenfunctions() {
    let s = spectral(&ModelSpec::bag(1.0, 128).unwrap());
    for k in 0..6 {
        let phi = s.eigenfunction(k).unwrap();
        let f = variational_functional(&s, &phi, 3).unwrap();
        let lam = s.eigenvalues()[k].abs();
        // bag modes (cos, i sin) have constant modulus, so F recovers |lambda|
        assert!((f - lam).abs() <= 1e-6 * lam, "k={k}: {f} vs {lam}");
        let scaled = variational_functional(&s, &phi.scale_real(4.0), 3).unwrap();
        assert!((scaled - f).abs() <= 1e-10 * f, "k={k}, lambda={lam}");
    }
}
