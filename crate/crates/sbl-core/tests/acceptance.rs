//! Acceptance gate: every release criterion of the verification engine, one
//! test per criterion, each printing a single pass/fail line. Tolerances are
//! pinned here in code.
//!
//! Criteria:
//!   1. structure equations, 3-dimensional base, five metrics, s in {1, 2},
//!      dual backend at 1e-7 and finite differences at 1e-4;
//!   2. the three n = 1 equations on the three 2-dimensional charts;
//!   3. constant-curvature specializations (r = 2c, R alpha2 = -c theta ^
//!      alpha1, closed Lambda1, the Lambda2 ideal relation);
//!   4. Hodge star and codifferential tables plus Laplacian eigenforms;
//!   5. rho machinery on heisenberg and perturbed;
//!   6. fiber integrals: exact values, closed forms, flagged mismatches;
//!   7. Ricci classification;
//!   8. Weingarten functional and Gauss-lift pullbacks;
//!   9. byte-identical reports under identical configuration.

use sbl_core::bundle::adapted_frame;
use sbl_core::eds::{build_system, curvature_correction, scalar_invariants, RicciType};
use sbl_core::forms::{restricted_norm, restricted_residual};
use sbl_core::lagrangian::InvariantLagrangian;
use sbl_core::metric::Backend;
use sbl_core::report::{RunConfig, Tolerances, Verdict};
use sbl_core::sampling::sample_points;
use sbl_core::suites::{run_suites, SUITE_NAMES};
use sbl_core::surface::{weingarten_functional, Branch, SurfaceImmersion};
use sbl_core::ChartMetric;

const SEED: u64 = 42;
const SAMPLES: usize = 30;

fn criterion_line(id: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {}: {} -- {}",
        id,
        if pass { "PASS" } else { "FAIL" },
        detail
    );
    assert!(pass, "criterion {id} failed: {detail}");
}

fn config(metric: &str, c: Option<f64>, eps: Option<f64>, s: f64, backend: Backend, suites: &[&str]) -> RunConfig {
    let m = ChartMetric::by_name(metric, c, eps).expect("catalog metric");
    RunConfig {
        metric: metric.into(),
        c,
        eps,
        s,
        base_dim: m.dim,
        samples: SAMPLES,
        seed: SEED,
        backend: backend.name().into(),
        suites: suites.iter().map(|s| s.to_string()).collect(),
        n_theta: 32,
        n_z: 16,
        tolerances: Tolerances::for_backend(backend),
        extra: Default::default(),
    }
}

const METRICS_3D: [(&str, Option<f64>, Option<f64>); 5] = [
    ("euclidean3", None, None),
    ("sphere3", Some(1.0), None),
    ("hyperbolic3", Some(-1.0), None),
    ("heisenberg", None, None),
    ("perturbed", None, Some(0.05)),
];

#[test]
fn criterion_1_structure_equations_n2() {
    let mut worst_dual: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    for (metric, c, eps) in METRICS_3D {
        for s in [1.0, 2.0] {
            for backend in [Backend::Dual, Backend::FiniteDiff] {
                let cfg = config(metric, c, eps, s, backend, &["structure"]);
                let rep = run_suites(&cfg).expect("structure suite");
                let tol = match backend {
                    Backend::FiniteDiff => 1e-4,
                    _ => 1e-7,
                };
                for rec in rep
                    .records
                    .iter()
                    .filter(|r| r.id.starts_with("structure.dalpha"))
                {
                    assert!(
                        rec.max_residual <= tol,
                        "{metric} s={s} {:?} {}: {} > {tol}",
                        backend,
                        rec.id,
                        rec.max_residual
                    );
                    match backend {
                        Backend::FiniteDiff => worst_fd = worst_fd.max(rec.max_residual),
                        _ => worst_dual = worst_dual.max(rec.max_residual),
                    }
                }
            }
        }
    }
    criterion_line(
        "1 (structure equations, n = 2)",
        worst_dual <= 1e-7 && worst_fd <= 1e-4,
        &format!("worst residual: dual {worst_dual:.3e} (<= 1e-7), fd {worst_fd:.3e} (<= 1e-4), 5 metrics, s in {{1, 2}}, 30 samples"),
    );
}

#[test]
fn criterion_2_structure_equations_n1() {
    let mut worst_dual: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    for (metric, c) in [("sphere2d", Some(1.0)), ("hyperbolic2d", Some(-1.0)), ("flat2d", None)] {
        for backend in [Backend::Dual, Backend::FiniteDiff] {
            let cfg = config(metric, c, None, 1.0, backend, &["2d"]);
            let rep = run_suites(&cfg).expect("2d suite");
            let tol = match backend {
                Backend::FiniteDiff => 1e-4,
                _ => 1e-7,
            };
            let eqs = ["twod.dtheta", "twod.dalpha0", "twod.dalpha1", "twod.general"];
            for rec in rep.records.iter().filter(|r| eqs.contains(&r.id.as_str())) {
                assert!(
                    rec.max_residual <= tol,
                    "{metric} {:?} {}: {}",
                    backend,
                    rec.id,
                    rec.max_residual
                );
                match backend {
                    Backend::FiniteDiff => worst_fd = worst_fd.max(rec.max_residual),
                    _ => worst_dual = worst_dual.max(rec.max_residual),
                }
            }
        }
    }
    criterion_line(
        "2 (structure equations, n = 1)",
        worst_dual <= 1e-7 && worst_fd <= 1e-4,
        &format!("round sphere, hyperbolic disc, flat chart: dual {worst_dual:.3e}, fd {worst_fd:.3e}"),
    );
}

#[test]
fn criterion_3_constant_curvature_specializations() {
    // r - 2c <= 1e-8 pointwise
    let mut worst_r: f64 = 0.0;
    for (metric, c) in [("sphere3", 1.0), ("hyperbolic3", -1.0)] {
        let m = ChartMetric::by_name(metric, Some(c), None).unwrap();
        for p in sample_points(&m, 1.3, SAMPLES, SEED).unwrap() {
            let si = scalar_invariants(&m, &p).unwrap();
            worst_r = worst_r.max((si.r - 2.0 * c).abs());
        }
    }

    // R alpha2 + c theta ^ alpha1 <= 1e-7
    let mut worst_ra: f64 = 0.0;
    for (metric, c) in [("sphere3", 1.0), ("hyperbolic3", -1.0), ("euclidean3", 0.0)] {
        let m = ChartMetric::by_name(metric, if c == 0.0 { None } else { Some(c) }, None).unwrap();
        for s in [1.0, 2.0] {
            let sys = build_system(&m, s).unwrap();
            let ra2 = curvature_correction(&m, 2).unwrap();
            let want = sys.theta.wedge(&sys.alpha[1]).unwrap().scale(-c);
            for p in sample_points(&m, s, 10, SEED).unwrap() {
                let frame = adapted_frame(&m, &p).unwrap();
                worst_ra = worst_ra.max(restricted_residual(&ra2, &want, &frame).unwrap());
            }
        }
    }

    // d Lambda1 = 0 at c = t0 / (s^2 t2)
    let mut worst_l1: f64 = 0.0;
    for (metric, c) in [("sphere3", 1.0), ("hyperbolic3", -1.0)] {
        let m = ChartMetric::by_name(metric, Some(c), None).unwrap();
        for s in [1.0f64, 2.0] {
            let sys = build_system(&m, s).unwrap();
            let lag = InvariantLagrangian::lambda1(c * s * s * 0.7, 0.7, 0.3);
            let d = lag.form(&sys).ext_derivative();
            for p in sample_points(&m, s, 10, SEED).unwrap() {
                let frame = adapted_frame(&m, &p).unwrap();
                worst_l1 = worst_l1.max(restricted_norm(&d, &frame).unwrap());
            }
        }
    }

    // d Lambda2 - (branch sign)(2 t0/s^2) theta ^ Lambda2 <= 1e-6 on hyperbolic3
    let mut worst_l2: f64 = 0.0;
    let m = ChartMetric::hyperbolic3(-1.0);
    for s in [1.0f64, 2.0] {
        let t0 = s; // c = -t0^2/s^2 = -1
        let sys = build_system(&m, s).unwrap();
        for sign in [1.0, -1.0] {
            let lag = InvariantLagrangian::lambda2(t0, sign);
            let lhs = lag.form(&sys).ext_derivative();
            let rhs = sys
                .theta
                .wedge(&lag.form(&sys))
                .unwrap()
                .scale(sign * 2.0 * t0 / (s * s));
            for p in sample_points(&m, s, 10, SEED).unwrap() {
                let frame = adapted_frame(&m, &p).unwrap();
                worst_l2 = worst_l2.max(restricted_residual(&lhs, &rhs, &frame).unwrap());
            }
        }
    }

    criterion_line(
        "3 (constant-curvature specializations)",
        worst_r <= 1e-8 && worst_ra <= 1e-7 && worst_l1 <= 1e-6 && worst_l2 <= 1e-6,
        &format!("r - 2c {worst_r:.3e} (<= 1e-8), R alpha2 + c theta^alpha1 {worst_ra:.3e} (<= 1e-7), d Lambda1 {worst_l1:.3e}, Lambda2 ideal {worst_l2:.3e} (<= 1e-6)"),
    );
}

#[test]
fn criterion_4_hodge_and_codifferential_tables() {
    fn parse_residual(detail: Option<&str>) -> f64 {
        detail
            .and_then(|d| d.split("residual ").nth(1))
            .and_then(|s| s.split(')').next())
            .and_then(|s| s.parse().ok())
            .unwrap_or(f64::INFINITY)
    }
    let mut worst_star: f64 = 0.0;
    let mut worst_delta: f64 = 0.0;
    let mut worst_laplace: f64 = 0.0;
    let mut dtheta_flagged_everywhere = true;
    let mut dtheta_consistent: f64 = 0.0;
    for (metric, c, eps) in METRICS_3D {
        let cfg = config(metric, c, eps, 1.0, Backend::Dual, &["hodge"]);
        let rep = run_suites(&cfg).expect("hodge suite");
        for rec in &rep.records {
            if rec.id.starts_with("hodge.star") || rec.id == "hodge.volume" {
                assert_eq!(rec.verdict, Verdict::Pass, "{metric} {}: {rec:?}", rec.id);
                worst_star = worst_star.max(rec.max_residual);
            }
            if rec.id.starts_with("codiff.")
                && rec.id != "codiff.dtheta"
                && rec.id != "codiff.rho2"
                && rec.verdict != Verdict::Info
            {
                assert_eq!(rec.verdict, Verdict::Pass, "{metric} {}: {rec:?}", rec.id);
                worst_delta = worst_delta.max(rec.max_residual);
            }
            if rec.id == "codiff.rho2" {
                // printed sign is flipped; must pass outright (F1 = 0) or be
                // flagged with the consistent value -2 F1 verified
                let ok = rec.verdict == Verdict::Pass
                    || (rec.verdict == Verdict::MismatchVsPaper
                        && parse_residual(rec.detail.as_deref()) <= 1e-6);
                assert!(ok, "{metric} codiff.rho2: {rec:?}");
                if rec.verdict == Verdict::Pass {
                    worst_delta = worst_delta.max(rec.max_residual);
                } else {
                    worst_delta = worst_delta.max(parse_residual(rec.detail.as_deref()));
                }
            }
            if rec.id == "codiff.dtheta" {
                // the printed coefficient is internally inconsistent; the
                // engine must flag it and verify the consistent coefficient
                dtheta_flagged_everywhere &= rec.verdict == Verdict::MismatchVsPaper;
                dtheta_consistent = dtheta_consistent.max(parse_residual(rec.detail.as_deref()));
            }
            if rec.id.starts_with("laplace.") {
                assert_eq!(rec.verdict, Verdict::Pass, "{metric} {}: {rec:?}", rec.id);
                worst_laplace = worst_laplace.max(rec.max_residual);
            }
        }
    }
    criterion_line(
        "4 (Hodge/codifferential tables)",
        worst_star <= 1e-6
            && worst_delta <= 1e-6
            && worst_laplace <= 1e-5
            && dtheta_flagged_everywhere
            && dtheta_consistent <= 1e-6,
        &format!(
            "star {worst_star:.3e}, delta {worst_delta:.3e} (<= 1e-6), Laplacian {worst_laplace:.3e} (<= 1e-5); delta-dtheta printed coefficient flagged mismatch-vs-paper, consistent -(2/s^2) residual {dtheta_consistent:.3e}"
        ),
    );
}

#[test]
fn criterion_5_rho_machinery() {
    let mut worst: f64 = 0.0;
    let mut drho_printed_flagged = true;
    for (metric, eps) in [("heisenberg", None), ("perturbed", Some(0.05))] {
        let cfg = config(metric, None, eps, 1.0, Backend::Dual, &["rho"]);
        let rep = run_suites(&cfg).expect("rho suite");
        for rec in &rep.records {
            match rec.id.as_str() {
                "rho.drho" => {
                    // printed formula omits the W1 curvature part; must be flagged
                    drho_printed_flagged &= rec.verdict == Verdict::MismatchVsPaper;
                }
                "rho.frame_indep" => {
                    assert!(rec.max_residual <= 1e-9, "{metric} frame indep {rec:?}");
                }
                _ if rec.verdict == Verdict::Info => {}
                _ => {
                    assert_eq!(rec.verdict, Verdict::Pass, "{metric} {}: {rec:?}", rec.id);
                    worst = worst.max(rec.max_residual);
                }
            }
        }
    }
    criterion_line(
        "5 (rho machinery on heisenberg and perturbed)",
        worst <= 1e-5 && drho_printed_flagged,
        &format!("twelve wedge identities, p^2/q^2, dr, completed d rho, F agreement: worst {worst:.3e} (<= 1e-5); printed d rho formula flagged mismatch-vs-paper (omits the W1 curvature term)"),
    );
}

#[test]
fn criterion_6_fiber_integration() {
    let mut worst_exact: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    let mut const_curv_flagged = true;
    for (metric, c, eps) in METRICS_3D {
        for s in [1.0, 2.0] {
            let cfg = config(metric, c, eps, s, Backend::Dual, &["fiber"]);
            let rep = run_suites(&cfg).expect("fiber suite");
            let is_const = ChartMetric::by_name(metric, c, eps)
                .unwrap()
                .constant_curvature()
                .map(|cc| cc != 0.0)
                .unwrap_or(false);
            for rec in &rep.records {
                match rec.id.as_str() {
                    "fiber.one" | "fiber.push_vol" | "fiber.push_theta_alpha2"
                    | "fiber.push_alpha0_alpha2" => {
                        assert_eq!(rec.verdict, Verdict::Pass, "{metric} s={s} {}: {rec:?}", rec.id);
                        worst_exact = worst_exact.max(rec.max_residual);
                    }
                    "fiber.c" | "fiber.c2" | "fiber.r" | "fiber.lift_phi2" | "fiber.lift_trace" => {
                        assert_eq!(rec.verdict, Verdict::Pass, "{metric} s={s} {}: {rec:?}", rec.id);
                        worst_closed = worst_closed.max(rec.max_residual);
                    }
                    "fiber.r2" | "fiber.p2" | "fiber.q2" => {
                        // reported alongside their printed closed forms; the
                        // constant-curvature disagreement is a finding
                        if is_const {
                            const_curv_flagged &= rec.verdict == Verdict::MismatchVsPaper;
                        } else {
                            assert_ne!(rec.verdict, Verdict::Fail, "{metric} {}: {rec:?}", rec.id);
                        }
                    }
                    _ => assert_ne!(rec.verdict, Verdict::Fail, "{metric} {}: {rec:?}", rec.id),
                }
            }
        }
    }
    criterion_line(
        "6 (fiber integration)",
        worst_exact <= 1e-8 && worst_closed <= 1e-6 && const_curv_flagged,
        &format!("1-check/push-forwards {worst_exact:.3e} rel (<= 1e-8); c, c^2, r closed forms {worst_closed:.3e} (<= 1e-6); constant-curvature r2/p2/q2 printed forms flagged mismatch-vs-paper"),
    );
}

#[test]
fn criterion_7_ricci_classification() {
    use sbl_core::eds::classify_ricci;
    let all = vec![RicciType::I, RicciType::II, RicciType::III, RicciType::IV];
    let mut ok = true;
    let mut detail = String::new();
    for metric in ["euclidean3", "sphere3"] {
        let m = ChartMetric::by_name(metric, None, None).unwrap();
        let samples = sample_points(&m, 1.0, SAMPLES, SEED).unwrap();
        let rep = classify_ricci(&m, &samples, 1e-7).unwrap();
        ok &= rep.types == all && rep.csc && rep.recurrent;
        detail.push_str(&format!("{metric}: {:?}; ", rep.types));
    }
    // heisenberg: type set identical along both routes
    let cfg = config("heisenberg", None, None, 1.0, Backend::Dual, &["ricci"]);
    let rep = run_suites(&cfg).unwrap();
    for rec in &rep.records {
        if rec.id == "ricci.paths_agree" || rec.id == "ricci.containment" {
            ok &= rec.verdict == Verdict::Pass;
        }
        if rec.id == "ricci.types" {
            detail.push_str(&format!("heisenberg: {}", rec.detail.clone().unwrap_or_default()));
        }
    }
    criterion_line("7 (Ricci classification)", ok, &detail);
}

#[test]
fn criterion_8_weingarten() {
    // horosphere stationarity
    let s = SurfaceImmersion::by_name("horosphere", 0.0).unwrap();
    let rep = weingarten_functional(&s, 1.0, Branch::Minus, 8, 1e-5).unwrap();
    let horo = rep.residual_max.abs().max(rep.residual_min.abs());
    let mut factors = rep.factor_residual;
    let mut functional: f64 = (rep.value - rep.lift_value).abs();

    // geodesic spheres against the closed form
    let mut geo: f64 = 0.0;
    for a in [0.5f64, 1.0, 2.0] {
        let s = SurfaceImmersion::by_name("geodesic_sphere", a).unwrap();
        let rep = weingarten_functional(&s, 1.0, Branch::Minus, 8, 1e-5).unwrap();
        let want = 1.0 / a.sinh().powi(2) - 2.0 / a.tanh() + 2.0;
        geo = geo
            .max((rep.residual_max - want).abs())
            .max((rep.residual_min - want).abs());
        factors = factors.max(rep.factor_residual);
        functional = functional.max((rep.value - rep.lift_value).abs() / rep.value.abs());
    }

    // vertical plane pullbacks complete the catalog
    let s = SurfaceImmersion::by_name("vertical_plane", 0.0).unwrap();
    let rep = weingarten_functional(&s, 1.0, Branch::Minus, 6, 1e-5).unwrap();
    factors = factors.max(rep.factor_residual);

    criterion_line(
        "8 (Weingarten functional)",
        horo <= 1e-5 && geo <= 1e-5 && factors <= 1e-5 && functional <= 1e-6,
        &format!("horosphere stationarity {horo:.3e}, geodesic-sphere residual vs csch^2 a - 2 coth a + 2 {geo:.3e}, pullback factors {factors:.3e} (<= 1e-5), functional vs lift {functional:.3e} rel (<= 1e-6)"),
    );
}

#[test]
fn criterion_9_deterministic_reports() {
    let mut cfg = config("perturbed", None, Some(0.05), 1.0, Backend::Dual, &["structure", "rho", "ricci"]);
    cfg.samples = 12;
    let a = run_suites(&cfg).unwrap().to_json().unwrap();
    let b = run_suites(&cfg).unwrap().to_json().unwrap();
    let identical = a == b;
    // and a full-suite config on a 3d metric
    let mut cfg2 = config("sphere3", Some(1.0), None, 1.0, Backend::Dual, &[]);
    cfg2.suites = SUITE_NAMES
        .iter()
        .filter(|&&n| n != "2d")
        .map(|s| s.to_string())
        .collect();
    cfg2.samples = 12;
    let c = run_suites(&cfg2).unwrap().to_json().unwrap();
    let d = run_suites(&cfg2).unwrap().to_json().unwrap();
    criterion_line(
        "9 (deterministic reports)",
        identical && c == d,
        &format!("byte-identical JSON across repeated runs ({} and {} bytes)", a.len(), c.len()),
    );
}
