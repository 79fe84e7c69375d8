//! Verification suites: each runs a battery of identity checks over seeded
//! bundle points and returns one record per identity. Suites are pure in the
//! samples, so the per-sample work is dispatched through [`crate::par`].

use std::sync::Arc;

use crate::bundle::{adapted_frame, AdaptedFrame, BundlePoint, TPoint};
use crate::eds::{
    self, build_system, classify_ricci, curvature_correction, drho_from_grad_ric, f_from_drho,
    f_from_grad_ric, rho_family, RicciType,
};
use crate::fiber::{
    self, identity_battery, lift_one_form_sq, lift_two_tensor, pushforward_checks, FiberGrid,
    FiberVerdict,
};
use crate::forms::{
    codifferential, frame_components, hodge_star, laplacian, restricted_norm, restricted_residual,
    FormField, Pivot,
};
use crate::lagrangian::{
    classify as lag_classify, d_lambda_residual, integrity_kernel, principal_ideal_residual,
    InvariantLagrangian,
};
use crate::metric::{Backend, ChartMetric};
use crate::par::map_samples;
use crate::report::{IdentityRecord, RunConfig, Tolerances, Verdict, VerificationReport};
use crate::sampling::sample_points;
use crate::surface::{weingarten_functional, Branch, SurfaceImmersion};
use crate::{Error, Result};

pub const SUITE_NAMES: [&str; 8] = [
    "structure",
    "hodge",
    "rho",
    "ricci",
    "fiber",
    "lagrangian",
    "surface",
    "2d",
];

/// Everything a suite needs.
pub struct SuiteCtx {
    pub metric: ChartMetric,
    pub s: f64,
    pub samples: Vec<BundlePoint>,
    pub tol: Tolerances,
    pub grid: FiberGrid,
}

impl SuiteCtx {
    pub fn from_config(cfg: &RunConfig) -> Result<SuiteCtx> {
        let metric = ChartMetric::by_name(&cfg.metric, cfg.c, cfg.eps)?
            .with_backend(Backend::parse(&cfg.backend)?);
        let samples = sample_points(&metric, cfg.s, cfg.samples, cfg.seed)?;
        Ok(SuiteCtx {
            metric,
            s: cfg.s,
            samples,
            tol: cfg.tolerances.clone(),
            grid: FiberGrid::new(cfg.n_theta, cfg.n_z),
        })
    }
}

fn max_over_samples<F>(samples: &[BundlePoint], f: F) -> Result<f64>
where
    F: Fn(&BundlePoint) -> Result<f64> + Sync + Send,
{
    let results = map_samples(samples, f);
    let mut worst = 0.0f64;
    for r in results {
        worst = worst.max(r?);
    }
    Ok(worst)
}

fn frame_for(m: &ChartMetric, p: &BundlePoint) -> Result<AdaptedFrame> {
    adapted_frame(m, p)
}

fn codiff_scalar(delta: &FormField, tp: &TPoint) -> Result<f64> {
    let comps = delta.components(tp)?;
    debug_assert_eq!(comps.len(), 1);
    Ok(comps[0])
}

// ---------------------------------------------------------------------------
// structure equations, base dimension 3
// ---------------------------------------------------------------------------

pub fn structure_suite(ctx: &SuiteCtx) -> Result<Vec<IdentityRecord>> {
    let m = &ctx.metric;
    let sys = build_system(m, ctx.s)?;
    let fam = rho_family(m)?;
    let s2 = ctx.s * ctx.s;
    let ctx_s = ctx.s;
    let n = ctx.samples.len();
    let tol = ctx.tol.structure;

    // d alpha0 = (1/s^2) theta ^ alpha1
    let lhs0 = sys.alpha[0].ext_derivative();
    let rhs0 = sys.theta.wedge(&sys.alpha[1])?.scale(1.0 / s2);
    let r0 = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs0, &rhs0, &frame_for(m, p)?)
    })?;

    // d alpha1 = (2/s^2) theta ^ alpha2 - r theta ^ alpha0
    let lhs1 = sys.alpha[1].ext_derivative();
    let r_field = fam.r.clone();
    let rhs1 = sys.theta.wedge(&sys.alpha[2])?.scale(2.0 / s2).sub(
        &sys.theta
            .wedge(&sys.alpha[0])?
            .scaled_by("r", Arc::new(move |p: &TPoint| r_field(p))),
    );
    let r1 = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs1, &rhs1, &frame_for(m, p)?)
    })?;

    // d alpha2 = theta ^ gamma - (r/2) theta ^ alpha1 + s alpha0 ^ rho
    let lhs2 = sys.alpha[2].ext_derivative();
    let r_field = fam.r.clone();
    let rhs2 = sys
        .theta
        .wedge(&fam.gamma)?
        .sub(
            &sys.theta
                .wedge(&sys.alpha[1])?
                .scaled_by("r/2", Arc::new(move |p: &TPoint| Ok(0.5 * r_field(p)?))),
        )
        .add(&sys.alpha[0].wedge(&fam.rho)?.scale(ctx.s));
    let r2 = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs2, &rhs2, &frame_for(m, p)?)
    })?;

    // the volume-form variant: d alpha1 = (2/s^2) theta ^ alpha2 - s r vol,
    // with vol the pullback of the base volume form (theta ^ alpha0 = s vol)
    let vol = eds::vol_pullback(m);
    let r_field = fam.r.clone();
    let rhs1v = sys.theta.wedge(&sys.alpha[2])?.scale(2.0 / s2).sub(
        &vol.scaled_by("s r", Arc::new(move |p: &TPoint| Ok(ctx_s * r_field(p)?))),
    );
    let r1v = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs1, &rhs1v, &frame_for(m, p)?)
    })?;
    let theta_alpha0 = sys.theta.wedge(&sys.alpha[0])?;
    let rv = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&theta_alpha0, &vol.scale(ctx.s), &frame_for(m, p)?)
    })?;

    // the general first-order theorem with the literal curvature correction
    let mut general: f64 = 0.0;
    for i in 0..=2usize {
        let lhs = sys.alpha[i].ext_derivative();
        let rhs = sys
            .theta
            .wedge(&sys.alpha_padded(i as isize + 1))?
            .scale((i as f64 + 1.0) / s2)
            .add(&curvature_correction(m, i)?);
        general = general.max(max_over_samples(&ctx.samples, |p| {
            restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
        })?);
    }

    // numerically differentiated theta against the exact bilinear form
    let dtheta_num = sys.theta.ext_derivative();
    let r_dtheta = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&dtheta_num, &sys.dtheta, &frame_for(m, p)?)
    })?;

    Ok(vec![
        IdentityRecord::checked("structure.dalpha0", "d alpha0 = (1/s^2) theta ^ alpha1", n, r0, tol),
        IdentityRecord::checked(
            "structure.dalpha1",
            "d alpha1 = (2/s^2) theta ^ alpha2 - r theta ^ alpha0",
            n,
            r1,
            tol,
        ),
        IdentityRecord::checked(
            "structure.dalpha2",
            "d alpha2 = theta ^ gamma - (r/2) theta ^ alpha1 + s alpha0 ^ rho",
            n,
            r2,
            tol,
        ),
        IdentityRecord::checked(
            "structure.dalpha1_vol",
            "d alpha1 = (2/s^2) theta ^ alpha2 - s r vol",
            n,
            r1v,
            tol,
        ),
        IdentityRecord::checked(
            "structure.vol",
            "theta ^ alpha0 = s vol",
            n,
            rv,
            tol,
        ),
        IdentityRecord::checked(
            "structure.general",
            "d alpha_i = (i+1)/s^2 theta ^ alpha_{i+1} + R alpha_i",
            n,
            general,
            tol,
        ),
        IdentityRecord::checked(
            "structure.dtheta",
            "d theta (v,w) = <v, B w> - <w, B v>",
            n,
            r_dtheta,
            tol,
        ),
    ])
}

// ---------------------------------------------------------------------------
// the n = 1 system, base dimension 2
// ---------------------------------------------------------------------------

pub fn twod_suite(ctx: &SuiteCtx) -> Result<Vec<IdentityRecord>> {
    let m = &ctx.metric;
    let sys = build_system(m, ctx.s)?;
    let s2 = ctx.s * ctx.s;
    let n = ctx.samples.len();
    let tol = ctx.tol.structure;

    // d theta = alpha1 ^ alpha0
    let lhs_t = sys.theta.ext_derivative();
    let rhs_t = sys.alpha[1].wedge(&sys.alpha[0])?;
    let rt = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs_t, &rhs_t, &frame_for(m, p)?)
    })?;

    // d alpha1 = c alpha0 ^ theta with c the Gauss curvature
    let metric = m.clone();
    let gauss: crate::forms::ScalarFn = Arc::new(move |p: &TPoint| {
        Ok(0.5 * metric.curvature_pack(&p.x)?.scal)
    });
    let lhs1 = sys.alpha[1].ext_derivative();
    let rhs1 = sys
        .alpha[0]
        .wedge(&sys.theta)?
        .scaled_by("c", gauss);
    let r1 = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs1, &rhs1, &frame_for(m, p)?)
    })?;

    // d alpha0 = (1/s^2) theta ^ alpha1
    let lhs0 = sys.alpha[0].ext_derivative();
    let rhs0 = sys.theta.wedge(&sys.alpha[1])?.scale(1.0 / s2);
    let r0 = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs0, &rhs0, &frame_for(m, p)?)
    })?;

    // general theorem at n = 1 with the literal curvature correction
    let mut general: f64 = 0.0;
    for i in 0..=1usize {
        let lhs = sys.alpha[i].ext_derivative();
        let rhs = sys
            .theta
            .wedge(&sys.alpha_padded(i as isize + 1))?
            .scale((i as f64 + 1.0) / s2)
            .add(&curvature_correction(m, i)?);
        general = general.max(max_over_samples(&ctx.samples, |p| {
            restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
        })?);
    }

    let mut records = vec![
        IdentityRecord::checked("twod.dtheta", "d theta = alpha1 ^ alpha0", n, rt, tol),
        IdentityRecord::checked("twod.dalpha1", "d alpha1 = c alpha0 ^ theta", n, r1, tol),
        IdentityRecord::checked("twod.dalpha0", "d alpha0 = (1/s^2) theta ^ alpha1", n, r0, tol),
        IdentityRecord::checked(
            "twod.general",
            "d alpha_i = (i+1)/s^2 theta ^ alpha_{i+1} + R alpha_i",
            n,
            general,
            tol,
        ),
    ];

    // Hodge table at n = 1: *theta = s alpha0 ^ alpha1, *alpha_i =
    // ((-1)^{1-i}/s) theta ^ alpha_{1-i}
    let star_cases: Vec<(&str, &str, FormField, FormField)> = vec![
        (
            "twod.star_theta",
            "* theta = s alpha0 ^ alpha1",
            hodge_star(m, &sys.theta, Pivot::Auto),
            sys.alpha[0].wedge(&sys.alpha[1])?.scale(ctx.s),
        ),
        (
            "twod.star_alpha0",
            "* alpha0 = -(1/s) theta ^ alpha1",
            hodge_star(m, &sys.alpha[0], Pivot::Auto),
            sys.theta.wedge(&sys.alpha[1])?.scale(-1.0 / ctx.s),
        ),
        (
            "twod.star_alpha1",
            "* alpha1 = (1/s) theta ^ alpha0",
            hodge_star(m, &sys.alpha[1], Pivot::Auto),
            sys.theta.wedge(&sys.alpha[0])?.scale(1.0 / ctx.s),
        ),
    ];
    for (id, anchor, lhs, rhs) in star_cases {
        let r = max_over_samples(&ctx.samples, |p| {
            restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
        })?;
        records.push(IdentityRecord::checked(id, anchor, n, r, ctx.tol.hodge));
    }

    // codifferential table at n = 1: theta and both alphas are coclosed, and
    // here the coefficient of delta dtheta really is -(1/s^2) -- the circle
    // fiber contributes a single mirror pair.
    let zero0 = FormField::zero(0, 4);
    for (id, anchor, form) in [
        ("twod.codiff_theta", "delta theta = 0", &sys.theta),
        ("twod.codiff_alpha0", "delta alpha0 = 0", &sys.alpha[0]),
        ("twod.codiff_alpha1", "delta alpha1 = 0", &sys.alpha[1]),
    ] {
        let lhs = codifferential(m, form);
        let r = max_over_samples(&ctx.samples, |p| {
            restricted_residual(&lhs, &zero0, &frame_for(m, p)?)
        })?;
        records.push(IdentityRecord::checked(id, anchor, n, r, ctx.tol.hodge));
    }
    let lhs = codifferential(m, &sys.theta.ext_derivative());
    let rhs = sys.theta.scale(-1.0 / s2);
    let r = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "twod.codiff_dtheta",
        "delta dtheta = -(1/s^2) theta",
        n,
        r,
        ctx.tol.hodge,
    ));

    Ok(records)
}

// ---------------------------------------------------------------------------
// Hodge star, codifferentials, Laplacian eigenforms
// ---------------------------------------------------------------------------

pub fn hodge_suite(ctx: &SuiteCtx) -> Result<Vec<IdentityRecord>> {
    let m = &ctx.metric;
    let sys = build_system(m, ctx.s)?;
    let fam = rho_family(m)?;
    let s = ctx.s;
    let s2 = s * s;
    let n = ctx.samples.len();
    let tol = ctx.tol.hodge;
    let mut records = Vec::new();

    // the four star identities and *theta
    let star_cases: Vec<(&str, &str, FormField, FormField)> = vec![
        (
            "hodge.star_theta",
            "* theta = s alpha0 ^ alpha2",
            hodge_star(m, &sys.theta, Pivot::Auto),
            sys.alpha[0].wedge(&sys.alpha[2])?.scale(s),
        ),
        (
            "hodge.star_dtheta",
            "* dtheta = -(1/s) theta ^ dtheta",
            hodge_star(m, &sys.dtheta, Pivot::Auto),
            sys.theta.wedge(&sys.dtheta)?.scale(-1.0 / s),
        ),
        (
            "hodge.star_alpha0",
            "* alpha0 = (1/s) theta ^ alpha2",
            hodge_star(m, &sys.alpha[0], Pivot::Auto),
            sys.theta.wedge(&sys.alpha[2])?.scale(1.0 / s),
        ),
        (
            "hodge.star_alpha1",
            "* alpha1 = -(1/s) theta ^ alpha1",
            hodge_star(m, &sys.alpha[1], Pivot::Auto),
            sys.theta.wedge(&sys.alpha[1])?.scale(-1.0 / s),
        ),
        (
            "hodge.star_alpha2",
            "* alpha2 = (1/s) theta ^ alpha0",
            hodge_star(m, &sys.alpha[2], Pivot::Auto),
            sys.theta.wedge(&sys.alpha[0])?.scale(1.0 / s),
        ),
    ];
    for (id, anchor, lhs, rhs) in star_cases {
        let r = max_over_samples(&ctx.samples, |p| {
            restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
        })?;
        records.push(IdentityRecord::checked(id, anchor, n, r, tol));
    }

    // ** = 1 on a non-invariant combination
    let mix = sys.alpha[1].add(&sys.dtheta.scale(0.7)).add(
        &sys.theta
            .wedge(&fam.rho1)?
            .scale(0.4)
            .add(&fam.gamma.scale(1.3)),
    );
    let ss = hodge_star(m, &hodge_star(m, &mix, Pivot::Auto), Pivot::Auto);
    let r = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&ss, &mix, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "hodge.star_involution",
        "** = identity",
        n,
        r,
        ctx.tol.frame,
    ));

    // volume identity (1/s) * theta = alpha0 ^ alpha2 = -(1/2) dtheta ^ dtheta
    let lhs = sys.dtheta.wedge(&sys.dtheta)?.scale(-0.5);
    let rhs = sys.alpha[0].wedge(&sys.alpha[2])?;
    let r = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "hodge.volume",
        "alpha0 ^ alpha2 = -(1/2) dtheta ^ dtheta",
        n,
        r,
        tol,
    ));

    // codifferential table
    let zero1 = FormField::zero(1, 6);
    let codiff_zero: Vec<(&str, &str, FormField)> = vec![
        ("codiff.theta", "delta theta = 0", codifferential(m, &sys.theta)),
        ("codiff.alpha1", "delta alpha1 = 0", codifferential(m, &sys.alpha[1])),
        ("codiff.alpha2", "delta alpha2 = 0", codifferential(m, &sys.alpha[2])),
        ("codiff.rho3", "delta rho3 = 0", codifferential(m, &fam.rho3)),
    ];
    for (id, anchor, lhs) in codiff_zero {
        let r = max_over_samples(&ctx.samples, |p| {
            restricted_residual(&lhs, &zero1, &frame_for(m, p)?)
        })?;
        records.push(IdentityRecord::checked(id, anchor, n, r, tol));
    }

    // delta alpha0 = -s rho3
    let lhs = codifferential(m, &sys.alpha[0]);
    let rhs = fam.rho3.scale(-s);
    let r = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "codiff.alpha0",
        "delta alpha0 = -s rho3",
        n,
        r,
        tol,
    ));

    // delta rho1 = 2 F4 and delta rho2 = 2 F1 (scalars)
    let metric = m.clone();
    let f4: crate::forms::ScalarFn = Arc::new(move |p: &TPoint| {
        let pack = metric.curvature_pack(&p.x)?;
        let frame = crate::bundle::adapted_frame_with_pivot(&metric, p, None)?;
        Ok(2.0 * f_from_grad_ric(&pack, &frame).f4)
    });
    let metric = m.clone();
    let f1: crate::forms::ScalarFn = Arc::new(move |p: &TPoint| {
        let pack = metric.curvature_pack(&p.x)?;
        let frame = crate::bundle::adapted_frame_with_pivot(&metric, p, None)?;
        Ok(2.0 * f_from_grad_ric(&pack, &frame).f1)
    });
    let lhs = codifferential(m, &fam.rho1);
    let r = max_over_samples(&ctx.samples, |p| {
        let tp = p.tpoint();
        Ok((codiff_scalar(&lhs, &tp)? - f4(&tp)?).abs())
    })?;
    records.push(IdentityRecord::checked("codiff.rho1", "delta rho1 = 2 F4", n, r, tol));

    // delta rho2: the printed sign +2 F1 contradicts the composition -*d*
    // through the verified star identity *rho2 = -(1/s) theta ^ rho1 ^ alpha2;
    // the consistent value is -2 F1.
    let lhs = codifferential(m, &fam.rho2);
    let both = map_samples(&ctx.samples, |p| -> Result<(f64, f64)> {
        let tp = p.tpoint();
        let got = codiff_scalar(&lhs, &tp)?;
        let want = f1(&tp)?;
        Ok(((got - want).abs(), (got + want).abs()))
    });
    let (mut r_printed, mut r_flipped) = (0.0f64, 0.0f64);
    for item in both {
        let (a, b) = item?;
        r_printed = r_printed.max(a);
        r_flipped = r_flipped.max(b);
    }
    let mut rec = IdentityRecord::checked("codiff.rho2", "delta rho2 = 2 F1", n, r_printed, tol);
    if rec.verdict == Verdict::Fail && r_flipped <= tol {
        rec.verdict = Verdict::MismatchVsPaper;
        rec.detail = Some(format!(
            "computed delta rho2 = -2 F1 (residual {r_flipped:.3e}); the printed sign contradicts -*d* through *rho2 = -(1/s) theta ^ rho1 ^ alpha2"
        ));
    }
    records.push(rec);

    // delta dtheta: the printed coefficient is -(1/s^2); the composition
    // -*d* applied to the star identities forces -(2/s^2). Both residuals are
    // computed; a clean match of the consistent value with a failing printed
    // value is reported as a mismatch finding, not a failure.
    let lhs = codifferential(m, &sys.dtheta);
    let printed = sys.theta.scale(-1.0 / s2);
    let consistent = sys.theta.scale(-2.0 / s2);
    let r_printed = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &printed, &frame_for(m, p)?)
    })?;
    let r_consistent = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &consistent, &frame_for(m, p)?)
    })?;
    let mut rec = IdentityRecord::checked(
        "codiff.dtheta",
        "delta dtheta = -(1/s^2) theta",
        n,
        r_printed,
        tol,
    );
    if rec.verdict == Verdict::Fail && r_consistent <= tol {
        rec.verdict = Verdict::MismatchVsPaper;
        rec.detail = Some(format!(
            "computed -*d* dtheta = -(2/s^2) theta (residual {r_consistent:.3e}); the printed coefficient -(1/s^2) is inconsistent with * dtheta = -(1/s) theta ^ dtheta and (dtheta)^2 = -2 alpha0 ^ alpha2"
        ));
    }
    records.push(rec);

    // delta rho is reported, not asserted
    let drho = codifferential(m, &fam.rho);
    let val = max_over_samples(&ctx.samples, |p| {
        let tp = p.tpoint();
        Ok(drho.components(&tp)?[0].abs())
    })?;
    records.push(IdentityRecord::info(
        "codiff.rho_value",
        "delta rho = ? (reported)",
        n,
        val,
        "computed magnitude of delta rho; no identity asserted".into(),
    ));

    // Laplacian eigenforms at constant curvature
    if let Some(c) = m.constant_curvature() {
        let cases: Vec<(&str, &str, FormField, FormField)> = vec![
            (
                "laplace.alpha0",
                "Delta alpha0 = (2/s^2) alpha0 - 2c alpha2",
                laplacian(m, &sys.alpha[0]),
                sys.alpha[0].scale(2.0 / s2).sub(&sys.alpha[2].scale(2.0 * c)),
            ),
            (
                "laplace.alpha1",
                "Delta alpha1 = (2 + 2 c^2 s^4)/s^2 alpha1",
                laplacian(m, &sys.alpha[1]),
                sys.alpha[1].scale((2.0 + 2.0 * c * c * s2 * s2) / s2),
            ),
            (
                "laplace.alpha2",
                "Delta alpha2 = -2c alpha0 + 2 c^2 s^2 alpha2",
                laplacian(m, &sys.alpha[2]),
                sys.alpha[0]
                    .scale(-2.0 * c)
                    .add(&sys.alpha[2].scale(2.0 * c * c * s2)),
            ),
        ];
        for (id, anchor, lhs, rhs) in cases {
            let r = max_over_samples(&ctx.samples, |p| {
                restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
            })?;
            records.push(
                IdentityRecord::checked(id, anchor, n, r, ctx.tol.laplacian)
                    .with_detail(format!("at sectional curvature c = {c}")),
            );
        }
    }

    Ok(records)
}

// ---------------------------------------------------------------------------
// rho machinery
// ---------------------------------------------------------------------------

pub fn rho_suite(ctx: &SuiteCtx) -> Result<Vec<IdentityRecord>> {
    let m = &ctx.metric;
    let sys = build_system(m, ctx.s)?;
    let fam = rho_family(m)?;
    let s = ctx.s;
    let n = ctx.samples.len();
    let tol = ctx.tol.rho;
    let mut records = Vec::new();

    // the twelve wedge identities, grouped in their four lines
    let lines: Vec<(&str, &str, Vec<FormField>)> = vec![
        (
            "rho.wedge_line1",
            "rho ^ alpha0 = -rho1 ^ alpha1 = -rho2 ^ dtheta",
            vec![
                fam.rho.wedge(&sys.alpha[0])?,
                fam.rho1.wedge(&sys.alpha[1])?.scale(-1.0),
                fam.rho2.wedge(&sys.dtheta)?.scale(-1.0),
            ],
        ),
        (
            "rho.wedge_line2",
            "rho1 ^ alpha2 = rho3 ^ dtheta = -rho ^ alpha1",
            vec![
                fam.rho1.wedge(&sys.alpha[2])?,
                fam.rho3.wedge(&sys.dtheta)?,
                fam.rho.wedge(&sys.alpha[1])?.scale(-1.0),
            ],
        ),
        (
            "rho.wedge_line3",
            "rho2 ^ alpha1 = -rho3 ^ alpha0 = -rho1 ^ dtheta",
            vec![
                fam.rho2.wedge(&sys.alpha[1])?,
                fam.rho3.wedge(&sys.alpha[0])?.scale(-1.0),
                fam.rho1.wedge(&sys.dtheta)?.scale(-1.0),
            ],
        ),
        (
            "rho.wedge_line4",
            "rho3 ^ alpha1 = rho ^ dtheta = -rho2 ^ alpha2",
            vec![
                fam.rho3.wedge(&sys.alpha[1])?,
                fam.rho.wedge(&sys.dtheta)?,
                fam.rho2.wedge(&sys.alpha[2])?.scale(-1.0),
            ],
        ),
    ];
    for (id, anchor, members) in lines {
        let r = max_over_samples(&ctx.samples, |p| {
            let frame = frame_for(m, p)?;
            let mut worst: f64 = 0.0;
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    worst = worst.max(restricted_residual(&members[i], &members[j], &frame)?);
                }
            }
            Ok(worst)
        })?;
        records.push(IdentityRecord::checked(id, anchor, n, r, tol));
    }

    // rho3 ^ rho = p^2 alpha2, rho2 ^ rho1 = p^2 alpha0
    let p2 = fam.p2.clone();
    let lhs = fam.rho3.wedge(&fam.rho)?;
    let rhs = sys.alpha[2].scaled_by("p2", Arc::new(move |p: &TPoint| p2(p)));
    let r = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "rho.p2_alpha2",
        "rho3 ^ rho = p^2 alpha2",
        n,
        r,
        tol,
    ));
    let p2 = fam.p2.clone();
    let lhs = fam.rho2.wedge(&fam.rho1)?;
    let rhs = sys.alpha[0].scaled_by("p2", Arc::new(move |p: &TPoint| p2(p)));
    let r = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "rho.p2_alpha0",
        "rho2 ^ rho1 = p^2 alpha0",
        n,
        r,
        tol,
    ));

    // gamma ^ gamma = q^2 alpha0 ^ alpha2
    let q2 = fam.q2.clone();
    let lhs = fam.gamma.wedge(&fam.gamma)?;
    let rhs = sys
        .alpha[0]
        .wedge(&sys.alpha[2])?
        .scaled_by("q2", Arc::new(move |p: &TPoint| q2(p)));
    let r = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "rho.q2",
        "gamma ^ gamma = q^2 alpha0 ^ alpha2",
        n,
        r,
        tol,
    ));

    // dr = sum (grad_i Ric)_00 e^i + (2/s) rho
    let r_scalar = FormField::scalar(6, "r", fam.r.clone());
    let dr = r_scalar.ext_derivative();
    let metric = m.clone();
    let grad_part = crate::forms::from_frame_closure(
        m,
        1,
        "grad_ric_00",
        Pivot::Auto,
        Arc::new(move |frame: &AdaptedFrame| {
            let pack = metric.curvature_pack(&frame.at.x)?;
            let mut out = vec![0.0; 5];
            for (i, slot) in out.iter_mut().enumerate().take(3) {
                *slot = pack.grad_ric_contract(&frame.b[i], &frame.b[0], &frame.b[0]);
            }
            Ok(out)
        }),
    );
    let rhs = grad_part.add(&fam.rho.scale(2.0 / s));
    let r = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&dr, &rhs, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "rho.dr",
        "dr = sum (grad_i Ric)_00 e^i + (2/s) rho",
        n,
        r,
        tol,
    ));

    // d rho against the printed grad-Ric formula and against the completed
    // formula carrying the horizontal curvature part. The printed one misses
    // the W1 components wherever Ric(u, R(b_i, b_j) u) is nonzero.
    let drho = fam.rho.ext_derivative();
    let both = map_samples(&ctx.samples, |p| -> Result<(f64, f64, f64)> {
        let frame = frame_for(m, p)?;
        let pack = m.curvature_pack(&p.x)?;
        let got = frame_components(&drho, &frame)?;
        let printed = drho_from_grad_ric(&pack, &frame);
        let curv = crate::eds::drho_curvature_part(&pack, &frame);
        let mut r_printed: f64 = 0.0;
        let mut r_completed: f64 = 0.0;
        let mut w1_size: f64 = 0.0;
        for i in 0..got.len() {
            r_printed = r_printed.max((got[i] - printed[i]).abs());
            r_completed = r_completed.max((got[i] - printed[i] - curv[i]).abs());
            w1_size = w1_size.max(curv[i].abs());
        }
        Ok((r_printed, r_completed, w1_size))
    });
    let (mut r_printed, mut r_completed, mut w1_size) = (0.0f64, 0.0f64, 0.0f64);
    for item in both {
        let (a, b, c) = item?;
        r_printed = r_printed.max(a);
        r_completed = r_completed.max(b);
        w1_size = w1_size.max(c);
    }
    let mut rec = IdentityRecord::checked(
        "rho.drho",
        "d rho = (1/s) sum e^i ^ (xi -| grad_i Ric)",
        n,
        r_printed,
        tol,
    );
    if rec.verdict == Verdict::Fail && r_completed <= tol {
        rec.verdict = Verdict::MismatchVsPaper;
        rec.detail = Some(format!(
            "the printed formula omits the horizontal part d rho(e_i, e_j) = (1/s) Ric(u, R(b_i, b_j) u) (size {w1_size:.3e} here); with it the residual is {r_completed:.3e}"
        ));
    }
    records.push(rec);
    records.push(IdentityRecord::checked(
        "rho.drho_completed",
        "d rho = grad-Ric part + (1/s) Ric(u, R(b_i, b_j) u) e^{ij}",
        n,
        r_completed,
        tol,
    ));

    // F coefficients: numerical projection of d rho vs grad Ric formulas
    let r = max_over_samples(&ctx.samples, |p| {
        let frame = frame_for(m, p)?;
        let pack = m.curvature_pack(&p.x)?;
        let direct = f_from_grad_ric(&pack, &frame);
        let numeric = f_from_drho(&fam.rho, &frame)?;
        Ok(direct.max_abs_diff(&numeric))
    })?;
    records.push(IdentityRecord::checked(
        "rho.f_agree",
        "d rho = F1 alpha1 + F2 + F3 + F4 dtheta (two routes)",
        n,
        r,
        tol,
    ));

    // (2 rho - s dr) ^ theta ^ alpha0 = 0
    let theta_alpha0 = sys.theta.wedge(&sys.alpha[0])?;
    let lhs = fam
        .rho
        .scale(2.0)
        .sub(&dr.scale(s))
        .wedge(&theta_alpha0)?;
    let r = max_over_samples(&ctx.samples, |p| {
        restricted_norm(&lhs, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "rho.two_rho_sdr",
        "(2 rho - s dr) ^ theta ^ alpha0 = 0",
        n,
        r,
        tol,
    ));

    // s p^4 vol = theta ^ rho ^ rho1 ^ rho2 ^ rho3
    let five = sys
        .theta
        .wedge(&fam.rho)?
        .wedge(&fam.rho1)?
        .wedge(&fam.rho2)?
        .wedge(&fam.rho3)?;
    let p2f = fam.p2.clone();
    let r = max_over_samples(&ctx.samples, |p| {
        let frame = frame_for(m, p)?;
        let got = frame_components(&five, &frame)?[0];
        let p2v = p2f(&p.tpoint())?;
        Ok((got - s * p2v * p2v).abs())
    })?;
    records.push(IdentityRecord::checked(
        "rho.vol_p4",
        "theta ^ rho ^ rho1 ^ rho2 ^ rho3 = s p^4 vol",
        n,
        r,
        tol,
    ));

    // auxiliary star identities: *(rho ^ vol) = rho3, *rho1 = (1/s) theta ^ rho2 ^ alpha2
    let vol = eds::vol_pullback(m);
    let lhs = hodge_star(m, &fam.rho.wedge(&vol)?, Pivot::Auto);
    let r1 = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &fam.rho3, &frame_for(m, p)?)
    })?;
    let lhs = hodge_star(m, &fam.rho1, Pivot::Auto);
    let rhs = sys
        .theta
        .wedge(&fam.rho2)?
        .wedge(&sys.alpha[2])?
        .scale(1.0 / s);
    let r2 = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
    })?;
    let lhs = hodge_star(m, &fam.rho2, Pivot::Auto);
    let rhs = sys
        .theta
        .wedge(&fam.rho1)?
        .wedge(&sys.alpha[2])?
        .scale(-1.0 / s);
    let r3 = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "rho.star_family",
        "*(rho ^ vol) = rho3, *rho1 = (1/s) theta ^ rho2 ^ alpha2, *rho2 = -(1/s) theta ^ rho1 ^ alpha2",
        n,
        r1.max(r2).max(r3),
        tol,
    ));

    // Poincare-Cartan representative: d(alpha2 - s rho2 ^ theta) =
    //   theta ^ (gamma - (r/2) alpha1 - s d rho2)
    let lhs = sys
        .alpha[2]
        .sub(&fam.rho2.wedge(&sys.theta)?.scale(s))
        .ext_derivative();
    let rfield = fam.r.clone();
    let inner = fam
        .gamma
        .sub(&sys.alpha[1].scaled_by("r/2", Arc::new(move |p: &TPoint| Ok(0.5 * rfield(p)?))))
        .sub(&fam.rho2.ext_derivative().scale(s));
    let rhs = sys.theta.wedge(&inner)?;
    let r = max_over_samples(&ctx.samples, |p| {
        restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "rho.poincare_cartan",
        "d(alpha2 - s rho2 ^ theta) = theta ^ (gamma - (r/2) alpha1 - s d rho2)",
        n,
        r,
        tol,
    ));

    // frame independence of gamma under a different pivot
    let g_auto = eds::gamma_form(m);
    let r = max_over_samples(&ctx.samples, |p| {
        let frame = frame_for(m, p)?;
        let alt = eds::gamma_form_with_pivot(m, Pivot::Fixed((frame.pivot + 1) % 3));
        restricted_residual(&g_auto, &alt, &frame)
    })?;
    records.push(IdentityRecord::checked(
        "rho.frame_indep",
        "gamma independent of the adapted-frame rotation",
        n,
        r,
        ctx.tol.frame,
    ));

    // Einstein criterion: delta alpha0 = 0 iff Einstein; at constant curvature
    // the codifferential must vanish outright.
    if m.constant_curvature().is_some() {
        let d_alpha0 = codifferential(m, &sys.alpha[0]);
        let r = max_over_samples(&ctx.samples, |p| {
            restricted_norm(&d_alpha0, &frame_for(m, p)?)
        })?;
        records.push(IdentityRecord::checked(
            "rho.einstein",
            "Einstein metric: delta alpha0 = 0",
            n,
            r,
            ctx.tol.hodge,
        ));
    }

    Ok(records)
}

// ---------------------------------------------------------------------------
// Ricci classification
// ---------------------------------------------------------------------------

pub fn ricci_suite(ctx: &SuiteCtx) -> Result<Vec<IdentityRecord>> {
    let m = &ctx.metric;
    let n = ctx.samples.len();
    let rep = classify_ricci(m, &ctx.samples, ctx.tol.ricci)?;
    let fam = rho_family(m)?;
    let mut records = Vec::new();

    // type set from the numerical d rho route must be identical
    let results = map_samples(&ctx.samples, |p| -> Result<[f64; 4]> {
        let frame = frame_for(m, p)?;
        let f = f_from_drho(&fam.rho, &frame)?;
        Ok([
            f.f1.abs(),
            f.f2[0].hypot(f.f2[1]),
            f.f3[0].hypot(f.f3[1]),
            f.f4.abs(),
        ])
    });
    let mut fmax_num = [0.0f64; 4];
    for r in results {
        let v = r?;
        for (m, x) in fmax_num.iter_mut().zip(v.iter()) {
            *m = m.max(*x);
        }
    }
    let granted_num: Vec<RicciType> = [RicciType::I, RicciType::II, RicciType::III, RicciType::IV]
        .iter()
        .zip(fmax_num.iter())
        .filter(|(_, &v)| v <= ctx.tol.ricci)
        .map(|(&t, _)| t)
        .collect();
    let agree = granted_num == rep.types;
    let mut rec = IdentityRecord::checked(
        "ricci.paths_agree",
        "Ricci type set identical via grad Ric and via d rho",
        n,
        if agree { 0.0 } else { 1.0 },
        0.5,
    );
    rec.detail = Some(format!(
        "grad Ric route: {:?}; d rho route: {:?}",
        rep.types, granted_num
    ));
    records.push(rec);

    let mut rec = IdentityRecord::checked(
        "ricci.containment",
        "type III implies I; type II implies IV",
        n,
        if rep.containment_ok { 0.0 } else { 1.0 },
        0.5,
    );
    rec.detail = Some(format!("granted: {:?}", rep.types));
    records.push(rec);

    records.push(IdentityRecord::info(
        "ricci.types",
        "Ricci types I-IV, csc, recurrent",
        n,
        rep.f_max.iter().cloned().fold(0.0, f64::max),
        format!(
            "types {:?}, csc {}, recurrent {}, |F| maxima {:?}",
            rep.types, rep.csc, rep.recurrent, rep.f_max
        ),
    ));
    Ok(records)
}

// ---------------------------------------------------------------------------
// fiber integration
// ---------------------------------------------------------------------------

pub fn fiber_suite(ctx: &SuiteCtx) -> Result<Vec<IdentityRecord>> {
    let m = &ctx.metric;
    let mut records = Vec::new();
    let base: Vec<[f64; 3]> = ctx.samples.iter().take(3).map(|p| p.x).collect();
    let n = base.len();

    // battery rows aggregated over the base points: worst relative error per id
    let mut worst: std::collections::BTreeMap<String, (String, f64, f64, FiberVerdict)> =
        std::collections::BTreeMap::new();
    for x in &base {
        let rep = identity_battery(m, ctx.s, x, &ctx.grid, ctx.tol.fiber_closed)?;
        for row in rep.rows {
            let e = worst.entry(row.id.clone()).or_insert((
                row.anchor.clone(),
                0.0,
                0.0,
                FiberVerdict::Match,
            ));
            if row.rel_error > e.1 {
                e.1 = row.rel_error;
                e.2 = row.quadrature - row.closed_form;
            }
            if row.verdict == FiberVerdict::MismatchVsPaper {
                e.3 = FiberVerdict::MismatchVsPaper;
            }
        }
    }
    for (id, (anchor, rel, diff, verdict)) in worst {
        let tol = if id == "fiber.one" {
            ctx.tol.fiber_exact
        } else {
            ctx.tol.fiber_closed
        };
        let mut rec = IdentityRecord::checked(&id, &anchor, n, rel, tol);
        if rec.verdict == Verdict::Fail && verdict == FiberVerdict::MismatchVsPaper {
            rec.verdict = Verdict::MismatchVsPaper;
            rec.detail = Some(format!(
                "quadrature is authoritative; printed closed form differs by {diff:.6e}"
            ));
        }
        records.push(rec);
    }

    // push-forwards
    let mut vol_rel: f64 = 0.0;
    let mut t2: f64 = 0.0;
    let mut a02: f64 = 0.0;
    for x in &base {
        let rep = pushforward_checks(m, ctx.s, x, &ctx.grid)?;
        vol_rel = vol_rel.max(rep.vol_residual / (4.0 * std::f64::consts::PI * ctx.s * ctx.s));
        t2 = t2.max(rep.theta_alpha2);
        a02 = a02.max(rep.alpha0_alpha2);
    }
    records.push(IdentityRecord::checked(
        "fiber.push_vol",
        "pushforward of vol = 4 pi s^2 vol_base",
        n,
        vol_rel,
        ctx.tol.fiber_exact,
    ));
    records.push(IdentityRecord::checked(
        "fiber.push_theta_alpha2",
        "pushforward of theta ^ alpha2 = 0",
        n,
        t2,
        ctx.tol.fiber_exact,
    ));
    records.push(IdentityRecord::checked(
        "fiber.push_alpha0_alpha2",
        "pushforward of alpha0 ^ alpha2 = 0",
        n,
        a02,
        ctx.tol.fiber_exact,
    ));

    // tautological lifts
    let mut lift1: f64 = 0.0;
    let mut lift2: f64 = 0.0;
    for x in &base {
        let (q, c) = lift_one_form_sq(m, ctx.s, x, &ctx.grid, &[0.4, -0.7, 0.3])?;
        lift1 = lift1.max((q - c).abs() / q.abs().max(1.0));
        let g1 = [[0.5, 0.1, -0.2], [0.1, 1.2, 0.3], [-0.2, 0.3, 0.8]];
        let (q, c) = lift_two_tensor(m, ctx.s, x, &ctx.grid, &g1)?;
        lift2 = lift2.max((q - c).abs() / q.abs().max(1.0));
    }
    records.push(IdentityRecord::checked(
        "fiber.lift_phi2",
        "(phi-tilde^2)-check = (4 pi/3) s^2 |phi|^2",
        n,
        lift1,
        ctx.tol.fiber_closed,
    ));
    records.push(IdentityRecord::checked(
        "fiber.lift_trace",
        "(g1(u,u))-check = (4 pi/3) s^2 tr_g g1",
        n,
        lift2,
        ctx.tol.fiber_closed,
    ));

    // parametrization rotation invariance and grid refinement
    let x = base[0];
    let pack = m.curvature_pack(&x)?;
    let s = ctx.s;
    let f = |u: &[f64; 3]| Ok(fiber::c_of(&pack, u, s) * fiber::r_of(&pack, u, s));
    let plain = fiber::fiber_integrate(m, s, &x, &ctx.grid, f)?;
    let ang: f64 = 0.9;
    let (cc, ss) = (ang.cos(), ang.sin());
    let rot = [[cc, -ss, 0.0], [ss * 0.6, cc * 0.6, 0.8], [ss * 0.8, cc * 0.8, -0.6]];
    // orthonormalize the rotation rows
    let rot = orthonormal_rows(rot);
    let rotated = fiber::fiber_integrate_rotated(m, s, &x, &ctx.grid, &rot, f)?;
    records.push(IdentityRecord::checked(
        "fiber.rotation",
        "fiber integral independent of the parametrizing basis",
        1,
        (plain - rotated).abs() / plain.abs().max(1.0),
        ctx.tol.frame,
    ));
    let refined = fiber::fiber_integrate(m, s, &x, &ctx.grid.refined(), f)?;
    records.push(IdentityRecord::checked(
        "fiber.refinement",
        "doubling the grid leaves integrals unchanged",
        1,
        (plain - refined).abs() / plain.abs().max(1.0),
        ctx.tol.fiber_exact,
    ));

    Ok(records)
}

fn orthonormal_rows(mut r: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    for i in 0..3 {
        for j in 0..i {
            let d: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
            for k in 0..3 {
                r[i][k] -= d * r[j][k];
            }
        }
        let n: f64 = (0..3).map(|k| r[i][k] * r[i][k]).sum::<f64>().sqrt();
        for k in 0..3 {
            r[i][k] /= n;
        }
    }
    r
}

// ---------------------------------------------------------------------------
// invariant Lagrangians
// ---------------------------------------------------------------------------

pub fn lagrangian_suite(ctx: &SuiteCtx) -> Result<Vec<IdentityRecord>> {
    let m = &ctx.metric;
    let sys = build_system(m, ctx.s)?;
    let n = ctx.samples.len();
    let tol = ctx.tol.lagrangian;
    let s2 = ctx.s * ctx.s;
    let mut records = Vec::new();

    // classification: algebraic flags vs direct wedge / star computations
    let cases = [
        InvariantLagrangian::new(1.0, 0.0, 1.0, 0.0),
        InvariantLagrangian::new(1.0, 0.0, -1.0, 0.0),
        InvariantLagrangian::lambda2(1.0, 1.0),
        InvariantLagrangian::lambda2(1.0, -1.0),
        InvariantLagrangian::new(0.3, -0.4, 1.1, 0.6),
    ];
    let first = &ctx.samples[..1.min(ctx.samples.len())];
    let r = max_over_samples(first, |p| {
        let frame = frame_for(m, p)?;
        let mut worst: f64 = 0.0;
        for lag in &cases {
            let c = lag_classify(lag, &sys, &frame, tol)?;
            worst = worst.max(c.wedge_residual);
            if c.self_dual {
                worst = worst.max(c.star_self_residual);
            }
            if c.anti_self_dual {
                worst = worst.max(c.star_anti_residual);
            }
        }
        Ok(worst)
    })?;
    records.push(IdentityRecord::checked(
        "lagrangian.classify",
        "degeneracy t0 t2 - t1^2 - t3^2 and *4-duality vs direct computation",
        1,
        r,
        tol,
    ));

    // decomposition d Lambda = theta ^ Lambda'_0 + Lambda'_1 on a generic Lambda
    let lag = InvariantLagrangian::new(1.0, 0.5, -0.3, 0.2);
    let r = max_over_samples(&ctx.samples, |p| {
        d_lambda_residual(&lag, &sys, &frame_for(m, p)?)
    })?;
    records.push(IdentityRecord::checked(
        "lagrangian.dlambda",
        "d Lambda = theta ^ Lambda'_0 + s t2 alpha0 ^ rho",
        n,
        r,
        tol,
    ));

    if let Some(c) = m.constant_curvature() {
        // Lambda1 closed at matching curvature: t0 = c s^2 t2
        let lag = InvariantLagrangian::lambda1(c * s2, 1.0, 0.4);
        let d = lag.form(&sys).ext_derivative();
        let r = max_over_samples(&ctx.samples, |p| restricted_norm(&d, &frame_for(m, p)?))?;
        records.push(IdentityRecord::checked(
            "lagrangian.lambda1_closed",
            "d Lambda1 = 0 at c = t0/(s^2 t2)",
            n,
            r,
            tol,
        ));

        // principal ideal property holds only in the printed cases
        let r_dtheta = max_over_samples(&ctx.samples, |p| {
            principal_ideal_residual(
                &InvariantLagrangian::new(0.0, 0.0, 0.0, 1.0),
                &sys,
                &frame_for(m, p)?,
            )
        })?;
        let r_l1 = max_over_samples(&ctx.samples, |p| {
            principal_ideal_residual(&lag, &sys, &frame_for(m, p)?)
        })?;
        // a generic non-degenerate Lagrangian must fail unless the metric is flat
        let generic = InvariantLagrangian::new(1.0, 0.0, 2.0 + c.abs(), 0.0);
        let r_generic = max_over_samples(&ctx.samples, |p| {
            principal_ideal_residual(&generic, &sys, &frame_for(m, p)?)
        })?;
        let ok_cases = r_dtheta.max(r_l1);
        let mut rec = IdentityRecord::checked(
            "lagrangian.principal_ideal",
            "d Lambda = psi ^ Lambda only for Lambda ~ dtheta or matched Lambda1",
            n,
            ok_cases,
            tol,
        );
        if c != 0.0 && r_generic < 1e-3 {
            rec.verdict = Verdict::Fail;
            rec.detail = Some(format!(
                "generic Lagrangian unexpectedly admits psi (residual {r_generic:.3e})"
            ));
        } else {
            rec.detail = Some(format!(
                "generic-case least-squares residual {r_generic:.3e} (expected nonzero unless flat)"
            ));
        }
        records.push(rec);

        if c < 0.0 {
            // Lambda2 ideal relation with the branch-matched sign
            let t0 = ctx.s * (-c).sqrt();
            let mut worst: f64 = 0.0;
            for sign in [1.0, -1.0] {
                let lag = InvariantLagrangian::lambda2(t0, sign);
                let lhs = lag.form(&sys).ext_derivative();
                let rhs = sys
                    .theta
                    .wedge(&lag.form(&sys))?
                    .scale(sign * 2.0 * t0 / s2);
                worst = worst.max(max_over_samples(&ctx.samples, |p| {
                    restricted_residual(&lhs, &rhs, &frame_for(m, p)?)
                })?);
            }
            records.push(IdentityRecord::checked(
                "lagrangian.lambda2_ideal",
                "d Lambda2 = (sign of alpha1 branch)(2 t0/s^2) theta ^ Lambda2",
                n,
                worst,
                tol,
            ));
        }

        // H^2 facts: dtheta and matched Lambda1 (scaled by constants) closed
        let ddtheta = sys.theta.ext_derivative().ext_derivative();
        let r1 = max_over_samples(&ctx.samples, |p| {
            restricted_norm(&ddtheta, &frame_for(m, p)?)
        })?;
        let scaled = lag.form(&sys).scale(2.5);
        let r2 = max_over_samples(&ctx.samples, |p| {
            restricted_norm(&scaled.ext_derivative(), &frame_for(m, p)?)
        })?;
        records.push(IdentityRecord::checked(
            "lagrangian.h2",
            "d(dtheta) = 0 and d(const Lambda1) = 0",
            n,
            r1.max(r2),
            tol,
        ));
    }

    // integrity kernel of Lambda2 (pointwise frame algebra, any metric)
    let r = max_over_samples(&ctx.samples, |p| {
        let frame = frame_for(m, p)?;
        for (t0, sign) in [(1.0, 1.0), (0.8, -1.0)] {
            integrity_kernel(t0, sign, &sys, &frame)?;
        }
        Ok(0.0)
    })?;
    records.push(IdentityRecord::checked(
        "lagrangian.kernel",
        "beta ^ Lambda2 = 0 iff b0 = 0, b1 = sgn t0 b3, b2 = sgn t0 b4",
        n,
        r,
        ctx.tol.frame,
    ));

    Ok(records)
}

// ---------------------------------------------------------------------------
// surfaces and the Weingarten functional
// ---------------------------------------------------------------------------

pub fn surface_suite(ctx: &SuiteCtx) -> Result<Vec<IdentityRecord>> {
    let tol = ctx.tol.surface;
    let mut records = Vec::new();

    // horosphere: stationary for the minus branch at t0 = 1
    let s = SurfaceImmersion::by_name("horosphere", 0.0)?;
    let rep = weingarten_functional(&s, 1.0, Branch::Minus, 8, tol)?;
    records.push(
        IdentityRecord::checked(
            "surface.horosphere",
            "horosphere: K - 2 t0 H + 2 t0^2 = 0 (stationary)",
            64,
            rep.residual_max.abs().max(rep.residual_min.abs()),
            tol,
        )
        .with_detail(format!("functional value {:.3e}", rep.value)),
    );
    let mut factor_worst = rep.factor_residual;
    let mut legendre_worst = rep.legendre_residual;
    let mut routes_worst = rep.gauss_vs_intrinsic;
    let mut functional_worst: f64 = 0.0;

    // geodesic spheres: residual matches csch^2 a - 2 coth a + 2
    let mut geo_worst: f64 = 0.0;
    for a in [0.5f64, 1.0, 2.0] {
        let s = SurfaceImmersion::by_name("geodesic_sphere", a)?;
        let rep = weingarten_functional(&s, 1.0, Branch::Minus, 8, tol)?;
        let want = 1.0 / a.sinh().powi(2) - 2.0 / a.tanh() + 2.0;
        geo_worst = geo_worst
            .max((rep.residual_max - want).abs())
            .max((rep.residual_min - want).abs());
        factor_worst = factor_worst.max(rep.factor_residual);
        legendre_worst = legendre_worst.max(rep.legendre_residual);
        routes_worst = routes_worst.max(rep.gauss_vs_intrinsic);
        functional_worst =
            functional_worst.max((rep.value - rep.lift_value).abs() / rep.value.abs());
    }
    records.push(IdentityRecord::checked(
        "surface.geodesic_sphere",
        "geodesic sphere: residual = csch^2 a - 2 coth a + 2, a in {0.5, 1, 2}",
        3 * 64,
        geo_worst,
        tol,
    ));

    // totally geodesic plane: residual 1, not stationary
    let s = SurfaceImmersion::by_name("vertical_plane", 0.0)?;
    let rep = weingarten_functional(&s, 1.0, Branch::Minus, 6, tol)?;
    factor_worst = factor_worst.max(rep.factor_residual);
    legendre_worst = legendre_worst.max(rep.legendre_residual);
    records.push(IdentityRecord::checked(
        "surface.vertical_plane",
        "totally geodesic plane: residual = 1",
        36,
        (rep.residual_max - 1.0).abs().max((rep.residual_min - 1.0).abs()),
        tol,
    ));

    // euclidean sphere: lambda = 1/r, K = 1/r^2 from the numerical shape operator
    let r_sphere = 1.3;
    let s = SurfaceImmersion::by_name("euclidean_sphere", r_sphere)?;
    let mut eu_worst: f64 = 0.0;
    for (a, b) in [(0.5, 1.2), (0.9, 1.7), (0.3, 0.8)] {
        let pt = crate::surface::surface_point(&s, a, b)?;
        eu_worst = eu_worst
            .max((pt.lambda1 - 1.0 / r_sphere).abs())
            .max((pt.lambda2 - 1.0 / r_sphere).abs())
            .max((pt.k_gauss - 1.0 / (r_sphere * r_sphere)).abs());
        let k_fd = crate::surface::intrinsic_curvature_fd(&s, a, b)?;
        routes_worst = routes_worst.max((pt.k_gauss - k_fd).abs());
    }
    records.push(IdentityRecord::checked(
        "surface.euclidean_sphere",
        "round sphere radius r: lambda = 1/r, K = 1/r^2",
        3,
        eu_worst,
        tol,
    ));

    // graph surface: the two curvature routes agree
    let s = SurfaceImmersion::by_name("graph", 0.4)?;
    for (a, b) in [(0.2, -0.3), (-0.4, 0.5)] {
        let pt = crate::surface::surface_point(&s, a, b)?;
        let k_fd = crate::surface::intrinsic_curvature_fd(&s, a, b)?;
        routes_worst = routes_worst.max((pt.k_gauss - k_fd).abs());
    }

    records.push(IdentityRecord::checked(
        "surface.pullback",
        "lift pullbacks of (alpha0, alpha1, alpha2) = (1, -(l1+l2), l1 l2) vol",
        64,
        factor_worst,
        tol,
    ));
    records.push(IdentityRecord::checked(
        "surface.legendre",
        "lift annihilates theta",
        64,
        legendre_worst,
        ctx.tol.frame,
    ));
    records.push(IdentityRecord::checked(
        "surface.gauss_codazzi",
        "K from shape operator + ambient curvature = K of the induced metric",
        64,
        routes_worst,
        tol,
    ));
    records.push(IdentityRecord::checked(
        "surface.functional",
        "(1/t0) integral of lift* Lambda2 = Weingarten functional",
        3 * 64,
        functional_worst,
        ctx.tol.functional,
    ));

    Ok(records)
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

pub fn run_suite(name: &str, ctx: &SuiteCtx) -> Result<Vec<IdentityRecord>> {
    let dim = ctx.metric.dim;
    match name {
        "structure" | "hodge" | "rho" | "ricci" | "fiber" | "lagrangian" | "surface" => {
            if dim != 3 {
                return Err(Error::Config(format!(
                    "suite '{name}' needs a 3-dimensional base, metric '{}' has dimension {dim}",
                    ctx.metric.name
                )));
            }
        }
        "2d" => {
            if dim != 2 {
                return Err(Error::Config(format!(
                    "suite '2d' needs a 2-dimensional base, metric '{}' has dimension {dim}",
                    ctx.metric.name
                )));
            }
        }
        other => return Err(Error::Config(format!("unknown suite '{other}'"))),
    }
    match name {
        "structure" => structure_suite(ctx),
        "hodge" => hodge_suite(ctx),
        "rho" => rho_suite(ctx),
        "ricci" => ricci_suite(ctx),
        "fiber" => fiber_suite(ctx),
        "lagrangian" => lagrangian_suite(ctx),
        "surface" => surface_suite(ctx),
        "2d" => twod_suite(ctx),
        _ => unreachable!(),
    }
}

/// Runs every suite named in the configuration and assembles the report.
pub fn run_suites(cfg: &RunConfig) -> Result<VerificationReport> {
    let ctx = SuiteCtx::from_config(cfg)?;
    let mut records = Vec::new();
    for name in &cfg.suites {
        records.extend(run_suite(name, &ctx)?);
    }
    Ok(VerificationReport::assemble(cfg.clone(), records))
}

/// Default configuration for a metric name.
pub fn default_config(metric: &str) -> Result<RunConfig> {
    let m = ChartMetric::by_name(metric, None, None)?;
    let backend = Backend::Dual;
    Ok(RunConfig {
        metric: metric.to_string(),
        c: None,
        eps: None,
        s: 1.0,
        base_dim: m.dim,
        samples: 30,
        seed: 42,
        backend: backend.name().to_string(),
        suites: if m.dim == 3 {
            vec!["structure".into(), "hodge".into()]
        } else {
            vec!["2d".into()]
        },
        n_theta: 32,
        n_z: 16,
        tolerances: Tolerances::for_backend(backend),
        extra: Default::default(),
    })
}
