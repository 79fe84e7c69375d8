//! The fundamental exterior differential system on the tangent sphere bundle.
//!
//! For a base of dimension `n + 1` the system consists of the contact form
//! `theta = <xi, B .>` and the global `n`-forms `alpha_0 .. alpha_n`, where
//! `alpha_n` is the interior product of `xi / s` with the vertical lift of the
//! base volume form and the lower `alpha_i` insert the mirror map on subsets
//! of arguments:
//!
//! ```text
//! alpha_i(v_1..v_n) = 1/(i!(n-i)!) sum_sigma sg(sigma)
//!                     alpha_n(B v_{sigma(1)}, .., B v_{sigma(n-i)}, v_{sigma(n-i+1)}, ..)
//! ```
//!
//! All fields here are built from that general definition (never from
//! adapted-frame shortcuts), so evaluating them on frames is itself a check.
//! The curvature correction `R alpha_i` of the first-order structure equation
//! is assembled from the literal double sum over curvature components, which
//! makes it an independent cross-check of the numerically differentiated
//! `d alpha_i`.

use std::sync::Arc;

use crate::bundle::{adapted_frame, AdaptedFrame, BundlePoint, TPoint, TVec};
use crate::forms::{
    frame_components, from_frame_closure, index_tuples, tuple_rank, w_decompose, FormField, Pivot,
    ScalarFn,
};
use crate::metric::{ChartMetric, CurvaturePack};
use crate::{Error, Result};

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, f64)>) {
        let n = used.len();
        if cur.len() == n {
            // parity by inversion count
            let mut sign = 1.0;
            for i in 0..n {
                for j in i + 1..n {
                    if cur[i] > cur[j] {
                        sign = -sign;
                    }
                }
            }
            out.push((cur.clone(), sign));
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product::<f64>().max(1.0)
}

// ---------------------------------------------------------------------------
// the fundamental forms
// ---------------------------------------------------------------------------

/// Contact form `theta(w) = g_x(u, dpi w)`; equals `s e^0` on adapted frames.
pub fn theta_form(m: &ChartMetric) -> FormField {
    let m = m.clone();
    let d = m.dim;
    FormField::new(
        1,
        2 * d,
        "theta",
        Arc::new(move |p: &TPoint| {
            let g = m.g(&p.x);
            let mut out = vec![0.0; 2 * d];
            for (c, slot) in out.iter_mut().enumerate().take(d) {
                let mut acc = 0.0;
                for j in 0..d {
                    acc += p.u[j] * g[j][c];
                }
                *slot = acc;
            }
            Ok(out)
        }),
    )
}

/// Exact bilinear form of the contact derivative:
/// `dtheta(v, w) = <v, B w> - <w, B v>`. Verified against the numerically
/// differentiated `theta` by [`contact_bilinear_residual`].
pub fn dtheta_exact(m: &ChartMetric) -> FormField {
    let m = m.clone();
    let d = m.dim;
    FormField::new(
        2,
        2 * d,
        "dtheta",
        Arc::new(move |p: &TPoint| {
            let data = m.chart_data(&p.x)?;
            let tuples = index_tuples(2 * d, 2);
            let mut out = vec![0.0; tuples.len()];
            for (r, t) in tuples.iter().enumerate() {
                let v = TVec::basis(t[0] as usize, d);
                let w = TVec::basis(t[1] as usize, d);
                out[r] = data.sasaki(&p.u, &v, &data.mirror(&w))
                    - data.sasaki(&p.u, &w, &data.mirror(&v));
            }
            Ok(out)
        }),
    )
}

/// The fundamental `n`-form `alpha_i` from the general permutation definition.
pub fn alpha_form(m: &ChartMetric, i: usize) -> Result<FormField> {
    let d = m.dim;
    let n = d - 1;
    if i > n {
        return Err(Error::IndexOutOfRange(i, n));
    }
    let m = m.clone();
    let perms = permutations(n);
    let norm = 1.0 / (factorial(i) * factorial(n - i));
    Ok(FormField::new(
        n,
        2 * d,
        format!("alpha{i}"),
        Arc::new(move |p: &TPoint| {
            let data = m.chart_data(&p.x)?;
            let s = data.norm(&p.u);
            if s < 1e-13 {
                return Err(Error::DegenerateFrame("zero fiber vector".into()));
            }
            // alpha_n on chart vectors: vol(u, K w_1, .., K w_n) / s
            let alpha_n = |ws: &[&TVec]| -> f64 {
                let mut args: Vec<[f64; 3]> = Vec::with_capacity(n + 1);
                args.push(p.u);
                for w in ws {
                    args.push(data.k_map(&p.u, w));
                }
                data.vol(&args) / s
            };
            let tuples = index_tuples(2 * d, n);
            let mut out = vec![0.0; tuples.len()];
            for (r, t) in tuples.iter().enumerate() {
                let basis: Vec<TVec> = t.iter().map(|&c| TVec::basis(c as usize, d)).collect();
                let mut acc = 0.0;
                for (perm, sign) in &perms {
                    let mut mirrored: Vec<TVec> = Vec::with_capacity(n);
                    for (slot, &src) in perm.iter().enumerate() {
                        let v = basis[src];
                        if slot < n - i {
                            mirrored.push(data.mirror(&v));
                        } else {
                            mirrored.push(v);
                        }
                    }
                    let refs: Vec<&TVec> = mirrored.iter().collect();
                    acc += sign * alpha_n(&refs);
                }
                out[r] = acc * norm;
            }
            Ok(out)
        }),
    ))
}

/// Vertical lift of the base volume form: evaluates the base volume on the
/// vertical parts of its arguments. This is the form whose interior product
/// with `xi / s` is `alpha_n`; it differs from the pullback [`vol_pullback`].
pub fn vol_vertical_lift(m: &ChartMetric) -> FormField {
    let m = m.clone();
    let d = m.dim;
    FormField::new(
        d,
        2 * d,
        "vol_vert",
        Arc::new(move |p: &TPoint| {
            let data = m.chart_data(&p.x)?;
            let tuples = index_tuples(2 * d, d);
            let mut out = vec![0.0; tuples.len()];
            for (r, t) in tuples.iter().enumerate() {
                let args: Vec<[f64; 3]> = t
                    .iter()
                    .map(|&c| data.k_map(&p.u, &TVec::basis(c as usize, d)))
                    .collect();
                out[r] = data.vol(&args);
            }
            Ok(out)
        }),
    )
}

/// Pullback of the base volume form.
pub fn vol_pullback(m: &ChartMetric) -> FormField {
    let m = m.clone();
    let d = m.dim;
    FormField::new(
        d,
        2 * d,
        "vol",
        Arc::new(move |p: &TPoint| {
            let sq = m.sqrt_det_g(&p.x);
            let tuples = index_tuples(2 * d, d);
            let mut out = vec![0.0; tuples.len()];
            // only the all-base tuple (0, 1, .., d-1) survives
            let base: Vec<u8> = (0..d as u8).collect();
            out[tuple_rank(&base, 2 * d)] = sq;
            Ok(out)
        }),
    )
}

/// The contact form, its exact derivative and the fundamental forms, bound to
/// a metric and radius.
#[derive(Clone, Debug)]
pub struct FundamentalSystem {
    pub metric: ChartMetric,
    pub s: f64,
    /// Base dimension minus one (1 or 2).
    pub n: usize,
    pub theta: FormField,
    pub dtheta: FormField,
    /// `alpha[0..=n]`.
    pub alpha: Vec<FormField>,
}

pub fn build_system(m: &ChartMetric, s: f64) -> Result<FundamentalSystem> {
    if !(2..=3).contains(&m.dim) {
        return Err(Error::UnsupportedDimension(m.dim));
    }
    if s <= 0.0 {
        return Err(Error::BadRadius(s));
    }
    let n = m.dim - 1;
    let mut alpha = Vec::with_capacity(n + 1);
    for i in 0..=n {
        alpha.push(alpha_form(m, i)?);
    }
    Ok(FundamentalSystem {
        metric: m.clone(),
        s,
        n,
        theta: theta_form(m),
        dtheta: dtheta_exact(m),
        alpha,
    })
}

impl FundamentalSystem {
    /// `alpha_i` extended by the convention `alpha_{-1} = alpha_{n+1} = 0`.
    pub fn alpha_padded(&self, i: isize) -> FormField {
        if i < 0 || i as usize > self.n {
            FormField::zero(self.n, 2 * self.metric.dim)
        } else {
            self.alpha[i as usize].clone()
        }
    }
}

/// Residual of `dtheta(v, w) = <v, B w> - <w, B v>` with `dtheta` computed by
/// numerical differentiation of `theta`.
pub fn contact_bilinear_residual(
    m: &ChartMetric,
    p: &BundlePoint,
    v: &TVec,
    w: &TVec,
) -> Result<f64> {
    let data = m.chart_data(&p.x)?;
    // tangency check
    let xi = data.xi(&p.u);
    let tp = p.tpoint();
    if data.sasaki(&p.u, v, &xi).abs() > 1e-8 * p.s || data.sasaki(&p.u, w, &xi).abs() > 1e-8 * p.s
    {
        return Err(Error::Config("vectors not tangent to the sphere bundle".into()));
    }
    let numeric = theta_form(m).ext_derivative().eval(&tp, &[*v, *w])?;
    let exact =
        data.sasaki(&p.u, v, &data.mirror(w)) - data.sasaki(&p.u, w, &data.mirror(v));
    Ok((numeric - exact).abs())
}

// ---------------------------------------------------------------------------
// curvature correction R alpha_i
// ---------------------------------------------------------------------------

/// Frame-level interior product `e_a -| omega` on frame components.
pub fn frame_interior(fc: &[f64], n_frame: usize, k: usize, a: u8) -> Vec<f64> {
    let tuples = index_tuples(n_frame, k - 1);
    let mut out = vec![0.0; tuples.len()];
    for (r, t) in tuples.iter().enumerate() {
        if t.contains(&a) {
            continue;
        }
        let mut merged = vec![a];
        merged.extend_from_slice(t);
        if let Some((sorted, sign)) = crate::forms::sort_with_sign(&merged) {
            out[r] = sign * fc[tuple_rank(&sorted, n_frame)];
        }
    }
    out
}

/// Frame-level wedge of frame-component vectors.
pub fn frame_wedge(fa: &[f64], ka: usize, fb: &[f64], kb: usize, n_frame: usize) -> Vec<f64> {
    let out_tuples = index_tuples(n_frame, ka + kb);
    let mut out = vec![0.0; out_tuples.len()];
    let a_tuples = index_tuples(n_frame, ka);
    let b_tuples = index_tuples(n_frame, kb);
    for (ra, ta) in a_tuples.iter().enumerate() {
        if fa[ra] == 0.0 {
            continue;
        }
        for (rb, tb) in b_tuples.iter().enumerate() {
            if fb[rb] == 0.0 {
                continue;
            }
            let mut merged = ta.clone();
            merged.extend_from_slice(tb);
            if let Some((sorted, sign)) = crate::forms::sort_with_sign(&merged) {
                out[tuple_rank(&sorted, n_frame)] += sign * fa[ra] * fb[rb];
            }
        }
    }
    out
}

/// The curvature term of the first-order structure equation,
/// `R alpha_i = sum_{j<q} sum_p s R_{p0jq} e^{jq} ^ (e_{p+n} -| alpha_i)`,
/// assembled literally from the double sum.
pub fn curvature_correction(m: &ChartMetric, i: usize) -> Result<FormField> {
    let d = m.dim;
    let n = d - 1;
    if i > n {
        return Err(Error::IndexOutOfRange(i, n));
    }
    let alpha_i = alpha_form(m, i)?;
    let metric = m.clone();
    let n_frame = 2 * n + 1;
    Ok(from_frame_closure(
        m,
        n + 1,
        format!("Ralpha{i}"),
        Pivot::Auto,
        Arc::new(move |frame: &AdaptedFrame| {
            let pack = metric.curvature_pack(&frame.at.x)?;
            let s = frame.at.s;
            let fc_alpha = frame_components(&alpha_i, frame)?;
            let mut out = vec![0.0; index_tuples(n_frame, n + 1).len()];
            for j in 0..n {
                for q in (j + 1)..=n {
                    for pp in 1..=n {
                        let r_comp = pack.riem_contract(
                            &frame.b[pp],
                            &frame.b[0],
                            &frame.b[j],
                            &frame.b[q],
                        );
                        if r_comp == 0.0 {
                            continue;
                        }
                        // e^{jq} as a frame 2-form
                        let mut ejq = vec![0.0; index_tuples(n_frame, 2).len()];
                        ejq[tuple_rank(&[j as u8, q as u8], n_frame)] = 1.0;
                        let inner = frame_interior(&fc_alpha, n_frame, n, (pp + n) as u8);
                        let term = frame_wedge(&ejq, 2, &inner, n - 1, n_frame);
                        for (o, t) in out.iter_mut().zip(term.iter()) {
                            *o += s * r_comp * t;
                        }
                    }
                }
            }
            Ok(out)
        }),
    ))
}

// ---------------------------------------------------------------------------
// rho family and curvature scalars (base dimension 3)
// ---------------------------------------------------------------------------

/// The four curvature 1-forms and the 2-form `gamma`, with the associated
/// scalar fields. The 1-forms are built frame-free: `rho(w) = Ric(u, K w)/s`
/// and its companions act through the mirror map and the invariant rotation
/// realized by the Riemannian cross product with `u/s`.
#[derive(Clone)]
pub struct RhoFamily {
    pub rho: FormField,
    pub rho1: FormField,
    pub rho2: FormField,
    pub rho3: FormField,
    pub gamma: FormField,
    pub r: ScalarFn,
    pub c: ScalarFn,
    pub p2: ScalarFn,
    pub q2: ScalarFn,
}

fn rho_like(m: &ChartMetric, name: &str, which: u8) -> FormField {
    let metric = m.clone();
    let d = m.dim;
    FormField::new(
        1,
        2 * d,
        name,
        Arc::new(move |p: &TPoint| {
            let pack = metric.curvature_pack(&p.x)?;
            let data = metric.chart_data(&p.x)?;
            let s = data.norm(&p.u);
            let s2 = s * s;
            let ruu = pack.ric_contract(&p.u, &p.u);
            // rho with the normal component removed: the tangent-manifold
            // extension is chosen free of xi-flat factors, so compositions
            // with B and I+ restrict the way the frame expressions do.
            let rho_clean = |arg: &[f64; 3]| {
                (pack.ric_contract(&p.u, arg) - ruu / s2 * data.inner(&p.u, arg)) / s
            };
            let mut out = vec![0.0; 2 * d];
            for (c, slot) in out.iter_mut().enumerate() {
                let w = TVec::basis(c, d);
                let arg: [f64; 3] = match which {
                    // rho: K(w)
                    0 => data.k_map(&p.u, &w),
                    // rho1 = rho o B: base part of w
                    1 => {
                        let mut v = [0.0; 3];
                        v[..d].copy_from_slice(&w.b[..d]);
                        v
                    }
                    // rho2 = rho o I+ B: (u/s) x w_base
                    2 => {
                        let c = crate::scalar::cross_g(&data.g, &data.ginv, &p.u, &w.b);
                        let mut v = [0.0; 3];
                        for (i, vi) in v.iter_mut().enumerate() {
                            *vi = c[i] / s;
                        }
                        v
                    }
                    // rho3 = rho o I+: (u/s) x K(w)
                    _ => {
                        let k = data.k_map(&p.u, &w);
                        let c = crate::scalar::cross_g(&data.g, &data.ginv, &p.u, &k);
                        let mut v = [0.0; 3];
                        for (i, vi) in v.iter_mut().enumerate() {
                            *vi = c[i] / s;
                        }
                        v
                    }
                };
                *slot = rho_clean(&arg);
            }
            Ok(out)
        }),
    )
}

/// `gamma = R_{1002} f_2 + (R_{1001} - R_{2002})/2 f_1`, a frame-level field
/// in the third irreducible plane.
pub fn gamma_form(m: &ChartMetric) -> FormField {
    gamma_form_with_pivot(m, Pivot::Auto)
}

pub fn gamma_form_with_pivot(m: &ChartMetric, pivot: Pivot) -> FormField {
    let metric = m.clone();
    from_frame_closure(
        m,
        2,
        "gamma",
        pivot,
        Arc::new(move |frame: &AdaptedFrame| {
            let pack = metric.curvature_pack(&frame.at.x)?;
            let b = &frame.b;
            let r1002 = pack.riem_contract(&b[1], &b[0], &b[0], &b[2]);
            let r1001 = pack.riem_contract(&b[1], &b[0], &b[0], &b[1]);
            let r2002 = pack.riem_contract(&b[2], &b[0], &b[0], &b[2]);
            let f1c = 0.5 * (r1001 - r2002);
            let mut out = vec![0.0; 10];
            // f1 = e^{14} + e^{23}, f2 = e^{31} - e^{42} = -e^{13} + e^{24}
            out[tuple_rank(&[1, 4], 5)] = f1c;
            out[tuple_rank(&[2, 3], 5)] = f1c;
            out[tuple_rank(&[1, 3], 5)] = -r1002;
            out[tuple_rank(&[2, 4], 5)] = r1002;
            Ok(out)
        }),
    )
}

pub fn rho_family(m: &ChartMetric) -> Result<RhoFamily> {
    if m.dim != 3 {
        return Err(Error::UnsupportedDimension(m.dim));
    }
    let rho = rho_like(m, "rho", 0);
    let rho1 = rho_like(m, "rho1", 1);
    let rho2 = rho_like(m, "rho2", 2);
    let rho3 = rho_like(m, "rho3", 3);
    let gamma = gamma_form(m);

    let mr = m.clone();
    let r: ScalarFn = Arc::new(move |p: &TPoint| {
        let pack = mr.curvature_pack(&p.x)?;
        let s2 = mr.inner(&p.x, &p.u, &p.u);
        Ok(pack.ric_contract(&p.u, &p.u) / s2)
    });
    let mc = m.clone();
    let rc = r.clone();
    let c: ScalarFn = Arc::new(move |p: &TPoint| {
        let pack = mc.curvature_pack(&p.x)?;
        Ok(0.5 * pack.scal - rc(p)?)
    });
    let mp = m.clone();
    let p2: ScalarFn = Arc::new(move |p: &TPoint| {
        let pack = mp.curvature_pack(&p.x)?;
        let s2 = mp.inner(&p.x, &p.u, &p.u);
        // |Ric(u, .)|^2 - Ric(u, u)^2 / s^2, all over s^2
        let mut ric_u = [0.0; 3];
        for a in 0..3 {
            for b in 0..3 {
                ric_u[a] += pack.ric[a][b] * p.u[b];
            }
        }
        let mut norm2 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                norm2 += pack.ginv[a][b] * ric_u[a] * ric_u[b];
            }
        }
        let ruu = pack.ric_contract(&p.u, &p.u);
        Ok((norm2 - ruu * ruu / s2) / s2)
    });
    let mq = m.clone();
    let q2: ScalarFn = Arc::new(move |p: &TPoint| {
        let frame = crate::bundle::adapted_frame_with_pivot(&mq, p, None)?;
        let pack = mq.curvature_pack(&p.x)?;
        let b = &frame.b;
        let r1002 = pack.riem_contract(&b[1], &b[0], &b[0], &b[2]);
        let r1001 = pack.riem_contract(&b[1], &b[0], &b[0], &b[1]);
        let r2002 = pack.riem_contract(&b[2], &b[0], &b[0], &b[2]);
        Ok(2.0 * r1002 * r1002 + 0.5 * (r1001 - r2002) * (r1001 - r2002))
    });

    Ok(RhoFamily {
        rho,
        rho1,
        rho2,
        rho3,
        gamma,
        r,
        c,
        p2,
        q2,
    })
}

/// Pointwise curvature scalars `(c, r, p^2, q^2)` with the two q^2 routes.
#[derive(Clone, Copy, Debug)]
pub struct ScalarInvariants {
    pub c: f64,
    pub r: f64,
    pub p2: f64,
    pub q2: f64,
    /// `q^2` recomputed as `r^2/2 - 2 det R_{.00.}`.
    pub q2_det: f64,
    pub scal: f64,
}

pub fn scalar_invariants(m: &ChartMetric, p: &BundlePoint) -> Result<ScalarInvariants> {
    if m.dim != 3 {
        return Err(Error::UnsupportedDimension(m.dim));
    }
    let frame = adapted_frame(m, p)?;
    let pack = m.curvature_pack(&p.x)?;
    let b = &frame.b;
    let rc = |a: usize, bb: usize, cc: usize, dd: usize| {
        pack.riem_contract(&b[a], &b[bb], &b[cc], &b[dd])
    };
    let c = rc(1, 2, 1, 2);
    let r = rc(1, 0, 1, 0) + rc(2, 0, 2, 0);
    let p2 = {
        let a = rc(1, 0, 1, 2);
        let bb = rc(2, 0, 1, 2);
        a * a + bb * bb
    };
    let r1002 = rc(1, 0, 0, 2);
    let r1001 = rc(1, 0, 0, 1);
    let r2002 = rc(2, 0, 0, 2);
    let q2 = 2.0 * r1002 * r1002 + 0.5 * (r1001 - r2002) * (r1001 - r2002);
    // det of the 2x2 block M_{ab} = R_{a00b}
    let det = r1001 * r2002 - r1002 * rc(2, 0, 0, 1);
    let q2_det = 0.5 * r * r - 2.0 * det;
    Ok(ScalarInvariants {
        c,
        r,
        p2,
        q2,
        q2_det,
        scal: pack.scal,
    })
}

// ---------------------------------------------------------------------------
// derivative of rho: classification coefficients
// ---------------------------------------------------------------------------

/// Graded pieces of `d rho` in the invariant decomposition
/// `[[alpha_1]] + W_2 + W_3 + [[dtheta]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FCoefficients {
    pub f1: f64,
    pub f2: [f64; 2],
    pub f3: [f64; 2],
    pub f4: f64,
}

impl FCoefficients {
    pub fn max_abs_diff(&self, o: &FCoefficients) -> f64 {
        let mut worst = (self.f1 - o.f1).abs().max((self.f4 - o.f4).abs());
        for i in 0..2 {
            worst = worst
                .max((self.f2[i] - o.f2[i]).abs())
                .max((self.f3[i] - o.f3[i]).abs());
        }
        worst
    }
}

/// Direct route: components of `grad Ric` in the adapted frame.
pub fn f_from_grad_ric(pack: &CurvaturePack, frame: &AdaptedFrame) -> FCoefficients {
    let b = &frame.b;
    let gr = |i: usize, j: usize| pack.grad_ric_contract(&b[i], &b[0], &b[j]);
    FCoefficients {
        f1: 0.5 * (gr(1, 2) - gr(2, 1)),
        f2: [gr(0, 1), gr(0, 2)],
        f3: [0.5 * (gr(1, 2) + gr(2, 1)), 0.5 * (-gr(1, 1) + gr(2, 2))],
        f4: -0.5 * (gr(1, 1) + gr(2, 2)),
    }
}

/// Independent route: orthogonal projection of the numerically
/// differentiated `rho` field.
pub fn f_from_drho(rho: &FormField, frame: &AdaptedFrame) -> Result<FCoefficients> {
    let drho = rho.ext_derivative();
    let dec = w_decompose(&drho, frame)?;
    Ok(FCoefficients {
        f1: dec.a1,
        f2: dec.w2,
        f3: dec.w3,
        f4: dec.a3,
    })
}

/// Frame components of the printed `d rho` formula:
/// `sum_{i=0..2, j=1..2} (grad_i Ric)_{0j} e^i ^ e^{j+2}`.
pub fn drho_from_grad_ric(pack: &CurvaturePack, frame: &AdaptedFrame) -> Vec<f64> {
    let b = &frame.b;
    let mut out = vec![0.0; 10];
    for i in 0..3u8 {
        for j in 1..3u8 {
            let v = pack.grad_ric_contract(&b[i as usize], &b[0], &b[j as usize]);
            let pair = [i.min(j + 2), i.max(j + 2)];
            let sign = if i < j + 2 { 1.0 } else { -1.0 };
            out[tuple_rank(&pair, 5)] += sign * v;
        }
    }
    out
}

/// The horizontal-horizontal curvature part of `d rho`:
/// `d rho (e_i, e_j) = (1/s) Ric(u, R(b_i, b_j) u)` on horizontal pairs.
/// Together with [`drho_from_grad_ric`] this reproduces the numerically
/// differentiated `rho` to stencil precision.
pub fn drho_curvature_part(pack: &CurvaturePack, frame: &AdaptedFrame) -> Vec<f64> {
    let b = &frame.b;
    let s = frame.at.s;
    let mut out = vec![0.0; 10];
    for i in 0..3u8 {
        for j in (i + 1)..3u8 {
            let mut acc = 0.0;
            for l in 0..3 {
                acc += pack.riem_contract(&b[l], &b[0], &b[i as usize], &b[j as usize])
                    * pack.ric_contract(&b[0], &b[l]);
            }
            out[tuple_rank(&[i, j], 5)] = s * acc;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Ricci type classification
// ---------------------------------------------------------------------------

/// The four vanishing classes of `grad Ric`, named by which graded piece of
/// `d rho` is absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RicciType {
    I,
    II,
    III,
    IV,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RicciTypeReport {
    /// Maxima of |F_1|, |F_2|, |F_3|, |F_4| over the samples.
    pub f_max: [f64; 4],
    /// Types granted (defining coefficient below tolerance at every sample).
    pub types: Vec<RicciType>,
    pub csc: bool,
    pub recurrent: bool,
    /// Containments III in I and II in IV hold for the granted set.
    pub containment_ok: bool,
    pub samples: usize,
    pub tolerance: f64,
}

pub fn classify_ricci(
    m: &ChartMetric,
    samples: &[BundlePoint],
    tol: f64,
) -> Result<RicciTypeReport> {
    if samples.len() < 10 {
        return Err(Error::InsufficientSamples {
            min: 10,
            got: samples.len(),
        });
    }
    let mut f_max = [0.0f64; 4];
    let mut csc = true;
    let mut recurrent = true;
    for p in samples {
        let pack = m.curvature_pack(&p.x)?;
        let frame = adapted_frame(m, p)?;
        let f = f_from_grad_ric(&pack, &frame);
        f_max[0] = f_max[0].max(f.f1.abs());
        f_max[1] = f_max[1].max(f.f2[0].hypot(f.f2[1]));
        f_max[2] = f_max[2].max(f.f3[0].hypot(f.f3[1]));
        f_max[3] = f_max[3].max(f.f4.abs());
        // constant scalar curvature: vanishing gradient
        let dscal_norm = pack.dscal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dscal_norm > tol {
            csc = false;
        }
        // recurrent: grad Ric = omega (x) g solvable in least squares
        let mut worst = 0.0f64;
        for a in 0..3 {
            // omega_a = tr_g (grad_a Ric) / 3
            let mut tr = 0.0;
            for b in 0..3 {
                for c in 0..3 {
                    tr += pack.ginv[b][c] * pack.grad_ric[a][b][c];
                }
            }
            let omega = tr / 3.0;
            for b in 0..3 {
                for c in 0..3 {
                    worst = worst.max((pack.grad_ric[a][b][c] - omega * pack.g[b][c]).abs());
                }
            }
        }
        if worst > tol {
            recurrent = false;
        }
    }
    let granted: Vec<RicciType> = [RicciType::I, RicciType::II, RicciType::III, RicciType::IV]
        .iter()
        .zip(f_max.iter())
        .filter(|(_, &v)| v <= tol)
        .map(|(&t, _)| t)
        .collect();
    let containment_ok = (!granted.contains(&RicciType::III) || granted.contains(&RicciType::I))
        && (!granted.contains(&RicciType::II) || granted.contains(&RicciType::IV));
    Ok(RicciTypeReport {
        f_max,
        types: granted,
        csc,
        recurrent,
        containment_ok,
        samples: samples.len(),
        tolerance: tol,
    })
}
