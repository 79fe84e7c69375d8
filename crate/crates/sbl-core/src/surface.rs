//! Immersed surfaces, their extrinsic geometry, Gauss lifts into the unit
//! tangent sphere bundle, and the hyperbolic Weingarten functional.
//!
//! An immersion is a chart map `phi: (a, b) -> M` written against the [`Real`]
//! scalar trait, so first and second derivatives come from nested dual
//! numbers. The unit normal is the normalized Riemannian cross product of the
//! coordinate velocities; parameter order fixes the orientation, and the
//! (signed) area form is `vol_N = vol_M(nu, d_a phi, d_b phi)`, positive for
//! every catalog surface.
//!
//! Shape conventions: `II(X, Y) = g(nu, nabla_X Y)` and the shape operator is
//! `h^{-1} II`, so a horosphere in the upper half-space with the normal
//! toward the ideal point has both principal curvatures `+1`.

use std::sync::Arc;

use crate::bundle::{BundlePoint, TPoint, TVec};
use crate::eds::FundamentalSystem;
use crate::fiber::gauss_legendre;
use crate::lagrangian::InvariantLagrangian;
use crate::metric::ChartMetric;
use crate::scalar::{cross_g, g_inner, inv3, Dual, Real, Vec3};
use crate::{Error, Result};

/// A chart map `(a, b) -> M` evaluable at the three scalar levels the
/// extrinsic machinery needs: values, first derivatives (dual numbers) and
/// second derivatives (nested duals). Implementors usually write one generic
/// method over [`Real`] and delegate the three entry points to it; this is
/// how custom immersions are registered programmatically.
pub trait ParametrizedSurface: Send + Sync {
    fn at(&self, a: f64, b: f64) -> Vec3<f64>;
    fn at_dual(&self, a: Dual<f64>, b: Dual<f64>) -> Vec3<Dual<f64>>;
    fn at_dual2(&self, a: Dual<Dual<f64>>, b: Dual<Dual<f64>>) -> Vec3<Dual<Dual<f64>>>;
}

impl ParametrizedSurface for SurfaceKind {
    fn at(&self, a: f64, b: f64) -> Vec3<f64> {
        self.eval(a, b)
    }
    fn at_dual(&self, a: Dual<f64>, b: Dual<f64>) -> Vec3<Dual<f64>> {
        self.eval(a, b)
    }
    fn at_dual2(&self, a: Dual<Dual<f64>>, b: Dual<Dual<f64>>) -> Vec3<Dual<Dual<f64>>> {
        self.eval(a, b)
    }
}

/// Catalog immersions, generic over the scalar for automatic differentiation.
#[derive(Clone, Debug)]
pub enum SurfaceKind {
    /// `(a, b, height)` in the upper half-space; normal toward the ideal point.
    Horosphere { height: f64 },
    /// Geodesic sphere of hyperbolic radius `a` about the point (0,0,1) in the
    /// upper half-space, parametrized `(psi, theta)` so the normal points at
    /// the center.
    GeodesicSphere { radius: f64 },
    /// Totally geodesic vertical plane `y = 0` in the upper half-space.
    VerticalPlane,
    /// Round sphere of radius `r` in Euclidean space, normal toward the center.
    EuclideanSphere { radius: f64 },
    /// Euclidean graph `z = amp sin(a) cos(b)`.
    Graph { amp: f64 },
}

impl SurfaceKind {
    pub fn eval<S: Real>(&self, a: S, b: S) -> Vec3<S> {
        match self {
            SurfaceKind::Horosphere { height } => [a, b, S::from_f64(*height)],
            SurfaceKind::GeodesicSphere { radius } => {
                let r = S::from_f64(*radius).sinh();
                let c = S::from_f64(*radius).cosh();
                // (psi, theta) order: normal = cross of velocities points inward
                let (psi, theta) = (a, b);
                [
                    r * theta.sin() * psi.cos(),
                    r * theta.sin() * psi.sin(),
                    c + r * theta.cos(),
                ]
            }
            SurfaceKind::VerticalPlane => [a, S::zero(), b],
            SurfaceKind::EuclideanSphere { radius } => {
                let r = S::from_f64(*radius);
                let (psi, theta) = (a, b);
                [
                    r * theta.sin() * psi.cos(),
                    r * theta.sin() * psi.sin(),
                    r * theta.cos(),
                ]
            }
            SurfaceKind::Graph { amp } => [a, b, S::from_f64(*amp) * a.sin() * b.cos()],
        }
    }
}

/// A parametrized surface patch in a chart metric.
#[derive(Clone)]
pub struct SurfaceImmersion {
    pub name: String,
    map: Arc<dyn ParametrizedSurface>,
    pub ambient: ChartMetric,
    /// Parameter rectangle `(a_lo..a_hi) x (b_lo..b_hi)`.
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
}

impl std::fmt::Debug for SurfaceImmersion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SurfaceImmersion({} in {})", self.name, self.ambient.name)
    }
}

impl SurfaceImmersion {
    fn catalog(name: &str, kind: SurfaceKind, ambient: ChartMetric, a: (f64, f64), b: (f64, f64)) -> Self {
        SurfaceImmersion {
            name: name.into(),
            map: Arc::new(kind),
            ambient,
            a_range: a,
            b_range: b,
        }
    }

    /// Registers an immersion that is not in the catalog.
    pub fn custom(
        name: &str,
        map: Arc<dyn ParametrizedSurface>,
        ambient: ChartMetric,
        a_range: (f64, f64),
        b_range: (f64, f64),
    ) -> Self {
        SurfaceImmersion {
            name: name.into(),
            map,
            ambient,
            a_range,
            b_range,
        }
    }

    pub fn by_name(name: &str, param: f64) -> Result<Self> {
        match name {
            "horosphere" => Ok(Self::catalog(
                name,
                SurfaceKind::Horosphere { height: 1.0 },
                ChartMetric::halfspace3(),
                (-0.6, 0.6),
                (-0.6, 0.6),
            )),
            "geodesic_sphere" => Ok(Self::catalog(
                name,
                SurfaceKind::GeodesicSphere { radius: param },
                ChartMetric::halfspace3(),
                (0.2, 1.2),
                (0.7, 2.2),
            )),
            "vertical_plane" => Ok(Self::catalog(
                name,
                SurfaceKind::VerticalPlane,
                ChartMetric::halfspace3(),
                (-0.6, 0.6),
                (0.6, 1.8),
            )),
            "euclidean_sphere" => Ok(Self::catalog(
                name,
                SurfaceKind::EuclideanSphere { radius: param },
                ChartMetric::euclidean3(),
                (0.2, 1.2),
                (0.7, 2.2),
            )),
            "graph" => Ok(Self::catalog(
                name,
                SurfaceKind::Graph { amp: param },
                ChartMetric::euclidean3(),
                (-0.7, 0.7),
                (-0.7, 0.7),
            )),
            other => Err(Error::UnknownSurface(other.to_string())),
        }
    }

    pub fn point(&self, a: f64, b: f64) -> Vec3<f64> {
        self.map.at(a, b)
    }

    /// First derivatives of the chart map by dual numbers.
    pub fn velocities(&self, a: f64, b: f64) -> (Vec3<f64>, Vec3<f64>) {
        let da = self.map.at_dual(Dual::seeded(a), Dual::constant(b));
        let db = self.map.at_dual(Dual::constant(a), Dual::seeded(b));
        (
            [da[0].eps, da[1].eps, da[2].eps],
            [db[0].eps, db[1].eps, db[2].eps],
        )
    }

    /// Second derivatives `(phi_aa, phi_ab, phi_bb)` by nested duals.
    pub fn second_derivatives(&self, a: f64, b: f64) -> (Vec3<f64>, Vec3<f64>, Vec3<f64>) {
        type D2 = Dual<Dual<f64>>;
        let seed = |sa: (f64, f64), sb: (f64, f64)| -> Vec3<D2> {
            let av = Dual::new(Dual::new(a, sa.0), Dual::new(sa.1, 0.0));
            let bv = Dual::new(Dual::new(b, sb.0), Dual::new(sb.1, 0.0));
            self.map.at_dual2(av, bv)
        };
        let take = |v: Vec3<D2>| [v[0].eps.eps, v[1].eps.eps, v[2].eps.eps];
        (
            take(seed((1.0, 1.0), (0.0, 0.0))),
            take(seed((1.0, 0.0), (0.0, 1.0))),
            take(seed((0.0, 0.0), (1.0, 1.0))),
        )
    }

    /// Unit normal: normalized Riemannian cross product of the velocities.
    pub fn normal(&self, a: f64, b: f64) -> Result<Vec3<f64>> {
        self.normal_generic_f64(a, b)
    }

    fn normal_generic_f64(&self, a: f64, b: f64) -> Result<Vec3<f64>> {
        let x = self.point(a, b);
        let g = self.ambient.g(&x);
        let gi = inv3(&g);
        let (va, vb) = self.velocities(a, b);
        let raw = cross_g(&g, &gi, &va, &vb);
        let n = g_inner(&g, &raw, &raw, 3).sqrt();
        if n < 1e-12 {
            return Err(Error::DegenerateImmersion(a, b));
        }
        Ok([raw[0] / n, raw[1] / n, raw[2] / n])
    }

    /// Normal and its parameter derivatives, by pushing dual numbers through
    /// the whole metric-and-cross-product pipeline.
    pub fn normal_with_derivatives(&self, a: f64, b: f64) -> Result<(Vec3<f64>, Vec3<f64>, Vec3<f64>)> {
        let eval_normal = |av: Dual<f64>, bv: Dual<f64>| -> Result<Vec3<Dual<f64>>> {
            type D2 = Dual<Dual<f64>>;
            // velocities at dual parameters need one more nesting level
            let pa: Vec3<D2> = self.map.at_dual2(
                Dual::new(av, Dual::constant(1.0)),
                Dual::new(bv, Dual::constant(0.0)),
            );
            let pb: Vec3<D2> = self.map.at_dual2(
                Dual::new(av, Dual::constant(0.0)),
                Dual::new(bv, Dual::constant(1.0)),
            );
            let va = [pa[0].eps, pa[1].eps, pa[2].eps];
            let vb = [pb[0].eps, pb[1].eps, pb[2].eps];
            let x = self.map.at_dual(av, bv);
            let g = self.ambient.kind.eval(&x);
            let gi = inv3(&g);
            let raw = cross_g(&g, &gi, &va, &vb);
            let n = g_inner(&g, &raw, &raw, 3).sqrt();
            Ok([raw[0] / n, raw[1] / n, raw[2] / n])
        };
        let na = eval_normal(Dual::seeded(a), Dual::constant(b))?;
        let nb = eval_normal(Dual::constant(a), Dual::seeded(b))?;
        Ok((
            [na[0].re, na[1].re, na[2].re],
            [na[0].eps, na[1].eps, na[2].eps],
            [nb[0].eps, nb[1].eps, nb[2].eps],
        ))
    }
}

/// Pointwise extrinsic data of an immersion.
#[derive(Clone, Copy, Debug)]
pub struct SurfacePointData {
    pub x: Vec3<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub mean: f64,
    /// Product of principal curvatures.
    pub extrinsic: f64,
    /// Intrinsic curvature via the ambient sectional curvature (Gauss route).
    pub k_gauss: f64,
    /// Signed area density `vol_M(nu, phi_a, phi_b)`.
    pub area: f64,
    /// Residual of the shape operator's h-symmetry.
    pub shape_symmetry: f64,
}

/// Shape operator, principal curvatures and curvature of one surface point.
pub fn surface_point(s: &SurfaceImmersion, a: f64, b: f64) -> Result<SurfacePointData> {
    let x = s.point(a, b);
    if !s.ambient.contains(&x) {
        return Err(Error::OutsideDomain(x));
    }
    let data = s.ambient.chart_data(&x)?;
    let (va, vb) = s.velocities(a, b);
    let h = [
        [data.inner(&va, &va), data.inner(&va, &vb)],
        [data.inner(&vb, &va), data.inner(&vb, &vb)],
    ];
    let det_h = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if det_h < 1e-14 {
        return Err(Error::DegenerateImmersion(a, b));
    }
    let nu = s.normal(a, b)?;
    let (paa, pab, pbb) = s.second_derivatives(a, b);
    let cov = |second: &Vec3<f64>, u: &Vec3<f64>, v: &Vec3<f64>| -> f64 {
        let gamma = data.gamma_bilinear(u, v);
        let mut w = [0.0; 3];
        for k in 0..3 {
            w[k] = second[k] + gamma[k];
        }
        data.inner(&nu, &w)
    };
    let ii = [
        [cov(&paa, &va, &va), cov(&pab, &va, &vb)],
        [cov(&pab, &vb, &va), cov(&pbb, &vb, &vb)],
    ];
    // shape = h^{-1} II
    let hinv = [
        [h[1][1] / det_h, -h[0][1] / det_h],
        [-h[1][0] / det_h, h[0][0] / det_h],
    ];
    let shape = [
        [
            hinv[0][0] * ii[0][0] + hinv[0][1] * ii[1][0],
            hinv[0][0] * ii[0][1] + hinv[0][1] * ii[1][1],
        ],
        [
            hinv[1][0] * ii[0][0] + hinv[1][1] * ii[1][0],
            hinv[1][0] * ii[0][1] + hinv[1][1] * ii[1][1],
        ],
    ];
    let tr = shape[0][0] + shape[1][1];
    let det_s = shape[0][0] * shape[1][1] - shape[0][1] * shape[1][0];
    let disc = (tr * tr / 4.0 - det_s).max(0.0).sqrt();
    let (lambda1, lambda2) = (tr / 2.0 - disc, tr / 2.0 + disc);
    // symmetry of II is the h-symmetry of the shape operator
    let shape_symmetry = (ii[0][1] - ii[1][0]).abs();

    // ambient sectional curvature of the tangent plane
    let pack = s.ambient.curvature_pack(&x)?;
    let mut e1 = va;
    let n1 = data.norm(&e1);
    for v in e1.iter_mut() {
        *v /= n1;
    }
    let mut e2 = vb;
    let c = data.inner(&e2, &e1);
    for k in 0..3 {
        e2[k] -= c * e1[k];
    }
    let n2 = data.norm(&e2);
    for v in e2.iter_mut() {
        *v /= n2;
    }
    let amb = pack.riem_contract(&e1, &e2, &e1, &e2);
    let k_gauss = amb + det_s;

    let area = data.vol(&[nu, va, vb]);
    Ok(SurfacePointData {
        x,
        lambda1,
        lambda2,
        mean: 0.5 * tr,
        extrinsic: det_s,
        k_gauss,
        area,
        shape_symmetry,
    })
}

/// Intrinsic curvature of the induced metric at `(a, b)` by fourth-order
/// finite differences of the metric coefficients; the independent check of
/// the Gauss route.
pub fn intrinsic_curvature_fd(s: &SurfaceImmersion, a: f64, b: f64) -> Result<f64> {
    let h_at = |a: f64, b: f64| -> Result<[[f64; 2]; 2]> {
        let x = s.point(a, b);
        let g = s.ambient.g(&x);
        let (va, vb) = s.velocities(a, b);
        Ok([
            [g_inner(&g, &va, &va, 3), g_inner(&g, &va, &vb, 3)],
            [g_inner(&g, &vb, &va, 3), g_inner(&g, &vb, &vb, 3)],
        ])
    };
    let step = 2e-3;
    // first derivative of a 2x2-matrix function along parameter axis `dir`
    let stencil = |f: &dyn Fn(f64, f64) -> Result<[[f64; 2]; 2]>,
                   at: (f64, f64),
                   dir: usize|
     -> Result<[[f64; 2]; 2]> {
        let ev = |t: f64| {
            let (mut aa, mut bb) = at;
            if dir == 0 {
                aa += t;
            } else {
                bb += t;
            }
            f(aa, bb)
        };
        let (m2, m1, p1, p2) = (ev(-2.0 * step)?, ev(-step)?, ev(step)?, ev(2.0 * step)?);
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (m2[i][j] - 8.0 * m1[i][j] + 8.0 * p1[i][j] - p2[i][j]) / (12.0 * step);
            }
        }
        Ok(out)
    };
    let h0 = h_at(a, b)?;
    let dha = stencil(&h_at, (a, b), 0)?;
    let dhb = stencil(&h_at, (a, b), 1)?;
    // second partials by nesting the same stencil
    let d_a = |aa: f64, bb: f64| stencil(&h_at, (aa, bb), 0);
    let d_b = |aa: f64, bb: f64| stencil(&h_at, (aa, bb), 1);
    let dhaa = stencil(&d_a, (a, b), 0)?;
    let dhab = stencil(&d_a, (a, b), 1)?;
    let dhbb = stencil(&d_b, (a, b), 1)?;

    // 2d curvature from metric and partials:
    // Gamma^k_{ij} then R_{0101}; K = R_{0101} / det h
    let det_h = h0[0][0] * h0[1][1] - h0[0][1] * h0[1][0];
    let hinv = [
        [h0[1][1] / det_h, -h0[0][1] / det_h],
        [-h0[1][0] / det_h, h0[0][0] / det_h],
    ];
    let dh = [dha, dhb];
    let d2h = [[dhaa, dhab], [dhab, dhbb]];
    let gamma = |k: usize, i: usize, j: usize| -> f64 {
        let mut v = 0.0;
        for l in 0..2 {
            v += hinv[k][l] * (dh[i][l][j] + dh[j][l][i] - dh[l][i][j]);
        }
        0.5 * v
    };
    let dgamma = |m: usize, k: usize, i: usize, j: usize| -> f64 {
        // derivative of hinv
        let mut dhi = [[0.0; 2]; 2];
        for p in 0..2 {
            for q in 0..2 {
                let mut v = 0.0;
                for r in 0..2 {
                    for t in 0..2 {
                        v -= hinv[p][r] * dh[m][r][t] * hinv[t][q];
                    }
                }
                dhi[p][q] = v;
            }
        }
        let mut v = 0.0;
        for l in 0..2 {
            let sym = dh[i][l][j] + dh[j][l][i] - dh[l][i][j];
            let dsym = d2h[m][i][l][j] + d2h[m][j][l][i] - d2h[m][l][i][j];
            v += dhi[k][l] * sym + hinv[k][l] * dsym;
        }
        0.5 * v
    };
    // R^l_{k i j} with (l,k,i,j) = (.,1,0,1), lowered against h
    let mut r_up = [0.0; 2];
    for l in 0..2 {
        let mut v = dgamma(0, l, 1, 1) - dgamma(1, l, 0, 1);
        for mm in 0..2 {
            v += gamma(mm, 1, 1) * gamma(l, 0, mm) - gamma(mm, 0, 1) * gamma(l, 1, mm);
        }
        r_up[l] = v;
    }
    let r0101 = h0[0][0] * r_up[0] + h0[0][1] * r_up[1];
    Ok(r0101 / det_h)
}

// ---------------------------------------------------------------------------
// Gauss lift and pull-backs
// ---------------------------------------------------------------------------

/// Pull-backs of `theta` and the fundamental 2-forms along the unit-normal
/// lift, divided by the signed area form.
#[derive(Clone, Copy, Debug)]
pub struct LiftFactors {
    pub theta: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub area: f64,
}

/// Evaluates `f-hat* omega (d_a, d_b)` for the lift `f-hat = (phi, nu)` at one
/// parameter point. Requires radius 1.
pub fn gauss_lift_factors(
    s: &SurfaceImmersion,
    sys: &FundamentalSystem,
    a: f64,
    b: f64,
) -> Result<LiftFactors> {
    if (sys.s - 1.0).abs() > 1e-12 {
        return Err(Error::Config(
            "Gauss lifts require the unit sphere bundle (s = 1)".into(),
        ));
    }
    let x = s.point(a, b);
    let (nu, dna, dnb) = s.normal_with_derivatives(a, b)?;
    let (va, vb) = s.velocities(a, b);
    let p = TPoint::new(x, nu, 3);
    let wa = TVec::new(va, dna);
    let wb = TVec::new(vb, dnb);
    let data = s.ambient.chart_data(&x)?;
    let area = data.vol(&[nu, va, vb]);
    if area.abs() < 1e-14 {
        return Err(Error::DegenerateImmersion(a, b));
    }
    let theta = sys.theta.eval(&p, &[wa])?.abs().max(sys.theta.eval(&p, &[wb])?.abs());
    let alpha0 = sys.alpha[0].eval(&p, &[wa, wb])? / area;
    let alpha1 = sys.alpha[1].eval(&p, &[wa, wb])? / area;
    let alpha2 = sys.alpha[2].eval(&p, &[wa, wb])? / area;
    Ok(LiftFactors {
        theta,
        alpha0,
        alpha1,
        alpha2,
        area,
    })
}

// ---------------------------------------------------------------------------
// Weingarten functional
// ---------------------------------------------------------------------------

/// Sign of the mean-curvature term in the functional: `Minus` is the printed
/// `K - 2 t0 H + 2 t0^2`, paired with the `+alpha1` branch of the degenerate
/// Lagrangian; `Plus` pairs with the `-alpha1` branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "minus" | "-" => Ok(Branch::Minus),
            "plus" | "+" => Ok(Branch::Plus),
            other => Err(Error::Config(format!("unknown branch '{other}'"))),
        }
    }
    /// Sign of the alpha1 coefficient in the paired Lagrangian.
    pub fn lambda_sign(&self) -> f64 {
        match self {
            Branch::Minus => 1.0,
            Branch::Plus => -1.0,
        }
    }
    /// Sign in front of `2 t0 H` in the integrand.
    pub fn h_sign(&self) -> f64 {
        match self {
            Branch::Minus => -1.0,
            Branch::Plus => 1.0,
        }
    }
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct WeingartenReport {
    pub surface: String,
    pub t0: f64,
    pub branch: Branch,
    /// Quadrature of `(K_N -/+ 2 t0 H + 2 t0^2) vol_N`.
    pub value: f64,
    /// Quadrature of `(1/t0) f-hat* Lambda_2`.
    pub lift_value: f64,
    /// Pointwise maximum of the stationarity residual `K -/+ 2 t0 H + 2 t0^2`.
    pub residual_max: f64,
    pub residual_min: f64,
    pub stationary: bool,
    /// max |pullback factors - (1, -(l1+l2), l1 l2)| over the grid.
    pub factor_residual: f64,
    /// max |f-hat* theta| over the grid (the Legendre condition).
    pub legendre_residual: f64,
    /// max |K(Gauss route) - K(induced metric route)|.
    pub gauss_vs_intrinsic: f64,
}

/// Evaluates the Weingarten functional of a surface patch over a tensor
/// Gauss-Legendre grid, together with the Lagrangian cross-check.
pub fn weingarten_functional(
    s: &SurfaceImmersion,
    t0: f64,
    branch: Branch,
    n_grid: usize,
    stationary_tol: f64,
) -> Result<WeingartenReport> {
    let c = s
        .ambient
        .constant_curvature()
        .ok_or_else(|| Error::Config("Weingarten functional needs a constant-curvature ambient".into()))?;
    if (c + t0 * t0).abs() > 1e-9 {
        return Err(Error::BranchMismatch { c, t0 });
    }
    let sys = crate::eds::build_system(&s.ambient, 1.0)?;
    let lag = InvariantLagrangian::lambda2(t0, branch.lambda_sign());
    let gl = gauss_legendre(n_grid);
    let (a0, a1) = s.a_range;
    let (b0, b1) = s.b_range;
    let (ca, cb) = (0.5 * (a0 + a1), 0.5 * (b0 + b1));
    let (ra, rb) = (0.5 * (a1 - a0), 0.5 * (b1 - b0));

    let mut value = 0.0;
    let mut lift_value = 0.0;
    let mut residual_max = f64::NEG_INFINITY;
    let mut residual_min = f64::INFINITY;
    let mut factor_residual: f64 = 0.0;
    let mut legendre_residual: f64 = 0.0;
    let mut gauss_vs_intrinsic: f64 = 0.0;
    let lag_form = lag.form(&sys);

    for &(xa, wa) in &gl {
        for &(xb, wb) in &gl {
            let (a, b) = (ca + ra * xa, cb + rb * xb);
            let w = wa * wb * ra * rb;
            let pt = surface_point(s, a, b)?;
            let integrand =
                pt.k_gauss + branch.h_sign() * 2.0 * t0 * pt.mean + 2.0 * t0 * t0;
            value += w * integrand * pt.area;
            residual_max = residual_max.max(integrand);
            residual_min = residual_min.min(integrand);

            let lf = gauss_lift_factors(s, &sys, a, b)?;
            factor_residual = factor_residual
                .max((lf.alpha0 - 1.0).abs())
                .max((lf.alpha1 + pt.lambda1 + pt.lambda2).abs())
                .max((lf.alpha2 - pt.lambda1 * pt.lambda2).abs());
            legendre_residual = legendre_residual.max(lf.theta);

            // (1/t0) f-hat* Lambda2
            let x = s.point(a, b);
            let (nu, dna, dnb) = s.normal_with_derivatives(a, b)?;
            let (va, vb) = s.velocities(a, b);
            let p = TPoint::new(x, nu, 3);
            let lv = lag_form.eval(&p, &[TVec::new(va, dna), TVec::new(vb, dnb)])?;
            lift_value += w * lv / t0;

            let k_fd = intrinsic_curvature_fd(s, a, b)?;
            gauss_vs_intrinsic = gauss_vs_intrinsic.max((pt.k_gauss - k_fd).abs());
        }
    }
    let stationary = residual_max.abs().max(residual_min.abs()) <= stationary_tol;
    Ok(WeingartenReport {
        surface: s.name.clone(),
        t0,
        branch,
        value,
        lift_value,
        residual_max,
        residual_min,
        stationary,
        factor_residual,
        legendre_residual,
        gauss_vs_intrinsic,
    })
}

/// Lift of a surface point into the unit sphere bundle.
pub fn gauss_lift_point(s: &SurfaceImmersion, a: f64, b: f64) -> Result<BundlePoint> {
    let x = s.point(a, b);
    let nu = s.normal(a, b)?;
    BundlePoint::new(&s.ambient, x, nu, 1.0)
}
