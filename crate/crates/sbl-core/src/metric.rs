//! Chart-presented Riemannian metrics and their curvature.
//!
//! A [`ChartMetric`] is a smooth field of symmetric positive-definite matrices
//! on an open chart domain in dimension 2 or 3, together with a differentiation
//! backend producing the metric derivatives the curvature stack consumes.
//!
//! Index conventions, fixed once and tested against closed forms:
//!
//! ```text
//! Gamma^k_{ij} = 1/2 g^{kl} (d_i g_{lj} + d_j g_{li} - d_l g_{ij})
//! R^l_{kij}    = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
//!                + Gamma^m_{jk} Gamma^l_{im} - Gamma^m_{ik} Gamma^l_{jm}
//! R_{lkij}     = g_{lm} R^m_{kij}            (= <R(d_i, d_j) d_k, d_l>)
//! Ric_{ab}     = g^{cd} R_{dbca},  scal = g^{ab} Ric_{ab}
//! (grad Ric)_{a,bc} = d_a Ric_{bc} - Gamma^m_{ab} Ric_{mc} - Gamma^m_{ac} Ric_{bm}
//! ```
//!
//! With this ordering a space of constant sectional curvature `c` satisfies
//! `R_{lkij} = c (g_{il} g_{jk} - g_{jl} g_{ik})`, i.e. `R_{1212} = c` in any
//! orthonormal frame.

use crate::scalar::{det3, g_inner, inv3, mat3_identity, Dual, Mat3, Real, Vec3};
use crate::Error;

pub const EPS: f64 = f64::EPSILON;

/// Differentiation backend for metric derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Backend {
    /// Closed-form derivatives supplied by the catalog entry.
    Analytic,
    /// Nested forward-mode dual numbers; exact to machine precision.
    Dual,
    /// Order-4 central differences, nested with level-dependent steps.
    FiniteDiff,
}

impl Backend {
    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "analytic" => Ok(Backend::Analytic),
            "dual" => Ok(Backend::Dual),
            "fd" => Ok(Backend::FiniteDiff),
            other => Err(Error::Config(format!("unknown backend '{other}'"))),
        }
    }
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Analytic => "analytic",
            Backend::Dual => "dual",
            Backend::FiniteDiff => "fd",
        }
    }
}

/// Chart domain with a validity predicate and a shrunken box safe for sampling.
#[derive(Clone, Debug)]
pub enum Domain {
    Box { lo: Vec3<f64>, hi: Vec3<f64> },
    Ball { radius: f64 },
    /// x_{dim-1} > floor, other coordinates in [-extent, extent].
    UpperHalf { floor: f64, extent: f64 },
}

impl Domain {
    pub fn contains(&self, x: &Vec3<f64>, dim: usize) -> bool {
        match self {
            Domain::Box { lo, hi } => (0..dim).all(|i| x[i] >= lo[i] && x[i] <= hi[i]),
            Domain::Ball { radius } => {
                (0..dim).map(|i| x[i] * x[i]).sum::<f64>() < radius * radius
            }
            Domain::UpperHalf { floor, extent } => {
                x[dim - 1] > *floor && (0..dim - 1).all(|i| x[i].abs() <= *extent)
            }
        }
    }

    /// Axis-aligned box strictly inside the domain, used for seeded sampling.
    pub fn sample_box(&self, dim: usize) -> (Vec3<f64>, Vec3<f64>) {
        match self {
            Domain::Box { lo, hi } => {
                let mut l = [0.0; 3];
                let mut h = [0.0; 3];
                for i in 0..dim {
                    let c = 0.5 * (lo[i] + hi[i]);
                    let r = 0.4 * (hi[i] - lo[i]);
                    l[i] = c - r;
                    h[i] = c + r;
                }
                (l, h)
            }
            Domain::Ball { radius } => {
                let r = 0.5 * radius / (dim as f64).sqrt();
                ([-r; 3], [r; 3])
            }
            Domain::UpperHalf { floor, extent } => {
                let mut l = [-0.8 * extent; 3];
                let mut h = [0.8 * extent; 3];
                l[dim - 1] = floor + 0.3;
                h[dim - 1] = floor + 2.0;
                (l, h)
            }
        }
    }
}

/// Catalog metric together with its parameters.
#[derive(Clone, Debug)]
pub enum MetricKind {
    /// Identity metric in dimension `dim`.
    Flat { dim: usize },
    /// Conformal constant-curvature chart g = delta / (1 + c|x|^2/4)^2.
    Conformal { c: f64, dim: usize },
    /// Hyperbolic upper half-space g = delta / x_d^2 (curvature -1).
    HalfSpace { dim: usize },
    /// Nil geometry g = dx^2 + dy^2 + (dz - x dy)^2.
    Heisenberg,
    /// g = delta + eps * bump with single-sinusoid entries; generic curvature.
    Perturbed { eps: f64 },
}

/// Frequency vectors and phases of the perturbed-metric bump entries.
const BUMP: [[f64; 5]; 6] = [
    // [k1, k2, k3, phase, amplitude] for entries (0,0),(1,1),(2,2),(0,1),(0,2),(1,2)
    [1.0, 2.0, 0.0, 0.3, 1.0],
    [2.0, 0.0, 1.0, 1.1, 1.0],
    [0.0, 1.0, 2.0, 2.0, 1.0],
    [1.0, 1.0, 1.0, 0.7, 0.5],
    [2.0, 1.0, 0.0, 1.7, 0.5],
    [0.0, 2.0, 1.0, 0.4, 0.5],
];

const BUMP_SLOT: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

impl MetricKind {
    pub fn dim(&self) -> usize {
        match self {
            MetricKind::Flat { dim } | MetricKind::Conformal { dim, .. } | MetricKind::HalfSpace { dim } => *dim,
            MetricKind::Heisenberg | MetricKind::Perturbed { .. } => 3,
        }
    }

    /// Metric matrix at `x`, generic over the scalar so dual numbers can flow
    /// through. Entries beyond `dim` are padded with the identity.
    pub fn eval<S: Real>(&self, x: &Vec3<S>) -> Mat3<S> {
        let mut g = mat3_identity::<S>();
        match self {
            MetricKind::Flat { .. } => {}
            MetricKind::Conformal { c, dim } => {
                let quarter = S::from_f64(0.25 * c);
                let mut n2 = S::zero();
                for i in 0..*dim {
                    n2 = n2 + x[i] * x[i];
                }
                let f = S::one() + quarter * n2;
                let w = (f * f).recip();
                for i in 0..*dim {
                    g[i][i] = w;
                }
            }
            MetricKind::HalfSpace { dim } => {
                let w = (x[*dim - 1] * x[*dim - 1]).recip();
                for i in 0..*dim {
                    g[i][i] = w;
                }
            }
            MetricKind::Heisenberg => {
                let a = x[0];
                g[1][1] = S::one() + a * a;
                g[1][2] = -a;
                g[2][1] = -a;
            }
            MetricKind::Perturbed { eps } => {
                let e = S::from_f64(*eps);
                for (slot, kp) in BUMP.iter().enumerate() {
                    let (i, j) = BUMP_SLOT[slot];
                    let phase = S::from_f64(kp[3])
                        + S::from_f64(kp[0]) * x[0]
                        + S::from_f64(kp[1]) * x[1]
                        + S::from_f64(kp[2]) * x[2];
                    let v = e * S::from_f64(kp[4]) * phase.sin();
                    g[i][j] = g[i][j] + v;
                    if i != j {
                        g[j][i] = g[j][i] + v;
                    }
                }
            }
        }
        g
    }

    /// Closed-form partial derivatives up to third order; the analytic backend.
    fn analytic_derivs(&self, x: &Vec3<f64>) -> (DG, D2G, D3G) {
        let mut dg = [[[0.0; 3]; 3]; 3];
        let mut d2g = [[[[0.0; 3]; 3]; 3]; 3];
        let mut d3g = [[[[[0.0; 3]; 3]; 3]; 3]; 3];
        match self {
            MetricKind::Flat { .. } => {}
            MetricKind::Conformal { c, dim } => {
                let d = *dim;
                let mut n2 = 0.0;
                for i in 0..d {
                    n2 += x[i] * x[i];
                }
                let f = 1.0 + 0.25 * c * n2;
                let (f3, f4, f5) = (f.powi(-3), f.powi(-4), f.powi(-5));
                let kron = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                for k in 0..d {
                    let dk = -c * x[k] * f3;
                    for i in 0..d {
                        dg[k][i][i] = dk;
                    }
                    for l in 0..d {
                        let dkl = -c * (kron(k, l) * f3 - 1.5 * c * x[k] * x[l] * f4);
                        for i in 0..d {
                            d2g[k][l][i][i] = dkl;
                        }
                        for m in 0..d {
                            let dklm = 1.5 * c * c
                                * ((kron(k, l) * x[m] + kron(k, m) * x[l] + kron(l, m) * x[k]) * f4
                                    - 2.0 * c * x[k] * x[l] * x[m] * f5);
                            for i in 0..d {
                                d3g[k][l][m][i][i] = dklm;
                            }
                        }
                    }
                }
            }
            MetricKind::HalfSpace { dim } => {
                let d = *dim;
                let z = x[d - 1];
                for i in 0..d {
                    dg[d - 1][i][i] = -2.0 * z.powi(-3);
                    d2g[d - 1][d - 1][i][i] = 6.0 * z.powi(-4);
                    d3g[d - 1][d - 1][d - 1][i][i] = -24.0 * z.powi(-5);
                }
            }
            MetricKind::Heisenberg => {
                dg[0][1][1] = 2.0 * x[0];
                dg[0][1][2] = -1.0;
                dg[0][2][1] = -1.0;
                d2g[0][0][1][1] = 2.0;
            }
            MetricKind::Perturbed { eps } => {
                for (slot, kp) in BUMP.iter().enumerate() {
                    let (i, j) = BUMP_SLOT[slot];
                    let kv = [kp[0], kp[1], kp[2]];
                    let phase = kp[3] + kv[0] * x[0] + kv[1] * x[1] + kv[2] * x[2];
                    let a = eps * kp[4];
                    let (s, c) = phase.sin_cos();
                    for k in 0..3 {
                        let v1 = a * kv[k] * c;
                        dg[k][i][j] += v1;
                        if i != j {
                            dg[k][j][i] += v1;
                        }
                        for l in 0..3 {
                            let v2 = -a * kv[k] * kv[l] * s;
                            d2g[k][l][i][j] += v2;
                            if i != j {
                                d2g[k][l][j][i] += v2;
                            }
                            for m in 0..3 {
                                let v3 = -a * kv[k] * kv[l] * kv[m] * c;
                                d3g[k][l][m][i][j] += v3;
                                if i != j {
                                    d3g[k][l][m][j][i] += v3;
                                }
                            }
                        }
                    }
                }
            }
        }
        (dg, d2g, d3g)
    }
}

type DG = [Mat3<f64>; 3];
type D2G = [[Mat3<f64>; 3]; 3];
type D3G = [[[Mat3<f64>; 3]; 3]; 3];

/// A Riemannian metric restricted to a chart, with differentiation backend.
#[derive(Clone, Debug)]
pub struct ChartMetric {
    pub kind: MetricKind,
    pub dim: usize,
    pub domain: Domain,
    pub backend: Backend,
    pub name: String,
    pub params: Vec<f64>,
}

impl ChartMetric {
    fn new(kind: MetricKind, domain: Domain, name: &str, params: Vec<f64>) -> Self {
        let dim = kind.dim();
        ChartMetric {
            kind,
            dim,
            domain,
            backend: Backend::Dual,
            name: name.to_string(),
            params,
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    // -------------------------------------------------------- catalog

    pub fn euclidean3() -> Self {
        Self::new(
            MetricKind::Flat { dim: 3 },
            Domain::Box { lo: [-2.0; 3], hi: [2.0; 3] },
            "euclidean3",
            vec![],
        )
    }

    /// Round sphere of constant curvature c > 0 in the conformal chart.
    pub fn sphere3(c: f64) -> Self {
        Self::new(
            MetricKind::Conformal { c, dim: 3 },
            Domain::Box { lo: [-1.5; 3], hi: [1.5; 3] },
            "sphere3",
            vec![c],
        )
    }

    /// Hyperbolic space of constant curvature c < 0 in the conformal disc chart.
    pub fn hyperbolic3(c: f64) -> Self {
        let r = 2.0 / (-c).sqrt();
        Self::new(
            MetricKind::Conformal { c, dim: 3 },
            Domain::Ball { radius: 0.9 * r },
            "hyperbolic3",
            vec![c],
        )
    }

    /// Hyperbolic upper half-space, curvature -1.
    pub fn halfspace3() -> Self {
        Self::new(
            MetricKind::HalfSpace { dim: 3 },
            Domain::UpperHalf { floor: 0.02, extent: 12.0 },
            "halfspace3",
            vec![],
        )
    }

    pub fn heisenberg() -> Self {
        Self::new(
            MetricKind::Heisenberg,
            Domain::Box { lo: [-1.2; 3], hi: [1.2; 3] },
            "heisenberg",
            vec![],
        )
    }

    pub fn perturbed(eps: f64) -> Self {
        Self::new(
            MetricKind::Perturbed { eps },
            Domain::Box { lo: [-1.2; 3], hi: [1.2; 3] },
            "perturbed",
            vec![eps],
        )
    }

    pub fn flat2d() -> Self {
        Self::new(
            MetricKind::Flat { dim: 2 },
            Domain::Box { lo: [-2.0; 3], hi: [2.0; 3] },
            "flat2d",
            vec![],
        )
    }

    pub fn sphere2d(c: f64) -> Self {
        Self::new(
            MetricKind::Conformal { c, dim: 2 },
            Domain::Box { lo: [-1.5; 3], hi: [1.5; 3] },
            "sphere2d",
            vec![c],
        )
    }

    pub fn hyperbolic2d(c: f64) -> Self {
        let r = 2.0 / (-c).sqrt();
        Self::new(
            MetricKind::Conformal { c, dim: 2 },
            Domain::Ball { radius: 0.9 * r },
            "hyperbolic2d",
            vec![c],
        )
    }

    /// Catalog lookup by CLI name. `c` and `eps` are consumed where relevant.
    pub fn by_name(name: &str, c: Option<f64>, eps: Option<f64>) -> Result<Self, Error> {
        match name {
            "euclidean3" => Ok(Self::euclidean3()),
            "sphere3" => {
                let c = c.unwrap_or(1.0);
                if c <= 0.0 {
                    return Err(Error::Config("sphere3 needs c > 0".into()));
                }
                Ok(Self::sphere3(c))
            }
            "hyperbolic3" => {
                let c = c.unwrap_or(-1.0);
                if c >= 0.0 {
                    return Err(Error::Config("hyperbolic3 needs c < 0".into()));
                }
                Ok(Self::hyperbolic3(c))
            }
            "halfspace3" => Ok(Self::halfspace3()),
            "heisenberg" => Ok(Self::heisenberg()),
            "perturbed" => Ok(Self::perturbed(eps.unwrap_or(0.05))),
            "flat2d" => Ok(Self::flat2d()),
            "sphere2d" => {
                let c = c.unwrap_or(1.0);
                if c <= 0.0 {
                    return Err(Error::Config("sphere2d needs c > 0".into()));
                }
                Ok(Self::sphere2d(c))
            }
            "hyperbolic2d" => {
                let c = c.unwrap_or(-1.0);
                if c >= 0.0 {
                    return Err(Error::Config("hyperbolic2d needs c < 0".into()));
                }
                Ok(Self::hyperbolic2d(c))
            }
            other => Err(Error::UnknownMetric(other.to_string())),
        }
    }

    /// Sectional curvature when it is constant across points and planes.
    pub fn constant_curvature(&self) -> Option<f64> {
        match &self.kind {
            MetricKind::Flat { .. } => Some(0.0),
            MetricKind::Conformal { c, .. } => Some(*c),
            MetricKind::HalfSpace { .. } => Some(-1.0),
            MetricKind::Heisenberg | MetricKind::Perturbed { .. } => None,
        }
    }

    // -------------------------------------------------------- evaluation

    pub fn contains(&self, x: &Vec3<f64>) -> bool {
        self.domain.contains(x, self.dim)
    }

    fn check_domain(&self, x: &Vec3<f64>) -> Result<(), Error> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(*x))
        }
    }

    pub fn g(&self, x: &Vec3<f64>) -> Mat3<f64> {
        self.kind.eval(x)
    }

    pub fn g_inv(&self, x: &Vec3<f64>) -> Mat3<f64> {
        inv3(&self.g(x))
    }

    pub fn sqrt_det_g(&self, x: &Vec3<f64>) -> f64 {
        det3(&self.g(x)).sqrt()
    }

    pub fn inner(&self, x: &Vec3<f64>, v: &Vec3<f64>, w: &Vec3<f64>) -> f64 {
        g_inner(&self.g(x), v, w, self.dim)
    }

    pub fn norm(&self, x: &Vec3<f64>, v: &Vec3<f64>) -> f64 {
        self.inner(x, v, v).sqrt()
    }

    // -------------------------------------------------------- derivatives

    /// First partials of g. `dg[k][i][j] = d_k g_{ij}`.
    pub fn dg(&self, x: &Vec3<f64>) -> DG {
        match self.backend {
            Backend::Analytic => self.kind.analytic_derivs(x).0,
            Backend::Dual => {
                let mut out = [[[0.0; 3]; 3]; 3];
                for (k, slot) in out.iter_mut().enumerate().take(self.dim) {
                    let mut xs = [Dual::<f64>::constant(0.0); 3];
                    for c in 0..3 {
                        xs[c] = if c == k { Dual::seeded(x[c]) } else { Dual::constant(x[c]) };
                    }
                    let gk = self.kind.eval(&xs);
                    for i in 0..3 {
                        for j in 0..3 {
                            slot[i][j] = gk[i][j].eps;
                        }
                    }
                }
                out
            }
            Backend::FiniteDiff => {
                let mut out = [[[0.0; 3]; 3]; 3];
                for (k, slot) in out.iter_mut().enumerate().take(self.dim) {
                    *slot = fd_dir(|y| self.kind.eval(y), x, k, fd_step1(x[k]));
                }
                out
            }
        }
    }

    /// Second partials. `d2g[k][l][i][j] = d_k d_l g_{ij}`.
    pub fn d2g(&self, x: &Vec3<f64>) -> D2G {
        match self.backend {
            Backend::Analytic => self.kind.analytic_derivs(x).1,
            Backend::Dual => {
                let mut out = [[[[0.0; 3]; 3]; 3]; 3];
                for k in 0..self.dim {
                    for l in k..self.dim {
                        let mut xs = [Dual::<Dual<f64>>::constant(Dual::constant(0.0)); 3];
                        for c in 0..3 {
                            let inner = if c == k { Dual::seeded(x[c]) } else { Dual::constant(x[c]) };
                            let outer = if c == l { Dual::constant(1.0) } else { Dual::constant(0.0) };
                            xs[c] = Dual::new(inner, outer);
                        }
                        let gkl = self.kind.eval(&xs);
                        for i in 0..3 {
                            for j in 0..3 {
                                out[k][l][i][j] = gkl[i][j].eps.eps;
                                out[l][k][i][j] = out[k][l][i][j];
                            }
                        }
                    }
                }
                out
            }
            Backend::FiniteDiff => {
                let mut out = [[[[0.0; 3]; 3]; 3]; 3];
                for l in 0..self.dim {
                    let dl = fd_dir_tensor(
                        |y| {
                            let mut d = [[[0.0; 3]; 3]; 3];
                            for (k, slot) in d.iter_mut().enumerate().take(self.dim) {
                                *slot = fd_dir(|z| self.kind.eval(z), y, k, fd_step1(y[k]));
                            }
                            d
                        },
                        x,
                        l,
                        FD_H2 * (1.0 + x[l].abs()),
                    );
                    for k in 0..self.dim {
                        out[k][l] = dl[k];
                    }
                }
                out
            }
        }
    }

    /// Third partials. `d3g[k][l][m][i][j] = d_k d_l d_m g_{ij}`.
    pub fn d3g(&self, x: &Vec3<f64>) -> D3G {
        match self.backend {
            Backend::Analytic => self.kind.analytic_derivs(x).2,
            Backend::Dual => {
                let mut out = [[[[[0.0; 3]; 3]; 3]; 3]; 3];
                type D3 = Dual<Dual<Dual<f64>>>;
                for k in 0..self.dim {
                    for l in 0..self.dim {
                        for m in 0..self.dim {
                            let mut xs = [D3::from_f64(0.0); 3];
                            for c in 0..3 {
                                let s1 = if c == k { 1.0 } else { 0.0 };
                                let s2 = if c == l { 1.0 } else { 0.0 };
                                let s3 = if c == m { 1.0 } else { 0.0 };
                                xs[c] = Dual::new(
                                    Dual::new(Dual::new(x[c], s1), Dual::new(s2, 0.0)),
                                    Dual::new(Dual::new(s3, 0.0), Dual::new(0.0, 0.0)),
                                );
                            }
                            let gklm = self.kind.eval(&xs);
                            for i in 0..3 {
                                for j in 0..3 {
                                    out[k][l][m][i][j] = gklm[i][j].eps.eps.eps;
                                }
                            }
                        }
                    }
                }
                out
            }
            Backend::FiniteDiff => {
                let mut out = [[[[[0.0; 3]; 3]; 3]; 3]; 3];
                for m in 0..self.dim {
                    let dm = fd_dir_tensor2(
                        |y| {
                            let mut d2 = [[[[0.0; 3]; 3]; 3]; 3];
                            for l in 0..self.dim {
                                let dl = fd_dir_tensor(
                                    |z| {
                                        let mut d = [[[0.0; 3]; 3]; 3];
                                        for (k, slot) in d.iter_mut().enumerate().take(self.dim) {
                                            *slot = fd_dir(|w| self.kind.eval(w), z, k, fd_step1(z[k]));
                                        }
                                        d
                                    },
                                    y,
                                    l,
                                    FD_H2 * (1.0 + y[l].abs()),
                                );
                                for k in 0..self.dim {
                                    d2[k][l] = dl[k];
                                }
                            }
                            d2
                        },
                        x,
                        m,
                        FD_H3 * (1.0 + x[m].abs()),
                    );
                    for k in 0..self.dim {
                        for l in 0..self.dim {
                            out[k][l][m] = dm[k][l];
                        }
                    }
                }
                out
            }
        }
    }

    // -------------------------------------------------------- curvature

    /// Christoffel symbols of the second kind; `gamma[k][i][j] = Gamma^k_{ij}`.
    pub fn christoffel(&self, x: &Vec3<f64>) -> Result<Gamma, Error> {
        self.check_domain(x)?;
        let g = self.g(x);
        let det = det3(&g);
        if !det.is_finite() || det.abs() < 1e-14 {
            return Err(Error::SingularMetric(*x));
        }
        Ok(christoffel_from(&inv3(&g), &self.dg(x), self.dim))
    }

    /// All curvature data at a base point.
    pub fn curvature_pack(&self, x: &Vec3<f64>) -> Result<CurvaturePack, Error> {
        self.check_domain(x)?;
        let d = self.dim;
        let g = self.g(x);
        let det = det3(&g);
        if !det.is_finite() || det.abs() < 1e-14 {
            return Err(Error::SingularMetric(*x));
        }
        let ginv = inv3(&g);
        let dg = self.dg(x);
        let d2g = self.d2g(x);
        let d3g = self.d3g(x);

        let gamma = christoffel_from(&ginv, &dg, d);
        let dginv = dginv_from(&ginv, &dg, d);
        let dgamma = dgamma_from(&ginv, &dginv, &dg, &d2g, d);
        let d2gamma = d2gamma_from(&ginv, &dginv, &dg, &d2g, &d3g, d);

        // R^l_{kij} and the lowered tensor.
        let mut riem_up = [[[[0.0; 3]; 3]; 3]; 3];
        for l in 0..d {
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let mut v = dgamma[i][l][j][k] - dgamma[j][l][i][k];
                        for m in 0..d {
                            v += gamma[m][j][k] * gamma[l][i][m] - gamma[m][i][k] * gamma[l][j][m];
                        }
                        riem_up[l][k][i][j] = v;
                    }
                }
            }
        }
        let mut riem = [[[[0.0; 3]; 3]; 3]; 3];
        for l in 0..d {
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let mut v = 0.0;
                        for m in 0..d {
                            v += g[l][m] * riem_up[m][k][i][j];
                        }
                        riem[l][k][i][j] = v;
                    }
                }
            }
        }

        // Partial derivative of the lowered tensor, for grad Ric.
        let mut driem_up = [[[[[0.0; 3]; 3]; 3]; 3]; 3];
        for a in 0..d {
            for l in 0..d {
                for k in 0..d {
                    for i in 0..d {
                        for j in 0..d {
                            let mut up = d2gamma[a][i][l][j][k] - d2gamma[a][j][l][i][k];
                            for m in 0..d {
                                up += dgamma[a][m][j][k] * gamma[l][i][m]
                                    + gamma[m][j][k] * dgamma[a][l][i][m]
                                    - dgamma[a][m][i][k] * gamma[l][j][m]
                                    - gamma[m][i][k] * dgamma[a][l][j][m];
                            }
                            driem_up[a][l][k][i][j] = up;
                        }
                    }
                }
            }
        }
        let mut driem = [[[[[0.0; 3]; 3]; 3]; 3]; 3];
        for a in 0..d {
            for l in 0..d {
                for k in 0..d {
                    for i in 0..d {
                        for j in 0..d {
                            let mut v = 0.0;
                            for m in 0..d {
                                v += dg[a][l][m] * riem_up[m][k][i][j]
                                    + g[l][m] * driem_up[a][m][k][i][j];
                            }
                            driem[a][l][k][i][j] = v;
                        }
                    }
                }
            }
        }

        // Ricci, scalar, and their derivatives.
        let mut ric = [[0.0; 3]; 3];
        for a in 0..d {
            for b in 0..d {
                let mut v = 0.0;
                for c in 0..d {
                    for e in 0..d {
                        v += ginv[c][e] * riem[e][b][c][a];
                    }
                }
                ric[a][b] = v;
            }
        }
        let mut scal = 0.0;
        for a in 0..d {
            for b in 0..d {
                scal += ginv[a][b] * ric[a][b];
            }
        }

        let mut dric = [[[0.0; 3]; 3]; 3];
        for e in 0..d {
            for a in 0..d {
                for b in 0..d {
                    let mut v = 0.0;
                    for c in 0..d {
                        for f in 0..d {
                            v += dginv[e][c][f] * riem[f][b][c][a] + ginv[c][f] * driem[e][f][b][c][a];
                        }
                    }
                    dric[e][a][b] = v;
                }
            }
        }

        let mut grad_ric = [[[0.0; 3]; 3]; 3];
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let mut v = dric[a][b][c];
                    for m in 0..d {
                        v -= gamma[m][a][b] * ric[m][c] + gamma[m][a][c] * ric[b][m];
                    }
                    grad_ric[a][b][c] = v;
                }
            }
        }

        let mut dscal = [0.0; 3];
        for e in 0..d {
            let mut v = 0.0;
            for a in 0..d {
                for b in 0..d {
                    v += dginv[e][a][b] * ric[a][b] + ginv[a][b] * dric[e][a][b];
                }
            }
            dscal[e] = v;
        }

        Ok(CurvaturePack {
            x: *x,
            dim: d,
            g,
            ginv,
            sqrt_det_g: det.sqrt(),
            gamma,
            riem,
            ric,
            scal,
            grad_ric,
            dscal,
        })
    }

    /// Sectional curvature of the plane spanned by a g-orthonormal pair.
    pub fn sectional(&self, x: &Vec3<f64>, v: &Vec3<f64>, w: &Vec3<f64>) -> Result<f64, Error> {
        let g = self.g(x);
        let d = self.dim;
        let res = (g_inner(&g, v, v, d) - 1.0).abs()
            + (g_inner(&g, w, w, d) - 1.0).abs()
            + g_inner(&g, v, w, d).abs();
        if res > 1e-8 {
            return Err(Error::NotOrthonormal(res));
        }
        let pack = self.curvature_pack(x)?;
        Ok(pack.sectional(v, w))
    }
}

/// `gamma[k][i][j] = Gamma^k_{ij}`.
pub type Gamma = [[[f64; 3]; 3]; 3];

fn christoffel_from(ginv: &Mat3<f64>, dg: &DG, d: usize) -> Gamma {
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut v = 0.0;
                for l in 0..d {
                    v += ginv[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]);
                }
                gamma[k][i][j] = 0.5 * v;
            }
        }
    }
    gamma
}

/// `dginv[k][i][j] = d_k (g^{ij})`.
fn dginv_from(ginv: &Mat3<f64>, dg: &DG, d: usize) -> DG {
    let mut out = [[[0.0; 3]; 3]; 3];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut v = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        v -= ginv[i][a] * dg[k][a][b] * ginv[b][j];
                    }
                }
                out[k][i][j] = v;
            }
        }
    }
    out
}

/// `dgamma[m][k][i][j] = d_m Gamma^k_{ij}`.
fn dgamma_from(ginv: &Mat3<f64>, dginv: &DG, dg: &DG, d2g: &D2G, d: usize) -> [[[[f64; 3]; 3]; 3]; 3] {
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for m in 0..d {
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut v = 0.0;
                    for l in 0..d {
                        let sym = dg[i][l][j] + dg[j][l][i] - dg[l][i][j];
                        let dsym = d2g[m][i][l][j] + d2g[m][j][l][i] - d2g[m][l][i][j];
                        v += dginv[m][k][l] * sym + ginv[k][l] * dsym;
                    }
                    out[m][k][i][j] = 0.5 * v;
                }
            }
        }
    }
    out
}

/// `d2gamma[a][b][k][i][j] = d_a d_b Gamma^k_{ij}`.
fn d2gamma_from(
    ginv: &Mat3<f64>,
    dginv: &DG,
    dg: &DG,
    d2g: &D2G,
    d3g: &D3G,
    d: usize,
) -> [[[[[f64; 3]; 3]; 3]; 3]; 3] {
    // d_a d_b g^{kl}
    let mut d2ginv = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..d {
        for b in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let mut v = 0.0;
                    for p in 0..d {
                        for q in 0..d {
                            v -= dginv[a][k][p] * dg[b][p][q] * ginv[q][l]
                                + ginv[k][p] * d2g[a][b][p][q] * ginv[q][l]
                                + ginv[k][p] * dg[b][p][q] * dginv[a][q][l];
                        }
                    }
                    d2ginv[a][b][k][l] = v;
                }
            }
        }
    }

    let mut out = [[[[[0.0; 3]; 3]; 3]; 3]; 3];
    for a in 0..d {
        for b in 0..d {
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let mut v = 0.0;
                        for l in 0..d {
                            let sym = dg[i][l][j] + dg[j][l][i] - dg[l][i][j];
                            let dsym_b = d2g[b][i][l][j] + d2g[b][j][l][i] - d2g[b][l][i][j];
                            let dsym_a = d2g[a][i][l][j] + d2g[a][j][l][i] - d2g[a][l][i][j];
                            let d2sym = d3g[a][b][i][l][j] + d3g[a][b][j][l][i] - d3g[a][b][l][i][j];
                            v += d2ginv[a][b][k][l] * sym
                                + dginv[a][k][l] * dsym_b
                                + dginv[b][k][l] * dsym_a
                                + ginv[k][l] * d2sym;
                        }
                        out[a][b][k][i][j] = 0.5 * v;
                    }
                }
            }
        }
    }
    out
}

/// Full curvature data of a base point.
#[derive(Clone, Debug)]
pub struct CurvaturePack {
    pub x: Vec3<f64>,
    pub dim: usize,
    pub g: Mat3<f64>,
    pub ginv: Mat3<f64>,
    pub sqrt_det_g: f64,
    pub gamma: Gamma,
    /// Fully lowered `R_{lkij}`.
    pub riem: [[[[f64; 3]; 3]; 3]; 3],
    pub ric: Mat3<f64>,
    pub scal: f64,
    /// Covariant derivative `(grad Ric)_{a,bc}`.
    pub grad_ric: [[[f64; 3]; 3]; 3],
    /// Partial derivatives of the scalar curvature.
    pub dscal: Vec3<f64>,
}

impl CurvaturePack {
    /// `<R(v3, v4) v2, v1>` contracted against arbitrary chart vectors.
    pub fn riem_contract(&self, v1: &Vec3<f64>, v2: &Vec3<f64>, v3: &Vec3<f64>, v4: &Vec3<f64>) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for l in 0..d {
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        acc += self.riem[l][k][i][j] * v1[l] * v2[k] * v3[i] * v4[j];
                    }
                }
            }
        }
        acc
    }

    /// Sectional curvature of an orthonormal pair: `R_{vwvw}`.
    pub fn sectional(&self, v: &Vec3<f64>, w: &Vec3<f64>) -> f64 {
        self.riem_contract(v, w, v, w)
    }

    pub fn ric_contract(&self, v: &Vec3<f64>, w: &Vec3<f64>) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                acc += self.ric[a][b] * v[a] * w[b];
            }
        }
        acc
    }

    /// `(grad Ric)(a; b, c)` contracted against chart vectors.
    pub fn grad_ric_contract(&self, a: &Vec3<f64>, b: &Vec3<f64>, c: &Vec3<f64>) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    acc += self.grad_ric[i][j][k] * a[i] * b[j] * c[k];
                }
            }
        }
        acc
    }

    /// Squared Frobenius norm of the curvature tensor in an orthonormal frame,
    /// computed by raising all four indices.
    pub fn riem_norm_sq(&self) -> f64 {
        let d = self.dim;
        let gi = &self.ginv;
        let mut acc = 0.0;
        for l in 0..d {
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        // raise indices of one copy
                        let mut raised = 0.0;
                        for l2 in 0..d {
                            for k2 in 0..d {
                                for i2 in 0..d {
                                    for j2 in 0..d {
                                        raised += gi[l][l2] * gi[k][k2] * gi[i][i2] * gi[j][j2]
                                            * self.riem[l2][k2][i2][j2];
                                    }
                                }
                            }
                        }
                        acc += raised * self.riem[l][k][i][j];
                    }
                }
            }
        }
        acc
    }

    /// Squared norm of the Ricci tensor in an orthonormal frame.
    pub fn ric_norm_sq(&self) -> f64 {
        let d = self.dim;
        let gi = &self.ginv;
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                let mut raised = 0.0;
                for a2 in 0..d {
                    for b2 in 0..d {
                        raised += gi[a][a2] * gi[b][b2] * self.ric[a2][b2];
                    }
                }
                acc += raised * self.ric[a][b];
            }
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Order-4 central finite differences
// ---------------------------------------------------------------------------

pub const FD_H2: f64 = 5e-4;
pub const FD_H3: f64 = 4e-3;

pub fn fd_step1(coord: f64) -> f64 {
    EPS.cbrt() * (1.0 + coord.abs())
}

/// Order-4 central first derivative of a matrix-valued function along axis k.
fn fd_dir<F>(f: F, x: &Vec3<f64>, k: usize, h: f64) -> Mat3<f64>
where
    F: Fn(&Vec3<f64>) -> Mat3<f64>,
{
    let eval = |t: f64| {
        let mut y = *x;
        y[k] += t;
        f(&y)
    };
    let (m2, m1, p1, p2) = (eval(-2.0 * h), eval(-h), eval(h), eval(2.0 * h));
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (m2[i][j] - 8.0 * m1[i][j] + 8.0 * p1[i][j] - p2[i][j]) / (12.0 * h);
        }
    }
    out
}

fn fd_dir_tensor<F>(f: F, x: &Vec3<f64>, k: usize, h: f64) -> [Mat3<f64>; 3]
where
    F: Fn(&Vec3<f64>) -> [Mat3<f64>; 3],
{
    let eval = |t: f64| {
        let mut y = *x;
        y[k] += t;
        f(&y)
    };
    let (m2, m1, p1, p2) = (eval(-2.0 * h), eval(-h), eval(h), eval(2.0 * h));
    let mut out = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                out[a][i][j] =
                    (m2[a][i][j] - 8.0 * m1[a][i][j] + 8.0 * p1[a][i][j] - p2[a][i][j]) / (12.0 * h);
            }
        }
    }
    out
}

fn fd_dir_tensor2<F>(f: F, x: &Vec3<f64>, k: usize, h: f64) -> [[Mat3<f64>; 3]; 3]
where
    F: Fn(&Vec3<f64>) -> [[Mat3<f64>; 3]; 3],
{
    let eval = |t: f64| {
        let mut y = *x;
        y[k] += t;
        f(&y)
    };
    let (m2, m1, p1, p2) = (eval(-2.0 * h), eval(-h), eval(h), eval(2.0 * h));
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    out[a][b][i][j] = (m2[a][b][i][j] - 8.0 * m1[a][b][i][j] + 8.0 * p1[a][b][i][j]
                        - p2[a][b][i][j])
                        / (12.0 * h);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() < tol, "{what}: got {a}, want {b}");
    }

    #[test]
    fn euclidean_is_flat() {
        let m = ChartMetric::euclidean3();
        let p = m.curvature_pack(&[0.3, -0.8, 0.5]).unwrap();
        for l in 0..3 {
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        assert_eq!(p.riem[l][k][i][j], 0.0);
                        assert_eq!(p.grad_ric[l][k][i], 0.0);
                    }
                    assert_eq!(p.gamma[l][k][i], 0.0);
                }
                assert_eq!(p.ric[l][k], 0.0);
            }
        }
        assert_eq!(p.scal, 0.0);
    }

    #[test]
    fn halfspace_christoffels_match_closed_form() {
        let m = ChartMetric::halfspace3();
        let gamma = m.christoffel(&[0.0, 0.0, 1.0]).unwrap();
        // nonzero at (k,i,j): (2,0,0)=(2,1,1)=1, (0,0,2)=(0,2,0)=(1,1,2)=(1,2,1)=(2,2,2)=-1
        close(gamma[2][0][0], 1.0, 1e-12, "G^3_11");
        close(gamma[2][1][1], 1.0, 1e-12, "G^3_22");
        close(gamma[0][0][2], -1.0, 1e-12, "G^1_13");
        close(gamma[1][1][2], -1.0, 1e-12, "G^2_23");
        close(gamma[2][2][2], -1.0, 1e-12, "G^3_33");
        let mut zero_checked = 0;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let known = matches!(
                        (k, i, j),
                        (2, 0, 0) | (2, 1, 1) | (0, 0, 2) | (0, 2, 0) | (1, 1, 2) | (1, 2, 1) | (2, 2, 2)
                    );
                    if !known {
                        close(gamma[k][i][j], 0.0, 1e-12, "zero Christoffel");
                        zero_checked += 1;
                    }
                }
            }
        }
        assert_eq!(zero_checked, 20);
    }

    #[test]
    fn conformal_sphere_chart_origin_is_critical() {
        let m = ChartMetric::sphere3(1.0);
        let gamma = m.christoffel(&[0.0; 3]).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    close(gamma[k][i][j], 0.0, 1e-13, "flat at conformal origin");
                }
            }
        }
    }

    #[test]
    fn sphere3_is_einstein_with_scal_6() {
        let m = ChartMetric::sphere3(1.0);
        for x in [[0.2, -0.3, 0.5], [0.0; 3], [-0.6, 0.1, 0.9]] {
            let p = m.curvature_pack(&x).unwrap();
            close(p.scal, 6.0, 1e-9, "scal");
            let g = m.g(&x);
            for a in 0..3 {
                for b in 0..3 {
                    close(p.ric[a][b], 2.0 * g[a][b], 1e-9, "Ric = 2g");
                }
            }
            for v in p.grad_ric.iter().flatten().flatten() {
                assert!(v.abs() < 1e-8, "grad Ric vanishes");
            }
        }
    }

    #[test]
    fn constant_curvature_tensor_in_coordinates() {
        // R_{lkij} = c (g_il g_jk - g_jl g_ik) for the c = -1 conformal ball.
        let m = ChartMetric::hyperbolic3(-1.0);
        let x = [0.2, 0.4, -0.1];
        let p = m.curvature_pack(&x).unwrap();
        let g = m.g(&x);
        for l in 0..3 {
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        let want = -(g[i][l] * g[j][k] - g[j][l] * g[i][k]);
                        close(p.riem[l][k][i][j], want, 1e-9, "constant curvature R");
                    }
                }
            }
        }
    }

    #[test]
    fn heisenberg_matches_symbolic_fixture() {
        // Offline symbolic values for g = dx^2 + dy^2 + (dz - x dy)^2
        // at the origin and at (0.3, -0.2, 0.7).
        let m = ChartMetric::heisenberg();
        let p0 = m.curvature_pack(&[0.0; 3]).unwrap();
        close(p0.ric[0][0], -0.5, 1e-10, "ric00@0");
        close(p0.ric[1][1], -0.5, 1e-10, "ric11@0");
        close(p0.ric[2][2], 0.5, 1e-10, "ric22@0");
        close(p0.scal, -0.5, 1e-10, "scal@0");
        close(p0.riem[0][1][0][1], -0.75, 1e-10, "R0101@0");
        close(p0.riem[0][2][0][2], 0.25, 1e-10, "R0202@0");
        close(p0.riem[1][2][1][2], 0.25, 1e-10, "R1212@0");
        // grad Ric fixture: (0,1,2) = (0,2,1) = -1/2, (1,0,2) = (1,2,0) = 1/2
        close(p0.grad_ric[0][1][2], -0.5, 1e-9, "gradric012@0");
        close(p0.grad_ric[0][2][1], -0.5, 1e-9, "gradric021@0");
        close(p0.grad_ric[1][0][2], 0.5, 1e-9, "gradric102@0");
        close(p0.grad_ric[1][2][0], 0.5, 1e-9, "gradric120@0");
        close(p0.grad_ric[2][0][1], 0.0, 1e-9, "gradric201@0");

        let p1 = m.curvature_pack(&[0.3, -0.2, 0.7]).unwrap();
        close(p1.scal, -0.5, 1e-10, "scal@x");
        close(p1.ric[1][1], -0.455, 1e-10, "ric11@x");
        close(p1.ric[1][2], -0.15, 1e-10, "ric12@x");
        close(p1.ric[2][2], 0.5, 1e-10, "ric22@x");
        close(p1.riem[0][1][0][1], -0.7275, 1e-10, "R0101@x");
        close(p1.riem[0][1][0][2], -0.075, 1e-10, "R0102@x");
        close(p1.riem[0][2][0][2], 0.25, 1e-10, "R0202@x");
        close(p1.grad_ric[0][1][1], 0.3, 1e-9, "gradric011@x");
        close(p1.grad_ric[0][1][2], -0.5, 1e-9, "gradric012@x");
        close(p1.grad_ric[1][0][1], -0.15, 1e-9, "gradric101@x");
        close(p1.grad_ric[1][0][2], 0.5, 1e-9, "gradric102@x");
    }

    #[test]
    fn heisenberg_coordinate_plane_sectionals_at_origin() {
        let m = ChartMetric::heisenberg();
        let x = [0.0; 3];
        let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        close(m.sectional(&x, &e[0], &e[1]).unwrap(), -0.75, 1e-10, "K(e1,e2)");
        close(m.sectional(&x, &e[0], &e[2]).unwrap(), 0.25, 1e-10, "K(e1,e3)");
        close(m.sectional(&x, &e[1], &e[2]).unwrap(), 0.25, 1e-10, "K(e2,e3)");
    }

    #[test]
    fn sectional_rejects_non_orthonormal_and_is_rotation_invariant() {
        let m = ChartMetric::hyperbolic3(-1.0);
        let x = [0.1, 0.2, 0.3];
        let g = m.g(&x);
        let w = 1.0 / g[0][0].sqrt();
        let v1 = [w, 0.0, 0.0];
        let mut v2 = [0.0, w, 0.0];
        assert!((m.sectional(&x, &v1, &v2).unwrap() + 1.0).abs() < 1e-9);
        // rotate the plane basis
        let (c, s) = (0.6f64, 0.8f64);
        let r1 = [c * w, s * w, 0.0];
        let r2 = [-s * w, c * w, 0.0];
        assert!((m.sectional(&x, &r1, &r2).unwrap() + 1.0).abs() < 1e-9);
        v2[0] = 0.4; // break orthogonality
        assert!(matches!(m.sectional(&x, &v1, &v2), Err(Error::NotOrthonormal(_))));
    }

    #[test]
    fn curvature_pack_symmetries_on_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for m in [
            ChartMetric::euclidean3(),
            ChartMetric::sphere3(1.3),
            ChartMetric::hyperbolic3(-0.7),
            ChartMetric::heisenberg(),
            ChartMetric::perturbed(0.05),
            ChartMetric::halfspace3(),
            ChartMetric::flat2d(),
            ChartMetric::sphere2d(1.0),
            ChartMetric::hyperbolic2d(-1.0),
        ] {
            let (lo, hi) = m.domain.sample_box(m.dim);
            for _ in 0..20 {
                let mut x = [0.0; 3];
                for i in 0..m.dim {
                    x[i] = rng.gen_range(lo[i]..hi[i]);
                }
                let p = m.curvature_pack(&x).unwrap();
                let d = m.dim;
                let mut worst: f64 = 0.0;
                for l in 0..d {
                    for k in 0..d {
                        for i in 0..d {
                            for j in 0..d {
                                worst = worst.max((p.riem[l][k][i][j] + p.riem[k][l][i][j]).abs());
                                worst = worst.max((p.riem[l][k][i][j] + p.riem[l][k][j][i]).abs());
                                worst = worst.max(
                                    (p.riem[l][k][i][j] + p.riem[l][i][j][k] + p.riem[l][j][k][i])
                                        .abs(),
                                );
                                worst = worst.max((p.riem[l][k][i][j] - p.riem[i][j][l][k]).abs());
                            }
                            worst = worst.max((p.ric[k][i] - p.ric[i][k]).abs());
                        }
                    }
                }
                // trace of Ric equals scal
                let mut tr = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        tr += p.ginv[a][b] * p.ric[a][b];
                    }
                }
                worst = worst.max((tr - p.scal).abs());
                // contracted second Bianchi: g^{ac} (grad Ric)_{a,cb} = dscal_b / 2
                for b in 0..d {
                    let mut div = 0.0;
                    for a in 0..d {
                        for c in 0..d {
                            div += p.ginv[a][c] * p.grad_ric[a][c][b];
                        }
                    }
                    worst = worst.max((div - 0.5 * p.dscal[b]).abs());
                }
                assert!(worst < 1e-8, "symmetry residual {worst} on {}", m.name);
            }
        }
    }

    #[test]
    fn metric_compatibility_of_christoffels() {
        // grad g = 0: d_k g_ij = Gamma^m_{ki} g_mj + Gamma^m_{kj} g_im
        let m = ChartMetric::perturbed(0.05);
        let x = [0.3, -0.5, 0.7];
        let g = m.g(&x);
        let dg = m.dg(&x);
        let gamma = m.christoffel(&x).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut v = dg[k][i][j];
                    for mm in 0..3 {
                        v -= gamma[mm][k][i] * g[mm][j] + gamma[mm][k][j] * g[i][mm];
                    }
                    close(v, 0.0, 1e-12, "metric compatibility");
                }
            }
        }
    }

    #[test]
    fn backends_agree_on_curvature() {
        for base in [
            ChartMetric::sphere3(1.0),
            ChartMetric::heisenberg(),
            ChartMetric::perturbed(0.05),
        ] {
            let x = [0.35, -0.15, 0.55];
            let dual = base.clone().with_backend(Backend::Dual).curvature_pack(&x).unwrap();
            let ana = base.clone().with_backend(Backend::Analytic).curvature_pack(&x).unwrap();
            let fd = base.clone().with_backend(Backend::FiniteDiff).curvature_pack(&x).unwrap();
            let mut worst: f64 = 0.0;
            for l in 0..3 {
                for k in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            worst = worst.max((dual.riem[l][k][i][j] - ana.riem[l][k][i][j]).abs());
                            worst = worst.max((dual.riem[l][k][i][j] - fd.riem[l][k][i][j]).abs());
                        }
                    }
                }
            }
            assert!(worst < 1e-6, "backend disagreement {worst} on {}", base.name);
            // analytic and dual agree to machine precision
            let mut tight: f64 = 0.0;
            for l in 0..3 {
                for k in 0..3 {
                    tight = tight.max((dual.ric[l][k] - ana.ric[l][k]).abs());
                }
            }
            assert!(tight < 1e-11, "dual vs analytic {tight} on {}", base.name);
        }
    }

    #[test]
    fn fd_backend_grad_ric_tracks_dual() {
        let base = ChartMetric::heisenberg();
        let x = [0.3, -0.2, 0.7];
        let dual = base.clone().with_backend(Backend::Dual).curvature_pack(&x).unwrap();
        let fd = base.clone().with_backend(Backend::FiniteDiff).curvature_pack(&x).unwrap();
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    worst = worst.max((dual.grad_ric[a][b][c] - fd.grad_ric[a][b][c]).abs());
                }
            }
        }
        assert!(worst < 1e-4, "fd grad Ric residual {worst}");
    }

    #[test]
    fn domain_errors_are_reported() {
        let m = ChartMetric::halfspace3();
        assert!(matches!(
            m.curvature_pack(&[0.0, 0.0, -1.0]),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn two_dimensional_catalog_has_gauss_curvature() {
        for (m, want) in [
            (ChartMetric::flat2d(), 0.0),
            (ChartMetric::sphere2d(1.0), 1.0),
            (ChartMetric::hyperbolic2d(-1.0), -1.0),
        ] {
            let x = [0.3, -0.2, 0.0];
            let p = m.curvature_pack(&x).unwrap();
            let g = m.g(&x);
            // orthonormalize the coordinate plane
            let w = 1.0 / g[0][0].sqrt();
            let v1 = [w, 0.0, 0.0];
            let mut v2 = [-g[0][1] * w * w, 1.0, 0.0];
            let n = g_inner(&g, &v2, &v2, 2).sqrt();
            for c in v2.iter_mut() {
                *c /= n;
            }
            let k = p.sectional(&v1, &v2);
            close(k, want, 1e-9, &format!("gauss curvature of {}", m.name));
            close(p.scal, 2.0 * want, 1e-9, "2d scal = 2K");
        }
    }

    #[test]
    fn constant_curvature_metrics_have_constant_sectional() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (m, want) in [
            (ChartMetric::sphere3(1.7), 1.7),
            (ChartMetric::hyperbolic3(-0.6), -0.6),
            (ChartMetric::halfspace3(), -1.0),
        ] {
            let (lo, hi) = m.domain.sample_box(m.dim);
            for _ in 0..20 {
                let mut x = [0.0; 3];
                for i in 0..3 {
                    x[i] = rng.gen_range(lo[i]..hi[i]);
                }
                let g = m.g(&x);
                // random g-orthonormal plane
                let mut v1 = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let n1 = g_inner(&g, &v1, &v1, 3).sqrt();
                for c in v1.iter_mut() {
                    *c /= n1;
                }
                let mut v2 = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let d = g_inner(&g, &v2, &v1, 3);
                for i in 0..3 {
                    v2[i] -= d * v1[i];
                }
                let n2 = g_inner(&g, &v2, &v2, 3).sqrt();
                for c in v2.iter_mut() {
                    *c /= n2;
                }
                let k = m.sectional(&x, &v1, &v2).unwrap();
                assert!((k - want).abs() < 1e-7, "{}: K = {k}, want {want}", m.name);
            }
        }
    }
}
