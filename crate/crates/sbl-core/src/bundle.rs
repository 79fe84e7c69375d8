//! Geometry of the tangent manifold and the radius-s sphere bundle inside it.
//!
//! A chart of the tangent manifold is the product of the base chart with the
//! fiber coordinates, `(x, u)`. Tangent vectors split into base and fiber
//! components `(w_b, w_f)`; the Levi-Civita connection turns this into the
//! horizontal/vertical decomposition via the connection map
//! `K(w) = w_f + Gamma_x(w_b, u)`:
//!
//! * horizontal lift of `v`:  `(v, -Gamma(v, u))`
//! * vertical lift of `v`:    `(0, v)`
//! * Sasaki metric:           `<y, z> = g(y_b, z_b) + g(K y, K z)`
//! * mirror map:              `B(w) = (0, w_b)`, sending horizontal lifts to
//!   their vertical copies and killing verticals.
//!
//! The tautological field is `xi_(x,u) = (0, u)`; the sphere bundle of radius
//! `s` is the locus `g_x(u,u) = s^2`, whose tangent space is the Sasaki
//! orthogonal complement of `xi`.

use crate::metric::{ChartMetric, Gamma};
use crate::scalar::{cross_g, det3, g_inner, inv3, Mat3, Vec3};
use crate::{Error, Result};

/// Point of the tangent-manifold chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TPoint {
    pub x: Vec3<f64>,
    pub u: Vec3<f64>,
    pub dim: usize,
}

impl TPoint {
    pub fn new(x: Vec3<f64>, u: Vec3<f64>, dim: usize) -> Self {
        TPoint { x, u, dim }
    }

    /// Dimension of the tangent-manifold chart, `2 * dim`.
    pub fn chart_dim(&self) -> usize {
        2 * self.dim
    }

    pub fn coord(&self, c: usize) -> f64 {
        if c < self.dim {
            self.x[c]
        } else {
            self.u[c - self.dim]
        }
    }

    pub fn shifted(&self, c: usize, dv: f64) -> TPoint {
        let mut p = *self;
        if c < self.dim {
            p.x[c] += dv;
        } else {
            p.u[c - self.dim] += dv;
        }
        p
    }
}

/// Tangent vector of the tangent manifold, split into base and fiber parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TVec {
    pub b: Vec3<f64>,
    pub f: Vec3<f64>,
}

impl TVec {
    pub fn new(b: Vec3<f64>, f: Vec3<f64>) -> Self {
        TVec { b, f }
    }

    pub fn zero() -> Self {
        TVec::default()
    }

    /// Chart coordinate basis vector.
    pub fn basis(c: usize, dim: usize) -> Self {
        let mut v = TVec::zero();
        if c < dim {
            v.b[c] = 1.0;
        } else {
            v.f[c - dim] = 1.0;
        }
        v
    }

    pub fn coord(&self, c: usize, dim: usize) -> f64 {
        if c < dim {
            self.b[c]
        } else {
            self.f[c - dim]
        }
    }

    pub fn scale(&self, t: f64) -> TVec {
        let mut out = *self;
        for i in 0..3 {
            out.b[i] *= t;
            out.f[i] *= t;
        }
        out
    }

    pub fn add(&self, o: &TVec) -> TVec {
        let mut out = *self;
        for i in 0..3 {
            out.b[i] += o.b[i];
            out.f[i] += o.f[i];
        }
        out
    }

    pub fn sub(&self, o: &TVec) -> TVec {
        self.add(&o.scale(-1.0))
    }
}

/// Cached pointwise base data: metric, inverse, volume density, Christoffels.
#[derive(Clone, Debug)]
pub struct ChartData {
    pub dim: usize,
    pub g: Mat3<f64>,
    pub ginv: Mat3<f64>,
    pub sqrt_det_g: f64,
    pub gamma: Gamma,
}

impl ChartMetric {
    /// Pointwise data consumed by every bundle-level operation.
    pub fn chart_data(&self, x: &Vec3<f64>) -> Result<ChartData> {
        let g = self.g(x);
        let det = det3(&g);
        if !det.is_finite() || det <= 1e-14 {
            return Err(Error::SingularMetric(*x));
        }
        Ok(ChartData {
            dim: self.dim,
            g,
            ginv: inv3(&g),
            sqrt_det_g: det.sqrt(),
            gamma: self.christoffel(x)?,
        })
    }
}

impl ChartData {
    /// `Gamma(v, w)^k = Gamma^k_{ij} v^i w^j`.
    pub fn gamma_bilinear(&self, v: &Vec3<f64>, w: &Vec3<f64>) -> Vec3<f64> {
        let mut out = [0.0; 3];
        for k in 0..self.dim {
            let mut acc = 0.0;
            for i in 0..self.dim {
                for j in 0..self.dim {
                    acc += self.gamma[k][i][j] * v[i] * w[j];
                }
            }
            out[k] = acc;
        }
        out
    }

    pub fn inner(&self, v: &Vec3<f64>, w: &Vec3<f64>) -> f64 {
        g_inner(&self.g, v, w, self.dim)
    }

    pub fn norm(&self, v: &Vec3<f64>) -> f64 {
        self.inner(v, v).sqrt()
    }

    /// Volume form of the base evaluated on `dim` chart vectors.
    pub fn vol(&self, vs: &[Vec3<f64>]) -> f64 {
        let mut m = [[0.0; 3]; 3];
        for (j, v) in vs.iter().enumerate() {
            for i in 0..3 {
                m[i][j] = v[i];
            }
        }
        for i in vs.len()..3 {
            m[i][i] = 1.0;
        }
        self.sqrt_det_g * det3(&m)
    }

    /// Connection map: vertical part of `w` identified with a base vector.
    pub fn k_map(&self, u: &Vec3<f64>, w: &TVec) -> Vec3<f64> {
        let corr = self.gamma_bilinear(&w.b, u);
        let mut out = [0.0; 3];
        for i in 0..self.dim {
            out[i] = w.f[i] + corr[i];
        }
        out
    }

    /// Horizontal lift of the base vector `v` at fiber coordinate `u`.
    pub fn hlift(&self, u: &Vec3<f64>, v: &Vec3<f64>) -> TVec {
        let corr = self.gamma_bilinear(v, u);
        let mut f = [0.0; 3];
        for i in 0..self.dim {
            f[i] = -corr[i];
        }
        TVec::new(*v, f)
    }

    /// Vertical lift of the base vector `v`.
    pub fn vlift(&self, v: &Vec3<f64>) -> TVec {
        TVec::new([0.0; 3], *v)
    }

    /// Sasaki inner product.
    pub fn sasaki(&self, u: &Vec3<f64>, y: &TVec, z: &TVec) -> f64 {
        self.inner(&y.b, &z.b) + self.inner(&self.k_map(u, y), &self.k_map(u, z))
    }

    /// Mirror endomorphism `B`.
    pub fn mirror(&self, w: &TVec) -> TVec {
        TVec::new([0.0; 3], truncate(&w.b, self.dim))
    }

    /// Sasaki adjoint `B^t`, sending verticals to their horizontal copies.
    pub fn mirror_t(&self, u: &Vec3<f64>, w: &TVec) -> TVec {
        let k = self.k_map(u, w);
        self.hlift(u, &k)
    }

    /// Sasaki almost complex structure `J = B - B^t`.
    pub fn complex_j(&self, u: &Vec3<f64>, w: &TVec) -> TVec {
        self.mirror(w).sub(&self.mirror_t(u, w))
    }

    /// Tautological vertical field at `u`.
    pub fn xi(&self, u: &Vec3<f64>) -> TVec {
        TVec::new([0.0; 3], truncate(u, self.dim))
    }

    /// Contact pairing `theta(w) = <xi, B w> = g(u, dpi w)`.
    pub fn theta(&self, u: &Vec3<f64>, w: &TVec) -> f64 {
        self.inner(u, &w.b)
    }

    /// Invariant rotation `I_+` (base dimension 3 only): quarter turn of both
    /// the horizontal and vertical complements of the tautological directions,
    /// realized through the Riemannian cross product with `u / s`.
    pub fn i_plus(&self, u: &Vec3<f64>, w: &TVec) -> TVec {
        self.i_rot(u, w, 1.0)
    }

    /// Invariant rotation `I_-`: same horizontal turn, opposite vertical turn.
    pub fn i_minus(&self, u: &Vec3<f64>, w: &TVec) -> TVec {
        self.i_rot(u, w, -1.0)
    }

    fn i_rot(&self, u: &Vec3<f64>, w: &TVec, vsign: f64) -> TVec {
        let s = self.norm(u);
        let mut un = [0.0; 3];
        for i in 0..3 {
            un[i] = u[i] / s;
        }
        let h = cross_g(&self.g, &self.ginv, &un, &w.b);
        let k = self.k_map(u, w);
        let v = cross_g(&self.g, &self.ginv, &un, &k);
        self.hlift(u, &h).add(&self.vlift(&v).scale(vsign))
    }
}

fn truncate(v: &Vec3<f64>, dim: usize) -> Vec3<f64> {
    let mut out = [0.0; 3];
    out[..dim].copy_from_slice(&v[..dim]);
    out
}

/// Point of the radius-s tangent sphere bundle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BundlePoint {
    pub x: Vec3<f64>,
    pub u: Vec3<f64>,
    pub s: f64,
    pub dim: usize,
}

impl BundlePoint {
    /// Validates that `u` has g-length `s` (within 1e-12 relative).
    pub fn new(m: &ChartMetric, x: Vec3<f64>, u: Vec3<f64>, s: f64) -> Result<Self> {
        if s <= 0.0 {
            return Err(Error::BadRadius(s));
        }
        let n = m.norm(&x, &u);
        if ((n * n - s * s) / (s * s)).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "fiber vector has g-length {n}, expected {s}"
            )));
        }
        Ok(BundlePoint { x, u, s, dim: m.dim })
    }

    /// Rescales `dir` to g-length `s`.
    pub fn from_direction(m: &ChartMetric, x: Vec3<f64>, dir: Vec3<f64>, s: f64) -> Result<Self> {
        if s <= 0.0 {
            return Err(Error::BadRadius(s));
        }
        let n = m.norm(&x, &dir);
        if n < 1e-14 {
            return Err(Error::DegenerateFrame("zero fiber direction".into()));
        }
        let mut u = [0.0; 3];
        for i in 0..m.dim {
            u[i] = dir[i] * s / n;
        }
        Ok(BundlePoint { x, u, s, dim: m.dim })
    }

    pub fn tpoint(&self) -> TPoint {
        TPoint::new(self.x, self.u, self.dim)
    }
}

/// Orthonormal frame of the sphere-bundle tangent space at a point, expressed
/// in tangent-manifold chart coordinates.
///
/// Ordering: `e[0..=n]` horizontal with `e[0]` the horizontal copy of `u/s`,
/// then `e[n+1..=2n]` vertical with `e[n+i]` the mirror image of `e[i]`.
#[derive(Clone, Debug)]
pub struct AdaptedFrame {
    pub at: BundlePoint,
    pub e: Vec<TVec>,
    /// Tautological vertical vector (g-length s); outward normal of the bundle.
    pub xi: TVec,
    /// Base orthonormal frame `b[0..=n]` with `b[0] = u/s`.
    pub b: Vec<Vec3<f64>>,
    pub data: ChartData,
    pub pivot: usize,
}

impl AdaptedFrame {
    pub fn n(&self) -> usize {
        self.at.dim - 1
    }

    /// Number of sphere-bundle frame vectors, `2n + 1`.
    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    /// Coframe 1-form `e^a` applied to an arbitrary chart vector.
    pub fn coframe(&self, a: usize, w: &TVec) -> f64 {
        self.data.sasaki(&self.at.u, &self.e[a], w)
    }

    /// `xi^flat(w) = <xi, w>`.
    pub fn xi_flat(&self, w: &TVec) -> f64 {
        self.data.sasaki(&self.at.u, &self.xi, w)
    }

    /// Full tangent-manifold frame `(e_0..e_n, xi/s, e_{n+1}..e_{2n})`.
    pub fn full_frame(&self) -> Vec<TVec> {
        let n = self.n();
        let mut out = Vec::with_capacity(2 * n + 2);
        out.extend_from_slice(&self.e[..=n]);
        out.push(self.xi.scale(1.0 / self.at.s));
        out.extend_from_slice(&self.e[n + 1..]);
        out
    }
}

/// Deterministic pivot: the chart direction most aligned with `u` is skipped
/// when completing `u/s` to a base orthonormal frame.
pub fn pivot_index(data: &ChartData, u: &Vec3<f64>) -> usize {
    let mut best = 0;
    let mut best_v = -1.0;
    for i in 0..data.dim {
        let mut basis = [0.0; 3];
        basis[i] = 1.0;
        let v = data.inner(u, &basis).abs();
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

/// Builds the adapted frame, optionally with a caller-pinned pivot (needed for
/// smooth frame fields across differentiation stencils).
pub fn adapted_frame_with_pivot(
    m: &ChartMetric,
    p: &TPoint,
    pivot: Option<usize>,
) -> Result<AdaptedFrame> {
    let d = m.dim;
    let data = m.chart_data(&p.x)?;
    let s = data.norm(&p.u);
    if s < 1e-14 {
        return Err(Error::DegenerateFrame("fiber vector has zero length".into()));
    }
    let pivot = pivot.unwrap_or_else(|| pivot_index(&data, &p.u));

    // Base orthonormal frame by Gram-Schmidt over the chart basis vectors in
    // index order, skipping the pivot direction.
    let mut b: Vec<Vec3<f64>> = Vec::with_capacity(d);
    let mut b0 = [0.0; 3];
    for i in 0..d {
        b0[i] = p.u[i] / s;
    }
    b.push(b0);
    for i in 0..d {
        if i == pivot {
            continue;
        }
        let mut v = [0.0; 3];
        v[i] = 1.0;
        for prev in &b {
            let c = data.inner(&v, prev);
            for k in 0..d {
                v[k] -= c * prev[k];
            }
        }
        let n = data.norm(&v);
        if n < 1e-10 {
            return Err(Error::DegenerateFrame(format!(
                "Gram-Schmidt pivot {pivot} degenerate at {:?}",
                p.x
            )));
        }
        for k in 0..d {
            v[k] /= n;
        }
        b.push(v);
    }

    // Positive orientation with respect to the base volume form.
    if data.vol(&b) < 0.0 {
        let last = b.last_mut().expect("frame nonempty");
        for k in 0..d {
            last[k] = -last[k];
        }
    }

    let n = d - 1;
    let mut e = Vec::with_capacity(2 * n + 1);
    for bi in b.iter().take(d) {
        e.push(data.hlift(&p.u, bi));
    }
    for bi in b.iter().take(d).skip(1) {
        e.push(data.vlift(bi));
    }
    let xi = data.xi(&p.u);
    let at = BundlePoint {
        x: p.x,
        u: p.u,
        s,
        dim: d,
    };
    Ok(AdaptedFrame {
        at,
        e,
        xi,
        b,
        data,
        pivot,
    })
}

/// Adapted frame with the automatic pivot.
pub fn adapted_frame(m: &ChartMetric, p: &BundlePoint) -> Result<AdaptedFrame> {
    adapted_frame_with_pivot(m, &p.tpoint(), None)
}

/// Horizontal lift of the base vector `v` at `(x, u)`.
pub fn horizontal_lift(m: &ChartMetric, x: &Vec3<f64>, u: &Vec3<f64>, v: &Vec3<f64>) -> Result<TVec> {
    Ok(m.chart_data(x)?.hlift(u, v))
}

/// Sasaki inner product of two chart vectors at `(x, u)`.
pub fn sasaki_inner(m: &ChartMetric, p: &TPoint, y: &TVec, z: &TVec) -> Result<f64> {
    Ok(m.chart_data(&p.x)?.sasaki(&p.u, y, z))
}

/// Mirror map and companion endomorphisms as chart matrices at one point,
/// mainly for the matrix-identity checks.
#[derive(Clone, Debug)]
pub struct MirrorMap {
    pub dim: usize,
    pub b: Vec<Vec<f64>>,
    pub bt: Vec<Vec<f64>>,
    pub j: Vec<Vec<f64>>,
    pub i_plus: Vec<Vec<f64>>,
    pub i_minus: Vec<Vec<f64>>,
}

impl MirrorMap {
    pub fn at(m: &ChartMetric, p: &TPoint) -> Result<MirrorMap> {
        let data = m.chart_data(&p.x)?;
        let cd = p.chart_dim();
        let col = |op: &dyn Fn(&TVec) -> TVec| -> Vec<Vec<f64>> {
            let mut mat = vec![vec![0.0; cd]; cd];
            for c in 0..cd {
                let out = op(&TVec::basis(c, p.dim));
                for (r, row) in mat.iter_mut().enumerate() {
                    row[c] = out.coord(r, p.dim);
                }
            }
            mat
        };
        let b = col(&|w| data.mirror(w));
        let bt = col(&|w| data.mirror_t(&p.u, w));
        let j = col(&|w| data.complex_j(&p.u, w));
        let (i_plus, i_minus) = if p.dim == 3 {
            (col(&|w| data.i_plus(&p.u, w)), col(&|w| data.i_minus(&p.u, w)))
        } else {
            (vec![vec![0.0; cd]; cd], vec![vec![0.0; cd]; cd])
        };
        Ok(MirrorMap {
            dim: p.dim,
            b,
            bt,
            j,
            i_plus,
            i_minus,
        })
    }
}

/// Residual of the tautological-field derivative identity: the pullback
/// covariant derivative of `xi` along `y` equals the vertical part of `y`.
///
/// Along the straight chart curve `c(t) = (x + t y_b, u + t y_f)` the section
/// `xi(t) = u(t)` is differentiated by a fourth-order central stencil and the
/// Christoffel correction `Gamma_x(c'(t)_base, xi)` is added; the result is
/// compared with the connection-map image of `y`.
pub fn nabla_xi_residual(m: &ChartMetric, p: &TPoint, y: &TVec) -> Result<f64> {
    let h = 1e-4;
    let u_at = |t: f64| -> Vec3<f64> {
        let mut u = p.u;
        for i in 0..m.dim {
            u[i] += t * y.f[i];
        }
        u
    };
    let (m2, m1, p1, p2) = (u_at(-2.0 * h), u_at(-h), u_at(h), u_at(2.0 * h));
    let cd = m.chart_data(&p.x)?;
    let gamma_term = cd.gamma_bilinear(&y.b, &p.u);
    let k = cd.k_map(&p.u, y);
    let mut res: f64 = 0.0;
    for i in 0..m.dim {
        let du = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
        res = res.max((du + gamma_term[i] - k[i]).abs());
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::ChartMetric;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() < tol, "{what}: {a} vs {b}");
    }

    #[test]
    fn flat_horizontal_lift_has_no_correction() {
        let m = ChartMetric::euclidean3();
        let lift = horizontal_lift(&m, &[0.2, 0.1, -0.4], &[0.0, 0.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(lift.b, [1.0, 2.0, 3.0]);
        assert_eq!(lift.f, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn halfspace_lift_correction_matches_christoffels() {
        let m = ChartMetric::halfspace3();
        let x = [0.0, 0.0, 1.0];
        let u = [0.0, 0.0, 1.0];
        let v = [1.0, 0.0, 0.0];
        let lift = horizontal_lift(&m, &x, &u, &v).unwrap();
        // Gamma(v, u)^k = Gamma^k_{13}; only Gamma^1_{13} = -1 is nonzero.
        assert_close(lift.f[0], 1.0, 1e-12, "lift correction x");
        assert_close(lift.f[1], 0.0, 1e-12, "lift correction y");
        assert_close(lift.f[2], 0.0, 1e-12, "lift correction z");
    }

    #[test]
    fn lift_of_u_is_s_times_e0() {
        for m in [ChartMetric::sphere3(1.0), ChartMetric::heisenberg()] {
            let x = [0.3, -0.2, 0.1];
            let p = BundlePoint::from_direction(&m, x, [0.4, 1.0, -0.3], 1.7).unwrap();
            let frame = adapted_frame(&m, &p).unwrap();
            let lift = horizontal_lift(&m, &x, &p.u, &p.u).unwrap();
            let want = frame.e[0].scale(p.s);
            for i in 0..3 {
                assert_close(lift.b[i], want.b[i], 1e-10, "e0 horizontal");
                assert_close(lift.f[i], want.f[i], 1e-10, "e0 vertical");
            }
        }
    }

    #[test]
    fn flat_axis_aligned_frame_is_the_chart_frame() {
        let m = ChartMetric::euclidean3();
        let p = BundlePoint::new(&m, [0.0; 3], [0.0, 0.0, 2.0], 2.0).unwrap();
        let f = adapted_frame(&m, &p).unwrap();
        assert_eq!(f.pivot, 2);
        assert_eq!(f.e[0].b, [0.0, 0.0, 1.0]);
        assert_eq!(f.e[1].b, [1.0, 0.0, 0.0]);
        assert_eq!(f.e[2].b, [0.0, 1.0, 0.0]);
        assert_eq!(f.e[3].f, [1.0, 0.0, 0.0]);
        assert_eq!(f.e[4].f, [0.0, 1.0, 0.0]);
        for e in &f.e {
            // all tangent to the bundle: <e, xi> = 0
            assert_close(f.xi_flat(e), 0.0, 1e-12, "tangency");
        }
    }

    #[test]
    fn sasaki_gram_matrix_is_identity() {
        for m in [
            ChartMetric::sphere3(1.0),
            ChartMetric::hyperbolic3(-1.0),
            ChartMetric::heisenberg(),
            ChartMetric::perturbed(0.05),
        ] {
            let p = BundlePoint::from_direction(&m, [0.25, -0.3, 0.45], [0.3, -1.1, 0.6], 1.3).unwrap();
            let f = adapted_frame(&m, &p).unwrap();
            let full = f.full_frame();
            for (i, a) in full.iter().enumerate() {
                for (j, b) in full.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_close(
                        f.data.sasaki(&p.u, a, b),
                        want,
                        1e-10,
                        &format!("gram[{i}][{j}] on {}", m.name),
                    );
                }
            }
            // orientation of (e0..e4, xi) positive in the chart
            let mut mat = [[0.0; 6]; 6];
            let mut cols: Vec<TVec> = f.e.clone();
            cols.push(f.xi);
            for (c, v) in cols.iter().enumerate() {
                for r in 0..6 {
                    mat[r][c] = v.coord(r, 3);
                }
            }
            assert!(det6(&mat) > 0.0, "orientation on {}", m.name);
        }
    }

    fn det6(m: &[[f64; 6]; 6]) -> f64 {
        // LU with partial pivoting
        let mut a = *m;
        let mut det = 1.0;
        for c in 0..6 {
            let mut piv = c;
            for r in c + 1..6 {
                if a[r][c].abs() > a[piv][c].abs() {
                    piv = r;
                }
            }
            if piv != c {
                a.swap(piv, c);
                det = -det;
            }
            if a[c][c] == 0.0 {
                return 0.0;
            }
            det *= a[c][c];
            for r in c + 1..6 {
                let f = a[r][c] / a[c][c];
                for k in c..6 {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        det
    }

    #[test]
    fn mirror_pairs_frame_vectors() {
        let m = ChartMetric::perturbed(0.05);
        let p = BundlePoint::from_direction(&m, [0.1, 0.2, -0.3], [1.0, 0.2, 0.5], 1.0).unwrap();
        let f = adapted_frame(&m, &p).unwrap();
        let n = f.n();
        for i in 1..=n {
            let be = f.data.mirror(&f.e[i]);
            for c in 0..6 {
                assert_close(
                    be.coord(c, 3),
                    f.e[n + i].coord(c, 3),
                    1e-12,
                    "B e_i = e_{n+i}",
                );
            }
        }
        // B(e0) = xi / s
        let be0 = f.data.mirror(&f.e[0]);
        for c in 0..6 {
            assert_close(be0.coord(c, 3), f.xi.coord(c, 3) / p.s, 1e-12, "B e0");
        }
    }

    #[test]
    fn mirror_matrix_identities() {
        let m = ChartMetric::sphere3(1.0);
        let p = BundlePoint::from_direction(&m, [0.3, 0.1, -0.2], [0.2, -0.7, 1.0], 1.0).unwrap();
        let tp = p.tpoint();
        let mm = MirrorMap::at(&m, &tp).unwrap();
        let cd = 6;
        let matmul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            let mut out = vec![vec![0.0; cd]; cd];
            for i in 0..cd {
                for j in 0..cd {
                    for k in 0..cd {
                        out[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
            out
        };
        // B о B = 0
        let bb = matmul(&mm.b, &mm.b);
        for row in &bb {
            for v in row {
                assert!(v.abs() < 1e-12, "B^2 = 0");
            }
        }
        // J^2 = -1
        let jj = matmul(&mm.j, &mm.j);
        for (i, row) in jj.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { -1.0 } else { 0.0 };
                assert_close(*v, want, 1e-10, "J^2 = -1");
            }
        }
        // I+ and I- commute; J and I- anti-commute; J I+ J^t = I+ on H0+V0.
        let c1 = matmul(&mm.i_plus, &mm.i_minus);
        let c2 = matmul(&mm.i_minus, &mm.i_plus);
        let a1 = matmul(&mm.j, &mm.i_minus);
        let a2 = matmul(&mm.i_minus, &mm.j);
        for i in 0..cd {
            for j in 0..cd {
                assert_close(c1[i][j], c2[i][j], 1e-10, "[I+, I-] = 0");
                assert_close(a1[i][j], -a2[i][j], 1e-10, "J I- = -I- J");
            }
        }
        // J I+ J^t restricted check: J I+ J^t v = I+ v for frame vectors e1..e4.
        let frame = adapted_frame(&m, &p).unwrap();
        let data = &frame.data;
        for idx in 1..5 {
            let v = &frame.e[idx];
            let jt = |w: &TVec| data.mirror_t(&p.u, w).sub(&data.mirror(w)); // J^t = B^t - B = -J
            let lhs = data.complex_j(&p.u, &data.i_plus(&p.u, &jt(v)));
            let rhs = data.i_plus(&p.u, v);
            for c in 0..6 {
                assert_close(lhs.coord(c, 3), rhs.coord(c, 3), 1e-10, "J I+ J^t = I+");
            }
        }
    }

    #[test]
    fn coframe_mirror_relation() {
        // e^{n+i} о B = e^i as functionals on every chart vector.
        let m = ChartMetric::heisenberg();
        let p = BundlePoint::from_direction(&m, [0.4, -0.1, 0.2], [0.3, 0.8, -0.5], 2.0).unwrap();
        let f = adapted_frame(&m, &p).unwrap();
        let n = f.n();
        for i in 1..=n {
            for c in 0..6 {
                let w = TVec::basis(c, 3);
                let lhs = f.coframe(n + i, &f.data.mirror(&w));
                let rhs = f.coframe(i, &w);
                assert_close(lhs, rhs, 1e-10, "e^{n+i} o B = e^i");
            }
        }
    }

    #[test]
    fn nabla_xi_equals_vertical_part() {
        for m in [ChartMetric::sphere3(1.0), ChartMetric::heisenberg()] {
            let p = TPoint::new([0.2, -0.3, 0.5], [0.4, 1.0, -0.2], 3);
            let y = TVec::new([0.3, -0.5, 0.8], [0.1, 0.9, -0.4]);
            let res = nabla_xi_residual(&m, &p, &y).unwrap();
            assert!(res < 1e-6, "nabla xi residual {res} on {}", m.name);
        }
    }

    #[test]
    fn frame_is_deterministic() {
        let m = ChartMetric::perturbed(0.05);
        let p = BundlePoint::from_direction(&m, [0.5, 0.1, -0.6], [0.2, 0.9, 0.4], 1.0).unwrap();
        let f1 = adapted_frame(&m, &p).unwrap();
        let f2 = adapted_frame(&m, &p).unwrap();
        for (a, b) in f1.e.iter().zip(f2.e.iter()) {
            assert_eq!(a, b);
        }
    }
}
