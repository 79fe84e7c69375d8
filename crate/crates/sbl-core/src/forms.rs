//! Exterior calculus on the tangent-manifold chart.
//!
//! Differential forms live on the full `2(n+1)`-dimensional chart `(x, u)` and
//! are restricted to the sphere bundle only at evaluation time, by reading
//! them on adapted-frame tuples. The exterior derivative is taken upstairs in
//! chart coordinates, where nothing is constrained, with order-4 central
//! stencils of step `1e-4 * (1 + |coordinate|)`; restriction commutes with
//! the derivative, so bundle identities can be checked on frame tuples.
//!
//! A [`FormField`] stores its degree and a closure producing the antisymmetric
//! components on strictly increasing coordinate multi-indices. The Hodge star,
//! codifferential and Laplacian are frame operations: the star is computed in
//! the orthonormal adapted frame with orientation `e^{01...2n}` and then
//! re-expanded as a chart form (with no normal component) so it can be
//! differentiated again.

use std::sync::Arc;

use crate::bundle::{adapted_frame_with_pivot, pivot_index, AdaptedFrame, TPoint, TVec};
use crate::metric::ChartMetric;
use crate::{Error, Result};

/// Step of the order-4 stencil used by [`FormField::ext_derivative`].
pub const D_STEP: f64 = 1e-4;

// ---------------------------------------------------------------------------
// multi-index utilities
// ---------------------------------------------------------------------------

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Strictly increasing `k`-tuples over `0..dim`, lexicographic order.
pub fn index_tuples(dim: usize, k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::with_capacity(binom(dim, k));
    let mut cur: Vec<u8> = (0..k as u8).collect();
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    if k > dim {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if (cur[i] as usize) < dim - (k - i) {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Lexicographic rank of an increasing tuple among `index_tuples(dim, k)`.
pub fn tuple_rank(t: &[u8], dim: usize) -> usize {
    let k = t.len();
    let mut rank = 0usize;
    let mut prev: i32 = -1;
    for (pos, &ti) in t.iter().enumerate() {
        for v in (prev + 1)..(ti as i32) {
            rank += binom(dim - 1 - v as usize, k - pos - 1);
        }
        prev = ti as i32;
    }
    rank
}

/// Sorts indices, returning the permutation sign; `None` when an index repeats.
pub fn sort_with_sign(idx: &[u8]) -> Option<(Vec<u8>, f64)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((v, sign))
}

fn perm_sign(seq: &[u8]) -> f64 {
    let mut sign = 1.0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn det_small(m: &[Vec<f64>]) -> f64 {
    let k = m.len();
    match k {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            let mut a: Vec<Vec<f64>> = m.to_vec();
            let mut det = 1.0;
            for c in 0..k {
                let mut piv = c;
                for r in c + 1..k {
                    if a[r][c].abs() > a[piv][c].abs() {
                        piv = r;
                    }
                }
                if a[piv][c] == 0.0 {
                    return 0.0;
                }
                if piv != c {
                    a.swap(piv, c);
                    det = -det;
                }
                det *= a[c][c];
                for r in c + 1..k {
                    let f = a[r][c] / a[c][c];
                    for col in c..k {
                        a[r][col] -= f * a[c][col];
                    }
                }
            }
            det
        }
    }
}

// ---------------------------------------------------------------------------
// FormField
// ---------------------------------------------------------------------------

pub type CompFn = Arc<dyn Fn(&TPoint) -> Result<Vec<f64>> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&TPoint) -> Result<f64> + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&TPoint) -> Result<TVec> + Send + Sync>;
pub type FrameCompFn = Arc<dyn Fn(&AdaptedFrame) -> Result<Vec<f64>> + Send + Sync>;

/// A differential form on the tangent-manifold chart, given by its components
/// over strictly increasing coordinate multi-indices.
#[derive(Clone)]
pub struct FormField {
    pub degree: usize,
    /// Chart dimension, `2 * (base dim)`.
    pub dim: usize,
    pub name: String,
    comp: CompFn,
}

impl std::fmt::Debug for FormField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FormField({}, degree {})", self.name, self.degree)
    }
}

impl FormField {
    pub fn new(degree: usize, dim: usize, name: impl Into<String>, comp: CompFn) -> Self {
        FormField {
            degree,
            dim,
            name: name.into(),
            comp,
        }
    }

    pub fn zero(degree: usize, dim: usize) -> Self {
        let len = binom(dim, degree);
        FormField::new(degree, dim, "0", Arc::new(move |_| Ok(vec![0.0; len])))
    }

    /// 0-form wrapping a scalar field.
    pub fn scalar(dim: usize, name: impl Into<String>, f: ScalarFn) -> Self {
        FormField::new(0, dim, name, Arc::new(move |p| Ok(vec![f(p)?])))
    }

    /// Components on increasing multi-indices at a chart point.
    pub fn components(&self, p: &TPoint) -> Result<Vec<f64>> {
        (self.comp)(p)
    }

    /// Multilinear alternating evaluation on arbitrary chart vectors.
    pub fn eval(&self, p: &TPoint, vs: &[TVec]) -> Result<f64> {
        if vs.len() != self.degree {
            return Err(Error::WrongDegree {
                expected: self.degree,
                got: vs.len(),
            });
        }
        let comps = self.components(p)?;
        if self.degree == 0 {
            return Ok(comps[0]);
        }
        let tuples = index_tuples(self.dim, self.degree);
        let mut acc = 0.0;
        for (r, t) in tuples.iter().enumerate() {
            if comps[r] == 0.0 {
                continue;
            }
            let m: Vec<Vec<f64>> = t
                .iter()
                .map(|&row| vs.iter().map(|v| v.coord(row as usize, self.dim / 2)).collect())
                .collect();
            acc += comps[r] * det_small(&m);
        }
        Ok(acc)
    }

    pub fn add(&self, o: &FormField) -> FormField {
        assert_eq!(self.degree, o.degree);
        let (a, b) = (self.comp.clone(), o.comp.clone());
        FormField::new(
            self.degree,
            self.dim,
            format!("({} + {})", self.name, o.name),
            Arc::new(move |p| {
                let (ca, cb) = (a(p)?, b(p)?);
                Ok(ca.iter().zip(cb.iter()).map(|(x, y)| x + y).collect())
            }),
        )
    }

    pub fn sub(&self, o: &FormField) -> FormField {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, t: f64) -> FormField {
        let a = self.comp.clone();
        FormField::new(
            self.degree,
            self.dim,
            format!("{t} {}", self.name),
            Arc::new(move |p| Ok(a(p)?.into_iter().map(|x| t * x).collect())),
        )
    }

    /// Pointwise product with a scalar field.
    pub fn scaled_by(&self, name: &str, f: ScalarFn) -> FormField {
        let a = self.comp.clone();
        FormField::new(
            self.degree,
            self.dim,
            format!("{name} {}", self.name),
            Arc::new(move |p| {
                let s = f(p)?;
                Ok(a(p)?.into_iter().map(|x| s * x).collect())
            }),
        )
    }

    /// Wedge product.
    pub fn wedge(&self, o: &FormField) -> Result<FormField> {
        let degree = self.degree + o.degree;
        if degree > self.dim {
            return Err(Error::DegreeOverflow(degree, self.dim));
        }
        let dim = self.dim;
        let (ka, kb) = (self.degree, o.degree);
        let (fa, fb) = (self.comp.clone(), o.comp.clone());
        Ok(FormField::new(
            degree,
            dim,
            format!("({} ^ {})", self.name, o.name),
            Arc::new(move |p| {
                let ca = fa(p)?;
                let cb = fb(p)?;
                let tuples = index_tuples(dim, degree);
                let mut out = vec![0.0; tuples.len()];
                for (r, t) in tuples.iter().enumerate() {
                    let mut acc = 0.0;
                    // choose which positions of t feed the left factor
                    for mask in 0u32..(1 << degree) {
                        if mask.count_ones() as usize != ka {
                            continue;
                        }
                        let mut left = Vec::with_capacity(ka);
                        let mut right = Vec::with_capacity(kb);
                        let mut sign = 1.0;
                        let mut seen_right = 0;
                        for (pos, &idx) in t.iter().enumerate() {
                            if mask & (1 << pos) != 0 {
                                // moving this left-entry past the right entries already seen
                                if seen_right % 2 == 1 {
                                    sign = -sign;
                                }
                                left.push(idx);
                            } else {
                                right.push(idx);
                                seen_right += 1;
                            }
                        }
                        let va = ca[tuple_rank(&left, dim)];
                        if va == 0.0 {
                            continue;
                        }
                        let vb = cb[tuple_rank(&right, dim)];
                        acc += sign * va * vb;
                    }
                    out[r] = acc;
                }
                Ok(out)
            }),
        ))
    }

    /// Interior product with a (point-dependent) vector field.
    pub fn interior(&self, name: &str, v: VectorFn) -> FormField {
        assert!(self.degree >= 1);
        let dim = self.dim;
        let degree = self.degree - 1;
        let k = self.degree;
        let f = self.comp.clone();
        FormField::new(
            degree,
            dim,
            format!("({name} _| {})", self.name),
            Arc::new(move |p| {
                let comps = f(p)?;
                let vv = v(p)?;
                let tuples = index_tuples(dim, degree);
                let mut out = vec![0.0; tuples.len()];
                for (r, t) in tuples.iter().enumerate() {
                    let mut acc = 0.0;
                    for c in 0..dim as u8 {
                        if t.contains(&c) {
                            continue;
                        }
                        let vc = vv.coord(c as usize, dim / 2);
                        if vc == 0.0 {
                            continue;
                        }
                        // insert c in front, then sort: sign = (-1)^{#(entries < c)}
                        let mut merged = Vec::with_capacity(k);
                        merged.push(c);
                        merged.extend_from_slice(t);
                        let (sorted, sign) = sort_with_sign(&merged).expect("distinct");
                        acc += vc * sign * comps[tuple_rank(&sorted, dim)];
                    }
                    out[r] = acc;
                }
                Ok(out)
            }),
        )
    }

    /// Numerical exterior derivative: order-4 central stencil per coordinate,
    /// step `D_STEP * (1 + |coordinate|)`.
    pub fn ext_derivative(&self) -> FormField {
        let dim = self.dim;
        let k = self.degree;
        let f = self.comp.clone();
        FormField::new(
            k + 1,
            dim,
            format!("d{}", self.name),
            Arc::new(move |p| {
                let n_in = binom(dim, k);
                // partial derivatives of every component along every coordinate
                let mut dcomps = vec![vec![0.0; n_in]; dim];
                for (c, out) in dcomps.iter_mut().enumerate() {
                    let h = D_STEP * (1.0 + p.coord(c).abs());
                    let m2 = f(&p.shifted(c, -2.0 * h))?;
                    let m1 = f(&p.shifted(c, -h))?;
                    let p1 = f(&p.shifted(c, h))?;
                    let p2 = f(&p.shifted(c, 2.0 * h))?;
                    for i in 0..n_in {
                        out[i] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
                    }
                }
                let tuples = index_tuples(dim, k + 1);
                let mut out = vec![0.0; tuples.len()];
                for (r, t) in tuples.iter().enumerate() {
                    let mut acc = 0.0;
                    let mut rest = Vec::with_capacity(k);
                    for (m, &c) in t.iter().enumerate() {
                        rest.clear();
                        rest.extend(t.iter().enumerate().filter(|&(q, _)| q != m).map(|(_, &v)| v));
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        acc += sign * dcomps[c as usize][tuple_rank(&rest, dim)];
                    }
                    out[r] = acc;
                }
                Ok(out)
            }),
        )
    }
}

// ---------------------------------------------------------------------------
// frame-level operations (restriction to the sphere bundle)
// ---------------------------------------------------------------------------

/// Values of a form on all increasing tuples of sphere-bundle frame vectors.
/// This is the restriction: the normal direction never appears.
pub fn frame_components(form: &FormField, frame: &AdaptedFrame) -> Result<Vec<f64>> {
    let n_frame = frame.len();
    let p = frame.at.tpoint();
    let k = form.degree;
    let tuples = index_tuples(n_frame, k);
    let mut out = Vec::with_capacity(tuples.len());
    let chart_comps = form.components(&p)?;
    let chart_tuples = index_tuples(form.dim, k);
    for t in &tuples {
        let vs: Vec<&TVec> = t.iter().map(|&i| &frame.e[i as usize]).collect();
        let mut acc = 0.0;
        for (r, ct) in chart_tuples.iter().enumerate() {
            if chart_comps[r] == 0.0 {
                continue;
            }
            let m: Vec<Vec<f64>> = ct
                .iter()
                .map(|&row| vs.iter().map(|v| v.coord(row as usize, form.dim / 2)).collect())
                .collect();
            acc += chart_comps[r] * det_small(&m);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Maximum absolute difference of two forms over all frame tuples: the
/// residual deciding equality of restricted forms.
pub fn restricted_residual(a: &FormField, b: &FormField, frame: &AdaptedFrame) -> Result<f64> {
    let ca = frame_components(a, frame)?;
    let cb = frame_components(b, frame)?;
    Ok(ca
        .iter()
        .zip(cb.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Sup-norm of the frame components.
pub fn restricted_norm(a: &FormField, frame: &AdaptedFrame) -> Result<f64> {
    Ok(frame_components(a, frame)?
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max))
}

/// Hodge star on frame components in an `n_frame`-dimensional oriented
/// orthonormal frame: `(*w)_J = sign(I ++ J) w_I` with `I` the complement.
pub fn star_frame_components(fc: &[f64], n_frame: usize, k: usize) -> Vec<f64> {
    let tuples_in = index_tuples(n_frame, k);
    let n_out = binom(n_frame, n_frame - k);
    let mut out = vec![0.0; n_out];
    for (r, t) in tuples_in.iter().enumerate() {
        if fc[r] == 0.0 {
            continue;
        }
        let comp: Vec<u8> = (0..n_frame as u8).filter(|c| !t.contains(c)).collect();
        let mut seq = t.clone();
        seq.extend_from_slice(&comp);
        let sign = perm_sign(&seq);
        out[tuple_rank(&comp, n_frame)] += sign * fc[r];
    }
    out
}

/// Pivot policy for frame fields under differentiation stencils.
#[derive(Clone, Copy, Debug)]
pub enum Pivot {
    /// Re-derive the pivot at every evaluation point.
    Auto,
    /// Keep a caller-chosen pivot; smooth across small neighbourhoods.
    Fixed(usize),
}

impl Pivot {
    fn option(&self) -> Option<usize> {
        match self {
            Pivot::Auto => None,
            Pivot::Fixed(i) => Some(*i),
        }
    }
}

/// Builds a chart form from a closure producing frame components. The result
/// carries no normal component; restricted to the bundle it has exactly the
/// prescribed frame values.
pub fn from_frame_closure(
    m: &ChartMetric,
    degree: usize,
    name: impl Into<String>,
    pivot: Pivot,
    f: FrameCompFn,
) -> FormField {
    let m = m.clone();
    let dim = 2 * m.dim;
    FormField::new(
        degree,
        dim,
        name,
        Arc::new(move |p| {
            let frame = adapted_frame_with_pivot(&m, p, pivot.option())?;
            let fc = f(&frame)?;
            Ok(frame_to_chart(&frame, degree, &fc))
        }),
    )
}

/// Expands frame components into chart components through the coframe.
pub fn frame_to_chart(frame: &AdaptedFrame, degree: usize, fc: &[f64]) -> Vec<f64> {
    let n_frame = frame.len();
    let dim = 2 * frame.at.dim;
    // coframe matrix E[a][c] = e^a(d_c)
    let mut e = vec![[0.0; 6]; n_frame];
    for (a, row) in e.iter_mut().enumerate() {
        for (c, val) in row.iter_mut().enumerate().take(dim) {
            *val = frame.coframe(a, &TVec::basis(c, frame.at.dim));
        }
    }
    let frame_tuples = index_tuples(n_frame, degree);
    let chart_tuples = index_tuples(dim, degree);
    let mut out = vec![0.0; chart_tuples.len()];
    for (rc, ct) in chart_tuples.iter().enumerate() {
        let mut acc = 0.0;
        for (rf, ft) in frame_tuples.iter().enumerate() {
            if fc[rf] == 0.0 {
                continue;
            }
            // det of E rows ft, columns ct
            let m: Vec<Vec<f64>> = ft
                .iter()
                .map(|&a| ct.iter().map(|&c| e[a as usize][c as usize]).collect())
                .collect();
            acc += fc[rf] * det_small(&m);
        }
        out[rc] = acc;
    }
    out
}

/// Hodge star of the restriction, computed in the adapted frame with
/// orientation `e^{01...2n}`, returned as a chart form.
pub fn hodge_star(m: &ChartMetric, a: &FormField, pivot: Pivot) -> FormField {
    let k = a.degree;
    let n_frame = 2 * m.dim - 1;
    let inner = a.clone();
    let mc = m.clone();
    from_frame_closure(
        m,
        n_frame - k,
        format!("*{}", a.name),
        pivot,
        Arc::new(move |frame| {
            let _ = &mc;
            let fc = frame_components(&inner, frame)?;
            Ok(star_frame_components(&fc, n_frame, k))
        }),
    )
}

/// Codifferential of the restriction: `delta = -*d*`, with the pivot pinned at
/// the evaluation point so the frame field is smooth across the inner stencil.
pub fn codifferential(m: &ChartMetric, a: &FormField) -> FormField {
    let k = a.degree;
    let n_frame = 2 * m.dim - 1;
    if k == 0 {
        return FormField::zero(0, 2 * m.dim);
    }
    let m = m.clone();
    let a = a.clone();
    FormField::new(
        k - 1,
        2 * m.dim,
        format!("delta {}", a.name),
        Arc::new(move |p| {
            let pivot = {
                let data = m.chart_data(&p.x)?;
                pivot_index(&data, &p.u)
            };
            let star_a = hodge_star(&m, &a, Pivot::Fixed(pivot));
            let d_star = star_a.ext_derivative();
            // final star and sign at the evaluation point itself
            let frame = adapted_frame_with_pivot(&m, p, Some(pivot))?;
            let fc = frame_components(&d_star, &frame)?;
            let starred = star_frame_components(&fc, n_frame, n_frame - k + 1);
            let neg: Vec<f64> = starred.into_iter().map(|v| -v).collect();
            Ok(frame_to_chart(&frame, k - 1, &neg))
        }),
    )
}

/// Hodge Laplacian `Delta = d delta + delta d` of the restriction.
pub fn laplacian(m: &ChartMetric, a: &FormField) -> FormField {
    let dd = codifferential(m, a).ext_derivative();
    let sd = codifferential(m, &a.ext_derivative());
    dd.add(&sd)
}

// ---------------------------------------------------------------------------
// invariant decomposition of 2-forms (base dimension 3)
// ---------------------------------------------------------------------------

/// Orthogonal decomposition of a 2-form at a point of the 5-dimensional
/// bundle: coefficients on the four invariant lines and components in the
/// three irreducible planes.
#[derive(Clone, Debug, PartialEq)]
pub struct WDecomposition {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// Components on `(e^{01}, e^{02})`.
    pub w1: [f64; 2],
    /// Components on `(e^{03}, e^{04})`.
    pub w2: [f64; 2],
    /// Components on `(f_1, f_2) = (e^{14} + e^{23}, e^{31} - e^{42})`.
    pub w3: [f64; 2],
    /// Reconstruction residual (exact decomposition gives ~0).
    pub residual: f64,
}

/// Frame pair order for 2-forms on the 5-frame:
/// (0,1),(0,2),(0,3),(0,4),(1,2),(1,3),(1,4),(2,3),(2,4),(3,4).
pub fn w_decompose_components(fc: &[f64]) -> WDecomposition {
    assert_eq!(fc.len(), 10);
    let at = |a: u8, b: u8| fc[tuple_rank(&[a, b], 5)];
    let a0 = at(1, 2);
    let a2 = at(3, 4);
    let a1 = 0.5 * (at(1, 4) - at(2, 3));
    let a3 = 0.5 * (-at(1, 3) - at(2, 4));
    let w1 = [at(0, 1), at(0, 2)];
    let w2 = [at(0, 3), at(0, 4)];
    let w3 = [0.5 * (at(1, 4) + at(2, 3)), 0.5 * (-at(1, 3) + at(2, 4))];

    // rebuild and measure the residual
    let mut rec = [0.0; 10];
    let mut put = |a: u8, b: u8, v: f64| rec[tuple_rank(&[a, b], 5)] += v;
    put(1, 2, a0);
    put(3, 4, a2);
    put(1, 4, a1);
    put(2, 3, -a1);
    put(1, 3, -a3);
    put(2, 4, -a3);
    put(0, 1, w1[0]);
    put(0, 2, w1[1]);
    put(0, 3, w2[0]);
    put(0, 4, w2[1]);
    put(1, 4, w3[0]);
    put(2, 3, w3[0]);
    put(1, 3, -w3[1]);
    put(2, 4, w3[1]);
    let residual = fc
        .iter()
        .zip(rec.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    WDecomposition {
        a0,
        a1,
        a2,
        a3,
        w1,
        w2,
        w3,
        residual,
    }
}

/// Decomposition of a 2-form field at a bundle point.
pub fn w_decompose(form: &FormField, frame: &AdaptedFrame) -> Result<WDecomposition> {
    if form.degree != 2 {
        return Err(Error::WrongDegree {
            expected: 2,
            got: form.degree,
        });
    }
    if frame.at.dim != 3 {
        return Err(Error::UnsupportedDimension(frame.at.dim));
    }
    Ok(w_decompose_components(&frame_components(form, frame)?))
}
