//! Scalar abstraction for nested forward-mode differentiation.
//!
//! Every analytic ingredient of the engine (metric coefficients, immersion
//! charts) is written against the [`Real`] trait so the same code evaluates at
//! plain `f64` or at (nested) dual numbers. A `Dual<T>` carries one directional
//! derivative; nesting, as in `Dual<Dual<Dual<f64>>>`, yields exact third
//! derivatives, which is as deep as the curvature pipeline ever needs.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Innermost real value; used for branching (pivots, sign choices).
    fn re(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
}

/// Dual number `re + ε·eps` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T: Real> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    #[inline]
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }
    /// Constant (derivative zero).
    #[inline]
    pub fn constant(re: T) -> Self {
        Dual {
            re,
            eps: T::zero(),
        }
    }
    /// Seed with unit derivative.
    #[inline]
    pub fn seeded(re: T) -> Self {
        Dual { re, eps: T::one() }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}
impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}
impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}
impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        Dual::new(
            self.re * inv,
            (self.eps * o.re - self.re * o.eps) * inv * inv,
        )
    }
}
impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Real> Real for Dual<T> {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }
    #[inline]
    fn re(self) -> f64 {
        self.re.re()
    }
    #[inline]
    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.eps * self.re.cos())
    }
    #[inline]
    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.eps * self.re.sin()))
    }
    #[inline]
    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        Dual::new(r, self.eps / (T::from_f64(2.0) * r))
    }
    #[inline]
    fn sinh(self) -> Self {
        Dual::new(self.re.sinh(), self.eps * self.re.cosh())
    }
    #[inline]
    fn cosh(self) -> Self {
        Dual::new(self.re.cosh(), self.eps * self.re.sinh())
    }
}

// ---------------------------------------------------------------------------
// Small dense linear algebra over `Real`, sized for base dimension <= 3.
// Matrices are padded with the identity beyond `dim`.
// ---------------------------------------------------------------------------

pub type Mat3<S> = [[S; 3]; 3];
pub type Vec3<S> = [S; 3];

pub fn mat3_zero<S: Real>() -> Mat3<S> {
    [[S::zero(); 3]; 3]
}

pub fn mat3_identity<S: Real>() -> Mat3<S> {
    let mut m = mat3_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = S::one();
    }
    m
}

pub fn det3<S: Real>(m: &Mat3<S>) -> S {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse by cofactors; caller guarantees non-degeneracy.
pub fn inv3<S: Real>(m: &Mat3<S>) -> Mat3<S> {
    let d = det3(m).recip();
    let mut out = mat3_zero();
    out[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * d;
    out[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * d;
    out[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * d;
    out[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * d;
    out[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * d;
    out[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * d;
    out[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * d;
    out[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * d;
    out[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * d;
    out
}

pub fn mat_vec<S: Real>(m: &Mat3<S>, v: &Vec3<S>, dim: usize) -> Vec3<S> {
    let mut out = [S::zero(); 3];
    for i in 0..dim {
        for j in 0..dim {
            out[i] = out[i] + m[i][j] * v[j];
        }
    }
    out
}

/// Metric pairing v^t g w.
pub fn g_inner<S: Real>(g: &Mat3<S>, v: &Vec3<S>, w: &Vec3<S>, dim: usize) -> S {
    let mut acc = S::zero();
    for i in 0..dim {
        for j in 0..dim {
            acc = acc + v[i] * g[i][j] * w[j];
        }
    }
    acc
}

/// Riemannian cross product in an oriented 3-dimensional chart:
/// g(a x b, c) = sqrt(det g) det[a b c].
pub fn cross_g<S: Real>(g: &Mat3<S>, ginv: &Mat3<S>, a: &Vec3<S>, b: &Vec3<S>) -> Vec3<S> {
    let sq = det3(g).sqrt();
    let c = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let mut out = [S::zero(); 3];
    for k in 0..3 {
        for l in 0..3 {
            out[k] = out[k] + ginv[k][l] * c[l] * sq;
        }
    }
    out
}
