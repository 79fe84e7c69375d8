//! Invariant Lagrangians: constant-coefficient combinations of the four
//! invariant 2-forms, their degeneracy and duality classification, the
//! decomposition of their exterior derivative against curvature data, and the
//! principal-ideal property `d Lambda = psi ^ Lambda`.

use std::sync::Arc;

use crate::bundle::AdaptedFrame;
use crate::eds::{frame_wedge, rho_family, FundamentalSystem};
use crate::forms::{frame_components, index_tuples, tuple_rank, FormField};
use crate::{Error, Result};

/// `Lambda = t0 alpha0 + t1 alpha1 + t2 alpha2 + t3 dtheta` with constant
/// coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantLagrangian {
    pub t: [f64; 4],
}

impl InvariantLagrangian {
    pub fn new(t0: f64, t1: f64, t2: f64, t3: f64) -> Self {
        InvariantLagrangian {
            t: [t0, t1, t2, t3],
        }
    }

    /// The degenerate family `Lambda_2 = t0 alpha0 +/- alpha1 + (1/t0) alpha2`.
    pub fn lambda2(t0: f64, branch_sign: f64) -> Self {
        InvariantLagrangian::new(t0, branch_sign.signum(), 1.0 / t0, 0.0)
    }

    /// The closed family `Lambda_1 = t0 alpha0 + t2 alpha2 + t3 dtheta`
    /// (closed when the sectional curvature is `t0 / (s^2 t2)`).
    pub fn lambda1(t0: f64, t2: f64, t3: f64) -> Self {
        InvariantLagrangian::new(t0, 0.0, t2, t3)
    }

    pub fn form(&self, sys: &FundamentalSystem) -> FormField {
        sys.alpha[0]
            .scale(self.t[0])
            .add(&sys.alpha[1].scale(self.t[1]))
            .add(&sys.alpha[2].scale(self.t[2]))
            .add(&sys.dtheta.scale(self.t[3]))
    }

    /// `t0 t2 - t1^2 - t3^2`; the Lagrangian is degenerate iff this vanishes.
    pub fn discriminant(&self) -> f64 {
        self.t[0] * self.t[2] - self.t[1] * self.t[1] - self.t[3] * self.t[3]
    }
}

/// Classification against both the algebraic conditions and the direct
/// wedge / 4-dimensional-star computations on a frame.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LagrangianClass {
    pub degenerate: bool,
    pub self_dual: bool,
    pub anti_self_dual: bool,
    /// |Lambda ^ Lambda - 2 (t0 t2 - t1^2 - t3^2) alpha0 ^ alpha2| on frames.
    pub wedge_residual: f64,
    /// Residual of the `*_4` eigencondition actually satisfied (0 when the
    /// algebraic flags say dual/antidual, full norm otherwise).
    pub star_self_residual: f64,
    pub star_anti_residual: f64,
}

/// Star on the contact hyperplane: 4-dimensional Hodge star over the frame
/// directions 1..4 with orientation `e^{1234}`.
fn star4(fc_pairs: &[(u8, u8, f64)]) -> Vec<(u8, u8, f64)> {
    let mut out = Vec::with_capacity(fc_pairs.len());
    for &(a, b, v) in fc_pairs {
        if v == 0.0 {
            continue;
        }
        let comp: Vec<u8> = (1..=4u8).filter(|c| *c != a && *c != b).collect();
        let seq = [a, b, comp[0], comp[1]];
        // permutation sign of (a, b, c0, c1) relative to (1, 2, 3, 4)
        let mut sign = 1.0;
        for i in 0..4 {
            for j in i + 1..4 {
                if seq[i] > seq[j] {
                    sign = -sign;
                }
            }
        }
        out.push((comp[0], comp[1], sign * v));
    }
    out
}

pub fn classify(
    lag: &InvariantLagrangian,
    sys: &FundamentalSystem,
    frame: &AdaptedFrame,
    tol: f64,
) -> Result<LagrangianClass> {
    let form = lag.form(sys);
    let fc = frame_components(&form, frame)?;
    let n_frame = 2 * sys.n + 1;

    // direct wedge: Lambda ^ Lambda vs 2 (discriminant) e^{1234}
    let sq = frame_wedge(&fc, 2, &fc, 2, n_frame);
    let e1234 = tuple_rank(&[1, 2, 3, 4], n_frame);
    let mut wedge_residual: f64 = 0.0;
    for (r, v) in sq.iter().enumerate() {
        let want = if r == e1234 {
            2.0 * lag.discriminant()
        } else {
            0.0
        };
        wedge_residual = wedge_residual.max((v - want).abs());
    }

    // direct star on ker theta: collect the 2-form over indices 1..4
    let pairs: Vec<(u8, u8, f64)> = index_tuples(n_frame, 2)
        .iter()
        .enumerate()
        .filter(|(_, t)| t[0] >= 1)
        .map(|(r, t)| (t[0], t[1], fc[r]))
        .collect();
    let starred = star4(&pairs);
    let diff = |sign: f64| -> f64 {
        let mut worst: f64 = 0.0;
        for &(a, b, v) in &starred {
            let orig = pairs
                .iter()
                .find(|&&(x, y, _)| x == a && y == b)
                .map(|&(_, _, v)| v)
                .unwrap_or(0.0);
            worst = worst.max((v - sign * orig).abs());
        }
        worst
    };
    let star_self_residual = diff(1.0);
    let star_anti_residual = diff(-1.0);

    let degenerate = lag.discriminant().abs() <= tol;
    let self_dual = lag.t[2] - lag.t[0] == 0.0 && lag.t[1] == 0.0 && lag.t[3] == 0.0;
    let anti_self_dual = lag.t[2] + lag.t[0] == 0.0;
    // the algebraic flags must agree with the direct computations:
    // Lambda ^ Lambda vanishes on frames iff the discriminant does, and the
    // *_4 eigencondition holds iff the coefficient conditions do
    let degenerate_direct = frame_max(&sq) <= tol;
    if wedge_residual > tol || degenerate != degenerate_direct {
        return Err(Error::Config("wedge route disagrees with discriminant".into()));
    }
    if self_dual != (star_self_residual <= tol) {
        return Err(Error::Config("star route disagrees with self-duality".into()));
    }
    if anti_self_dual != (star_anti_residual <= tol) {
        return Err(Error::Config("star route disagrees with anti-self-duality".into()));
    }
    Ok(LagrangianClass {
        degenerate,
        self_dual,
        anti_self_dual,
        wedge_residual,
        star_self_residual,
        star_anti_residual,
    })
}

fn frame_max(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// The two pieces of `d Lambda = theta ^ Lambda'_0 + Lambda'_1` built from
/// curvature data (the representative with `Lambda'_1` free of theta factors).
pub fn d_lambda_pieces(
    lag: &InvariantLagrangian,
    sys: &FundamentalSystem,
) -> Result<(FormField, FormField)> {
    let m = &sys.metric;
    let fam = rho_family(m)?;
    let s2 = sys.s * sys.s;
    let [t0, t1, t2, _t3] = lag.t;
    // Lambda'_0 = -r t1 alpha0 + (2 t0 - s^2 t2 r)/(2 s^2) alpha1
    //            + (2 t1 / s^2) alpha2 + t2 gamma
    let r = fam.r.clone();
    let part0 = sys.alpha[0].scaled_by(
        "-r t1",
        Arc::new(move |p| Ok(-t1 * r(p)?)),
    );
    let r = fam.r.clone();
    let part1 = sys.alpha[1].scaled_by(
        "(2t0 - s^2 t2 r)/2s^2",
        Arc::new(move |p| Ok((2.0 * t0 - s2 * t2 * r(p)?) / (2.0 * s2))),
    );
    let part2 = sys.alpha[2].scale(2.0 * t1 / s2);
    let part3 = fam.gamma.scale(t2);
    let lambda0 = part0.add(&part1).add(&part2).add(&part3);
    // Lambda'_1 = s t2 alpha0 ^ rho
    let lambda1 = sys.alpha[0].wedge(&fam.rho)?.scale(sys.s * t2);
    Ok((lambda0, lambda1))
}

/// Residual of the decomposition `d Lambda = theta ^ Lambda'_0 + Lambda'_1`
/// with the left side differentiated numerically.
pub fn d_lambda_residual(
    lag: &InvariantLagrangian,
    sys: &FundamentalSystem,
    frame: &AdaptedFrame,
) -> Result<f64> {
    let (l0, l1) = d_lambda_pieces(lag, sys)?;
    let rhs = sys.theta.wedge(&l0)?.add(&l1);
    let lhs = lag.form(sys).ext_derivative();
    crate::forms::restricted_residual(&lhs, &rhs, frame)
}

/// Least-squares solution of `psi ^ Lambda = d Lambda` over 1-forms `psi` on
/// the frame; returns the residual norm (0 exactly when the principal-ideal
/// property holds at the point).
pub fn principal_ideal_residual(
    lag: &InvariantLagrangian,
    sys: &FundamentalSystem,
    frame: &AdaptedFrame,
) -> Result<f64> {
    let n_frame = 2 * sys.n + 1;
    let form = lag.form(sys);
    let fc = frame_components(&form, frame)?;
    let dfc = frame_components(&form.ext_derivative(), frame)?;
    // columns: frame comps of e^a ^ Lambda
    let n_rows = dfc.len();
    let mut cols = Vec::with_capacity(n_frame);
    for a in 0..n_frame as u8 {
        let mut ea = vec![0.0; n_frame];
        ea[a as usize] = 1.0;
        cols.push(frame_wedge(&ea, 1, &fc, 2, n_frame));
    }
    // normal equations A^T A psi = A^T b
    let mut ata = vec![vec![0.0; n_frame]; n_frame];
    let mut atb = vec![0.0; n_frame];
    for i in 0..n_frame {
        for j in 0..n_frame {
            ata[i][j] = (0..n_rows).map(|r| cols[i][r] * cols[j][r]).sum();
        }
        atb[i] = (0..n_rows).map(|r| cols[i][r] * dfc[r]).sum();
    }
    // ridge-free Gaussian elimination with pivoting; singular directions get 0
    let psi = solve_sym(&mut ata, &mut atb);
    let mut worst: f64 = 0.0;
    for r in 0..n_rows {
        let mut fit = 0.0;
        for (a, col) in cols.iter().enumerate() {
            fit += psi[a] * col[r];
        }
        worst = worst.max((fit - dfc[r]).abs());
    }
    Ok(worst)
}

fn solve_sym(a: &mut [Vec<f64>], b: &mut [f64]) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let mut piv = c;
        for r in c + 1..n {
            if a[r][c].abs() > a[piv][c].abs() {
                piv = r;
            }
        }
        if a[piv][c].abs() < 1e-12 {
            continue;
        }
        a.swap(piv, c);
        b.swap(piv, c);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        if a[c][c].abs() < 1e-12 {
            x[c] = 0.0;
            continue;
        }
        let mut acc = b[c];
        for k in c + 1..n {
            acc -= a[c][k] * x[k];
        }
        x[c] = acc / a[c][c];
    }
    x
}

/// Basis of the wedge annihilator `{beta : beta ^ Lambda_2 = 0}` in frame
/// coefficients, solved from `b0 = 0`, `b1 = sign t0 b3`, `b2 = sign t0 b4`,
/// and verified by explicit wedge.
pub fn integrity_kernel(
    t0: f64,
    branch_sign: f64,
    sys: &FundamentalSystem,
    frame: &AdaptedFrame,
) -> Result<Vec<[f64; 5]>> {
    let sign = branch_sign.signum();
    let kernel = vec![
        [0.0, sign * t0, 0.0, 1.0, 0.0],
        [0.0, 0.0, sign * t0, 0.0, 1.0],
    ];
    let lag = InvariantLagrangian::lambda2(t0, sign);
    let fc = frame_components(&lag.form(sys), frame)?;
    for beta in &kernel {
        let prod = frame_wedge(beta, 1, &fc, 2, 5);
        let worst = frame_max(&prod);
        if worst > 1e-9 {
            return Err(Error::Config(format!(
                "kernel candidate fails by {worst}"
            )));
        }
    }
    Ok(kernel)
}
