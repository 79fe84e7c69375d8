//! Numerical engine for the exterior differential system of tangent sphere
//! bundles over chart-presented Riemannian 2- and 3-manifolds.
//!
//! The crate builds, on the radius-`s` tangent sphere bundle of a catalog
//! metric, the contact form `theta`, the fundamental forms `alpha_0 ..
//! alpha_n`, the curvature 1-forms `rho, rho_1, rho_2, rho_3` and the 2-form
//! `gamma`, and verifies the structure equations, Hodge and codifferential
//! tables, fiber-integral identities, invariant-Lagrangian properties and the
//! hyperbolic Weingarten functional by independent numerical differentiation
//! and quadrature.
//!
//! Batch evaluation over sample points runs on rayon when the default
//! `parallel` feature is enabled; disabling it yields a sequential build with
//! identical results.

// Index loops are kept in tensor-index form throughout the numerical kernels.
#![allow(clippy::needless_range_loop)]

pub mod bundle;
pub mod eds;
pub mod fiber;
pub mod forms;
pub mod lagrangian;
pub mod metric;
pub mod par;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod suites;
pub mod surface;

pub use bundle::{AdaptedFrame, BundlePoint, MirrorMap, TPoint, TVec};
pub use eds::{FundamentalSystem, RhoFamily};
pub use forms::FormField;
pub use metric::{Backend, ChartMetric, CurvaturePack};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point {0:?} outside chart domain")]
    OutsideDomain([f64; 3]),
    #[error("metric matrix is singular or non-finite at {0:?}")]
    SingularMetric([f64; 3]),
    #[error("plane vectors are not g-orthonormal (residual {0:.3e})")]
    NotOrthonormal(f64),
    #[error("unsupported base dimension {0} (need 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("frame construction failed: {0}")]
    DegenerateFrame(String),
    #[error("form degree {0} exceeds chart dimension {1}")]
    DegreeOverflow(usize, usize),
    #[error("expected a form of degree {expected}, got {got}")]
    WrongDegree { expected: usize, got: usize },
    #[error("curvature-correction index {0} out of range 0..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("need at least {min} samples, got {got}")]
    InsufficientSamples { min: usize, got: usize },
    #[error("fiber quadrature did not converge: {0}")]
    QuadratureDiverged(String),
    #[error("degenerate immersion at parameters ({0}, {1})")]
    DegenerateImmersion(f64, f64),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("unknown metric '{0}'")]
    UnknownMetric(String),
    #[error("unknown surface '{0}'")]
    UnknownSurface(String),
    #[error("ambient curvature {c} incompatible with t0 = {t0} (need c = -t0^2)")]
    BranchMismatch { c: f64, t0: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
