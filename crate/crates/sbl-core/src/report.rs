//! Verification records and report emission.
//!
//! Every identity check produces one record carrying a stable id, the checked
//! statement, the maximal residual over samples, its tolerance, and a verdict.
//! `mismatch-vs-paper` marks a printed closed form that disagrees with the
//! authoritative numerical route: it is a finding, never a failure.
//! `info` rows carry reported values with nothing asserted.
//!
//! Reports serialize to a stable JSON schema `{config, records[], summary}`;
//! records are ordered by id, so identical configurations yield byte-identical
//! output regardless of execution order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    MismatchVsPaper,
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub id: String,
    /// The identity being checked, in plain mathematical notation.
    pub anchor: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl IdentityRecord {
    pub fn checked(
        id: &str,
        anchor: &str,
        samples: usize,
        max_residual: f64,
        tolerance: f64,
    ) -> Self {
        IdentityRecord {
            id: id.into(),
            anchor: anchor.into(),
            samples,
            max_residual,
            tolerance,
            verdict: if max_residual <= tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            detail: None,
        }
    }

    pub fn info(id: &str, anchor: &str, samples: usize, value: f64, detail: String) -> Self {
        IdentityRecord {
            id: id.into(),
            anchor: anchor.into(),
            samples,
            max_residual: value,
            tolerance: 0.0,
            verdict: Verdict::Info,
            detail: Some(detail),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// Named tolerances; every threshold used by any suite lives here and is
/// overridable from the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Structure equations (backend dependent: 1e-7 dual, 1e-4 fd).
    pub structure: f64,
    /// Hodge star identities and codifferential table.
    pub hodge: f64,
    /// Laplacian eigenform relations (two nested derivatives).
    pub laplacian: f64,
    /// rho-family identities including d(rho) and F-coefficient agreement.
    pub rho: f64,
    /// Ricci-type granting threshold on |F_i|.
    pub ricci: f64,
    /// Relative tolerance of exact fiber integrals (1-check, push-forwards).
    pub fiber_exact: f64,
    /// Relative tolerance of curvature-dependent fiber closed forms.
    pub fiber_closed: f64,
    /// Invariant-Lagrangian identities.
    pub lagrangian: f64,
    /// Surface geometry and Weingarten stationarity.
    pub surface: f64,
    /// Relative agreement of the functional with the Lagrangian integral.
    pub functional: f64,
    /// Frame-independence residuals.
    pub frame: f64,
}

impl Tolerances {
    pub fn for_backend(backend: crate::metric::Backend) -> Self {
        // The finite-difference backend carries ~1e-5 noise in third
        // derivatives of the metric, so every grad-Ric-dependent threshold
        // scales accordingly; the dual and analytic backends are exact.
        if backend == crate::metric::Backend::FiniteDiff {
            Tolerances {
                structure: 1e-4,
                hodge: 1e-4,
                laplacian: 1e-4,
                rho: 2e-4,
                ricci: 1e-4,
                fiber_exact: 1e-8,
                fiber_closed: 1e-5,
                lagrangian: 1e-5,
                surface: 1e-5,
                functional: 1e-6,
                frame: 1e-7,
            }
        } else {
            Tolerances {
                structure: 1e-7,
                hodge: 1e-6,
                laplacian: 1e-5,
                rho: 1e-5,
                ricci: 1e-7,
                fiber_exact: 1e-8,
                fiber_closed: 1e-6,
                lagrangian: 1e-6,
                surface: 1e-5,
                functional: 1e-6,
                frame: 1e-9,
            }
        }
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "structure" => self.structure = value,
            "hodge" => self.hodge = value,
            "laplacian" => self.laplacian = value,
            "rho" => self.rho = value,
            "ricci" => self.ricci = value,
            "fiber_exact" => self.fiber_exact = value,
            "fiber_closed" => self.fiber_closed = value,
            "lagrangian" => self.lagrangian = value,
            "surface" => self.surface = value,
            "functional" => self.functional = value,
            "frame" => self.frame = value,
            other => return Err(Error::Config(format!("unknown tolerance '{other}'"))),
        }
        Ok(())
    }
}

/// Echo of everything that determines a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub metric: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub s: f64,
    pub base_dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub backend: String,
    pub suites: Vec<String>,
    pub n_theta: usize,
    pub n_z: usize,
    pub tolerances: Tolerances,
    /// Extra knobs (surface selection and parameters), ordered.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub extra: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub mismatches: usize,
    pub info: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: RunConfig,
    pub records: Vec<IdentityRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    /// Orders records by id and computes the summary.
    pub fn assemble(config: RunConfig, mut records: Vec<IdentityRecord>) -> Self {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        let summary = Summary {
            total: records.len(),
            passed: records.iter().filter(|r| r.verdict == Verdict::Pass).count(),
            failed: records.iter().filter(|r| r.verdict == Verdict::Fail).count(),
            mismatches: records
                .iter()
                .filter(|r| r.verdict == Verdict::MismatchVsPaper)
                .count(),
            info: records.iter().filter(|r| r.verdict == Verdict::Info).count(),
        };
        VerificationReport {
            config,
            records,
            summary,
        }
    }

    /// Exit code: 0 all pass, 1 any failure. Mismatch and info rows never fail.
    pub fn exit_code(&self) -> i32 {
        if self.summary.failed == 0 {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Aligned human-readable table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "metric {}  s = {}  backend {}  seed {}  samples {}\n",
            self.config.metric, self.config.s, self.config.backend, self.config.seed, self.config.samples
        ));
        let id_w = self
            .records
            .iter()
            .map(|r| r.id.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let anchor_w = self
            .records
            .iter()
            .map(|r| r.anchor.len())
            .max()
            .unwrap_or(10)
            .clamp(10, 58);
        out.push_str(&format!(
            "{:id_w$}  {:anchor_w$}  {:>12}  {:>9}  verdict\n",
            "identity", "statement", "max residual", "tol"
        ));
        for r in &self.records {
            let verdict = match r.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::MismatchVsPaper => "mismatch-vs-paper",
                Verdict::Info => "info",
            };
            let mut anchor = r.anchor.clone();
            if anchor.len() > anchor_w {
                anchor.truncate(anchor_w - 3);
                anchor.push_str("...");
            }
            out.push_str(&format!(
                "{:id_w$}  {:anchor_w$}  {:>12.3e}  {:>9.1e}  {}\n",
                r.id, anchor, r.max_residual, r.tolerance, verdict
            ));
            if let Some(d) = &r.detail {
                out.push_str(&format!("{:id_w$}  note: {}\n", "", d));
            }
        }
        out.push_str(&format!(
            "summary: {} checks, {} passed, {} failed, {} mismatch-vs-paper, {} info\n",
            self.summary.total,
            self.summary.passed,
            self.summary.failed,
            self.summary.mismatches,
            self.summary.info
        ));
        out
    }
}
