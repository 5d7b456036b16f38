//! Seeded experiment harness: phase-transition sweeps and SNR studies on
//! compressible signals. Every table is a pure function of its spec, so
//! reruns give byte-identical CSV.

mod compressible;
mod phase;

pub use compressible::{
    power_law_signal, run_compressible_study, CompressibleSpec, MatrixKind, SnrResult, SolverEntry,
};
pub use phase::{run_phase_transition, CellSummary, PhaseTable, PhaseTransitionSpec, TrialResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::pursuit::{Algorithm, PursuitConfig, Status};
use crate::selection::SelectionRule;

/// `10·log₁₀(‖x‖₂ / ‖x − a‖₂)` in dB. An exact match gives `+∞`.
///
/// Note the ratio of norms, not of energies.
pub fn snr(x: &[f64], a: &[f64]) -> Result<f64> {
    if x.len() != a.len() {
        return Err(Error::DimensionMismatch {
            context: "snr",
            expected: x.len(),
            found: a.len(),
        });
    }
    let err: Vec<f64> = x.iter().zip(a).map(|(p, q)| p - q).collect();
    let e = norm2(&err);
    if e == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (norm2(x) / e).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Weak,
    Relaxed,
}

/// Solver template as written in experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub algorithm: Algorithm,
    pub rule: RuleKind,
    pub alpha: f64,
    /// OMP only: keep the k largest coefficients after each step.
    #[serde(default)]
    pub prune: bool,
}

impl SolverSpec {
    pub fn rule(&self) -> Result<SelectionRule> {
        match self.rule {
            RuleKind::Weak => SelectionRule::weak(self.alpha),
            RuleKind::Relaxed => SelectionRule::relaxed(self.alpha),
        }
    }

    /// Config with sparsity `k` and iteration cap `iterations`.
    pub fn config(&self, m: usize, k: usize, iterations: usize) -> Result<PursuitConfig> {
        let cfg = PursuitConfig::new(self.algorithm, self.rule()?, m)
            .with_sparsity(k)
            .with_max_iterations(iterations)
            .with_pruning(self.prune);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Short label such as `rwomp`, `k-rwomp` or `swgp`.
    pub fn label(&self) -> String {
        let family = match self.rule {
            RuleKind::Weak => "sw",
            RuleKind::Relaxed => "rw",
        };
        let prefix = if self.prune { "k-" } else { "" };
        format!("{prefix}{family}{}", self.algorithm.name())
    }
}

pub(crate) fn status_label(status: Status) -> &'static str {
    use crate::pursuit::StallReason::*;
    match status {
        Status::Converged => "converged",
        Status::MaxIterations => "max_iterations",
        Status::Stalled(RelaxedEmpty) => "stalled_relaxed_empty",
        Status::Stalled(DegenerateDirection) => "stalled_degenerate_direction",
        Status::Stalled(ProxyVanished) => "stalled_proxy_vanished",
        Status::Stalled(NoNewAtoms) => "stalled_no_new_atoms",
    }
}
