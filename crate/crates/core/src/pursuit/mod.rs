//! MP, OMP and GP over one proxy → select → update → stop loop.
//!
//! With the stagewise weak rule these are SWMP/SWOMP/SWGP (plain MP/OMP/GP
//! at `α = 1`); with the relaxed rule they are RWMP/RWOMP/RWGP. Setting
//! `prune_to_k` on OMP gives k-RWOMP.

mod engine;
mod signal;

pub use engine::{replay, run, run_gp, run_mp, run_omp};
pub use signal::{exact_recovery_check, recover_on_support, Amplitude, SparseSignal};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, SupportSet};
use crate::selection::SelectionRule;
use crate::tol::DEFAULT_RESIDUAL_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Mp,
    Omp,
    Gp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mp => "mp",
            Algorithm::Omp => "omp",
            Algorithm::Gp => "gp",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mp" => Ok(Algorithm::Mp),
            "omp" => Ok(Algorithm::Omp),
            "gp" => Ok(Algorithm::Gp),
            other => Err(Error::invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PursuitConfig {
    pub algorithm: Algorithm,
    pub rule: SelectionRule,
    pub max_iterations: usize,
    /// Stop once `‖r^n‖ ≤ residual_tol · ‖y‖`.
    pub residual_tol: f64,
    pub sparsity_k: Option<usize>,
    pub prune_to_k: bool,
}

impl PursuitConfig {
    /// Defaults: `residual_tol = 1e-6` and `max_iterations = m`.
    pub fn new(algorithm: Algorithm, rule: SelectionRule, m: usize) -> Self {
        PursuitConfig {
            algorithm,
            rule,
            max_iterations: m.max(1),
            residual_tol: DEFAULT_RESIDUAL_TOL,
            sparsity_k: None,
            prune_to_k: false,
        }
    }

    /// Records `k` and resets the iteration budget to `2k`.
    pub fn with_sparsity(mut self, k: usize) -> Self {
        self.sparsity_k = Some(k);
        self.max_iterations = (2 * k).max(1);
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_residual_tol(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }

    pub fn with_pruning(mut self, prune: bool) -> Self {
        self.prune_to_k = prune;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.rule.validate()?;
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.residual_tol >= 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::invalid(format!(
                "residual_tol must be a finite non-negative number, got {}",
                self.residual_tol
            )));
        }
        if self.sparsity_k == Some(0) {
            return Err(Error::invalid("sparsity_k must be at least 1"));
        }
        if self.prune_to_k {
            if self.sparsity_k.is_none() {
                return Err(Error::invalid("prune_to_k needs sparsity_k"));
            }
            if self.algorithm != Algorithm::Omp {
                return Err(Error::invalid("prune_to_k is only defined for OMP"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PursuitState {
    pub n: usize,
    pub residual: DenseVector,
    pub estimate: DenseVector,
    pub support: SupportSet,
    pub approximation: DenseVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StallReason {
    /// The relaxed rule selected nothing.
    RelaxedEmpty,
    /// GP direction with `Φ_Γ d = 0` while the residual is nonzero.
    DegenerateDirection,
    /// `Φ*r = 0` with the residual above tolerance.
    ProxyVanished,
    /// OMP support did not change, so every later iteration would repeat.
    NoNewAtoms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIterations,
    Stalled(StallReason),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub n: usize,
    pub residual_norm: f64,
    pub selected: SupportSet,
    /// `Γ^n` after the update.
    pub support: SupportSet,
    pub step: Option<f64>,
    /// `‖r^n‖ / ‖r^{n−1}‖`.
    pub contraction_ratio: f64,
}

impl IterationRecord {
    pub fn support_size(&self) -> usize {
        self.support.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PursuitTrace {
    pub initial_residual_norm: f64,
    pub records: Vec<IterationRecord>,
    pub status: Status,
}

impl PursuitTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_residual_norm(&self) -> f64 {
        self.records
            .last()
            .map_or(self.initial_residual_norm, |r| r.residual_norm)
    }

    /// Per-iteration selected sets, the input `replay` expects.
    pub fn selected_sets(&self) -> Vec<SupportSet> {
        self.records.iter().map(|r| r.selected.clone()).collect()
    }

    /// CSV with header `n,residual_norm,selected_count,support_size,step,contraction_ratio`.
    /// Row 0 is the initial residual; absent values are left empty.
    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("n,residual_norm,selected_count,support_size,step,contraction_ratio\n");
        s.push_str(&format!("0,{},0,0,,\n", self.initial_residual_norm));
        for r in &self.records {
            let step = r.step.map(|a| a.to_string()).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                r.residual_norm,
                r.selected.len(),
                r.support.len(),
                step,
                r.contraction_ratio
            ));
        }
        s
    }
}
