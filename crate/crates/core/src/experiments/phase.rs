use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{status_label, SolverSpec};
use crate::ensembles::{generate, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::pursuit::{exact_recovery_check, run, Amplitude, SparseSignal};
use crate::rng::{self, Domain};
use crate::tol::DEFAULT_RECOVERY_TOL;

fn default_tol() -> f64 {
    DEFAULT_RECOVERY_TOL
}

fn default_ensemble() -> EnsembleKind {
    EnsembleKind::Gaussian
}

/// Grid of `(m, k)` cells, each run `trials_per_cell` times.
///
/// TOML layout:
///
/// ```toml
/// n = 256
/// m_values = [40, 80, 120]
/// k_values = [4, 12]
/// trials_per_cell = 50
/// base_seed = 7
/// # optional: recovery_tol = 1e-4, amplitude = "normal" | "sign",
/// # ensemble = "gaussian" | "bernoulli", iterations = <cap, default k>,
/// # keep_trials = false, record_wall_time = false
///
/// [solver]
/// algorithm = "omp"
/// rule = "relaxed"
/// alpha = 0.125
/// prune = false
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseTransitionSpec {
    pub n: usize,
    pub m_values: Vec<usize>,
    pub k_values: Vec<usize>,
    pub trials_per_cell: usize,
    pub solver: SolverSpec,
    pub base_seed: u64,
    #[serde(default = "default_tol")]
    pub recovery_tol: f64,
    #[serde(default)]
    pub amplitude: Amplitude,
    #[serde(default = "default_ensemble")]
    pub ensemble: EnsembleKind,
    /// Iteration cap; `None` means `k`.
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub keep_trials: bool,
    /// Adds a `wall_time` column to the per-trial table. Off by default
    /// since it breaks byte-identical reruns.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl PhaseTransitionSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() || self.k_values.is_empty() {
            return Err(Error::invalid("m_values and k_values must be nonempty"));
        }
        if self.trials_per_cell == 0 {
            return Err(Error::invalid("trials_per_cell must be at least 1"));
        }
        if let Some(&m) = self.m_values.iter().find(|&&m| m == 0 || m > self.n) {
            return Err(Error::invalid(format!(
                "m = {m} must lie in 1..={}",
                self.n
            )));
        }
        let m_min = *self.m_values.iter().min().unwrap_or(&0);
        if let Some(&k) = self.k_values.iter().find(|&&k| k == 0 || k >= m_min) {
            return Err(Error::invalid(format!(
                "k = {k} must lie in 1..{m_min} (below every m)"
            )));
        }
        if !(self.recovery_tol > 0.0 && self.recovery_tol.is_finite()) {
            return Err(Error::invalid("recovery_tol must be positive"));
        }
        if self.iterations == Some(0) {
            return Err(Error::invalid("iterations must be at least 1"));
        }
        self.solver.config(m_min, self.k_values[0], 1).map(drop)
    }

    fn matrix_seed(&self, m: usize) -> u64 {
        rng::derive_seed(self.base_seed, &[m as u64])
    }

    fn signal_seed(&self, m: usize, k: usize) -> u64 {
        rng::derive_seed(self.base_seed, &[m as u64, k as u64])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub m: usize,
    pub k: usize,
    pub trial_index: usize,
    pub recovered: bool,
    pub iterations_used: usize,
    pub final_residual_norm: f64,
    pub status: &'static str,
    pub wall_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellSummary {
    pub m: usize,
    pub k: usize,
    pub recovered: usize,
    pub trials: usize,
    pub recovery_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseTable {
    pub cells: Vec<CellSummary>,
    pub trials: Option<Vec<TrialResult>>,
}

impl PhaseTable {
    pub fn cell(&self, m: usize, k: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.m == m && c.k == k)
    }

    /// `m,k,recovery_fraction,trials`, rows in spec order.
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("m,k,recovery_fraction,trials\n");
        for c in &self.cells {
            s.push_str(&format!(
                "{},{},{},{}\n",
                c.m, c.k, c.recovery_fraction, c.trials
            ));
        }
        s
    }

    pub fn trials_csv(&self) -> Option<String> {
        let trials = self.trials.as_ref()?;
        let timed = trials.iter().any(|t| t.wall_time.is_some());
        let mut s = String::from("m,k,trial,recovered,iterations_used,final_residual_norm,status");
        s.push_str(if timed { ",wall_time\n" } else { "\n" });
        for t in trials {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}",
                t.m,
                t.k,
                t.trial_index,
                t.recovered as u8,
                t.iterations_used,
                t.final_residual_norm,
                t.status
            ));
            if timed {
                s.push_str(&format!(",{}", t.wall_time.unwrap_or(f64::NAN)));
            }
            s.push('\n');
        }
        Some(s)
    }

    /// Cells at or above `c·k·log₂(N/k)` measurements, the usual sufficient
    /// sample size with an empirical constant.
    pub fn cells_above_reference(&self, n: usize, c: f64) -> Vec<CellSummary> {
        self.cells
            .iter()
            .filter(|cell| cell.m as f64 >= c * cell.k as f64 * (n as f64 / cell.k as f64).log2())
            .copied()
            .collect()
    }
}

fn run_trial(
    spec: &PhaseTransitionSpec,
    phi: &DenseMatrix,
    m: usize,
    k: usize,
    trial: usize,
) -> Result<TrialResult> {
    let start = spec.record_wall_time.then(Instant::now);
    let mut r = rng::stream(spec.signal_seed(m, k), Domain::Signal, trial as u64);
    let x = SparseSignal::random(spec.n, k, spec.amplitude, &mut r)?;
    let y = phi.matvec(&x.to_dense())?;
    let cfg = spec.solver.config(m, k, spec.iterations.unwrap_or(k))?;
    let (recovered, iterations_used, final_residual_norm, status) = match run(phi, &y, &cfg) {
        Ok((state, trace)) => (
            exact_recovery_check(&x, state.estimate.as_slice(), spec.recovery_tol),
            trace.iterations(),
            trace.final_residual_norm(),
            status_label(trace.status),
        ),
        // More atoms than rows: the least-squares step is undefined and the
        // trial counts as a failure.
        Err(Error::RankDeficientSupport { .. }) => (false, 0, f64::NAN, "rank_deficient"),
        Err(e) => return Err(e),
    };
    Ok(TrialResult {
        m,
        k,
        trial_index: trial,
        recovered,
        iterations_used,
        final_residual_norm,
        status,
        wall_time: start.map(|t| t.elapsed().as_secs_f64()),
    })
}

/// Runs every `(m, k, trial)` in parallel and reduces in spec order.
///
/// One matrix is drawn per `m` and shared by all trials and sparsities at
/// that `m`; each trial draws its own signal from `(base_seed, m, k, trial)`.
pub fn run_phase_transition(spec: &PhaseTransitionSpec) -> Result<PhaseTable> {
    spec.validate()?;
    let matrices: Vec<DenseMatrix> = spec
        .m_values
        .par_iter()
        .map(|&m| {
            generate(&EnsembleSpec::new(
                spec.ensemble,
                m,
                spec.n,
                spec.matrix_seed(m),
            )?)
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize, usize)> = (0..spec.m_values.len())
        .flat_map(|mi| {
            (0..spec.k_values.len())
                .flat_map(move |ki| (0..spec.trials_per_cell).map(move |t| (mi, ki, t)))
        })
        .collect();
    let results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(mi, ki, t)| run_trial(spec, &matrices[mi], spec.m_values[mi], spec.k_values[ki], t))
        .collect::<Result<_>>()?;

    let cells = results
        .chunks(spec.trials_per_cell)
        .map(|chunk| {
            let recovered = chunk.iter().filter(|t| t.recovered).count();
            CellSummary {
                m: chunk[0].m,
                k: chunk[0].k,
                recovered,
                trials: chunk.len(),
                recovery_fraction: recovered as f64 / chunk.len() as f64,
            }
        })
        .collect();
    Ok(PhaseTable {
        cells,
        trials: spec.keep_trials.then_some(results),
    })
}
