use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{snr, RuleKind, SolverSpec};
use crate::ensembles::{generate, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::pursuit::{run, Algorithm, PursuitConfig};
use crate::rng::{self, Domain, Prng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Gaussian,
    /// `Φ = I`, requires `m = N`.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverEntry {
    #[serde(default)]
    pub label: Option<String>,
    pub algorithm: Algorithm,
    pub rule: RuleKind,
    pub alpha: f64,
    pub iterations: usize,
    #[serde(default)]
    pub prune: bool,
    /// Pruning target; defaults to `iterations`.
    #[serde(default)]
    pub k: Option<usize>,
}

impl SolverEntry {
    fn spec(&self) -> SolverSpec {
        SolverSpec {
            algorithm: self.algorithm,
            rule: self.rule,
            alpha: self.alpha,
            prune: self.prune,
        }
    }

    fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.spec().label())
    }

    fn config(&self, m: usize, residual_tol: f64) -> Result<PursuitConfig> {
        let cfg = self
            .spec()
            .config(m, self.k.unwrap_or(self.iterations).max(1), self.iterations)?
            .with_residual_tol(residual_tol);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// SNR study on power-law signals `x_i = ±i^{−1/p}` in random order.
///
/// TOML layout:
///
/// ```toml
/// n = 256
/// m = 128
/// decay_p = 1.0
/// trials = 20
/// seed = 5
/// # optional: matrix = "gaussian" | "identity", residual_tol = 0.0,
/// # oracle_k = 20
///
/// [[solvers]]
/// algorithm = "gp"
/// rule = "weak"
/// alpha = 1.0
/// iterations = 20
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompressibleSpec {
    pub n: usize,
    pub m: usize,
    pub decay_p: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_matrix")]
    pub matrix: MatrixKind,
    /// Relative residual at which a solver may stop before its budget.
    #[serde(default)]
    pub residual_tol: f64,
    /// Adds a best-k-term row as an upper reference.
    #[serde(default)]
    pub oracle_k: Option<usize>,
    pub solvers: Vec<SolverEntry>,
}

fn default_matrix() -> MatrixKind {
    MatrixKind::Gaussian
}

impl CompressibleSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.decay_p > 0.0 && self.decay_p <= 1.0) {
            return Err(Error::invalid(format!(
                "decay_p must lie in (0, 1], got {}",
                self.decay_p
            )));
        }
        if self.m == 0 || self.m > self.n {
            return Err(Error::invalid(format!(
                "m = {} must lie in 1..={}",
                self.m, self.n
            )));
        }
        if self.matrix == MatrixKind::Identity && self.m != self.n {
            return Err(Error::invalid("the identity matrix needs m = n"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if !(self.residual_tol >= 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::invalid(
                "residual_tol must be finite and non-negative",
            ));
        }
        if let Some(k) = self.oracle_k {
            if k == 0 || k > self.n {
                return Err(Error::invalid(format!(
                    "oracle_k = {k} must lie in 1..={}",
                    self.n
                )));
            }
        }
        if self.solvers.is_empty() && self.oracle_k.is_none() {
            return Err(Error::invalid("no solvers configured"));
        }
        for s in &self.solvers {
            s.config(self.m, self.residual_tol)?;
        }
        Ok(())
    }

    fn matrix(&self) -> Result<DenseMatrix> {
        match self.matrix {
            MatrixKind::Identity => Ok(DenseMatrix::identity(self.n)),
            MatrixKind::Gaussian => generate(&EnsembleSpec::new(
                EnsembleKind::Gaussian,
                self.m,
                self.n,
                rng::derive_seed(self.seed, &[self.m as u64]),
            )?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnrResult {
    pub solver: String,
    pub iterations: usize,
    pub trials: usize,
    /// Runs that hit a rank-deficient least-squares step; excluded from the mean.
    pub failures: usize,
    pub mean_snr_db: f64,
}

impl SnrResult {
    pub fn csv_header() -> &'static str {
        "solver,iterations,trials,failures,mean_snr_db"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.solver, self.iterations, self.trials, self.failures, self.mean_snr_db
        )
    }

    pub fn table_csv(rows: &[SnrResult]) -> String {
        let mut s = format!("{}\n", Self::csv_header());
        for r in rows {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    }
}

/// `±π(i)^{−1/p}` for a uniform permutation `π` of `1..=n` and fair signs.
pub fn power_law_signal(n: usize, p: f64, r: &mut Prng) -> Vec<f64> {
    let mut ranks: Vec<usize> = (1..=n).collect();
    ranks.shuffle(r);
    ranks
        .into_iter()
        .map(|i| rng::sign(r) * (i as f64).powf(-1.0 / p))
        .collect()
}

fn best_k_term(x: &[f64], k: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    let mut out = vec![0.0; x.len()];
    for &i in &order[..k] {
        out[i] = x[i];
    }
    out
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Runs every solver on the same `trials` signals and one shared matrix.
/// Rows follow the solver order, with the oracle row last.
pub fn run_compressible_study(spec: &CompressibleSpec) -> Result<Vec<SnrResult>> {
    spec.validate()?;
    let phi = spec.matrix()?;
    let signals: Vec<Vec<f64>> = (0..spec.trials)
        .map(|t| {
            let mut r = rng::stream(spec.seed, Domain::Signal, t as u64);
            power_law_signal(spec.n, spec.decay_p, &mut r)
        })
        .collect();
    let measurements: Vec<Vec<f64>> = signals
        .iter()
        .map(|x| phi.matvec(x).map(|v| v.into_inner()))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(spec.solvers.len() + 1);
    for entry in &spec.solvers {
        let cfg = entry.config(spec.m, spec.residual_tol)?;
        let outcomes: Vec<Option<f64>> = (0..spec.trials)
            .into_par_iter()
            .map(|t| match run(&phi, &measurements[t], &cfg) {
                Ok((state, _)) => snr(&signals[t], state.estimate.as_slice()).map(Some),
                Err(Error::RankDeficientSupport { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        let ok: Vec<f64> = outcomes.iter().flatten().copied().collect();
        rows.push(SnrResult {
            solver: entry.label(),
            iterations: entry.iterations,
            trials: spec.trials,
            failures: spec.trials - ok.len(),
            mean_snr_db: mean(&ok),
        });
    }
    if let Some(k) = spec.oracle_k {
        let values: Vec<f64> = signals
            .iter()
            .map(|x| snr(x, &best_k_term(x, k)))
            .collect::<Result<_>>()?;
        rows.push(SnrResult {
            solver: "best_k_oracle".into(),
            iterations: k,
            trials: spec.trials,
            failures: 0,
            mean_snr_db: mean(&values),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(algorithm: Algorithm, iterations: usize) -> SolverEntry {
        SolverEntry {
            label: None,
            algorithm,
            rule: RuleKind::Weak,
            alpha: 1.0,
            iterations,
            prune: false,
            k: None,
        }
    }

    fn spec(n: usize, m: usize, matrix: MatrixKind, solvers: Vec<SolverEntry>) -> CompressibleSpec {
        CompressibleSpec {
            n,
            m,
            decay_p: 1.0,
            trials: 20,
            seed: 17,
            matrix,
            residual_tol: 0.0,
            oracle_k: None,
            solvers,
        }
    }

    #[test]
    fn power_law_magnitudes_are_a_permutation() {
        let mut r = rng::stream(1, Domain::Test, 0);
        let x = power_law_signal(50, 0.5, &mut r);
        let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        for (i, v) in mags.iter().enumerate() {
            assert_eq!(*v, ((i + 1) as f64).powf(-2.0));
        }
        assert!(x.iter().any(|v| *v < 0.0) && x.iter().any(|v| *v > 0.0));
    }

    #[test]
    fn identity_with_full_budget_is_exact() {
        let s = spec(
            64,
            64,
            MatrixKind::Identity,
            vec![entry(Algorithm::Omp, 64), entry(Algorithm::Gp, 64)],
        );
        for row in run_compressible_study(&s).unwrap() {
            assert!(row.mean_snr_db >= 80.0, "{row:?}");
            assert_eq!(row.failures, 0);
        }
    }

    #[test]
    fn oracle_matches_sort_and_truncate() {
        let mut s = spec(40, 20, MatrixKind::Gaussian, vec![]);
        s.oracle_k = Some(5);
        s.trials = 3;
        let rows = run_compressible_study(&s).unwrap();
        let mut expected = 0.0;
        for t in 0..3 {
            let mut r = rng::stream(17, Domain::Signal, t);
            let x = power_law_signal(40, 1.0, &mut r);
            // Tail energy of a permuted 1/i sequence does not depend on the
            // permutation: the error is exactly the entries 6..=40.
            let tail: f64 = (6..=40).map(|i| 1.0 / (i * i) as f64).sum::<f64>().sqrt();
            let head: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            expected += 10.0 * (head / tail).log10();
        }
        expected /= 3.0;
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].solver, "best_k_oracle");
        assert!((rows[0].mean_snr_db - expected).abs() < 1e-12);
    }

    #[test]
    fn gp_not_worse_than_mp_at_equal_budget() {
        let mut s = spec(
            256,
            128,
            MatrixKind::Gaussian,
            vec![entry(Algorithm::Gp, 20), entry(Algorithm::Mp, 20)],
        );
        s.oracle_k = Some(20);
        s.trials = 40;
        let rows = run_compressible_study(&s).unwrap();
        let (gp, mp, oracle) = (&rows[0], &rows[1], &rows[2]);
        assert_eq!((gp.solver.as_str(), mp.solver.as_str()), ("swgp", "swmp"));
        // Two-sided slack of 0.5 dB on a 40-trial mean.
        assert!(
            gp.mean_snr_db + 0.5 >= mp.mean_snr_db,
            "gp {} mp {}",
            gp.mean_snr_db,
            mp.mean_snr_db
        );
        assert!(oracle.mean_snr_db >= gp.mean_snr_db - 0.5);
    }

    #[test]
    fn reruns_identical() {
        let s = spec(64, 32, MatrixKind::Gaussian, vec![entry(Algorithm::Omp, 8)]);
        let a = SnrResult::table_csv(&run_compressible_study(&s).unwrap());
        let b = SnrResult::table_csv(&run_compressible_study(&s).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("solver,iterations,trials,failures,mean_snr_db\nswomp,8,20,0,"));
    }

    #[test]
    fn validation() {
        let mut s = spec(64, 32, MatrixKind::Identity, vec![entry(Algorithm::Omp, 8)]);
        assert!(s.validate().is_err());
        s.matrix = MatrixKind::Gaussian;
        s.decay_p = 1.5;
        assert!(s.validate().is_err());
        s.decay_p = 0.7;
        s.oracle_k = Some(65);
        assert!(s.validate().is_err());
        s.oracle_k = None;
        assert!(s.validate().is_ok());
        let text = r#"
            n = 32
            m = 16
            decay_p = 0.8
            trials = 2
            seed = 1
            [[solvers]]
            algorithm = "omp"
            rule = "relaxed"
            alpha = 0.2
            iterations = 4
            prune = true
        "#;
        let parsed = CompressibleSpec::from_toml(text).unwrap();
        assert_eq!(parsed.solvers[0].spec().label(), "k-rwomp");
        assert!(CompressibleSpec::from_toml(&text.replace("trials = 2", "trials = 0")).is_err());
    }
}
