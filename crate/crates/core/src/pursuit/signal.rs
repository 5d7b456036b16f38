use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{least_squares, DenseMatrix, DenseVector, SupportSet};
use crate::rng;

/// Distribution of the nonzero entries of random test signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Amplitude {
    #[default]
    Normal,
    Sign,
}

/// A k-sparse vector in `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    n: usize,
    support: SupportSet,
    values: Vec<f64>,
}

impl SparseSignal {
    pub fn new(n: usize, support: SupportSet, values: Vec<f64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::DimensionMismatch {
                context: "sparse signal values",
                expected: support.len(),
                found: values.len(),
            });
        }
        if let Some(last) = support.max_index() {
            if last >= n {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    bound: n,
                });
            }
        }
        if let Some(p) = values.iter().position(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::invalid(format!(
                "signal value {p} must be finite and nonzero"
            )));
        }
        Ok(SparseSignal { n, support, values })
    }

    /// Uniform support of size `k`, then one amplitude per index.
    pub fn random<R: Rng>(n: usize, k: usize, amplitude: Amplitude, r: &mut R) -> Result<Self> {
        if k > n {
            return Err(Error::invalid(format!(
                "cannot place {k} nonzeros in {n} entries"
            )));
        }
        let support = SupportSet::from_indices(rng::sample_indices(r, n, k));
        let values = (0..k)
            .map(|_| match amplitude {
                Amplitude::Sign => rng::sign(r),
                Amplitude::Normal => loop {
                    let v = rng::standard_normal_pair(r).0;
                    if v != 0.0 {
                        break v;
                    }
                },
            })
            .collect();
        Self::new(n, support, values)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> DenseVector {
        let mut x = DenseVector::zeros(self.n);
        for (j, &v) in self.support.iter().zip(&self.values) {
            x[j] = v;
        }
        x
    }
}

/// `Φ_Γ† y` embedded into `R^N`.
pub fn recover_on_support(
    phi: &DenseMatrix,
    y: &[f64],
    support: &SupportSet,
) -> Result<DenseVector> {
    let sub = phi.restrict_columns(support)?;
    let z = least_squares(&sub, y).map_err(|e| match e {
        Error::RankDeficient { pivot, .. } => Error::RankDeficientSupport {
            support: support.indices().to_vec(),
            pivot,
        },
        other => other,
    })?;
    let mut x = DenseVector::zeros(phi.cols());
    for (j, &v) in support.iter().zip(z.iter()) {
        x[j] = v;
    }
    Ok(x)
}

/// True when `‖x̂ − x‖ ≤ tol·max(1, ‖x‖)` and the entries of `x̂` above
/// `tol` in magnitude sit exactly on the entries of `x` above `tol`. Both
/// comparisons are inclusive of the tolerance.
pub fn exact_recovery_check(x_true: &SparseSignal, x_hat: &[f64], tol: f64) -> bool {
    if x_hat.len() != x_true.len() {
        return false;
    }
    let x = x_true.to_dense();
    let err = x
        .iter()
        .zip(x_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if err > tol * x.norm().max(1.0) {
        return false;
    }
    x.iter()
        .zip(x_hat)
        .all(|(a, b)| (a.abs() > tol) == (b.abs() > tol))
}
