//! Random sensing matrices and the probabilistic machinery around them.

mod concentration;
mod rip;

pub use concentration::{
    concentration_check, gaussian_c0, measurement_bound, ConcentrationReport, MeasurementConstants,
};
pub use rip::{rip_exhaustive, rip_exhaustive_below, rip_sampled, RipCertificate, RipMethod};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Gaussian,
    Bernoulli,
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(EnsembleKind::Gaussian),
            "bernoulli" => Ok(EnsembleKind::Bernoulli),
            other => Err(Error::invalid(format!("unknown ensemble {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid(format!(
                "ensemble needs m, n >= 1 (got {m}x{n})"
            )));
        }
        Ok(EnsembleSpec { kind, m, n, seed })
    }
}

/// Draws the matrix for `spec`.
///
/// Gaussian entries are N(0, 1/m) and Bernoulli entries are ±1/√m, so every
/// column has expected squared norm 1. Entries are drawn column by column
/// from the `Matrix` stream of the seed.
pub fn generate(spec: &EnsembleSpec) -> Result<DenseMatrix> {
    let EnsembleSpec { kind, m, n, seed } = *spec;
    if m == 0 || n == 0 {
        return Err(Error::invalid("ensemble needs m, n >= 1"));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mut r = rng::stream(seed, Domain::Matrix, 0);
    let mut data = vec![0.0; m * n];
    match kind {
        EnsembleKind::Gaussian => {
            rng::fill_standard_normal(&mut r, &mut data);
            data.iter_mut().for_each(|v| *v *= scale);
        }
        EnsembleKind::Bernoulli => data.iter_mut().for_each(|v| *v = scale * rng::sign(&mut r)),
    }
    DenseMatrix::from_col_major(m, n, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_entries_are_half() {
        let a = generate(&EnsembleSpec::new(EnsembleKind::Bernoulli, 4, 9, 3).unwrap()).unwrap();
        assert!(a.as_col_major().iter().all(|&v| v == 0.5 || v == -0.5));
        assert!(a.as_col_major().contains(&0.5) && a.as_col_major().contains(&-0.5));
    }

    #[test]
    fn same_seed_same_matrix() {
        for kind in [EnsembleKind::Gaussian, EnsembleKind::Bernoulli] {
            let s = EnsembleSpec::new(kind, 7, 11, 42).unwrap();
            let (a, b) = (generate(&s).unwrap(), generate(&s).unwrap());
            assert!(a
                .as_col_major()
                .iter()
                .zip(b.as_col_major())
                .all(|(x, y)| x.to_bits() == y.to_bits()));
            let other = generate(&EnsembleSpec { seed: 43, ..s }).unwrap();
            assert_ne!(a, other);
        }
    }

    #[test]
    fn gaussian_columns_have_unit_mean_square_norm() {
        let a = generate(&EnsembleSpec::new(EnsembleKind::Gaussian, 100, 100, 8).unwrap()).unwrap();
        let mean = a.column_norms().iter().map(|c| c * c).sum::<f64>() / 100.0;
        assert!((mean - 1.0).abs() < 0.05, "mean squared column norm {mean}");
        let entries = a.as_col_major();
        let mu = entries.iter().sum::<f64>() / entries.len() as f64;
        assert!(mu.abs() < 0.01);
    }

    #[test]
    fn rejects_empty_shape() {
        assert!(EnsembleSpec::new(EnsembleKind::Gaussian, 0, 3, 1).is_err());
        assert!("gaussian".parse::<EnsembleKind>().is_ok());
        assert!("fourier".parse::<EnsembleKind>().is_err());
    }
}
