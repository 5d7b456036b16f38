//! Index selection rules shared by every pursuit.
//!
//! Thresholds are compared inclusively with plain `>=`; exact ties are all
//! kept.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SupportSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SelectionRule {
    /// `{i : |g_i| ≥ α‖g‖_∞}`, `0 < α ≤ 1`.
    StagewiseWeak { alpha: f64 },
    /// `{i : |g_i| ≥ α̃‖r‖₂}`, `α̃ > 0`. May select nothing.
    RelaxedWeak { alpha: f64 },
}

impl SelectionRule {
    pub fn weak(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!(
                "weak rule needs 0 < alpha <= 1, got {alpha}"
            )));
        }
        Ok(SelectionRule::StagewiseWeak { alpha })
    }

    pub fn relaxed(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!(
                "relaxed rule needs alpha > 0, got {alpha}"
            )));
        }
        Ok(SelectionRule::RelaxedWeak { alpha })
    }

    /// Parses the config spelling `weak` / `relaxed`.
    pub fn from_name(name: &str, alpha: f64) -> Result<Self> {
        match name {
            "weak" => Self::weak(alpha),
            "relaxed" => Self::relaxed(alpha),
            other => Err(Error::invalid(format!("unknown rule {other:?}"))),
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            SelectionRule::StagewiseWeak { alpha } | SelectionRule::RelaxedWeak { alpha } => alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SelectionRule::StagewiseWeak { alpha } => Self::weak(alpha).map(drop),
            SelectionRule::RelaxedWeak { alpha } => Self::relaxed(alpha).map(drop),
        }
    }

    pub fn select(&self, g: &[f64], r_norm: f64) -> Result<SelectionOutcome> {
        match *self {
            SelectionRule::StagewiseWeak { alpha } => select_weak(g, alpha),
            SelectionRule::RelaxedWeak { alpha } => select_relaxed(g, r_norm, alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub indices: SupportSet,
    pub threshold: f64,
    pub proxy_max: f64,
    pub residual_norm: f64,
}

fn max_abs(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn scan(g: &[f64], threshold: f64) -> SupportSet {
    SupportSet::from_indices(
        g.iter()
            .enumerate()
            .filter(|(_, v)| v.abs() >= threshold)
            .map(|(i, _)| i),
    )
}

/// Stagewise weak rule. Fails with [`Error::ProxyVanished`] when `g = 0`.
pub fn select_weak(g: &[f64], alpha: f64) -> Result<SelectionOutcome> {
    SelectionRule::weak(alpha)?;
    let proxy_max = max_abs(g);
    if proxy_max == 0.0 {
        return Err(Error::ProxyVanished);
    }
    let threshold = alpha * proxy_max;
    Ok(SelectionOutcome {
        indices: scan(g, threshold),
        threshold,
        proxy_max,
        residual_norm: f64::NAN,
    })
}

/// Relaxed weak rule. Fails with [`Error::ResidualVanished`] when
/// `r_norm ≤ 0`; an empty selection is a normal outcome.
pub fn select_relaxed(g: &[f64], r_norm: f64, alpha: f64) -> Result<SelectionOutcome> {
    SelectionRule::relaxed(alpha)?;
    if !(r_norm > 0.0) {
        return Err(Error::ResidualVanished);
    }
    let threshold = alpha * r_norm;
    Ok(SelectionOutcome {
        indices: scan(g, threshold),
        threshold,
        proxy_max: max_abs(g),
        residual_norm: r_norm,
    })
}

/// `(1 − δ_k)^{1/2} / √k`: at or below this `α̃` the relaxed rule never
/// comes back empty on a k-sparse residual.
pub fn relaxed_nonempty_bound(delta_k: f64, k: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&delta_k) {
        return Err(Error::invalid(format!(
            "delta_k must lie in [0, 1), got {delta_k}"
        )));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    Ok((1.0 - delta_k).sqrt() / (k as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{generate, rip_exhaustive, EnsembleKind, EnsembleSpec};
    use crate::linalg::DenseMatrix;
    use crate::rng::{self, Domain};
    use proptest::prelude::*;

    #[test]
    fn weak_rule_examples() {
        assert_eq!(
            select_weak(&[3.0, -1.0, 2.0], 1.0)
                .unwrap()
                .indices
                .indices(),
            &[0]
        );
        assert_eq!(
            select_weak(&[3.0, -3.0, 1.0], 1.0)
                .unwrap()
                .indices
                .indices(),
            &[0, 1]
        );
        let o = select_weak(&[4.0, 2.0, 1.0, -3.0], 0.5).unwrap();
        assert_eq!(o.threshold, 2.0);
        assert_eq!(o.indices.indices(), &[0, 1, 3]);
        assert!(matches!(
            select_weak(&[0.0, 0.0], 0.5),
            Err(Error::ProxyVanished)
        ));
        assert!(select_weak(&[1.0], 0.0).is_err());
        assert!(select_weak(&[1.0], 1.5).is_err());
    }

    #[test]
    fn relaxed_rule_examples() {
        let g = [0.5, -0.2, 0.31, 0.0, -0.3];
        let o = select_relaxed(&g, 2.0, 0.15).unwrap();
        let oracle: Vec<usize> = (0..g.len()).filter(|&i| g[i].abs() >= 0.3).collect();
        assert_eq!(o.indices.indices(), oracle.as_slice());

        // Orthonormal columns and r = φ_0.
        let phi = DenseMatrix::identity(4);
        let r = phi.col(0).to_vec();
        let g = phi.adjoint_matvec(&r).unwrap();
        assert_eq!(
            select_relaxed(&g, 1.0, 1.0).unwrap().indices.indices(),
            &[0]
        );

        assert!(select_relaxed(&[0.1, 0.2], 1.0, 0.5)
            .unwrap()
            .indices
            .is_empty());
        assert!(matches!(
            select_relaxed(&[1.0], 0.0, 0.5),
            Err(Error::ResidualVanished)
        ));
    }

    #[test]
    fn nonempty_bound_examples() {
        assert_eq!(relaxed_nonempty_bound(0.0, 1).unwrap(), 1.0);
        assert_eq!(relaxed_nonempty_bound(0.0, 4).unwrap(), 0.5);
        assert_eq!(relaxed_nonempty_bound(0.75, 4).unwrap(), 0.25);
        assert!(relaxed_nonempty_bound(1.0, 4).is_err());
    }

    #[test]
    fn nonempty_bound_guarantees_selection_on_certified_instances() {
        let k = 2;
        for seed in 0..30 {
            let phi = generate(&EnsembleSpec::new(EnsembleKind::Gaussian, 12, 14, seed).unwrap())
                .unwrap();
            let Ok(cert) = rip_exhaustive(&phi, k) else {
                continue;
            };
            let alpha = relaxed_nonempty_bound(cert.delta_upper, k).unwrap();
            let mut r = rng::stream(seed, Domain::Test, 0);
            for _ in 0..50 {
                let support = rng::sample_indices(&mut r, 14, k);
                let mut w = vec![0.0; k];
                rng::fill_standard_normal(&mut r, &mut w);
                let res = phi.combine_columns(&SupportSet::from_indices(support), &w);
                let g = phi.adjoint_matvec(&res).unwrap();
                let o = select_relaxed(&g, res.norm(), alpha).unwrap();
                assert!(!o.indices.is_empty(), "seed {seed}");
            }
        }
    }

    proptest! {
        #[test]
        fn weak_selection_is_scale_invariant(
            g in proptest::collection::vec(-100i32..100, 1..20),
            scale in 1u32..1000,
            alpha_num in 1u32..=8,
        ) {
            prop_assume!(g.iter().any(|&v| v != 0));
            // Powers of two keep the scaling exact in floating point.
            let alpha = alpha_num as f64 / 8.0;
            let s = (scale.next_power_of_two()) as f64;
            let base: Vec<f64> = g.iter().map(|&v| v as f64).collect();
            let scaled: Vec<f64> = base.iter().map(|v| v * s).collect();
            prop_assert_eq!(
                select_weak(&base, alpha).unwrap().indices,
                select_weak(&scaled, alpha).unwrap().indices
            );
        }

        #[test]
        fn full_weak_selection_attains_the_max(g in proptest::collection::vec(-50i32..50, 1..20)) {
            prop_assume!(g.iter().any(|&v| v != 0));
            let g: Vec<f64> = g.iter().map(|&v| v as f64).collect();
            let o = select_weak(&g, 1.0).unwrap();
            prop_assert!(!o.indices.is_empty());
            for i in o.indices.iter() {
                prop_assert_eq!(g[i].abs(), o.proxy_max);
            }
        }
    }
}
