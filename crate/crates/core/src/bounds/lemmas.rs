//! Random probing of the inequalities implied by an exhaustive RIP
//! certificate. A violation means the certificate or the linear algebra is
//! wrong, so it is reported as an error carrying the witness vector.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::RipCertificate;
use crate::error::{Error, Result};
use crate::linalg::{norm2, solve_square, DenseMatrix, SupportSet};
use crate::rng::{self, Domain};
use crate::tol::LEMMA_SLACK;

/// Worst observed ratio for one inequality. `upper` bounds require
/// `observed ≤ bound`, lower bounds `observed ≥ bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub upper: bool,
    pub observed: f64,
    pub bound: f64,
}

impl InequalityCheck {
    fn upper(name: &'static str, bound: f64) -> Self {
        InequalityCheck {
            name,
            upper: true,
            observed: f64::NEG_INFINITY,
            bound,
        }
    }

    fn lower(name: &'static str, bound: f64) -> Self {
        InequalityCheck {
            name,
            upper: false,
            observed: f64::INFINITY,
            bound,
        }
    }

    pub fn holds(&self) -> bool {
        if self.upper {
            self.observed <= self.bound * (1.0 + LEMMA_SLACK) + LEMMA_SLACK
        } else {
            self.observed >= self.bound * (1.0 - LEMMA_SLACK) - LEMMA_SLACK
        }
    }

    /// Folds one sample in; fails with the witness if it breaks the bound.
    fn observe(&mut self, ratio: f64, witness: &[f64]) -> Result<()> {
        let single = InequalityCheck {
            observed: ratio,
            ..*self
        };
        if !single.holds() {
            return Err(Error::LemmaViolation {
                inequality: self.name,
                observed: ratio,
                bound: self.bound,
                witness: witness.to_vec(),
            });
        }
        self.observed = if self.upper {
            self.observed.max(ratio)
        } else {
            self.observed.min(ratio)
        };
        Ok(())
    }

    fn merge(&mut self, other: &InequalityCheck) {
        self.observed = if self.upper {
            self.observed.max(other.observed)
        } else {
            self.observed.min(other.observed)
        };
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RipConsequencesReport {
    pub delta: f64,
    pub trials: usize,
    /// `‖Φ_Γ u‖ ≤ (1+δ)^{1/2}‖u‖` and `‖Φ*_Γ v‖ ≤ (1+δ)^{1/2}‖v‖`.
    pub operator_norm: InequalityCheck,
    /// `‖Φ*_Γ Φ_Γ u‖ ≥ (1−δ)‖u‖`.
    pub gram_lower: InequalityCheck,
    /// `‖Φ*_Γ Φ_Γ u‖ ≤ (1+δ)‖u‖`.
    pub gram_upper: InequalityCheck,
    /// `‖(Φ*_Γ Φ_Γ)^{-1} u‖ ≥ (1+δ)^{-1}‖u‖`.
    pub inverse_lower: InequalityCheck,
    /// `‖(Φ*_Γ Φ_Γ)^{-1} u‖ ≤ (1−δ)^{-1}‖u‖`.
    pub inverse_upper: InequalityCheck,
    /// `‖Φ*_{Γ'} Φ_Γ u‖ ≤ δ‖u‖`; absent when `Γ'` is empty.
    pub cross: Option<InequalityCheck>,
}

impl RipConsequencesReport {
    pub fn checks(&self) -> Vec<InequalityCheck> {
        let mut v = vec![
            self.operator_norm,
            self.gram_lower,
            self.gram_upper,
            self.inverse_lower,
            self.inverse_upper,
        ];
        v.extend(self.cross);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointLowerReport {
    pub delta: f64,
    pub trials: usize,
    /// `‖Φ*_Γ r‖ ≥ (1−δ)^{1/2}‖r‖` for `r ∈ span(Φ_Γ)`.
    pub adjoint_lower: InequalityCheck,
}

fn exhaustive_delta(cert: &RipCertificate) -> Result<f64> {
    cert.exact().ok_or(Error::SampledCertificate)
}

fn check_sets(phi: &DenseMatrix, sets: &[&SupportSet], k: usize) -> Result<()> {
    let mut union = SupportSet::empty();
    for s in sets {
        if let Some(last) = s.max_index() {
            if last >= phi.cols() {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    bound: phi.cols(),
                });
            }
        }
        union = union.union(s);
    }
    if union.len() > k {
        return Err(Error::invalid(format!(
            "supports cover {} columns but the certificate has order {k}",
            union.len()
        )));
    }
    Ok(())
}

fn restricted_adjoint(sub: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    sub.columns().map(|c| crate::linalg::dot(c, v)).collect()
}

/// Probes the four standard RIP consequences on `Γ` (and `Γ'` for the
/// near-orthogonality bound) with `trials` random unit vectors.
pub fn check_rip_consequences(
    phi: &DenseMatrix,
    gamma: &SupportSet,
    gamma_prime: &SupportSet,
    cert: &RipCertificate,
    trials: usize,
    seed: u64,
) -> Result<RipConsequencesReport> {
    let delta = exhaustive_delta(cert)?;
    check_sets(phi, &[gamma, gamma_prime], cert.k)?;
    if gamma.is_empty() {
        return Err(Error::invalid("Γ must be nonempty"));
    }
    if !gamma.is_disjoint(gamma_prime) {
        return Err(Error::invalid("Γ and Γ' must be disjoint"));
    }
    let sub = phi.restrict_columns(gamma)?;
    let sub_prime = phi.restrict_columns(gamma_prime)?;
    let gram = sub.gram();

    let blank = RipConsequencesReport {
        delta,
        trials,
        operator_norm: InequalityCheck::upper("operator norm of Φ_Γ", (1.0 + delta).sqrt()),
        gram_lower: InequalityCheck::lower("lower bound on Φ*_Γ Φ_Γ", 1.0 - delta),
        gram_upper: InequalityCheck::upper("upper bound on Φ*_Γ Φ_Γ", 1.0 + delta),
        inverse_lower: InequalityCheck::lower("lower bound on (Φ*_Γ Φ_Γ)^-1", 1.0 / (1.0 + delta)),
        inverse_upper: InequalityCheck::upper("upper bound on (Φ*_Γ Φ_Γ)^-1", 1.0 / (1.0 - delta)),
        cross: (!gamma_prime.is_empty())
            .then(|| InequalityCheck::upper("near orthogonality of disjoint supports", delta)),
    };

    let per_trial: Vec<Result<RipConsequencesReport>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, Domain::Probe, t as u64);
            let u = rng::unit_vector(&mut r, gamma.len());
            let v = rng::unit_vector(&mut r, phi.rows());
            let mut rep = blank.clone();
            let pu = sub.matvec(&u)?;
            rep.operator_norm.observe(pu.norm(), &u)?;
            rep.operator_norm
                .observe(norm2(&restricted_adjoint(&sub, &v)), &v)?;
            let gu = gram.matvec(&u)?;
            rep.gram_lower.observe(gu.norm(), &u)?;
            rep.gram_upper.observe(gu.norm(), &u)?;
            let z = solve_square(&gram, &u)?;
            rep.inverse_lower.observe(z.norm(), &u)?;
            rep.inverse_upper.observe(z.norm(), &u)?;
            if let Some(cross) = rep.cross.as_mut() {
                cross.observe(norm2(&restricted_adjoint(&sub_prime, &pu)), &u)?;
            }
            Ok(rep)
        })
        .collect();

    let mut out = blank;
    for rep in per_trial {
        let rep = rep?;
        out.operator_norm.merge(&rep.operator_norm);
        out.gram_lower.merge(&rep.gram_lower);
        out.gram_upper.merge(&rep.gram_upper);
        out.inverse_lower.merge(&rep.inverse_lower);
        out.inverse_upper.merge(&rep.inverse_upper);
        if let (Some(a), Some(b)) = (out.cross.as_mut(), rep.cross.as_ref()) {
            a.merge(b);
        }
    }
    Ok(out)
}

/// Probes `‖Φ*_Γ r‖ ≥ (1−δ)^{1/2}‖r‖` with `r = Φ_Γ w` for random `w`.
pub fn check_adjoint_lower_bound(
    phi: &DenseMatrix,
    gamma: &SupportSet,
    cert: &RipCertificate,
    trials: usize,
    seed: u64,
) -> Result<AdjointLowerReport> {
    let delta = exhaustive_delta(cert)?;
    check_sets(phi, &[gamma], cert.k)?;
    if gamma.is_empty() {
        return Err(Error::invalid("Γ must be nonempty"));
    }
    let sub = phi.restrict_columns(gamma)?;
    let blank = InequalityCheck::lower("adjoint lower bound on span(Φ_Γ)", (1.0 - delta).sqrt());
    let per_trial: Vec<Result<InequalityCheck>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, Domain::Probe, t as u64);
            let w = rng::unit_vector(&mut r, gamma.len());
            let res = sub.matvec(&w)?;
            let mut c = blank;
            let n = res.norm();
            if n > 0.0 {
                c.observe(norm2(&restricted_adjoint(&sub, &res)) / n, &w)?;
            }
            Ok(c)
        })
        .collect();
    let mut out = blank;
    for c in per_trial {
        out.merge(&c?);
    }
    Ok(AdjointLowerReport {
        delta,
        trials,
        adjoint_lower: out,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaSuiteReport {
    pub k: usize,
    pub delta: f64,
    pub probes: usize,
    pub checks: Vec<InequalityCheck>,
}

impl LemmaSuiteReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(InequalityCheck::holds)
    }
}

/// Runs both lemma checks on `probes` random support pairs: `Γ` of random
/// size in `1..=k` and a disjoint `Γ'` filling the rest of the budget `k`.
pub fn verify_rip_lemmas(
    phi: &DenseMatrix,
    cert: &RipCertificate,
    probes: usize,
    seed: u64,
) -> Result<LemmaSuiteReport> {
    let delta = exhaustive_delta(cert)?;
    let k = cert.k;
    let n = phi.cols();
    let mut merged: Option<Vec<InequalityCheck>> = None;
    let mut cross: Option<InequalityCheck> = None;
    for p in 0..probes {
        let mut r = rng::stream(seed, Domain::Support, p as u64);
        let mut order = rng::sample_indices(&mut r, n, k);
        order.shuffle(&mut r);
        let split = (1 + (rng::uniform(&mut r) * k as f64) as usize).min(k);
        let gamma = SupportSet::from_indices(order[..split].iter().copied());
        let gamma_prime = SupportSet::from_indices(order[split..].iter().copied());
        let probe_seed = rng::derive_seed(seed, &[p as u64]);
        let a = check_rip_consequences(phi, &gamma, &gamma_prime, cert, 1, probe_seed)?;
        let b = check_adjoint_lower_bound(phi, &gamma, cert, 1, probe_seed)?;
        let mut row = vec![
            a.operator_norm,
            a.gram_lower,
            a.gram_upper,
            a.inverse_lower,
            a.inverse_upper,
            b.adjoint_lower,
        ];
        match (&mut cross, a.cross) {
            (Some(c), Some(x)) => c.merge(&x),
            (None, Some(x)) => cross = Some(x),
            _ => {}
        }
        match merged.as_mut() {
            None => merged = Some(std::mem::take(&mut row)),
            Some(m) => m.iter_mut().zip(&row).for_each(|(a, b)| a.merge(b)),
        }
    }
    let mut checks = merged.unwrap_or_default();
    checks.extend(cross);
    Ok(LemmaSuiteReport {
        k,
        delta,
        probes,
        checks,
    })
}
