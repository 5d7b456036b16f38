//! Closed-form constants and conditions from the convergence and support
//! identification theory, plus numerical checks of the RIP lemmas.

mod contraction;
mod lemmas;

pub use contraction::{contraction_checks, ContractionCheck};
pub use lemmas::{
    check_adjoint_lower_bound, check_rip_consequences, verify_rip_lemmas, AdjointLowerReport,
    InequalityCheck, LemmaSuiteReport, RipConsequencesReport,
};

use serde::Serialize;

use crate::error::{Error, Result};

fn check_delta(delta: f64, name: &str) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(format!(
            "{name} must lie in [0, 1), got {delta}"
        )));
    }
    Ok(())
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    Ok(())
}

fn check_pair(delta_k: f64, delta_k1: f64, k: usize) -> Result<()> {
    check_delta(delta_k, "delta_k")?;
    check_delta(delta_k1, "delta_k1")?;
    check_k(k)?;
    if delta_k > delta_k1 {
        return Err(Error::invalid(format!(
            "need delta_k <= delta_k1 (got {delta_k} > {delta_k1})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceConstants {
    /// GP-family residual contraction.
    pub c_k: f64,
    /// MP-family residual contraction.
    pub c_prime_k: f64,
    /// GP-family contraction once the support is identified.
    pub d_k: f64,
}

/// `C_k = (1 − (1−δ)/(k(1+δ)))^{1/2}`, `C'_k = (1 − (1−δ)²/k)^{1/2}`,
/// `D_k = (2δ/(1+δ))^{1/2}`.
pub fn convergence_constants(delta_k: f64, k: usize) -> Result<ConvergenceConstants> {
    check_delta(delta_k, "delta_k")?;
    check_k(k)?;
    let (d, kf) = (delta_k, k as f64);
    Ok(ConvergenceConstants {
        c_k: (1.0 - (1.0 - d) / (kf * (1.0 + d))).sqrt(),
        c_prime_k: (1.0 - (1.0 - d) * (1.0 - d) / kf).sqrt(),
        d_k: (2.0 * d / (1.0 + d)).sqrt(),
    })
}

/// Smallest weak-rule parameter for which every selection stays in the
/// support: `√k·δ_{k+1}/(1−δ_k)`. Any `α` in `(value, 1]` works, so the
/// rule is usable only when the value is below 1.
pub fn support_id_condition_weak(delta_k: f64, delta_k1: f64, k: usize) -> Result<f64> {
    check_pair(delta_k, delta_k1, k)?;
    Ok((k as f64).sqrt() * delta_k1 / (1.0 - delta_k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxedCondition {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub feasible: bool,
}

/// `α̃` must exceed `δ_{k+1}/(1−δ_k)^{1/2}` to stay in the support and not
/// exceed `(1−δ_k)^{1/2}/√k` to keep the selection nonempty. Feasible when
/// `√k ≤ (1−δ_k)/δ_{k+1}` (boundary included).
pub fn support_id_condition_relaxed(
    delta_k: f64,
    delta_k1: f64,
    k: usize,
) -> Result<RelaxedCondition> {
    check_pair(delta_k, delta_k1, k)?;
    let root = (1.0 - delta_k).sqrt();
    let sk = (k as f64).sqrt();
    Ok(RelaxedCondition {
        alpha_min: delta_k1 / root,
        alpha_max: root / sk,
        feasible: delta_k1 == 0.0 || sk <= (1.0 - delta_k) / delta_k1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimationFactors {
    /// `((1+δ)/(1−δ))^{1/2}`.
    pub amplification: f64,
    pub gp: f64,
    pub mp: f64,
    pub gp_identified: f64,
    /// `δ < 1/(2k+1)`, needed for `gp < 1`.
    pub gp_threshold: bool,
    /// `δ < 1/(2k+2)`, sufficient for `mp < 1`.
    pub mp_threshold: bool,
    /// `δ < 1/3`, needed for `gp_identified < 1`.
    pub identified_threshold: bool,
}

/// Per-iteration factors bounding `‖x − x^n‖ / ‖x − x^{n−1}‖`.
pub fn estimation_error_factors(delta_k: f64, k: usize) -> Result<EstimationFactors> {
    let c = convergence_constants(delta_k, k)?;
    let amp = ((1.0 + delta_k) / (1.0 - delta_k)).sqrt();
    let kf = k as f64;
    Ok(EstimationFactors {
        amplification: amp,
        gp: amp * c.c_k,
        mp: amp * c.c_prime_k,
        gp_identified: amp * c.d_k,
        gp_threshold: delta_k < 1.0 / (2.0 * kf + 1.0),
        mp_threshold: delta_k < 1.0 / (2.0 * kf + 2.0),
        identified_threshold: delta_k < 1.0 / 3.0,
    })
}

/// Which corollary hypotheses can be met for the given constants, in the
/// sense that some admissible parameter exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryFlags {
    /// GP (α = 1): `√k δ_{k+1}/(1−δ_k) < 1`.
    pub gp: bool,
    /// SWGP: some `α ∈ (0, 1]` exceeds the weak threshold.
    pub swgp: bool,
    /// RWGP: `δ_{k+1}/(1−δ_k) < 1/√k` and the open interval for `α̃` is
    /// nonempty.
    pub rwgp: bool,
    /// SWMP, same condition as SWGP.
    pub swmp: bool,
    /// RWMP: as RWGP but with upper end `(1−δ_k)²/√k`, as printed.
    pub rwmp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub delta_k: f64,
    pub delta_k1: f64,
    pub k: usize,
    pub alpha_min_weak: f64,
    pub alpha_min_relaxed: f64,
    pub alpha_max_relaxed: f64,
    pub relaxed_feasible: bool,
    #[serde(rename = "C_k")]
    pub c_k: f64,
    #[serde(rename = "C_prime_k")]
    pub c_prime_k: f64,
    #[serde(rename = "D_k")]
    pub d_k: f64,
    pub corollaries: CorollaryFlags,
    pub estimation: EstimationFactors,
}

impl BoundsReport {
    pub fn new(delta_k: f64, delta_k1: f64, k: usize) -> Result<Self> {
        let alpha_min_weak = support_id_condition_weak(delta_k, delta_k1, k)?;
        let relaxed = support_id_condition_relaxed(delta_k, delta_k1, k)?;
        let c = convergence_constants(delta_k, k)?;
        let sk = (k as f64).sqrt();
        let ratio_ok = delta_k1 / (1.0 - delta_k) < 1.0 / sk;
        let weak_ok = alpha_min_weak < 1.0;
        let rwmp_upper = (1.0 - delta_k).powi(2) / sk;
        Ok(BoundsReport {
            delta_k,
            delta_k1,
            k,
            alpha_min_weak,
            alpha_min_relaxed: relaxed.alpha_min,
            alpha_max_relaxed: relaxed.alpha_max,
            relaxed_feasible: relaxed.feasible,
            c_k: c.c_k,
            c_prime_k: c.c_prime_k,
            d_k: c.d_k,
            corollaries: CorollaryFlags {
                gp: weak_ok,
                swgp: weak_ok,
                rwgp: ratio_ok && relaxed.alpha_min < relaxed.alpha_max,
                swmp: weak_ok,
                rwmp: ratio_ok && relaxed.alpha_min < rwmp_upper,
            },
            estimation: estimation_error_factors(delta_k, k)?,
        })
    }
}
