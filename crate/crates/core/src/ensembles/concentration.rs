use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EnsembleKind;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::rng::{self, Domain};
use crate::selection::SelectionRule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub kind: EnsembleKind,
    pub epsilon: f64,
    pub m: usize,
    pub trials: usize,
    pub exceedances: usize,
    pub empirical_rate: f64,
    pub theoretical_bound: f64,
}

impl ConcentrationReport {
    /// Three binomial standard deviations above the bound.
    pub fn slack(&self) -> f64 {
        3.0 * (self.theoretical_bound / self.trials as f64).sqrt()
    }

    pub fn within_bound(&self) -> bool {
        self.empirical_rate <= self.theoretical_bound + self.slack()
    }
}

pub fn theoretical_tail(kind: EnsembleKind, m: usize, epsilon: f64) -> f64 {
    let e = (-epsilon * epsilon * m as f64 / 2.0).exp();
    match kind {
        EnsembleKind::Gaussian => e,
        EnsembleKind::Bernoulli => 2.0 * e,
    }
}

/// Monte Carlo estimate of `P(|⟨u, z⟩| ≥ ε)` where `z` is one column of the
/// ensemble and `u` an independent uniform unit vector.
///
/// Trial `t` draws both vectors from its own substream, so the report does
/// not depend on thread scheduling.
pub fn concentration_check(
    kind: EnsembleKind,
    m: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    if trials < 1000 {
        return Err(Error::invalid(format!(
            "need at least 1000 trials, got {trials}"
        )));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let exceedances = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, Domain::Concentration, t as u64);
            let u = rng::unit_vector(&mut r, m);
            let mut z = vec![0.0; m];
            match kind {
                EnsembleKind::Gaussian => {
                    rng::fill_standard_normal(&mut r, &mut z);
                    z.iter_mut().for_each(|v| *v *= scale);
                }
                EnsembleKind::Bernoulli => {
                    z.iter_mut().for_each(|v| *v = scale * rng::sign(&mut r))
                }
            }
            usize::from(dot(&u, &z).abs() >= epsilon)
        })
        .sum::<usize>();
    Ok(ConcentrationReport {
        kind,
        epsilon,
        m,
        trials,
        exceedances,
        empirical_rate: exceedances as f64 / trials as f64,
        theoretical_bound: theoretical_tail(kind, m, epsilon),
    })
}

/// Constants of the tail properties of a random ensemble:
/// `P(|⟨φ, u⟩| ≥ ε) ≤ q1·exp(−c1 ε² m)` and
/// `P(‖Φ*_Γ r‖ ≥ ‖r‖/2) ≥ 1 − q2·D^k·exp(−c2 m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementConstants {
    pub q1: f64,
    pub q2: f64,
    pub c1: f64,
    pub c2: f64,
    pub d: f64,
}

impl MeasurementConstants {
    pub fn q3(&self) -> f64 {
        self.q1 + self.q2
    }

    fn validate(&self) -> Result<()> {
        let MeasurementConstants { q1, q2, c1, c2, d } = *self;
        if ![q1, q2, c1, c2, d].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("measurement constants must be finite"));
        }
        if q1 < 1.0 || q2 < 1.0 {
            return Err(Error::invalid(format!("need q1, q2 >= 1 (got {q1}, {q2})")));
        }
        if c1 <= 0.0 || c2 <= 0.0 {
            return Err(Error::invalid(format!("need c1, c2 > 0 (got {c1}, {c2})")));
        }
        if d <= 1.0 {
            return Err(Error::invalid(format!("need D > 1 (got {d})")));
        }
        Ok(())
    }
}

/// `c0(ε) = ε²/4 − ε³/6`, the Gaussian concentration exponent.
pub fn gaussian_c0(epsilon: f64) -> f64 {
    epsilon * epsilon / 4.0 - epsilon.powi(3) / 6.0
}

/// Number of measurements after which the selection rule picks only support
/// indices during the first `l` iterations with high probability.
///
/// Without `beta` this is `max{A·ln(q3·l·(N−k)), (2k/c2)·ln D}` with
/// `A = 1/(c1 α̃²)` for the relaxed rule and `A = 4k/(c1 α²)` for the weak
/// rule. With a failure probability `β ∈ (0, 1/e)` the first term becomes
/// `2A·ln(q3·l·(N−k)/β)`. The result is rounded up.
pub fn measurement_bound(
    rule: &SelectionRule,
    k: usize,
    n: usize,
    l: usize,
    constants: &MeasurementConstants,
    beta: Option<f64>,
) -> Result<usize> {
    constants.validate()?;
    if k == 0 || k >= n {
        return Err(Error::invalid(format!(
            "need 1 <= k < N (got k={k}, N={n})"
        )));
    }
    if l == 0 || l >= n {
        return Err(Error::invalid(format!(
            "need 1 <= l < N (got l={l}, N={n})"
        )));
    }
    let kf = k as f64;
    let coeff = match *rule {
        SelectionRule::RelaxedWeak { alpha } => 1.0 / (constants.c1 * alpha * alpha),
        SelectionRule::StagewiseWeak { alpha } => 4.0 * kf / (constants.c1 * alpha * alpha),
    };
    let count = constants.q3() * l as f64 * (n - k) as f64;
    let first = match beta {
        None => coeff * count.ln(),
        Some(b) => {
            if !(b > 0.0 && b < (-1.0f64).exp()) {
                return Err(Error::invalid(format!(
                    "beta must lie in (0, 1/e), got {b}"
                )));
            }
            2.0 * coeff * (count / b).ln()
        }
    };
    let second = 2.0 * kf / constants.c2 * constants.d.ln();
    Ok(first.max(second).ceil() as usize)
}
