use serde::Serialize;

use super::convergence_constants;
use crate::error::{Error, Result};
use crate::linalg::SupportSet;
use crate::pursuit::{Algorithm, PursuitTrace};
use crate::tol::LEMMA_SLACK;

/// One traced ratio `‖r^n‖/‖r^{n−1}‖` tested against a closed-form constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionCheck {
    pub iteration: usize,
    pub constant: &'static str,
    pub ratio: f64,
    pub bound: f64,
}

impl ContractionCheck {
    pub fn holds(&self) -> bool {
        self.ratio <= self.bound * (1.0 + LEMMA_SLACK)
    }
}

/// Contraction checks for every iteration of a GP or MP trace at which the
/// support was still inside `target`.
///
/// The trace must come from `y = Φx` with `supp(x) = target`, so that every
/// residual lies in `span(Φ_target)`. `delta_k` is the certified constant
/// of order `k = |target|`. GP ratios are checked against `C_k`, and also
/// against `D_k` when the support equalled `target` before and after the
/// step; MP ratios are checked against `C'_k`.
pub fn contraction_checks(
    trace: &PursuitTrace,
    algorithm: Algorithm,
    target: &SupportSet,
    delta_k: f64,
) -> Result<Vec<ContractionCheck>> {
    if algorithm == Algorithm::Omp {
        return Err(Error::invalid(
            "contraction constants are stated for GP and MP only",
        ));
    }
    if target.is_empty() {
        return Err(Error::invalid("target support must be nonempty"));
    }
    let c = convergence_constants(delta_k, target.len())?;
    let mut out = Vec::new();
    let mut previous = SupportSet::empty();
    for rec in &trace.records {
        if !rec.support.is_subset_of(target) {
            break;
        }
        let (constant, bound) = match algorithm {
            Algorithm::Gp => ("C_k", c.c_k),
            _ => ("C'_k", c.c_prime_k),
        };
        out.push(ContractionCheck {
            iteration: rec.n,
            constant,
            ratio: rec.contraction_ratio,
            bound,
        });
        if algorithm == Algorithm::Gp && previous == *target && rec.support == *target {
            out.push(ContractionCheck {
                iteration: rec.n,
                constant: "D_k",
                ratio: rec.contraction_ratio,
                bound: c.d_k,
            });
        }
        previous = rec.support.clone();
    }
    Ok(out)
}
