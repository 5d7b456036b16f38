use super::{
    Algorithm, IterationRecord, PursuitConfig, PursuitState, PursuitTrace, StallReason, Status,
};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, least_squares, norm2, DenseMatrix, DenseVector, SupportSet};
use crate::tol::{DEFAULT_RESIDUAL_TOL, RESIDUAL_IDENTITY, TAU_ORTH};

enum Update {
    Applied { step: Option<f64> },
    Stalled(StallReason),
}

fn initial_state(phi: &DenseMatrix, y: &[f64]) -> Result<PursuitState> {
    if y.len() != phi.rows() {
        return Err(Error::DimensionMismatch {
            context: "pursuit measurement vector",
            expected: phi.rows(),
            found: y.len(),
        });
    }
    Ok(PursuitState {
        n: 0,
        residual: DenseVector::new(y.to_vec())?,
        estimate: DenseVector::zeros(phi.cols()),
        support: SupportSet::empty(),
        approximation: DenseVector::zeros(phi.rows()),
    })
}

fn solve_on(phi: &DenseMatrix, y: &[f64], support: &SupportSet) -> Result<Vec<f64>> {
    if support.len() > phi.rows() {
        return Err(Error::RankDeficientSupport {
            support: support.indices().to_vec(),
            pivot: 0.0,
        });
    }
    let sub = phi.restrict_columns(support)?;
    match least_squares(&sub, y) {
        Ok(z) => Ok(z.into_inner()),
        Err(Error::RankDeficient { pivot, .. }) => Err(Error::RankDeficientSupport {
            support: support.indices().to_vec(),
            pivot,
        }),
        Err(e) => Err(e),
    }
}

/// Keeps the `k` largest-magnitude coefficients (ties go to the lower index).
fn prune(support: &SupportSet, z: &[f64], k: usize) -> SupportSet {
    if support.len() <= k {
        return support.clone();
    }
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[b].abs().total_cmp(&z[a].abs()).then(a.cmp(&b)));
    SupportSet::from_indices(order[..k].iter().map(|&p| support.indices()[p]))
}

fn set_on_support(
    state: &mut PursuitState,
    phi: &DenseMatrix,
    y: &[f64],
    support: SupportSet,
    z: &[f64],
) {
    state.estimate.iter_mut().for_each(|v| *v = 0.0);
    for (j, &v) in support.iter().zip(z) {
        state.estimate[j] = v;
    }
    state.approximation = phi.combine_columns(&support, z);
    state.residual = DenseVector::from_vec_unchecked(crate::linalg::sub(y, &state.approximation));
    state.support = support;
}

fn update(
    algorithm: Algorithm,
    prune_to: Option<usize>,
    phi: &DenseMatrix,
    y: &[f64],
    state: &mut PursuitState,
    selected: &SupportSet,
    g: &[f64],
) -> Result<Update> {
    match algorithm {
        Algorithm::Mp => {
            // x_i += g_i and r -= g_i φ_i for every selected i, as written.
            for i in selected.iter() {
                state.estimate[i] += g[i];
                axpy(-g[i], phi.col(i), &mut state.residual);
                axpy(g[i], phi.col(i), &mut state.approximation);
            }
            state.support = state.support.union(selected);
            Ok(Update::Applied { step: None })
        }
        Algorithm::Omp => {
            let grown = state.support.union(selected);
            if prune_to.is_none() && grown == state.support {
                return Ok(Update::Stalled(StallReason::NoNewAtoms));
            }
            let z = solve_on(phi, y, &grown)?;
            let (support, z) = match prune_to {
                Some(k) if grown.len() > k => {
                    let kept = prune(&grown, &z, k);
                    if kept == state.support {
                        return Ok(Update::Stalled(StallReason::NoNewAtoms));
                    }
                    let z = solve_on(phi, y, &kept)?;
                    (kept, z)
                }
                _ => {
                    if grown == state.support {
                        return Ok(Update::Stalled(StallReason::NoNewAtoms));
                    }
                    (grown, z)
                }
            };
            set_on_support(state, phi, y, support, &z);
            let y_norm = norm2(y);
            for j in state.support.iter() {
                let c = phi.col(j);
                let ip = dot(c, &state.residual).abs();
                if ip > TAU_ORTH * y_norm * norm2(c) {
                    return Err(Error::Invariant(format!(
                        "OMP residual not orthogonal to column {j}: |<phi_j, r>| = {ip:e}"
                    )));
                }
            }
            Ok(Update::Applied { step: None })
        }
        Algorithm::Gp => {
            let support = state.support.union(selected);
            // d = Φ*_Γ r is the proxy restricted to Γ; c = Φ_Γ d.
            let d: Vec<f64> = support.iter().map(|j| g[j]).collect();
            let c = phi.combine_columns(&support, &d);
            let cc = c.dot(&c);
            if cc == 0.0 {
                return Ok(Update::Stalled(StallReason::DegenerateDirection));
            }
            let a = dot(&state.residual, &c) / cc;
            for (j, dj) in support.iter().zip(&d) {
                state.estimate[j] += a * dj;
            }
            axpy(-a, &c, &mut state.residual);
            axpy(a, &c, &mut state.approximation);
            state.support = support;
            Ok(Update::Applied { step: Some(a) })
        }
    }
}

fn check_residual_identity(
    phi: &DenseMatrix,
    y: &[f64],
    state: &PursuitState,
    y_norm: f64,
) -> Result<()> {
    let coeffs: Vec<f64> = state.support.iter().map(|j| state.estimate[j]).collect();
    let fit = phi.combine_columns(&state.support, &coeffs);
    let gap = y
        .iter()
        .zip(fit.iter())
        .zip(state.residual.iter())
        .map(|((yi, fi), ri)| (yi - fi - ri).powi(2))
        .sum::<f64>()
        .sqrt();
    // Relative to ‖y‖, or to the iterates themselves when a literal MP
    // update overshoots and they grow past it.
    let scale = y_norm
        .max(state.approximation.norm())
        .max(state.residual.norm());
    if gap > RESIDUAL_IDENTITY * scale {
        return Err(Error::Invariant(format!(
            "iteration {}: ‖(y − Φx) − r‖ = {gap:e} exceeds {:e}",
            state.n,
            RESIDUAL_IDENTITY * scale
        )));
    }
    Ok(())
}

/// Runs the pursuit selected by `cfg.algorithm`.
///
/// Stops when `‖r^n‖ ≤ residual_tol·‖y‖` (Converged), after
/// `max_iterations` (MaxIterations), or when the rule or update cannot make
/// progress (Stalled). Convergence wins when both happen at the same step.
pub fn run(
    phi: &DenseMatrix,
    y: &[f64],
    cfg: &PursuitConfig,
) -> Result<(PursuitState, PursuitTrace)> {
    cfg.validate()?;
    let mut state = initial_state(phi, y)?;
    let y_norm = norm2(y);
    let target = cfg.residual_tol * y_norm;
    let prune_to = if cfg.prune_to_k { cfg.sparsity_k } else { None };
    let mut trace = PursuitTrace {
        initial_residual_norm: y_norm,
        records: Vec::new(),
        status: Status::Converged,
    };
    if y_norm == 0.0 || y_norm <= target {
        return Ok((state, trace));
    }

    let mut r_norm = y_norm;
    loop {
        let g = phi.adjoint_matvec(&state.residual)?;
        let selected = match cfg.rule.select(&g, r_norm) {
            Ok(o) if o.indices.is_empty() => {
                trace.status = Status::Stalled(StallReason::RelaxedEmpty);
                break;
            }
            Ok(o) => o.indices,
            Err(Error::ProxyVanished) => {
                trace.status = Status::Stalled(StallReason::ProxyVanished);
                break;
            }
            Err(e) => return Err(e),
        };
        let step = match update(cfg.algorithm, prune_to, phi, y, &mut state, &selected, &g)? {
            Update::Applied { step } => step,
            Update::Stalled(reason) => {
                trace.status = Status::Stalled(reason);
                break;
            }
        };
        state.n += 1;
        check_residual_identity(phi, y, &state, y_norm)?;
        let new_norm = state.residual.norm();
        trace.records.push(IterationRecord {
            n: state.n,
            residual_norm: new_norm,
            selected,
            support: state.support.clone(),
            step,
            contraction_ratio: new_norm / r_norm,
        });
        r_norm = new_norm;
        if r_norm <= target {
            trace.status = Status::Converged;
            break;
        }
        if state.n >= cfg.max_iterations {
            trace.status = Status::MaxIterations;
            break;
        }
    }
    Ok((state, trace))
}

fn run_as(
    expected: Algorithm,
    phi: &DenseMatrix,
    y: &[f64],
    cfg: &PursuitConfig,
) -> Result<(PursuitState, PursuitTrace)> {
    if cfg.algorithm != expected {
        return Err(Error::invalid(format!(
            "config selects {}, called run_{}",
            cfg.algorithm.name(),
            expected.name()
        )));
    }
    run(phi, y, cfg)
}

pub fn run_mp(
    phi: &DenseMatrix,
    y: &[f64],
    cfg: &PursuitConfig,
) -> Result<(PursuitState, PursuitTrace)> {
    run_as(Algorithm::Mp, phi, y, cfg)
}

pub fn run_omp(
    phi: &DenseMatrix,
    y: &[f64],
    cfg: &PursuitConfig,
) -> Result<(PursuitState, PursuitTrace)> {
    run_as(Algorithm::Omp, phi, y, cfg)
}

pub fn run_gp(
    phi: &DenseMatrix,
    y: &[f64],
    cfg: &PursuitConfig,
) -> Result<(PursuitState, PursuitTrace)> {
    run_as(Algorithm::Gp, phi, y, cfg)
}

/// Feeds a fixed sequence of selected sets through one updater.
///
/// Used to compare how MP, OMP and GP reduce the residual when they are
/// forced onto the same supports.
pub fn replay(
    phi: &DenseMatrix,
    y: &[f64],
    algorithm: Algorithm,
    selected_sets: &[SupportSet],
) -> Result<(PursuitState, PursuitTrace)> {
    let mut state = initial_state(phi, y)?;
    let y_norm = norm2(y);
    let mut trace = PursuitTrace {
        initial_residual_norm: y_norm,
        records: Vec::new(),
        status: Status::MaxIterations,
    };
    let mut r_norm = y_norm;
    for selected in selected_sets {
        if let Some(last) = selected.max_index() {
            if last >= phi.cols() {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    bound: phi.cols(),
                });
            }
        }
        let g = phi.adjoint_matvec(&state.residual)?;
        match update(algorithm, None, phi, y, &mut state, selected, &g)? {
            Update::Applied { step } => {
                state.n += 1;
                check_residual_identity(phi, y, &state, y_norm)?;
                let new_norm = state.residual.norm();
                trace.records.push(IterationRecord {
                    n: state.n,
                    residual_norm: new_norm,
                    selected: selected.clone(),
                    support: state.support.clone(),
                    step,
                    contraction_ratio: if r_norm > 0.0 { new_norm / r_norm } else { 0.0 },
                });
                r_norm = new_norm;
            }
            Update::Stalled(reason) => {
                trace.status = Status::Stalled(reason);
                return Ok((state, trace));
            }
        }
    }
    if r_norm <= DEFAULT_RESIDUAL_TOL * y_norm {
        trace.status = Status::Converged;
    }
    Ok((state, trace))
}
