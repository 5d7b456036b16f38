use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, DenseMatrix};
use crate::rng::{self, Domain};
use crate::tol::RIP_ENUMERATION_LIMIT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RipMethod {
    Exhaustive,
    Sampled { trials: usize },
}

/// Bracket on the restricted isometry constant `δ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RipCertificate {
    pub k: usize,
    pub delta_lower: f64,
    pub delta_upper: f64,
    pub method: RipMethod,
}

impl RipCertificate {
    pub fn is_exhaustive(&self) -> bool {
        self.method == RipMethod::Exhaustive
    }

    /// The exact constant, if this certificate carries one.
    pub fn exact(&self) -> Option<f64> {
        self.is_exhaustive().then_some(self.delta_upper)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// `max(1 − λ_min, λ_max − 1)` for the Gram block on `support`.
fn subset_delta(gram: &DenseMatrix, support: &[usize]) -> Result<f64> {
    if support.len() == 1 {
        let g = gram.get(support[0], support[0]);
        return Ok((1.0 - g).abs());
    }
    let ev = symmetric_eigenvalues(&gram.principal_submatrix(support))?;
    Ok((1.0 - ev[0]).max(ev[ev.len() - 1] - 1.0))
}

/// Advances `c` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in (i + 1)..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn check_order(a: &DenseMatrix, k: usize) -> Result<()> {
    if k == 0 || k > a.cols() {
        return Err(Error::invalid(format!(
            "RIP order k = {k} must lie in 1..={}",
            a.cols()
        )));
    }
    Ok(())
}

/// Largest subset delta among combinations whose smallest index is `first`,
/// stopping early once `stop_at` is reached.
fn scan_from(gram: &DenseMatrix, n: usize, k: usize, first: usize, stop_at: f64) -> Result<f64> {
    let mut tail: Vec<usize> = (first + 1..first + k).collect();
    let mut worst: f64 = 0.0;
    let mut support = vec![0; k];
    support[0] = first;
    loop {
        support[1..].copy_from_slice(&tail);
        worst = worst.max(subset_delta(gram, &support)?);
        if worst >= stop_at {
            return Ok(worst);
        }
        if k == 1 || !next_combination_above(&mut tail, n, first + 1) {
            return Ok(worst);
        }
    }
}

fn next_combination_above(c: &mut [usize], n: usize, offset: usize) -> bool {
    c.iter_mut().for_each(|v| *v -= offset);
    let more = next_combination(c, n - offset);
    c.iter_mut().for_each(|v| *v += offset);
    more
}

fn exhaustive_max(a: &DenseMatrix, k: usize, stop_at: f64) -> Result<f64> {
    check_order(a, k)?;
    let n = a.cols();
    let subsets = binomial(n, k);
    if subsets > RIP_ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            subsets,
            limit: RIP_ENUMERATION_LIMIT,
        });
    }
    let gram = a.gram();
    // Partition by smallest index; max is order independent so the result
    // does not depend on scheduling.
    let partial: Vec<f64> = (0..=n - k)
        .into_par_iter()
        .map(|first| scan_from(&gram, n, k, first, stop_at))
        .collect::<Result<_>>()?;
    Ok(partial.into_iter().fold(0.0, f64::max))
}

/// Exact `δ_k` by enumerating every k-column submatrix.
///
/// Refuses when `C(N, k)` exceeds [`RIP_ENUMERATION_LIMIT`] and reports
/// [`Error::NotRip`] when `δ_k ≥ 1`.
pub fn rip_exhaustive(a: &DenseMatrix, k: usize) -> Result<RipCertificate> {
    let delta = exhaustive_max(a, k, f64::INFINITY)?;
    if delta >= 1.0 {
        return Err(Error::NotRip { k, delta });
    }
    Ok(RipCertificate {
        k,
        delta_lower: delta,
        delta_upper: delta,
        method: RipMethod::Exhaustive,
    })
}

/// Exhaustive `δ_k` if it is strictly below `bound`, `None` otherwise.
///
/// Enumeration stops as soon as some subset reaches `bound`, which makes
/// screening many candidate matrices cheap.
pub fn rip_exhaustive_below(
    a: &DenseMatrix,
    k: usize,
    bound: f64,
) -> Result<Option<RipCertificate>> {
    let delta = exhaustive_max(a, k, bound)?;
    if delta >= bound || delta >= 1.0 {
        return Ok(None);
    }
    Ok(Some(RipCertificate {
        k,
        delta_lower: delta,
        delta_upper: delta,
        method: RipMethod::Exhaustive,
    }))
}

/// Lower bound on `δ_k` from `trials` uniformly drawn k-subsets.
///
/// Subset `t` comes from its own substream, so a run with more trials sees a
/// superset of the subsets of a shorter run with the same seed.
pub fn rip_sampled(a: &DenseMatrix, k: usize, trials: usize, seed: u64) -> Result<RipCertificate> {
    check_order(a, k)?;
    if trials == 0 {
        return Err(Error::invalid("rip_sampled needs at least one trial"));
    }
    let gram = a.gram();
    let n = a.cols();
    let deltas: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, Domain::Support, t as u64);
            subset_delta(&gram, &rng::sample_indices(&mut r, n, k))
        })
        .collect::<Result<_>>()?;
    let delta = deltas.into_iter().fold(0.0, f64::max);
    if delta >= 1.0 {
        return Err(Error::NotRip { k, delta });
    }
    Ok(RipCertificate {
        k,
        delta_lower: delta,
        delta_upper: 1.0,
        method: RipMethod::Sampled { trials },
    })
}
