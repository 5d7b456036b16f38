use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::tol::EIG_MAX_SWEEPS;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Only the upper triangle is read. Intended for the small Gram matrices
/// that show up in RIP certification (a few dozen rows at most).
pub fn symmetric_eigenvalues(s: &DenseMatrix) -> Result<Vec<f64>> {
    let n = s.rows();
    if s.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "symmetric_eigenvalues",
            expected: n,
            found: s.cols(),
        });
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![s.get(0, 0)]),
        _ => {}
    }
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i <= j { s.get(i, j) } else { s.get(j, i) })
                .collect()
        })
        .collect();
    let frob: f64 = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let target = f64::EPSILON * frob;

    for _ in 0..EIG_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - sn * kq;
                    row[q] = sn * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - sn * qk;
                    a[q][k] = sn * pk + c * qk;
                }
            }
        }
    }
    Err(Error::NoConvergence {
        sweeps: EIG_MAX_SWEEPS,
    })
}

/// `(σ_min, σ_max)` of `A`, from the extreme eigenvalues of `A*A`.
pub fn extreme_singular_values(a: &DenseMatrix) -> Result<(f64, f64)> {
    if a.cols() == 0 || a.rows() == 0 {
        return Err(Error::invalid("extreme_singular_values of an empty matrix"));
    }
    let ev = symmetric_eigenvalues(&a.gram())?;
    let lo = ev[0].max(0.0);
    let hi = ev[ev.len() - 1].max(0.0);
    Ok((lo.sqrt(), hi.sqrt()))
}
