use super::{DenseMatrix, DenseVector};
use crate::error::{Error, Result};
use crate::tol::TAU_RANK;

/// Minimizer of `‖A z − y‖₂` by Householder QR.
///
/// Fails with [`Error::RankDeficient`] when some `|R_jj|` drops below
/// `TAU_RANK` times the largest column norm of `A` (this includes every
/// system with more columns than rows). An `m × 0` system returns the empty
/// vector.
pub fn least_squares(a: &DenseMatrix, y: &[f64]) -> Result<DenseVector> {
    let (m, n) = (a.rows(), a.cols());
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            context: "least_squares",
            expected: m,
            found: y.len(),
        });
    }
    if n == 0 {
        return Ok(DenseVector::zeros(0));
    }
    if n > m {
        return Err(Error::RankDeficient {
            column: m,
            pivot: 0.0,
        });
    }

    let scale = a.column_norms().into_iter().fold(0.0, f64::max);
    let tiny = TAU_RANK * scale;
    let mut qr = a.clone();
    let mut b = y.to_vec();
    let mut diag = vec![0.0; n];

    for j in 0..n {
        let col = &qr.col(j)[j..];
        let norm = super::norm2(col);
        if norm <= tiny || norm == 0.0 {
            return Err(Error::RankDeficient {
                column: j,
                pivot: norm,
            });
        }
        let alpha = if col[0] > 0.0 { -norm } else { norm };
        // v = x - alpha e1, stored in place of the column; v^T v = 2 norm (norm + |x0|).
        let mut v = col.to_vec();
        v[0] -= alpha;
        let vtv = super::dot(&v, &v);
        diag[j] = alpha;

        for c in (j + 1)..n {
            let target = &mut qr.col_mut(c)[j..];
            let f = 2.0 * super::dot(&v, target) / vtv;
            super::axpy(-f, &v, target);
        }
        let f = 2.0 * super::dot(&v, &b[j..]) / vtv;
        super::axpy(-f, &v, &mut b[j..]);
        qr.col_mut(j)[j..].copy_from_slice(&v);
    }

    // Back substitution on R z = (Q^T y)[..n]; R's strict upper part lives in qr.
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for (c, zc) in z.iter().enumerate().skip(i + 1) {
            s -= qr.get(i, c) * zc;
        }
        z[i] = s / diag[i];
    }
    Ok(DenseVector::from_vec_unchecked(z))
}

/// Solves the square system `A z = b` by Gaussian elimination with partial
/// pivoting.
pub fn solve_square(a: &DenseMatrix, b: &[f64]) -> Result<DenseVector> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "solve_square (columns)",
            expected: n,
            found: a.cols(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            context: "solve_square",
            expected: n,
            found: b.len(),
        });
    }
    let scale = (0..n)
        .flat_map(|j| a.col(j).iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut w: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j)).collect())
        .collect();
    let mut rhs = b.to_vec();
    for p in 0..n {
        let (piv, &max) = w
            .iter()
            .enumerate()
            .skip(p)
            .map(|(i, row)| (i, &row[p]))
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("non-empty pivot range");
        if max.abs() <= TAU_RANK * scale || max == 0.0 {
            return Err(Error::RankDeficient {
                column: p,
                pivot: max.abs(),
            });
        }
        w.swap(p, piv);
        rhs.swap(p, piv);
        for i in (p + 1)..n {
            let f = w[i][p] / w[p][p];
            if f != 0.0 {
                for c in p..n {
                    w[i][c] -= f * w[p][c];
                }
                rhs[i] -= f * rhs[p];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|c| w[i][c] * z[c]).sum();
        z[i] = (rhs[i] - s) / w[i][i];
    }
    Ok(DenseVector::from_vec_unchecked(z))
}
