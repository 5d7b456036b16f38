//! Dense linear algebra kernel.
//!
//! Matrices are stored column-major: every hot path in the pursuit
//! algorithms reads whole columns `φ_j`, so `DenseMatrix::col` is a plain
//! slice into the backing buffer.

mod eig;
pub mod io;
mod qr;

pub use eig::{extreme_singular_values, symmetric_eigenvalues};
pub use qr::{least_squares, solve_square};

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// A finite real vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_finite(&entries)?;
        Ok(DenseVector(entries))
    }

    pub fn zeros(len: usize) -> Self {
        DenseVector(vec![0.0; len])
    }

    /// Wraps a buffer produced by arithmetic on finite inputs.
    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        DenseVector(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        dot(&self.0, &other.0)
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        DenseVector::new(v)
    }
}

/// Strictly increasing set of column indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    /// Builds a support from arbitrary indices, sorting and deduplicating.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SupportSet(v)
    }

    /// Like `from_indices` but rejects any index `>= bound`.
    pub fn bounded<I: IntoIterator<Item = usize>>(indices: I, bound: usize) -> Result<Self> {
        let s = Self::from_indices(indices);
        if let Some(&last) = s.0.last() {
            if last >= bound {
                return Err(Error::IndexOutOfRange { index: last, bound });
            }
        }
        Ok(s)
    }

    pub fn full(n: usize) -> Self {
        SupportSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x < y {
                        out.push(x);
                        a.next();
                    } else if y < x {
                        out.push(y);
                        b.next();
                    } else {
                        out.push(x);
                        a.next();
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        SupportSet(out)
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn is_disjoint(&self, other: &SupportSet) -> bool {
        self.0.iter().all(|&i| !other.contains(i))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

/// Dense real matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// `data` holds the entries column by column.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix buffer",
                expected: rows * cols,
                found: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut data = vec![0.0; m * n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "matrix row",
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                data[j * m + i] = v;
            }
        }
        Self::from_col_major(m, n, data)
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            if c.len() != rows {
                return Err(Error::DimensionMismatch {
                    context: "matrix column",
                    expected: rows,
                    found: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Self::from_col_major(rows, columns.len(), data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a.data[i * n + i] = 1.0;
        }
        a
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub(crate) fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.cols).map(move |j| self.col(j))
    }

    /// Backing buffer in column-major order.
    pub fn as_col_major(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `A v`.
    pub fn matvec(&self, v: &[f64]) -> Result<DenseVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matvec",
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = vec![0.0; self.rows];
        for (col, &vj) in self.columns().zip(v) {
            if vj != 0.0 {
                axpy(vj, col, &mut out);
            }
        }
        Ok(DenseVector(out))
    }

    /// `A* u`, i.e. `⟨φ_j, u⟩` for every column.
    pub fn adjoint_matvec(&self, u: &[f64]) -> Result<DenseVector> {
        if u.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "adjoint_matvec",
                expected: self.rows,
                found: u.len(),
            });
        }
        Ok(DenseVector(self.columns().map(|c| dot(c, u)).collect()))
    }

    /// Columns listed in `support`, in support order. An empty support
    /// yields an `m × 0` matrix.
    pub fn restrict_columns(&self, support: &SupportSet) -> Result<DenseMatrix> {
        if let Some(last) = support.max_index() {
            if last >= self.cols {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    bound: self.cols,
                });
            }
        }
        let mut data = Vec::with_capacity(self.rows * support.len());
        for j in support.iter() {
            data.extend_from_slice(self.col(j));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: support.len(),
            data,
        })
    }

    /// `Σ_{j∈Γ} coeffs_j φ_j` with `coeffs` aligned to `support`.
    pub fn combine_columns(&self, support: &SupportSet, coeffs: &[f64]) -> DenseVector {
        debug_assert_eq!(support.len(), coeffs.len());
        let mut out = vec![0.0; self.rows];
        for (j, &c) in support.iter().zip(coeffs) {
            axpy(c, self.col(j), &mut out);
        }
        DenseVector(out)
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.columns().map(norm2).collect()
    }

    /// `A*A`, symmetric `cols × cols`.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = dot(self.col(i), self.col(j));
                g.set(i, j, v);
                g.set(j, i, v);
            }
        }
        g
    }

    /// Principal submatrix on `support` (rows and columns).
    pub fn principal_submatrix(&self, support: &[usize]) -> DenseMatrix {
        let k = support.len();
        let mut s = DenseMatrix::zeros(k, k);
        for (b, &j) in support.iter().enumerate() {
            for (a, &i) in support.iter().enumerate() {
                s.set(a, b, self.get(i, j));
            }
        }
        s
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(p) => Err(Error::NonFinite(p)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, Domain};
    use proptest::prelude::*;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut r = rng::stream(seed, Domain::Test, 0);
        let mut data = vec![0.0; rows * cols];
        rng::fill_standard_normal(&mut r, &mut data);
        DenseMatrix::from_col_major(rows, cols, data).unwrap()
    }

    fn random_vec(len: usize, seed: u64) -> Vec<f64> {
        let mut r = rng::stream(seed, Domain::Test, 1);
        let mut v = vec![0.0; len];
        rng::fill_standard_normal(&mut r, &mut v);
        v
    }

    #[test]
    fn matvec_identity_and_direct() {
        let i3 = DenseMatrix::identity(3);
        assert_eq!(
            i3.matvec(&[1.0, 2.0, 3.0]).unwrap().as_slice(),
            &[1.0, 2.0, 3.0]
        );
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(a.matvec(&[3.0, 4.0]).unwrap().as_slice(), &[7.0]);
    }

    #[test]
    fn matvec_matches_naive_double_loop() {
        let a = random_matrix(5, 8, 11);
        let v = random_vec(8, 12);
        let got = a.matvec(&v).unwrap();
        for i in 0..5 {
            let mut s = 0.0;
            for j in 0..8 {
                s += a.get(i, j) * v[j];
            }
            assert!((got[i] - s).abs() <= 1e-12 * (1.0 + s.abs()));
        }
    }

    #[test]
    fn matvec_rejects_bad_length() {
        let a = DenseMatrix::identity(3);
        assert!(matches!(
            a.matvec(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(a.adjoint_matvec(&[1.0]).is_err());
    }

    #[test]
    fn adjoint_identity_orthonormal_and_transpose_oracle() {
        let i3 = DenseMatrix::identity(3);
        assert_eq!(
            i3.adjoint_matvec(&[1.0, 0.0, 2.0]).unwrap().as_slice(),
            &[1.0, 0.0, 2.0]
        );

        // Orthonormal columns: a rotation in the first two coordinates.
        let (c, s) = (0.6, 0.8);
        let q = DenseMatrix::from_rows(&[vec![c, -s], vec![s, c], vec![0.0, 0.0]]).unwrap();
        let e = q.adjoint_matvec(q.col(0)).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-15 && e[1].abs() < 1e-15);

        let a = random_matrix(6, 4, 3);
        let u = random_vec(6, 4);
        let t = a.transpose();
        let expected = t.matvec(&u).unwrap();
        let got = a.adjoint_matvec(&u).unwrap();
        for (g, e) in got.iter().zip(expected.iter()) {
            assert!((g - e).abs() <= 1e-12 * (1.0 + e.abs()));
        }
    }

    #[test]
    fn restrict_columns_cases() {
        let i3 = DenseMatrix::identity(3);
        let r = i3.restrict_columns(&SupportSet::from_indices([1])).unwrap();
        assert_eq!((r.rows(), r.cols()), (3, 1));
        assert_eq!(r.col(0), &[0.0, 1.0, 0.0]);

        assert_eq!(i3.restrict_columns(&SupportSet::full(3)).unwrap(), i3);

        let a = random_matrix(4, 6, 9);
        let g = SupportSet::from_indices([0, 3, 5]);
        let r = a.restrict_columns(&g).unwrap();
        for (pos, j) in [0usize, 3, 5].into_iter().enumerate() {
            for i in 0..4 {
                assert_eq!(r.get(i, pos), a.get(i, j));
            }
        }

        let empty = a.restrict_columns(&SupportSet::empty()).unwrap();
        assert_eq!((empty.rows(), empty.cols()), (4, 0));

        assert!(matches!(
            i3.restrict_columns(&SupportSet::from_indices([3])),
            Err(Error::IndexOutOfRange { index: 3, bound: 3 })
        ));
    }

    #[test]
    fn support_set_ops() {
        let a = SupportSet::from_indices([5, 1, 3, 1]);
        assert_eq!(a.indices(), &[1, 3, 5]);
        let b = SupportSet::from_indices([2, 3]);
        assert_eq!(a.union(&b).indices(), &[1, 2, 3, 5]);
        assert!(!a.is_disjoint(&b));
        assert!(SupportSet::from_indices([3]).is_subset_of(&a));
        assert!(SupportSet::bounded([0, 4], 4).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(DenseVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_col_major(1, 2, vec![0.0, f64::INFINITY]).is_err());
        assert!(DenseMatrix::from_col_major(2, 2, vec![0.0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn adjoint_identity_holds(seed in any::<u64>(), m in 1usize..12, n in 1usize..12) {
            let a = random_matrix(m, n, seed);
            let v = random_vec(n, seed ^ 1);
            let u = random_vec(m, seed ^ 2);
            let lhs = dot(&a.matvec(&v).unwrap(), &u);
            let rhs = dot(&v, &a.adjoint_matvec(&u).unwrap());
            let scale = norm2(&u) * norm2(&v) * a.column_norms().iter().cloned().fold(0.0, f64::max).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300));
        }
    }
}
