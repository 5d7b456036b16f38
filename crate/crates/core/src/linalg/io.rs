//! Matrix and vector files.
//!
//! Binary layout (`.plab`), all little-endian:
//!
//! ```text
//! offset 0   4 bytes   magic "PLAB"
//! offset 4   u32       rows
//! offset 8   u32       cols
//! offset 12  f64 × rows·cols, column-major
//! ```
//!
//! The CSV alternative writes one matrix row per line, comma separated,
//! using Rust's shortest round-trip float formatting. Vectors are stored as
//! `len × 1` matrices in either format.

use std::fs;
use std::path::Path;

use super::{DenseMatrix, DenseVector};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PLAB";
const HEADER_LEN: usize = 12;

pub fn to_bytes(a: &DenseMatrix) -> Result<Vec<u8>> {
    let rows = u32::try_from(a.rows()).map_err(|_| Error::Format("too many rows".into()))?;
    let cols = u32::try_from(a.cols()).map_err(|_| Error::Format("too many columns".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * a.as_col_major().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    for v in a.as_col_major() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<DenseMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("missing PLAB magic".into()));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != expected {
        return Err(Error::Format(format!(
            "{rows}x{cols} needs {expected} payload bytes, found {}",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::from_col_major(rows, cols, data)
}

pub fn to_csv(a: &DenseMatrix) -> String {
    let mut s = String::new();
    for i in 0..a.rows() {
        let row: Vec<String> = (0..a.cols()).map(|j| format!("{}", a.get(i, j))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn from_csv(text: &str) -> Result<DenseMatrix> {
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| {
                    Error::Format(format!("line {}: {:?}: {e}", line_no + 1, f.trim()))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format("empty CSV".into()));
    }
    DenseMatrix::from_rows(&rows)
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Writes CSV when the extension is `.csv`, the binary format otherwise.
pub fn write_matrix(path: &Path, a: &DenseMatrix) -> Result<()> {
    if is_csv(path) {
        fs::write(path, to_csv(a))?;
    } else {
        fs::write(path, to_bytes(a)?)?;
    }
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    if is_csv(path) {
        from_csv(&fs::read_to_string(path)?)
    } else {
        from_bytes(&fs::read(path)?)
    }
}

pub fn write_vector(path: &Path, v: &DenseVector) -> Result<()> {
    write_matrix(path, &DenseMatrix::from_col_major(v.len(), 1, v.to_vec())?)
}

/// Reads a vector stored as either a single column or a single row.
pub fn read_vector(path: &Path) -> Result<DenseVector> {
    let a = read_matrix(path)?;
    if a.cols() != 1 && a.rows() != 1 {
        return Err(Error::Format(format!(
            "expected a vector, found a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    DenseVector::new(a.as_col_major().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let b = to_bytes(&a).unwrap();
        assert_eq!(&b[..4], b"PLAB");
        assert_eq!(&b[4..8], &[3, 0, 0, 0]);
        assert_eq!(&b[8..12], &[2, 0, 0, 0]);
        assert_eq!(b.len(), 12 + 6 * 8);
        // First payload entry is (0,0), second is (1,0).
        assert_eq!(&b[12..20], &1.0f64.to_le_bytes());
        assert_eq!(&b[20..28], &3.0f64.to_le_bytes());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(from_bytes(b"PLA").is_err());
        assert!(from_bytes(b"XXXX\x01\0\0\0\x01\0\0\0\0\0\0\0\0\0\0\0").is_err());
        let mut b = to_bytes(&DenseMatrix::identity(2)).unwrap();
        b.push(0);
        assert!(from_bytes(&b).is_err());
        b.truncate(b.len() - 2);
        assert!(from_bytes(&b).is_err());
        assert!(from_csv("1,2\n3\n").is_err());
        assert!(from_csv("1,x\n").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let a = DenseMatrix::from_rows(&[vec![0.1, -2.5e-17], vec![1.0 / 3.0, 7.0]]).unwrap();
        assert_eq!(from_csv(&to_csv(&a)).unwrap(), a);
    }

    #[test]
    fn file_round_trip_by_extension() {
        let dir = std::env::temp_dir().join(format!("plab-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let v = DenseVector::new(vec![1.5, -0.25, 3.0]).unwrap();
        for name in ["v.plab", "v.csv"] {
            let p = dir.join(name);
            write_vector(&p, &v).unwrap();
            assert_eq!(read_vector(&p).unwrap(), v);
        }
        fs::remove_dir_all(&dir).unwrap();
    }

    proptest! {
        #[test]
        fn binary_round_trip_is_bit_exact(
            rows in 1usize..6,
            cols in 1usize..6,
            bits in proptest::collection::vec(any::<u64>(), 36),
        ) {
            let data: Vec<f64> = bits
                .iter()
                .take(rows * cols)
                .map(|&b| {
                    let f = f64::from_bits(b);
                    if f.is_finite() { f } else { (b >> 12) as f64 }
                })
                .collect();
            let a = DenseMatrix::from_col_major(rows, cols, data).unwrap();
            let back = from_bytes(&to_bytes(&a).unwrap()).unwrap();
            let same = a
                .as_col_major()
                .iter()
                .zip(back.as_col_major())
                .all(|(x, y)| x.to_bits() == y.to_bits());
            prop_assert!(same);
            prop_assert_eq!((back.rows(), back.cols()), (rows, cols));
        }
    }
}
