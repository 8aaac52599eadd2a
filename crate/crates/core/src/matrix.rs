//! Dense matrix carrier, validation helpers, and the JSON/CSV matrix formats.
//!
//! Matrices are plain `nalgebra` dynamic matrices. The external JSON shape is
//! `{ "rows": r, "cols": c, "data": [[...], ...] }` (row-major); CSV input is
//! headerless, one matrix row per line.

use std::path::Path;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

pub fn ensure_square(m: &Matrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Largest absolute entry; zero for an empty matrix.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Frobenius distance of `MᵀM` from the identity.
pub fn orthonormality_residual(m: &Matrix) -> f64 {
    let gram = m.transpose() * m;
    (gram - Matrix::identity(m.ncols(), m.ncols())).norm()
}

pub fn ensure_orthonormal_columns(m: &Matrix, tol: f64, what: &str) -> Result<()> {
    let r = orthonormality_residual(m);
    if r <= tol {
        Ok(())
    } else {
        Err(Error::NotOrthonormal(format!(
            "{what} does not have orthonormal columns (residual {r:.3e} > {tol:.0e})"
        )))
    }
}

/// Eigenvalues of a symmetric matrix, sorted in decreasing order.
pub fn symmetric_eigenvalues_desc(s: &Matrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(s.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Eigenvalues of a general real square matrix (real Schur form).
pub fn eigenvalues(a: &Matrix) -> Vec<Complex<f64>> {
    a.complex_eigenvalues().iter().copied().collect()
}

/// Sorts complex values by (real, imaginary) for multiset comparisons.
pub fn sort_complex(values: &mut [Complex<f64>]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<f64>>,
}

impl From<&Matrix> for MatrixJson {
    fn from(m: &Matrix) -> Self {
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for Matrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Matrix> {
        if j.rows == 0 || j.cols == 0 {
            return Err(Error::Parse("matrix must have positive dimensions".into()));
        }
        if j.data.len() != j.rows {
            return Err(Error::Parse(format!(
                "declared {} rows but found {}",
                j.rows,
                j.data.len()
            )));
        }
        rows_to_matrix(&j.data).and_then(|m| {
            if m.ncols() != j.cols {
                Err(Error::Parse(format!(
                    "declared {} columns but found {}",
                    j.cols,
                    m.ncols()
                )))
            } else {
                Ok(m)
            }
        })
    }
}

/// Builds a matrix from row vectors, rejecting ragged or non-finite input.
pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err(Error::Parse("matrix has no columns".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::Parse(format!(
            "row {} has {} entries, expected {ncols}",
            i + 1,
            r.len()
        )));
    }
    let m = Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    ensure_finite(&m, "matrix input")?;
    Ok(m)
}

pub fn matrix_from_json_str(s: &str) -> Result<Matrix> {
    let j: MatrixJson = serde_json::from_str(s)?;
    Matrix::try_from(j)
}

pub fn matrix_from_csv_str(s: &str) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(s.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("not a number: `{f}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    rows_to_matrix(&rows)
}

/// Reads a matrix from a `.json` or headerless `.csv` file. Files with other
/// extensions are sniffed: a leading `{` means JSON.
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path)?;
    let is_json = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => true,
        Some("csv") => false,
        _ => text.trim_start().starts_with('{'),
    };
    if is_json {
        matrix_from_json_str(&text)
    } else {
        matrix_from_csv_str(&text)
    }
}

pub fn matrix_to_json_string(m: &Matrix) -> String {
    serde_json::to_string_pretty(&MatrixJson::from(m)).expect("matrix serializes")
}

/// Reads a vector given either as a bare JSON array, a one-row or one-column
/// matrix document, or a single CSV row/column.
pub fn read_vector(path: &Path) -> Result<Vector> {
    let text = std::fs::read_to_string(path)?;
    let trimmed = text.trim_start();
    let m = if trimmed.starts_with('[') {
        let v: Vec<f64> = serde_json::from_str(&text)?;
        rows_to_matrix(&[v])?
    } else if trimmed.starts_with('{') {
        matrix_from_json_str(&text)?
    } else {
        matrix_from_csv_str(&text)?
    };
    if m.nrows() == 1 || m.ncols() == 1 {
        Ok(Vector::from_iterator(
            m.len(),
            m.transpose().iter().copied(),
        ))
    } else {
        Err(Error::Parse(format!(
            "expected a vector, found a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_preserves_layout() {
        let m = Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let back = matrix_from_json_str(&matrix_to_json_string(&m)).unwrap();
        assert_eq!(m, back);
        let j = MatrixJson::from(&m);
        assert_eq!(j.data[1], vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = matrix_from_json_str(r#"{"rows":2,"cols":2,"data":[[1,2],[3]]}"#);
        assert!(matches!(err, Err(Error::Parse(_))));
        let err = matrix_from_csv_str("1,2\n3\n");
        assert!(matches!(err, Err(Error::Parse(_))));
    }

    #[test]
    fn declared_shape_must_match() {
        let err = matrix_from_json_str(r#"{"rows":3,"cols":2,"data":[[1,2],[3,4]]}"#);
        assert!(err.is_err());
        let err = matrix_from_json_str(r#"{"rows":2,"cols":3,"data":[[1,2],[3,4]]}"#);
        assert!(err.is_err());
    }

    #[test]
    fn nan_is_rejected() {
        assert!(matches!(
            matrix_from_csv_str("1,NaN\n0,1\n"),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn csv_parses_headerless_rows() {
        let m = matrix_from_csv_str("1, 2\n-3.5, 4e-1\n").unwrap();
        assert_eq!(m, Matrix::from_row_slice(2, 2, &[1.0, 2.0, -3.5, 0.4]));
    }

    #[test]
    fn symmetric_eigenvalues_are_sorted_descending() {
        let s = Matrix::from_diagonal(&Vector::from_vec(vec![-5.0, -1.0, -2.0]));
        assert_eq!(symmetric_eigenvalues_desc(&s), vec![-1.0, -2.0, -5.0]);
    }
}
