//! Spectral machinery for symmetric operators on `R^d`.
//!
//! Two independent routes compute eigenvalues:
//!
//! * [`deflation`] follows the constrained extremal characterization: the
//!   `n`-th positive eigenvalue is the largest value of `(Ax, x)` over unit `x`
//!   orthogonal to the first `n − 1` positive eigenvectors (and symmetrically
//!   for the negative side). This is what [`signed_spectrum`] uses.
//! * [`oracle`] is a cyclic Jacobi rotation diagonalizer used to verify it.
//!
//! [`minmax`] evaluates the min-max functional `ν(h_1, …, h_{n−1})`.

pub mod deflation;
pub mod minmax;
pub mod oracle;

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{max_abs, symmetrized};

pub use deflation::{
    decomposition_residual, deflated_extremal, deflated_extremal_with_tol, operator_norm,
    signed_spectrum, EigenPair, Extremal, Sign, SignedSpectrum,
};
pub use minmax::minmax_value;
pub use oracle::{oracle_spectrum, OracleSpectrum};

/// A real symmetric matrix standing in for a compact self-adjoint operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    entries: DMatrix<f64>,
}

/// JSON form: `{dim, entries: row-major array}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub dim: usize,
    pub entries: Vec<f64>,
}

impl SymmetricOperator {
    /// Accepts `entries` when `|a_ij − a_ji| ≤ 1e-12·max|a|`; stores the exact
    /// symmetrization.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 {
            return Err(Error::domain("operator dimension must be positive"));
        }
        Ok(Self {
            entries: symmetrized(&entries, 1e-12)?,
        })
    }

    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self {
            entries: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn max_abs_entry(&self) -> f64 {
        max_abs(&self.entries)
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x.len())?;
        Ok(&self.entries * x)
    }

    /// `(Ax, x)`.
    pub fn quadratic_form(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(x.dot(&(&self.entries * x)))
    }

    pub fn negated(&self) -> Self {
        Self {
            entries: -&self.entries,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self {
            entries: &self.entries + &other.entries,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            entries: &self.entries * c,
        }
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    pub fn from_doc(doc: &OperatorDoc) -> Result<Self> {
        Self::from_row_slice(doc.dim, &doc.entries)
    }

    pub fn to_doc(&self) -> OperatorDoc {
        let d = self.dim();
        OperatorDoc {
            dim: d,
            entries: (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| self.entries[(i, j)])
                .collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: OperatorDoc = serde_json::from_str(s)?;
        Self::from_doc(&doc)
    }

    /// One matrix row per line, comma separated.
    pub fn from_csv_str(s: &str) -> Result<Self> {
        let rows = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::domain(format!("bad matrix entry {t:?}: {e}")))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let d = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: r.len(),
            });
        }
        Self::from_row_slice(d, &rows.concat())
    }

    /// Loads `.csv` files as CSV and anything else as JSON.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Self::from_csv_str(&text),
            _ => Self::from_json_str(&text),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_form_basics() {
        let a = SymmetricOperator::diagonal(&[3.0, -2.0]);
        assert_eq!(a.quadratic_form(&DVector::from_vec(vec![0.0, 1.0])).unwrap(), -2.0);
        let i = SymmetricOperator::new(DMatrix::identity(3, 3)).unwrap();
        let x = DVector::from_vec(vec![0.6, 0.0, 0.8]);
        assert!((i.quadratic_form(&x).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            i.quadratic_form(&DVector::zeros(2)),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn asymmetry_reported_at_worst_entry() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 1.0, 5.0, 0.0, 4.0, 1.0]);
        match SymmetricOperator::new(m) {
            Err(Error::NotSymmetric { row, col, deviation }) => {
                assert_eq!((row, col), (1, 2));
                assert_eq!(deviation, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        // tiny asymmetry is tolerated and removed
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0 + 1e-14, 1.0]);
        let a = SymmetricOperator::new(m).unwrap();
        assert_eq!(a.entries()[(0, 1)], a.entries()[(1, 0)]);
    }

    #[test]
    fn loads_json_and_csv() {
        let a = SymmetricOperator::from_json_str(r#"{"dim":2,"entries":[1,2,2,3]}"#).unwrap();
        let b = SymmetricOperator::from_csv_str("1, 2\n2, 3\n\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(SymmetricOperator::from_doc(&a.to_doc()).unwrap(), a);
        assert!(SymmetricOperator::from_csv_str("1,2\n3").is_err());
        assert!(SymmetricOperator::from_json_str(r#"{"dim":2,"entries":[1,2,2]}"#).is_err());
    }
}
