//! Centered Gaussian measures on a finite-dimensional normed space.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A norm `q` on `R^d`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NormSpec {
    L1,
    #[default]
    L2,
    Linf,
    /// `q(x) = max_i w_i |x_i|` with strictly positive weights.
    WeightedSup { weights: Vec<f64> },
}

impl NormSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            NormSpec::L1 => x.iter().map(|v| v.abs()).sum(),
            NormSpec::L2 => {
                let scale = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
                if scale == 0.0 || !scale.is_finite() {
                    return scale;
                }
                scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
            }
            NormSpec::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormSpec::WeightedSup { weights } => x
                .iter()
                .zip(weights)
                .fold(0.0, |m, (v, w)| m.max(w * v.abs())),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if let NormSpec::WeightedSup { weights } = self {
            if weights.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: weights.len(),
                });
            }
            if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return Err(Error::domain(format!("norm weight {w} is not strictly positive")));
            }
        }
        Ok(())
    }
}

/// Largest absolute entry, used as the scale for relative tolerances.
pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Checks `|m_ij − m_ji| ≤ rel·max|m|` and returns the exact symmetrization.
pub(crate) fn symmetrized(m: &DMatrix<f64>, rel: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    if let Some(bad) = m.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("matrix entry {bad} is not finite")));
    }
    let tol = rel * max_abs(m);
    let mut worst = (0, 0, 0.0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            let dev = (m[(i, j)] - m[(j, i)]).abs();
            if dev > worst.2 {
                worst = (i, j, dev);
            }
        }
    }
    if worst.2 > tol {
        return Err(Error::NotSymmetric {
            row: worst.0,
            col: worst.1,
            deviation: worst.2,
        });
    }
    Ok((m + m.transpose()) * 0.5)
}

/// Rank-revealing factor `L` (d×r) with `L·Lᵀ = Σ` by greedy diagonal pivoting.
///
/// Columns are produced in the original coordinates, so no permutation has to
/// be carried around. Stops once the largest remaining diagonal entry drops
/// below a relative threshold; the caller verifies the reconstruction.
pub(crate) fn pivoted_factor(sigma: &DMatrix<f64>) -> DMatrix<f64> {
    let d = sigma.nrows();
    let scale = (0..d).fold(0.0f64, |m, i| m.max(sigma[(i, i)]));
    let mut residual = sigma.clone();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    if scale <= 0.0 {
        return DMatrix::zeros(d, 0);
    }
    let threshold = 1e-14 * scale * d as f64;
    for _ in 0..d {
        let (pivot, pivot_val) = (0..d)
            .map(|i| (i, residual[(i, i)]))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_val <= threshold {
            break;
        }
        let col = residual.column(pivot) / pivot_val.sqrt();
        residual -= &col * col.transpose();
        // the pivot row/column is now exactly consumed
        for i in 0..d {
            residual[(pivot, i)] = 0.0;
            residual[(i, pivot)] = 0.0;
        }
        cols.push(col);
    }
    if cols.is_empty() {
        DMatrix::zeros(d, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Centered Gaussian law with covariance `Σ = L·Lᵀ` and an attached norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasure {
    covariance: DMatrix<f64>,
    factor: DMatrix<f64>,
    norm: NormSpec,
}

/// JSON form: `{dim, covariance: row-major array, norm: {kind, weights?}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDoc {
    pub dim: usize,
    pub covariance: Vec<f64>,
    #[serde(default)]
    pub norm: NormSpec,
}

impl GaussianMeasure {
    pub fn new(covariance: DMatrix<f64>, norm: NormSpec) -> Result<Self> {
        let covariance = symmetrized(&covariance, 1e-12)?;
        let dim = covariance.nrows();
        if dim == 0 {
            return Err(Error::domain("measure dimension must be positive"));
        }
        norm.validate(dim)?;
        let factor = pivoted_factor(&covariance);
        let scale = max_abs(&covariance);
        let residual = max_abs(&(&covariance - &factor * factor.transpose()));
        if residual > 1e-10 * scale {
            return Err(Error::NotPositiveSemidefinite { residual });
        }
        Ok(Self {
            covariance,
            factor,
            norm,
        })
    }

    pub fn identity(dim: usize, norm: NormSpec) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim), norm)
    }

    /// The point mass at the origin.
    pub fn point_mass(dim: usize, norm: NormSpec) -> Result<Self> {
        Self::new(DMatrix::zeros(dim, dim), norm)
    }

    pub fn from_doc(doc: &MeasureDoc) -> Result<Self> {
        if doc.covariance.len() != doc.dim * doc.dim {
            return Err(Error::DimensionMismatch {
                expected: doc.dim * doc.dim,
                found: doc.covariance.len(),
            });
        }
        let cov = DMatrix::from_row_slice(doc.dim, doc.dim, &doc.covariance);
        Self::new(cov, doc.norm.clone())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: MeasureDoc = serde_json::from_str(s)?;
        Self::from_doc(&doc)
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    /// Dimension of the support, `rank Σ`.
    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    pub fn q(&self, x: &[f64]) -> f64 {
        self.norm.eval(x)
    }

    /// Writes one draw `L·z` into `out`; `z` is scratch space of length `rank`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = z
                .iter()
                .enumerate()
                .map(|(j, zj)| self.factor[(i, j)] * zj)
                .sum();
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let mut z = vec![0.0; self.rank()];
        let mut out = DVector::zeros(self.dim());
        self.sample_into(rng, &mut z, out.as_mut_slice());
        out
    }

    /// `γ_s`: the law of `√s·G`; `s = 0` gives the point mass at 0.
    pub fn scale(&self, s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::domain(format!("scale {s} must be a finite nonnegative number")));
        }
        if s == 0.0 {
            return Ok(Self {
                covariance: DMatrix::zeros(self.dim(), self.dim()),
                factor: DMatrix::zeros(self.dim(), 0),
                norm: self.norm.clone(),
            });
        }
        Ok(Self {
            covariance: &self.covariance * s,
            factor: &self.factor * s.sqrt(),
            norm: self.norm.clone(),
        })
    }

    /// Monte Carlo estimate of `E q(G)^r` from `n` draws.
    pub fn empirical_q_moment<R: Rng + ?Sized>(
        &self,
        r: f64,
        n: usize,
        rng: &mut R,
    ) -> Result<MomentEstimate> {
        if n == 0 {
            return Err(Error::domain("moment estimation needs at least one sample"));
        }
        if !(r > 0.0) {
            return Err(Error::domain(format!("moment order {r} must be positive")));
        }
        let mut z = vec![0.0; self.rank()];
        let mut x = vec![0.0; self.dim()];
        let values: Vec<f64> = (0..n)
            .map(|_| {
                self.sample_into(rng, &mut z, &mut x);
                self.q(&x).powf(r)
            })
            .collect();
        Ok(MomentEstimate::from_values(r, &values))
    }
}

/// Sample mean of `q(G)^r` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub r: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub n: usize,
}

impl MomentEstimate {
    pub fn from_values(r: f64, values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            r,
            estimate: mean,
            std_error,
            n,
        }
    }

    /// Estimate plus three standard errors; the value certificates consume.
    pub fn conservative(&self) -> f64 {
        self.estimate + 3.0 * self.std_error
    }
}
