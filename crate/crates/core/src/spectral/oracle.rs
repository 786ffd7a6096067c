//! Cyclic Jacobi diagonalization, the reference eigensolver.
//!
//! Shares no code with the deflation route; used to validate it and as the
//! eigenvalue source for the perturbation checks.

use nalgebra::{DMatrix, DVector};

use super::SymmetricOperator;

const MAX_SWEEPS: usize = 100;

/// All eigenvalues in descending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl OracleSpectrum {
    /// `max |λ|`, the spectral norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Default threshold below which an eigenvalue counts as zero.
    pub fn default_tol_zero(&self) -> f64 {
        1e-12 * (1.0 + self.norm())
    }

    /// Strictly positive eigenvalues, nonincreasing.
    pub fn positive(&self, tol_zero: f64) -> Vec<f64> {
        self.values.iter().copied().filter(|v| *v > tol_zero).collect()
    }

    /// Strictly negative eigenvalues, nondecreasing.
    pub fn negative(&self, tol_zero: f64) -> Vec<f64> {
        self.values.iter().rev().copied().filter(|v| *v < -tol_zero).collect()
    }

    pub fn zero_mult(&self, tol_zero: f64) -> usize {
        self.values.iter().filter(|v| v.abs() <= tol_zero).count()
    }

    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.vectors.column(k).into_owned()
    }

    /// `‖A − VΛVᵀ‖_F`.
    pub fn reconstruction_error(&self, a: &SymmetricOperator) -> f64 {
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&self.values));
        (a.entries() - &self.vectors * lambda * self.vectors.transpose()).norm()
    }
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += a[(p, q)] * a[(p, q)];
        }
    }
    (2.0 * s).sqrt()
}

/// Diagonalizes `a` by cyclic-by-row Jacobi sweeps.
pub fn oracle_spectrum(a: &SymmetricOperator) -> OracleSpectrum {
    let n = a.dim();
    let mut m = a.entries().clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let frob = m.norm();

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&m);
        if off == 0.0 || off <= 1e-18 * frob {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let cols: Vec<DVector<f64>> = order.iter().map(|&i| v.column(i).into_owned()).collect();
    let vectors = if n == 0 {
        DMatrix::zeros(0, 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    OracleSpectrum { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_symmetric(d: usize, seed: u64) -> SymmetricOperator {
        let mut rng = SeedStream::new(seed).rng(0);
        let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        SymmetricOperator::new((&g + g.transpose()) * 0.5).unwrap()
    }

    #[test]
    fn diagonal_is_sorted() {
        let s = oracle_spectrum(&SymmetricOperator::diagonal(&[1.0, -4.0, 7.0, 0.0]));
        assert_eq!(s.values, vec![7.0, 1.0, 0.0, -4.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        for &(a, b, c) in &[(1.0, 2.0, 3.0), (-1.0, 0.5, -1.0), (4.0, -3.0, 0.0), (2.0, 1e-9, 2.0)] {
            let s = oracle_spectrum(&SymmetricOperator::from_row_slice(2, &[a, b, b, c]).unwrap());
            let mid = 0.5 * (a + c);
            let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            assert!((s.values[0] - (mid + rad)).abs() <= 1e-14 * (1.0 + rad + mid.abs()));
            assert!((s.values[1] - (mid - rad)).abs() <= 1e-14 * (1.0 + rad + mid.abs()));
        }
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        for (i, d) in [1usize, 2, 5, 17, 40].into_iter().enumerate() {
            let a = random_symmetric(d, i as u64);
            let s = oracle_spectrum(&a);
            let scale = s.norm().max(1e-300);
            assert!(s.reconstruction_error(&a) <= 1e-9 * scale);
            let gram = s.vectors.transpose() * &s.vectors;
            assert!((gram - DMatrix::identity(d, d)).amax() <= 1e-12);
            assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn similarity_invariance() {
        let a = random_symmetric(8, 3);
        let mut rng = SeedStream::new(4).rng(0);
        let g = DMatrix::from_fn(8, 8, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = g.qr().q();
        let b = SymmetricOperator::new(&q * a.entries() * q.transpose()).unwrap();
        let (sa, sb) = (oracle_spectrum(&a), oracle_spectrum(&b));
        for (x, y) in sa.values.iter().zip(&sb.values) {
            assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn zero_matrix() {
        let s = oracle_spectrum(&SymmetricOperator::zeros(3));
        assert_eq!(s.values, vec![0.0; 3]);
        assert_eq!(s.norm(), 0.0);
        assert_eq!(s.zero_mult(s.default_tol_zero()), 3);
    }
}
