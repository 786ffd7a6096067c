//! The min-max functional `ν(h_1, …, h_{n−1}) = sup{(Ax, x) : ‖x‖ = 1, x ⟂ h_j}`.

use nalgebra::DVector;

use super::deflation::{complement_basis, largest_tridiagonal_eigenvalue, tridiagonalize};
use super::SymmetricOperator;
use crate::error::{Error, Result};

const DEPENDENCE_TOL: f64 = 1e-10;

/// Modified Gram–Schmidt with one re-orthogonalization pass. Returns the
/// index of the first vector whose relative residual falls below `tol`.
pub(crate) fn orthonormalize(vectors: &[DVector<f64>], tol: f64) -> std::result::Result<Vec<DVector<f64>>, usize> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for (i, h) in vectors.iter().enumerate() {
        let scale = h.norm();
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(i);
        }
        let mut v = h / scale;
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let r = v.norm();
        if r < tol {
            return Err(i);
        }
        basis.push(v / r);
    }
    Ok(basis)
}

/// `ν(h_1, …, h_k)`: the largest eigenvalue of `A` compressed to the
/// orthogonal complement of the `h_j`, located by Sturm bisection.
pub fn minmax_value(a: &SymmetricOperator, h_list: &[DVector<f64>]) -> Result<f64> {
    let d = a.dim();
    for h in h_list {
        a.check_dim(h.len())?;
    }
    let basis = orthonormalize(h_list, DEPENDENCE_TOL).map_err(|index| Error::DependentConstraints { index })?;
    if basis.len() >= d {
        return Err(Error::domain(format!(
            "{} constraints span the whole {d}-dimensional space",
            basis.len()
        )));
    }
    let q = complement_basis(d, &basis);
    let compressed = q.transpose() * a.entries() * &q;
    let (diag, off) = tridiagonalize((&compressed + compressed.transpose()) * 0.5);
    Ok(largest_tridiagonal_eigenvalue(&diag, &off))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::signed_spectrum;

    #[test]
    fn empty_list_is_top_eigenvalue() {
        let a = SymmetricOperator::diagonal(&[3.0, 1.0, -2.0]);
        assert!((minmax_value(&a, &[]).unwrap() - 3.0).abs() <= 1e-14);
        let neg = SymmetricOperator::diagonal(&[-3.0, -1.0]);
        assert!((minmax_value(&neg, &[]).unwrap() + 1.0).abs() <= 1e-14);
    }

    #[test]
    fn eigenvector_constraints_give_next_eigenvalue() {
        let a = SymmetricOperator::from_row_slice(3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, -1.0]).unwrap();
        let s = signed_spectrum(&a, None).unwrap();
        let phi: Vec<_> = s.pos.iter().map(|p| p.vector.clone()).collect();
        for n in 1..=phi.len() {
            let nu = minmax_value(&a, &phi[..n - 1]).unwrap();
            assert!((nu - s.pos[n - 1].value).abs() <= 1e-9 * s.norm());
        }
    }

    #[test]
    fn degenerate_lists_rejected() {
        let a = SymmetricOperator::diagonal(&[1.0, 2.0, 3.0]);
        let h = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let h2 = DVector::from_vec(vec![2.0, 2.0, 0.0]);
        assert!(matches!(
            minmax_value(&a, &[h.clone(), h2]),
            Err(Error::DependentConstraints { index: 1 })
        ));
        assert!(matches!(
            minmax_value(&a, &[DVector::zeros(3)]),
            Err(Error::DependentConstraints { index: 0 })
        ));
        let full: Vec<_> = (0..3).map(|i| DVector::from_fn(3, |j, _| f64::from(u8::from(i == j)))).collect();
        assert!(matches!(minmax_value(&a, &full), Err(Error::Domain(_))));
    }
}
