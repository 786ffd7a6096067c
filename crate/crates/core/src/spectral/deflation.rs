//! Extremal eigenpairs by constrained maximization of the quadratic form.
//!
//! `deflated_extremal(A, +, {φ_1, …, φ_{n−1}})` returns the maximizer of
//! `(Ax, x)` over unit `x ⟂ φ_1, …, φ_{n−1}`. The problem is solved exactly on
//! the orthogonal complement: an orthonormal basis `Q` of the complement is
//! built from Householder reflectors, the compression `QᵀAQ` is reduced to
//! tridiagonal form, its largest eigenvalue is isolated by Sturm-sequence
//! bisection, and the maximizer is recovered by inverse iteration. When the
//! constraints are eigenvectors of `A` the complement is invariant and the
//! maximizer is an eigenvector of `A`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::SymmetricOperator;
use crate::error::{Error, Result};
use crate::rng::{tags, SeedStream};

const ORTHONORMAL_TOL: f64 = 1e-9;
const BISECTION_STEPS: usize = 200;
const INVERSE_STEPS: usize = 8;
const START_SEED: u64 = 0x005e_ed0f_d3f1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Extremal {
    Found(EigenPair),
    /// The constrained extremum is not strictly of the requested sign; no
    /// further eigenvalues of that sign remain. Carries the extremal value.
    Exhausted { value: f64 },
}

impl Extremal {
    pub fn found(self) -> Option<EigenPair> {
        match self {
            Extremal::Found(p) => Some(p),
            Extremal::Exhausted { .. } => None,
        }
    }
}

fn check_orthonormal(dim: usize, constraints: &[DVector<f64>]) -> Result<()> {
    for (i, c) in constraints.iter().enumerate() {
        if c.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.len(),
            });
        }
        for (j, e) in constraints[..=i].iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            if (c.dot(e) - target).abs() > ORTHONORMAL_TOL {
                return Err(Error::domain(format!(
                    "constraints {j} and {i} are not orthonormal"
                )));
            }
        }
    }
    Ok(())
}

/// Orthonormal basis (as columns) of the orthogonal complement of the span of
/// `constraints`, assumed orthonormal.
pub(super) fn complement_basis(dim: usize, constraints: &[DVector<f64>]) -> DMatrix<f64> {
    let k = constraints.len();
    let mut work = DMatrix::from_fn(dim, k, |i, j| constraints[j][i]);
    let mut reflectors: Vec<DVector<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let x = work.view((j, j), (dim - j, 1)).into_owned();
        let norm = x.norm();
        let mut v = DVector::zeros(dim);
        if norm > 0.0 {
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            for i in 0..(dim - j) {
                v[j + i] = x[i];
            }
            v[j] -= alpha;
            let vn = v.norm();
            if vn > 0.0 {
                v /= vn;
                let proj = v.transpose() * &work;
                work -= (&v * 2.0) * proj;
            }
        }
        reflectors.push(v);
    }
    // Q = H_1 ⋯ H_k; its trailing dim − k columns span the complement.
    let mut basis = DMatrix::zeros(dim, dim - k);
    for c in 0..(dim - k) {
        basis[(k + c, c)] = 1.0;
    }
    for v in reflectors.iter().rev() {
        let proj = v.transpose() * &basis;
        basis -= (v * 2.0) * proj;
    }
    basis
}

/// Householder reduction of a symmetric matrix to tridiagonal `(diag, off)`.
pub(super) fn tridiagonalize(mut t: DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let m = t.nrows();
    for k in 0..m.saturating_sub(2) {
        let len = m - k - 1;
        let x = t.view((k + 1, k), (len, 1)).into_owned();
        let norm = x.norm();
        if norm == 0.0 {
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vn = v.norm();
        if vn == 0.0 {
            continue;
        }
        v /= vn;
        let sub = t.view((k + 1, k + 1), (len, len)).into_owned();
        let p = &sub * &v;
        let kappa = v.dot(&p);
        let w = (&p - &v * kappa) * 2.0;
        let updated = sub - &v * w.transpose() - &w * v.transpose();
        t.view_mut((k + 1, k + 1), (len, len)).copy_from(&updated);
        for i in 0..len {
            let val = if i == 0 { alpha } else { 0.0 };
            t[(k + 1 + i, k)] = val;
            t[(k, k + 1 + i)] = val;
        }
    }
    let diag = (0..m).map(|i| t[(i, i)]).collect();
    let off = (1..m).map(|i| t[(i, i - 1)]).collect();
    (diag, off)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        }
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by bisection.
pub(super) fn largest_tridiagonal_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let m = diag.len();
    let radius = |i: usize| {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < m { off[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..m).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..m).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs());
    if scale == 0.0 {
        return 0.0;
    }
    let pivmin = f64::MIN_POSITIVE.max(scale * 1e-300).max(f64::EPSILON * f64::EPSILON * scale);
    lo -= f64::EPSILON * scale;
    hi += f64::EPSILON * scale;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * (lo.abs() + hi.abs()) {
            break;
        }
        if sturm_count(diag, off, mid, pivmin) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(M − σI) y = b` by LU with partial pivoting; exactly singular
/// pivots are nudged, which is what inverse iteration wants.
fn shifted_solve(m: &DMatrix<f64>, sigma: f64, b: &DVector<f64>, tiny: f64) -> DVector<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= sigma;
    }
    let mut x = b.clone();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .unwrap_or(col);
        if piv != col {
            a.swap_rows(piv, col);
            x.swap_rows(piv, col);
        }
        if a[(col, col)].abs() < tiny {
            a[(col, col)] = if a[(col, col)] < 0.0 { -tiny } else { tiny };
        }
        let p = a[(col, col)];
        for r in (col + 1)..n {
            let f = a[(r, col)] / p;
            if f != 0.0 {
                for c in col..n {
                    a[(r, c)] -= f * a[(col, c)];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for r in (0..n).rev() {
        let mut s = x[r];
        for c in (r + 1)..n {
            s -= a[(r, c)] * x[c];
        }
        x[r] = s / a[(r, r)];
    }
    x
}

/// Unit maximizer of `(Mx, x)` for a small symmetric `M`.
fn top_eigenpair(m: &DMatrix<f64>, salt: u64) -> (f64, DVector<f64>) {
    let n = m.nrows();
    if n == 1 {
        return (m[(0, 0)], DVector::from_element(1, 1.0));
    }
    let (diag, off) = tridiagonalize(m.clone());
    let lambda = largest_tridiagonal_eigenvalue(&diag, &off);
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;

    let mut rng = SeedStream::new(START_SEED).domain(tags::EXTREMAL).rng(salt);
    let mut y = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    y.normalize_mut();
    for _ in 0..INVERSE_STEPS {
        let mut next = shifted_solve(m, lambda, &y, tiny);
        let nn = next.norm();
        if !nn.is_finite() || nn == 0.0 {
            break;
        }
        next /= nn;
        y = next;
        let my = m * &y;
        let rho = y.dot(&my);
        if (my - &y * rho).norm() <= 4.0 * f64::EPSILON * scale * (n as f64).sqrt() {
            break;
        }
    }
    (lambda, y)
}

fn extremal_pair(
    a: &SymmetricOperator,
    sign: Sign,
    constraints: &[DVector<f64>],
) -> Result<EigenPair> {
    let d = a.dim();
    if constraints.len() >= d {
        return Err(Error::domain(format!(
            "{} constraints leave no room in dimension {d}",
            constraints.len()
        )));
    }
    check_orthonormal(d, constraints)?;
    let target = a.entries() * sign.factor();
    let x = if constraints.is_empty() {
        top_eigenpair(&target, 0).1
    } else {
        let q = complement_basis(d, constraints);
        let compressed = q.transpose() * &target * &q;
        let compressed = (&compressed + compressed.transpose()) * 0.5;
        let (_, y) = top_eigenpair(&compressed, constraints.len() as u64);
        let mut x = q * y;
        // re-impose the constraints against rounding drift
        for c in constraints {
            let proj = c.dot(&x);
            x.axpy(-proj, c, 1.0);
        }
        x.normalize()
    };
    let value = a.quadratic_form(&x)?;
    Ok(EigenPair { value, vector: x })
}

/// Default zero threshold `1e-12·(1 + ‖A‖)`.
pub fn default_tol_zero(norm: f64) -> f64 {
    1e-12 * (1.0 + norm)
}

/// `‖A‖ = sup_{‖x‖=1} |(Ax, x)|`, from the unconstrained extremes.
pub fn operator_norm(a: &SymmetricOperator) -> f64 {
    let top = extremal_pair(a, Sign::Plus, &[]).map(|p| p.value).unwrap_or(0.0);
    let bottom = extremal_pair(a, Sign::Minus, &[]).map(|p| p.value).unwrap_or(0.0);
    top.abs().max(bottom.abs())
}

/// Extremal value of `(Ax, x)` over unit `x` orthogonal to `constraints`,
/// with the default zero threshold.
pub fn deflated_extremal(
    a: &SymmetricOperator,
    sign: Sign,
    constraints: &[DVector<f64>],
) -> Result<Extremal> {
    deflated_extremal_with_tol(a, sign, constraints, default_tol_zero(operator_norm(a)))
}

/// As [`deflated_extremal`], treating `|μ| ≤ tol_zero` as zero.
pub fn deflated_extremal_with_tol(
    a: &SymmetricOperator,
    sign: Sign,
    constraints: &[DVector<f64>],
    tol_zero: f64,
) -> Result<Extremal> {
    let pair = extremal_pair(a, sign, constraints)?;
    if sign.factor() * pair.value > tol_zero {
        Ok(Extremal::Found(pair))
    } else {
        Ok(Extremal::Exhausted { value: pair.value })
    }
}

/// Strictly positive and strictly negative eigenpairs, with multiplicity, as
/// produced by repeated deflation.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedSpectrum {
    pub dim: usize,
    /// Nonincreasing positive eigenvalues.
    pub pos: Vec<EigenPair>,
    /// Nondecreasing negative eigenvalues.
    pub neg: Vec<EigenPair>,
    pub zero_mult: usize,
    pub tol_zero: f64,
}

/// Serialized form `{pos, neg, zero_mult}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumDoc {
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
    pub zero_mult: usize,
}

impl SignedSpectrum {
    pub fn pos_values(&self) -> Vec<f64> {
        self.pos.iter().map(|p| p.value).collect()
    }

    pub fn neg_values(&self) -> Vec<f64> {
        self.neg.iter().map(|p| p.value).collect()
    }

    /// Every eigenvalue with multiplicity, zeros included, descending.
    pub fn all_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pos_values();
        v.extend(std::iter::repeat_n(0.0, self.zero_mult));
        v.extend(self.neg_values().into_iter().rev());
        v
    }

    pub fn norm(&self) -> f64 {
        let p = self.pos.first().map_or(0.0, |p| p.value);
        let n = self.neg.first().map_or(0.0, |p| -p.value);
        p.max(n)
    }

    fn pairs(&self) -> impl Iterator<Item = &EigenPair> {
        self.pos.iter().chain(&self.neg)
    }

    /// `Σ μ_k⁺ (x, φ_k⁺)² + Σ μ_k⁻ (x, φ_k⁻)²`.
    pub fn form_expansion(&self, x: &DVector<f64>) -> f64 {
        self.pairs().map(|p| p.value * p.vector.dot(x).powi(2)).sum()
    }

    /// `Σ_k μ_k (x, φ_k) φ_k` over the nonzero eigenpairs.
    pub fn expansion(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for p in self.pairs() {
            out.axpy(p.value * p.vector.dot(x), &p.vector, 1.0);
        }
        out
    }

    /// `‖Ax − Σ_k μ_k (x, φ_k) φ_k‖`.
    pub fn decomposition_residual(&self, a: &SymmetricOperator, x: &DVector<f64>) -> Result<f64> {
        Ok((a.apply(x)? - self.expansion(x)).norm())
    }

    /// Largest `‖Aφ − μφ‖` over stored pairs.
    pub fn max_residual(&self, a: &SymmetricOperator) -> f64 {
        self.pairs()
            .map(|p| (a.entries() * &p.vector - &p.vector * p.value).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|(φ_i, φ_j) − δ_ij|` over stored eigenvectors.
    pub fn orthonormality_defect(&self) -> f64 {
        let vs: Vec<&DVector<f64>> = self.pairs().map(|p| &p.vector).collect();
        let mut worst = 0.0f64;
        for i in 0..vs.len() {
            for j in 0..=i {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((vs[i].dot(vs[j]) - target).abs());
            }
        }
        worst
    }

    pub fn to_doc(&self) -> SpectrumDoc {
        SpectrumDoc {
            pos: self.pos_values(),
            neg: self.neg_values(),
            zero_mult: self.zero_mult,
        }
    }
}

/// Repeated deflation: positive eigenpairs first, then negative ones, with
/// every eigenvector found so far as a constraint. Eigenvalues within
/// `tol_zero` of zero (default `1e-12·(1 + ‖A‖)`) are counted in `zero_mult`.
pub fn signed_spectrum(a: &SymmetricOperator, tol_zero: Option<f64>) -> Result<SignedSpectrum> {
    let d = a.dim();
    let tol = match tol_zero {
        Some(t) if t >= 0.0 => t,
        Some(t) => return Err(Error::domain(format!("tol_zero {t} must be nonnegative"))),
        None => default_tol_zero(operator_norm(a)),
    };

    let mut constraints: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut pos = Vec::new();
    while constraints.len() < d {
        match deflated_extremal_with_tol(a, Sign::Plus, &constraints, tol)? {
            Extremal::Found(p) => {
                constraints.push(p.vector.clone());
                pos.push(p);
            }
            Extremal::Exhausted { .. } => break,
        }
    }
    let mut neg = Vec::new();
    while constraints.len() < d {
        match deflated_extremal_with_tol(a, Sign::Minus, &constraints, tol)? {
            Extremal::Found(p) => {
                constraints.push(p.vector.clone());
                neg.push(p);
            }
            Extremal::Exhausted { .. } => break,
        }
    }
    pos.sort_by(|x: &EigenPair, y| y.value.total_cmp(&x.value));
    neg.sort_by(|x: &EigenPair, y| x.value.total_cmp(&y.value));
    Ok(SignedSpectrum {
        dim: d,
        zero_mult: d - pos.len() - neg.len(),
        pos,
        neg,
        tol_zero: tol,
    })
}

/// Residual of the spectral expansion of `Ax` for a single vector.
pub fn decomposition_residual(a: &SymmetricOperator, x: &DVector<f64>) -> Result<f64> {
    signed_spectrum(a, None)?.decomposition_residual(a, x)
}
