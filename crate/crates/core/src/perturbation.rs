//! Eigenvalue comparison checks for `A = A1 + A2`.
//!
//! Every check is recorded as `lhs ≤ rhs` (or `lhs < rhs` for the open-interval
//! inclusions) together with its slack. Eigenvalues come from the Jacobi
//! oracle. A check whose signed eigenvalues do not all exist is recorded as
//! skipped rather than evaluated.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::spectral::{oracle_spectrum, SymmetricOperator};

pub const DEFAULT_TOL_FACTOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub skipped_reason: Option<String>,
}

impl CheckRecord {
    /// `lhs ≤ rhs + tol`.
    pub fn weak(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let verdict = if lhs <= rhs + tol { Verdict::Pass } else { Verdict::Fail };
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            verdict,
            skipped_reason: None,
        }
    }

    /// `lhs < rhs`.
    pub fn strict(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let verdict = if lhs < rhs { Verdict::Pass } else { Verdict::Fail };
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            verdict,
            skipped_reason: None,
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            verdict: Verdict::Skipped,
            skipped_reason: Some(reason.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub skipped: usize,
    pub failed: usize,
    /// Smallest slack among evaluated checks.
    pub worst_slack: Option<f64>,
}

impl Summary {
    pub fn of<'a>(checks: impl IntoIterator<Item = &'a CheckRecord>) -> Self {
        let mut s = Summary {
            total: 0,
            passed: 0,
            skipped: 0,
            failed: 0,
            worst_slack: None,
        };
        for c in checks {
            s.add(c);
        }
        s
    }

    pub fn add(&mut self, c: &CheckRecord) {
        self.total += 1;
        match c.verdict {
            Verdict::Pass => self.passed += 1,
            Verdict::Fail => self.failed += 1,
            Verdict::Skipped => {
                self.skipped += 1;
                return;
            }
        }
        self.worst_slack = Some(self.worst_slack.map_or(c.slack, |w| w.min(c.slack)));
    }

    pub fn merge(&mut self, other: &Summary) {
        self.total += other.total;
        self.passed += other.passed;
        self.skipped += other.skipped;
        self.failed += other.failed;
        self.worst_slack = match (self.worst_slack, other.worst_slack) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub checks: Vec<CheckRecord>,
}

impl PerturbationReport {
    pub fn summary(&self) -> Summary {
        Summary::of(&self.checks)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail)
    }
}

/// Signed eigenvalues of one operator: positives nonincreasing, negatives
/// nondecreasing, and the full list descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedValues {
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
    pub all: Vec<f64>,
    pub norm: f64,
}

impl SignedValues {
    pub fn of(op: &SymmetricOperator) -> Self {
        let o = oracle_spectrum(op);
        let tol = o.default_tol_zero();
        Self {
            pos: o.positive(tol),
            neg: o.negative(tol),
            norm: o.norm(),
            all: o.values,
        }
    }

    /// The spectrum of `−B`.
    pub fn negated(&self) -> Self {
        Self {
            pos: self.neg.iter().map(|v| -v).collect(),
            neg: self.pos.iter().map(|v| -v).collect(),
            all: self.all.iter().rev().map(|v| -v).collect(),
            norm: self.norm,
        }
    }

    /// `μ_k⁺` (1-based), if it exists.
    pub fn plus(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.pos.get(i).copied())
    }

    /// `μ_k⁻` (1-based), if it exists.
    pub fn minus(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.neg.get(i).copied())
    }
}

/// A triple `A = A1 + A2` with oracle spectra and the comparison tolerance.
#[derive(Debug, Clone)]
pub struct PerturbationCase {
    pub a1: SymmetricOperator,
    pub a2: SymmetricOperator,
    pub a: SymmetricOperator,
    pub s1: SignedValues,
    pub s2: SignedValues,
    pub s: SignedValues,
    /// `tol_factor · max(‖A1‖, ‖A2‖, 1)`.
    pub tol: f64,
}

impl PerturbationCase {
    pub fn new(a1: SymmetricOperator, a2: SymmetricOperator) -> Result<Self> {
        Self::with_tol_factor(a1, a2, DEFAULT_TOL_FACTOR)
    }

    pub fn with_tol_factor(a1: SymmetricOperator, a2: SymmetricOperator, tol_factor: f64) -> Result<Self> {
        if !(tol_factor >= 0.0) {
            return Err(Error::domain(format!("tolerance factor {tol_factor} must be nonnegative")));
        }
        let a = a1.try_add(&a2)?;
        let (s1, s2, s) = (SignedValues::of(&a1), SignedValues::of(&a2), SignedValues::of(&a));
        let tol = tol_factor * s1.norm.max(s2.norm).max(1.0);
        Ok(Self { a1, a2, a, s1, s2, s, tol })
    }

    /// The case `(−A1, −A2)`, recomputed from the negated matrices.
    pub fn negated(&self) -> Result<Self> {
        let factor = self.tol / self.s1.norm.max(self.s2.norm).max(1.0);
        Self::with_tol_factor(self.a1.negated(), self.a2.negated(), factor)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `‖A2‖`.
    pub fn norm_a2(&self) -> f64 {
        self.s2.norm
    }

    /// Inclusion radius `‖A2‖ + tol`.
    pub fn delta(&self) -> f64 {
        self.norm_a2() + self.tol
    }
}

fn missing(list: &[(&str, Option<f64>)]) -> Option<String> {
    let names: Vec<&str> = list.iter().filter(|(_, v)| v.is_none()).map(|(n, _)| *n).collect();
    if names.is_empty() {
        None
    } else {
        Some(format!("missing {}", names.join(", ")))
    }
}

/// `μ⁺_{p+q−1,A} ≤ μ⁺_{p,A1} + μ⁺_{q,A2}`.
pub fn weyl_plus(case: &PerturbationCase, p: usize, q: usize) -> CheckRecord {
    let name = format!("weyl_plus p={p} q={q}");
    let (lhs, r1, r2) = (case.s.plus(p + q - 1), case.s1.plus(p), case.s2.plus(q));
    match (lhs, r1, r2) {
        (Some(l), Some(x), Some(y)) => CheckRecord::weak(name, l, x + y, case.tol),
        _ => CheckRecord::skipped(
            name,
            missing(&[("mu+(A)", lhs), ("mu+(A1)", r1), ("mu+(A2)", r2)]).unwrap_or_default(),
        ),
    }
}

/// `μ⁻_{p+q−1,A} ≥ μ⁻_{p,A1} + μ⁻_{q,A2}`, read directly off the negative
/// eigenvalues.
pub fn weyl_minus(case: &PerturbationCase, p: usize, q: usize) -> CheckRecord {
    let name = format!("weyl_minus p={p} q={q}");
    let (big, r1, r2) = (case.s.minus(p + q - 1), case.s1.minus(p), case.s2.minus(q));
    match (big, r1, r2) {
        (Some(b), Some(x), Some(y)) => CheckRecord::weak(name, x + y, b, case.tol),
        _ => CheckRecord::skipped(
            name,
            missing(&[("mu-(A)", big), ("mu-(A1)", r1), ("mu-(A2)", r2)]).unwrap_or_default(),
        ),
    }
}

/// The negative-side Weyl check obtained by applying [`weyl_plus`] to
/// `(−A1, −A2)` and multiplying through by −1.
pub fn weyl_minus_by_negation(negated: &PerturbationCase, p: usize, q: usize) -> CheckRecord {
    let plus = weyl_plus(negated, p, q);
    let name = format!("weyl_minus_by_negation p={p} q={q}");
    match plus.verdict {
        Verdict::Skipped => CheckRecord {
            name,
            ..plus
        },
        _ => CheckRecord::weak(name, -plus.rhs, -plus.lhs, negated.tol),
    }
}

/// `μ⁺_{p,A} ≤ μ⁺_{p,A1} + ‖A2‖` and `μ⁻_{p,A} ≥ μ⁻_{p,A1} − ‖A2‖`.
pub fn norm_shift_bounds(case: &PerturbationCase, p: usize) -> [CheckRecord; 2] {
    let n2 = case.norm_a2();
    let plus = match (case.s.plus(p), case.s1.plus(p)) {
        (Some(a), Some(a1)) => CheckRecord::weak(format!("norm_shift_plus p={p}"), a, a1 + n2, case.tol),
        (a, a1) => CheckRecord::skipped(
            format!("norm_shift_plus p={p}"),
            missing(&[("mu+(A)", a), ("mu+(A1)", a1)]).unwrap_or_default(),
        ),
    };
    let minus = match (case.s.minus(p), case.s1.minus(p)) {
        (Some(a), Some(a1)) => CheckRecord::weak(format!("norm_shift_minus p={p}"), a1 - n2, a, case.tol),
        (a, a1) => CheckRecord::skipped(
            format!("norm_shift_minus p={p}"),
            missing(&[("mu-(A)", a), ("mu-(A1)", a1)]).unwrap_or_default(),
        ),
    };
    [plus, minus]
}

/// The one-sided sandwiches
/// `−μ⁺_{1,−A2} ≤ μ⁺_{p,A} − μ⁺_{p,A1} ≤ μ⁺_{1,A2}` and
/// `μ⁻_{1,A2} ≤ μ⁻_{p,A} − μ⁻_{p,A1} ≤ −μ⁻_{1,−A2}`, each side guarded
/// separately.
pub fn sandwich_bounds(case: &PerturbationCase, p: usize) -> [CheckRecord; 4] {
    let neg2 = case.s2.negated();
    let side = |name: String, diff: Option<f64>, diff_missing: String, bound: Option<f64>, bound_name: &str, upper: bool| {
        match (diff, bound) {
            (Some(d), Some(b)) if upper => CheckRecord::weak(name, d, b, case.tol),
            (Some(d), Some(b)) => CheckRecord::weak(name, b, d, case.tol),
            (d, b) => {
                let mut why = Vec::new();
                if d.is_none() {
                    why.push(diff_missing);
                }
                if b.is_none() {
                    why.push(format!("missing {bound_name}"));
                }
                CheckRecord::skipped(name, why.join("; "))
            }
        }
    };
    let diff_plus = case.s.plus(p).zip(case.s1.plus(p)).map(|(a, b)| a - b);
    let miss_plus = missing(&[("mu+(A)", case.s.plus(p)), ("mu+(A1)", case.s1.plus(p))]).unwrap_or_default();
    let diff_minus = case.s.minus(p).zip(case.s1.minus(p)).map(|(a, b)| a - b);
    let miss_minus = missing(&[("mu-(A)", case.s.minus(p)), ("mu-(A1)", case.s1.minus(p))]).unwrap_or_default();
    [
        side(format!("sandwich_plus_upper p={p}"), diff_plus, miss_plus.clone(), case.s2.plus(1), "mu+_1(A2)", true),
        side(
            format!("sandwich_plus_lower p={p}"),
            diff_plus,
            miss_plus,
            neg2.plus(1).map(|v| -v),
            "mu+_1(-A2)",
            false,
        ),
        side(format!("sandwich_minus_lower p={p}"), diff_minus, miss_minus.clone(), case.s2.minus(1), "mu-_1(A2)", false),
        side(
            format!("sandwich_minus_upper p={p}"),
            diff_minus,
            miss_minus,
            neg2.minus(1).map(|v| -v),
            "mu-_1(-A2)",
            true,
        ),
    ]
}

/// `|μ±_{p,A} − μ±_{p,A1}| ≤ ‖A2‖`.
pub fn two_sided_bounds(case: &PerturbationCase, p: usize) -> [CheckRecord; 2] {
    let n2 = case.norm_a2();
    let plus = match (case.s.plus(p), case.s1.plus(p)) {
        (Some(a), Some(a1)) => CheckRecord::weak(format!("two_sided_plus p={p}"), (a - a1).abs(), n2, case.tol),
        (a, a1) => CheckRecord::skipped(
            format!("two_sided_plus p={p}"),
            missing(&[("mu+(A)", a), ("mu+(A1)", a1)]).unwrap_or_default(),
        ),
    };
    let minus = match (case.s.minus(p), case.s1.minus(p)) {
        (Some(a), Some(a1)) => CheckRecord::weak(format!("two_sided_minus p={p}"), (a - a1).abs(), n2, case.tol),
        (a, a1) => CheckRecord::skipped(
            format!("two_sided_minus p={p}"),
            missing(&[("mu-(A)", a), ("mu-(A1)", a1)]).unwrap_or_default(),
        ),
    };
    [plus, minus]
}

/// A finite set of reals, optionally with 0 adjoined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSet {
    pub points: Vec<f64>,
    pub augmented: bool,
}

impl SpectrumSet {
    pub fn new(points: Vec<f64>) -> Self {
        Self {
            points,
            augmented: false,
        }
    }

    /// `points ∪ {0}`.
    pub fn with_zero(mut points: Vec<f64>) -> Self {
        points.push(0.0);
        Self {
            points,
            augmented: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.points.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `sup_{s ∈ self} dist(s, other)`: 0 for an empty `self`, `+∞` when only
    /// `other` is empty.
    pub fn directed_distance(&self, other: &SpectrumSet) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if other.is_empty() {
            return f64::INFINITY;
        }
        let t = other.sorted();
        self.points
            .iter()
            .map(|&s| {
                let i = t.partition_point(|&x| x < s);
                let right = t.get(i).map_or(f64::INFINITY, |x| x - s);
                let left = i.checked_sub(1).map_or(f64::INFINITY, |j| s - t[j]);
                left.min(right)
            })
            .fold(0.0, f64::max)
    }
}

/// Whether every point of `s` lies within strict distance `delta` of `t`.
pub fn spectrum_inclusion(s: &SpectrumSet, t: &SpectrumSet, delta: f64) -> Result<bool> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!("inclusion radius {delta} must be positive")));
    }
    Ok(s.directed_distance(t) < delta)
}

/// Hausdorff distance between two nonempty finite sets of reals.
pub fn hausdorff(s: &SpectrumSet, t: &SpectrumSet) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::domain("Hausdorff distance needs two nonempty sets"));
    }
    Ok(s.directed_distance(t).max(t.directed_distance(s)))
}

fn inclusion_check(name: &str, s: &SpectrumSet, t: &SpectrumSet, delta: f64) -> CheckRecord {
    CheckRecord::strict(name, s.directed_distance(t), delta)
}

/// Inclusions of positive and of negative spectra into the other operator's
/// same-sign spectrum with 0 adjoined, in both directions, with radius
/// `‖A2‖ + tol`; the negative side is also re-derived from the positive-side
/// inclusions of `(−A1, −A2)`. Ends with the implied Hausdorff bounds.
pub fn signed_inclusion_suite(case: &PerturbationCase) -> Vec<CheckRecord> {
    let delta = case.delta();
    let pos_a = SpectrumSet::new(case.s.pos.clone());
    let pos_a1 = SpectrumSet::new(case.s1.pos.clone());
    let neg_a = SpectrumSet::new(case.s.neg.clone());
    let neg_a1 = SpectrumSet::new(case.s1.neg.clone());
    let aug = |s: &SpectrumSet| SpectrumSet::with_zero(s.points.clone());

    // negative spectra of A, A1 as positive spectra of −A, −A1
    let flip = |v: &[f64]| SpectrumSet::new(v.iter().map(|x| -x).collect());
    let (pos_neg_a, pos_neg_a1) = (flip(&case.s.neg), flip(&case.s1.neg));

    let mut out = vec![
        inclusion_check("inclusion_plus A in A1", &pos_a, &aug(&pos_a1), delta),
        inclusion_check("inclusion_plus A1 in A", &pos_a1, &aug(&pos_a), delta),
        inclusion_check("inclusion_minus A in A1", &neg_a, &aug(&neg_a1), delta),
        inclusion_check("inclusion_minus A1 in A", &neg_a1, &aug(&neg_a), delta),
        inclusion_check("inclusion_minus_by_negation A in A1", &pos_neg_a, &aug(&pos_neg_a1), delta),
        inclusion_check("inclusion_minus_by_negation A1 in A", &pos_neg_a1, &aug(&pos_neg_a), delta),
    ];
    let hp = aug(&pos_a).directed_distance(&aug(&pos_a1)).max(aug(&pos_a1).directed_distance(&aug(&pos_a)));
    let hm = aug(&neg_a).directed_distance(&aug(&neg_a1)).max(aug(&neg_a1).directed_distance(&aug(&neg_a)));
    out.push(CheckRecord::weak("hausdorff_plus", hp, case.norm_a2(), case.tol));
    out.push(CheckRecord::weak("hausdorff_minus", hm, case.norm_a2(), case.tol));
    out
}

/// Whole-spectrum statements with 0 adjoined to both spectra: the two
/// inclusions with radius `‖A2‖ + tol` and `d_H ≤ ‖A2‖ + tol`.
pub fn full_spectrum_checks(case: &PerturbationCase) -> Vec<CheckRecord> {
    let delta = case.delta();
    let sa = SpectrumSet::with_zero(case.s.all.clone());
    let sa1 = SpectrumSet::with_zero(case.s1.all.clone());
    let h = hausdorff(&sa, &sa1).expect("augmented sets are nonempty");
    vec![
        inclusion_check("inclusion_full A in A1", &sa, &sa1, delta),
        inclusion_check("inclusion_full A1 in A", &sa1, &sa, delta),
        CheckRecord::weak("hausdorff_full", h, case.norm_a2(), case.tol),
    ]
}

/// Every check for one case: all `(p, q)` Weyl instances up to one index past
/// the available eigenvalues (so the existence guards are exercised), the
/// per-index bounds, and the inclusion and Hausdorff checks.
pub fn full_report(case: &PerturbationCase) -> PerturbationReport {
    let d = case.dim();
    let mut checks = Vec::new();
    let reach = |n: usize| (n + 1).min(d);
    for p in 1..=reach(case.s1.pos.len()) {
        for q in 1..=reach(case.s2.pos.len()) {
            if p + q - 1 <= d {
                checks.push(weyl_plus(case, p, q));
            }
        }
    }
    for p in 1..=reach(case.s1.neg.len()) {
        for q in 1..=reach(case.s2.neg.len()) {
            if p + q - 1 <= d {
                checks.push(weyl_minus(case, p, q));
            }
        }
    }
    let top = reach(
        case.s
            .pos
            .len()
            .max(case.s1.pos.len())
            .max(case.s.neg.len())
            .max(case.s1.neg.len()),
    );
    for p in 1..=top {
        checks.extend(norm_shift_bounds(case, p));
        checks.extend(sandwich_bounds(case, p));
        checks.extend(two_sided_bounds(case, p));
    }
    checks.extend(signed_inclusion_suite(case));
    checks.extend(full_spectrum_checks(case));
    PerturbationReport { checks }
}

/// Structure of a generated operator pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Generic,
    SignDefinite,
    RankDeficient,
    NearDegenerate,
    TinyPerturbation,
}

impl Profile {
    pub const ALL: [Profile; 5] = [
        Profile::Generic,
        Profile::SignDefinite,
        Profile::RankDeficient,
        Profile::NearDegenerate,
        Profile::TinyPerturbation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Generic => "generic",
            Profile::SignDefinite => "sign-definite",
            Profile::RankDeficient => "rank-deficient",
            Profile::NearDegenerate => "near-degenerate",
            Profile::TinyPerturbation => "tiny-perturbation",
        }
    }
}

fn gaussian_matrix(rng: &mut StreamRng, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn random_orthogonal(rng: &mut StreamRng, d: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, d).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Symmetric matrix with Frobenius norm 1 (so spectral norm ≤ 1).
fn generic_symmetric(rng: &mut StreamRng, d: usize) -> DMatrix<f64> {
    let g = gaussian_matrix(rng, d);
    let s = (&g + g.transpose()) * 0.5;
    let n = s.norm();
    s / n
}

fn with_eigenvalues(rng: &mut StreamRng, values: &[f64]) -> DMatrix<f64> {
    let q = random_orthogonal(rng, values.len());
    let m = &q * DMatrix::from_diagonal(&DVector::from_row_slice(values)) * q.transpose();
    (&m + m.transpose()) * 0.5
}

fn op(m: DMatrix<f64>) -> Result<SymmetricOperator> {
    SymmetricOperator::new(m)
}

/// Draws a structured pair `(A1, A2)` of `d×d` symmetric operators.
///
/// * generic: independent Gaussian symmetric matrices.
/// * sign-definite: `A1` positive definite.
/// * rank-deficient: `A1` has at least one zero eigenvalue and `A2` has
///   rank below `d`.
/// * near-degenerate: `A1` eigenvalues sit in clusters of width below `1e-6`.
/// * tiny-perturbation: `‖A2‖ ≤ 1e-3·‖A1‖`.
pub fn random_operator_pair(
    rng: &mut StreamRng,
    d: usize,
    profile: Profile,
) -> Result<(SymmetricOperator, SymmetricOperator)> {
    if d < 2 {
        return Err(Error::domain(format!("operator pairs need dimension ≥ 2, got {d}")));
    }
    let away_from_zero = |rng: &mut StreamRng| {
        let mag: f64 = rng.random_range(0.05..1.0);
        if rng.random_bool(0.5) { mag } else { -mag }
    };
    match profile {
        Profile::Generic => {
            let a1 = generic_symmetric(rng, d);
            let c: f64 = rng.random_range(0.05..1.0);
            let a2 = generic_symmetric(rng, d) * c;
            Ok((op(a1)?, op(a2)?))
        }
        Profile::SignDefinite => {
            let values: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..1.0)).collect();
            let a1 = with_eigenvalues(rng, &values);
            let c: f64 = rng.random_range(0.05..1.0);
            let a2 = generic_symmetric(rng, d) * c;
            Ok((op(a1)?, op(a2)?))
        }
        Profile::RankDeficient => {
            let zeros = rng.random_range(1..=d.div_ceil(2));
            let mut v1: Vec<f64> = (0..d).map(|_| away_from_zero(rng)).collect();
            v1[..zeros].fill(0.0);
            let rank2 = rng.random_range(1..d);
            let mut v2: Vec<f64> = (0..d).map(|_| away_from_zero(rng)).collect();
            v2[rank2..].fill(0.0);
            let a1 = with_eigenvalues(rng, &v1);
            let a2 = with_eigenvalues(rng, &v2) * rng.random_range(0.05..1.0);
            Ok((op(a1)?, op(a2)?))
        }
        Profile::NearDegenerate => {
            let clusters = rng.random_range(1..=d.min(3));
            let centers: Vec<f64> = (0..clusters).map(|_| away_from_zero(rng)).collect();
            let values: Vec<f64> = (0..d)
                .map(|i| centers[i % clusters] + rng.random_range(-4.9e-7..4.9e-7))
                .collect();
            let a1 = with_eigenvalues(rng, &values);
            let c: f64 = rng.random_range(0.05..1.0);
            let a2 = generic_symmetric(rng, d) * c;
            Ok((op(a1)?, op(a2)?))
        }
        Profile::TinyPerturbation => {
            let a1 = op(generic_symmetric(rng, d))?;
            let n1 = oracle_spectrum(&a1).norm();
            let c: f64 = rng.random_range(0.1..1.0);
            let a2 = generic_symmetric(rng, d) * (1e-3 * n1 * c);
            Ok((a1, op(a2)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    fn diag(v: &[f64]) -> SymmetricOperator {
        SymmetricOperator::diagonal(v)
    }

    #[test]
    fn weyl_examples() {
        let case = PerturbationCase::new(diag(&[1.0, 0.0]), diag(&[0.0, 1.0])).unwrap();
        let c = weyl_plus(&case, 1, 1);
        assert_eq!(c.verdict, Verdict::Pass);
        assert_eq!((c.lhs, c.rhs), (1.0, 2.0));

        let case = PerturbationCase::new(diag(&[1.0, 0.0]), SymmetricOperator::zeros(2)).unwrap();
        let c = weyl_plus(&case, 1, 1);
        assert_eq!(c.verdict, Verdict::Skipped);
        assert!(c.skipped_reason.unwrap().contains("mu+(A2)"));

        let case = PerturbationCase::new(diag(&[-1.0, 0.0]), diag(&[0.0, -1.0])).unwrap();
        let c = weyl_minus(&case, 1, 1);
        assert_eq!(c.verdict, Verdict::Pass);
        assert_eq!((c.lhs, c.rhs), (-2.0, -1.0));

        let case = PerturbationCase::new(diag(&[2.0, 1.0]), diag(&[0.0, -1.0])).unwrap();
        assert_eq!(weyl_minus(&case, 1, 1).verdict, Verdict::Skipped);
    }

    #[test]
    fn commuting_shift_has_zero_slack() {
        let a1 = diag(&[3.0, 1.0, -2.0, 0.5]);
        let eps = 0.25;
        let a2 = SymmetricOperator::new(DMatrix::identity(4, 4) * eps).unwrap();
        let case = PerturbationCase::new(a1, a2).unwrap();
        for p in 1..=3 {
            let [plus, _] = norm_shift_bounds(&case, p);
            assert_eq!(plus.verdict, Verdict::Pass);
            assert!(plus.slack.abs() <= 1e-12, "{plus:?}");
        }
    }

    #[test]
    fn zero_perturbation_is_tight_everywhere() {
        let a1 = diag(&[3.0, 1.0, -2.0]);
        let case = PerturbationCase::new(a1, SymmetricOperator::zeros(3)).unwrap();
        let [plus, minus] = norm_shift_bounds(&case, 1);
        assert_eq!(plus.slack, 0.0);
        assert_eq!(minus.slack, 0.0);
        for c in two_sided_bounds(&case, 1) {
            assert_eq!(c.lhs, 0.0);
        }
        for c in signed_inclusion_suite(&case) {
            assert_eq!(c.verdict, Verdict::Pass, "{c:?}");
        }
    }

    #[test]
    fn negative_definite_base_keeps_positive_part_small() {
        let mut rng = SeedStream::new(3).rng(0);
        for _ in 0..20 {
            let (a1, a2) = random_operator_pair(&mut rng, 5, Profile::SignDefinite).unwrap();
            let case = PerturbationCase::new(a1.negated(), a2).unwrap();
            assert!(case.s1.pos.is_empty());
            let s = SpectrumSet::new(case.s.pos.clone());
            assert!(spectrum_inclusion(&s, &SpectrumSet::with_zero(vec![]), case.delta()).unwrap());
        }
    }

    #[test]
    fn inclusion_and_hausdorff_examples() {
        let empty = SpectrumSet::new(vec![]);
        let zero = SpectrumSet::new(vec![0.0]);
        assert!(spectrum_inclusion(&empty, &zero, 0.1).unwrap());
        assert!(!spectrum_inclusion(&SpectrumSet::new(vec![1.0]), &zero, 0.5).unwrap());
        assert!(spectrum_inclusion(&zero, &zero, 0.0).is_err());
        let s = SpectrumSet::new(vec![0.0, 1.0]);
        assert_eq!(hausdorff(&s, &s).unwrap(), 0.0);
        assert_eq!(hausdorff(&s, &zero).unwrap(), 1.0);
        assert!(hausdorff(&s, &empty).is_err());
        assert!(SpectrumSet::with_zero(vec![2.0]).points.contains(&0.0));
    }

    fn brute_directed(s: &[f64], t: &[f64]) -> f64 {
        s.iter()
            .map(|a| t.iter().map(|b| (a - b).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }

    #[test]
    fn hausdorff_matches_brute_force_and_is_a_metric() {
        let mut rng = SeedStream::new(21).rng(0);
        for _ in 0..300 {
            let n = rng.random_range(1..8);
            let mut set = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-3.0..3.0)).collect() };
            let (x, y, z) = (set(n), set(4), set(6));
            let (sx, sy, sz) = (SpectrumSet::new(x.clone()), SpectrumSet::new(y.clone()), SpectrumSet::new(z));
            let h = hausdorff(&sx, &sy).unwrap();
            assert_eq!(h, brute_directed(&x, &y).max(brute_directed(&y, &x)));
            assert_eq!(h, hausdorff(&sy, &sx).unwrap());
            let via = hausdorff(&sx, &sz).unwrap() + hausdorff(&sz, &sy).unwrap();
            assert!(h <= via + 1e-15);
        }
    }

    #[test]
    fn generator_profiles() {
        let mut rng = SeedStream::new(5).rng(0);
        for d in [2usize, 3, 7] {
            let (a1, _) = random_operator_pair(&mut rng, d, Profile::SignDefinite).unwrap();
            assert!(SignedValues::of(&a1).neg.is_empty());
            let (a1, a2) = random_operator_pair(&mut rng, d, Profile::RankDeficient).unwrap();
            let o = oracle_spectrum(&a1);
            assert!(o.zero_mult(o.default_tol_zero()) >= 1);
            let o2 = oracle_spectrum(&a2);
            assert!(o2.zero_mult(o2.default_tol_zero()) >= 1);
            let (a1, a2) = random_operator_pair(&mut rng, d, Profile::TinyPerturbation).unwrap();
            assert!(oracle_spectrum(&a2).norm() <= 1e-3 * oracle_spectrum(&a1).norm());
            let (a1, _) = random_operator_pair(&mut rng, d, Profile::NearDegenerate).unwrap();
            let v = oracle_spectrum(&a1).values;
            // every eigenvalue has a cluster partner within 1e-6 unless alone
            if d > 3 {
                assert!(v.iter().all(|x| v.iter().filter(|y| (x - *y).abs() < 1e-6).count() >= 2));
            }
        }
        assert!(random_operator_pair(&mut rng, 1, Profile::Generic).is_err());
    }

    #[test]
    fn full_report_on_random_pairs_has_no_failures() {
        let stream = SeedStream::new(99);
        for (i, profile) in Profile::ALL.into_iter().enumerate() {
            for d in [2usize, 4, 9] {
                let (a1, a2) = random_operator_pair(&mut stream.rng((i * 10 + d) as u64), d, profile).unwrap();
                let case = PerturbationCase::new(a1, a2).unwrap();
                let report = full_report(&case);
                let s = report.summary();
                assert_eq!(s.failed, 0, "{profile:?} d={d}: {:?}", report.failures().next());
                assert!(s.passed > 0);
            }
        }
    }

    #[test]
    fn weyl_minus_agrees_with_negated_plus() {
        let stream = SeedStream::new(7);
        for i in 0..30 {
            let (a1, a2) = random_operator_pair(&mut stream.rng(i), 5, Profile::Generic).unwrap();
            let case = PerturbationCase::new(a1, a2).unwrap();
            let neg = case.negated().unwrap();
            for p in 1..=5 {
                for q in 1..=(6 - p) {
                    let direct = weyl_minus(&case, p, q);
                    let via = weyl_minus_by_negation(&neg, p, q);
                    assert_eq!(direct.verdict, via.verdict);
                    if direct.verdict != Verdict::Skipped {
                        assert!((direct.lhs - via.lhs).abs() <= 1e-12);
                        assert!((direct.rhs - via.rhs).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn summary_counts() {
        let checks = vec![
            CheckRecord::weak("a", 1.0, 2.0, 0.0),
            CheckRecord::weak("b", 3.0, 2.0, 0.0),
            CheckRecord::skipped("c", "missing"),
        ];
        let s = Summary::of(&checks);
        assert_eq!((s.total, s.passed, s.failed, s.skipped), (3, 1, 1, 1));
        assert_eq!(s.worst_slack, Some(-1.0));
        assert_eq!(CheckRecord::strict("d", 1.0, 1.0).verdict, Verdict::Fail);
    }
}
