//! Dyadic piecewise-linear random walks, their coarsenings, and the tail
//! certificate for the sup-norm refinement deviation.
//!
//! A level-`N` path on `[0, b]` stores `X(k/2^N) = (G_1 + … + G_k)/√(2^N)` for
//! `k = 0..=b·2^N` with `G_j` i.i.d. draws from a [`GaussianMeasure`], and is
//! linear in between. Coarsening keeps the even grid points, which is exactly
//! the piecewise-linear interpolation on the level-`N−1` grid.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianMeasure, MomentEstimate, NormSpec};
use crate::report::fmt_num;
use crate::rng::{SeedStream, StreamRng};

const MAX_LEVEL: u32 = 40;

fn steps_per_unit(level: u32) -> u64 {
    1u64 << level
}

/// Values of a level-`N` path on the grid `k/2^N`, `k = 0..=b·2^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPath {
    level: u32,
    horizon: u32,
    dim: usize,
    values: Vec<f64>,
}

impl DyadicPath {
    /// Builds a path from row-major grid values; the first point must be 0.
    pub fn from_values(level: u32, horizon: u32, dim: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(horizon, level)?;
        if dim == 0 {
            return Err(Error::domain("path dimension must be positive"));
        }
        let points = horizon as usize * steps_per_unit(level) as usize + 1;
        if values.len() != points * dim {
            return Err(Error::DimensionMismatch {
                expected: points * dim,
                found: values.len(),
            });
        }
        if values[..dim].iter().any(|v| *v != 0.0) {
            return Err(Error::domain("a dyadic path must start at the origin"));
        }
        Ok(Self {
            level,
            horizon,
            dim,
            values,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid points, `b·2^N + 1`.
    pub fn num_points(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / steps_per_unit(self.level) as f64
    }

    /// Evaluates the path at `t ∈ [0, b]` by linear interpolation.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=self.horizon as f64).contains(&t) {
            return Err(Error::domain(format!("time {t} outside [0, {}]", self.horizon)));
        }
        let scaled = t * steps_per_unit(self.level) as f64;
        let last = self.num_points() - 1;
        let k = (scaled.floor() as usize).min(last);
        let frac = scaled - k as f64;
        if frac == 0.0 {
            return Ok(self.point(k).to_vec());
        }
        let (a, b) = (self.point(k), self.point(k + 1));
        Ok(a.iter().zip(b).map(|(x, y)| x + frac * (y - x)).collect())
    }

    /// The same function sampled on the level-`N+1` grid.
    pub fn refine(&self) -> DyadicPath {
        let d = self.dim;
        let n = self.num_points();
        let mut values = Vec::with_capacity((2 * n - 1) * d);
        for k in 0..n {
            if k > 0 {
                let (a, b) = (self.point(k - 1), self.point(k));
                values.extend(a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)));
            }
            values.extend_from_slice(self.point(k));
        }
        DyadicPath {
            level: self.level + 1,
            horizon: self.horizon,
            dim: d,
            values,
        }
    }

    /// Writes `t, x_1, …, x_d` rows for external plotting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=self.dim).map(|i| format!("x_{i}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for k in 0..self.num_points() {
            let row: Vec<String> = std::iter::once(fmt_num(self.time(k)))
                .chain(self.point(k).iter().map(|v| fmt_num(*v)))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn check_shape(horizon: u32, level: u32) -> Result<()> {
    if horizon == 0 {
        return Err(Error::domain("horizon b must be at least 1"));
    }
    if level > MAX_LEVEL {
        return Err(Error::domain(format!("level {level} exceeds {MAX_LEVEL}")));
    }
    Ok(())
}

/// Builds `X_N` on `[0, b]` from `b·2^N` i.i.d. draws of `measure`.
pub fn build_path(
    measure: &GaussianMeasure,
    horizon: u32,
    level: u32,
    rng: &mut StreamRng,
) -> Result<DyadicPath> {
    check_shape(horizon, level)?;
    let d = measure.dim();
    let steps = horizon as usize * steps_per_unit(level) as usize;
    let inv_sqrt = 1.0 / (steps_per_unit(level) as f64).sqrt();
    let mut values = vec![0.0; (steps + 1) * d];
    let mut z = vec![0.0; measure.rank()];
    let mut g = vec![0.0; d];
    let mut sum = vec![0.0; d];
    for k in 1..=steps {
        measure.sample_into(rng, &mut z, &mut g);
        let row = &mut values[k * d..(k + 1) * d];
        for i in 0..d {
            sum[i] += g[i];
            row[i] = sum[i] * inv_sqrt;
        }
    }
    Ok(DyadicPath {
        level,
        horizon,
        dim: d,
        values,
    })
}

/// `Π_{N−1}` applied to a level-`N` path: keep the even grid points.
pub fn coarsen(path: &DyadicPath) -> Result<DyadicPath> {
    if path.level == 0 {
        return Err(Error::domain("cannot coarsen a level-0 path"));
    }
    let d = path.dim;
    let values: Vec<f64> = (0..path.num_points())
        .step_by(2)
        .flat_map(|k| path.point(k).iter().copied())
        .collect();
    Ok(DyadicPath {
        level: path.level - 1,
        horizon: path.horizon,
        dim: d,
        values,
    })
}

/// Exact `sup_{t∈[0,b]} q(X_N(t) − Π_{N−1}X_N(t))`.
///
/// The difference is piecewise linear on the level-`N` grid and vanishes on
/// the even points, so the supremum is attained at an odd grid point, where
/// the coarse path equals the midpoint of its two neighbours.
pub fn sup_deviation(path: &DyadicPath, norm: &NormSpec) -> Result<f64> {
    if path.level == 0 {
        return Err(Error::domain("refinement deviation needs level ≥ 1"));
    }
    let mut diff = vec![0.0; path.dim];
    let mut best = 0.0f64;
    for k in (1..path.num_points()).step_by(2) {
        let (prev, mid, next) = (path.point(k - 1), path.point(k), path.point(k + 1));
        for i in 0..path.dim {
            diff[i] = mid[i] - 0.5 * (prev[i] + next[i]);
        }
        best = best.max(norm.eval(&diff));
    }
    Ok(best)
}

/// `2·max_k q(X(k/2^N) − X((k−1)/2^N))`, the increment bound on the deviation.
pub fn increment_bound(path: &DyadicPath, norm: &NormSpec) -> f64 {
    let mut diff = vec![0.0; path.dim];
    let mut best = 0.0f64;
    for k in 1..path.num_points() {
        let (a, b) = (path.point(k - 1), path.point(k));
        for i in 0..path.dim {
            diff[i] = b[i] - a[i];
        }
        best = best.max(norm.eval(&diff));
    }
    2.0 * best
}

/// Markov bound `b·2^{N(1−r/2)}·(2/δ)^r·m_r` on `Q(sup deviation ≥ δ)`.
pub fn tail_certificate(horizon: u32, level: u32, delta: f64, r: f64, moment: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!("threshold δ = {delta} must be positive")));
    }
    if !(r > 0.0) {
        return Err(Error::domain(format!("moment order r = {r} must be positive")));
    }
    if !(moment >= 0.0) {
        return Err(Error::domain(format!("moment bound {moment} must be nonnegative")));
    }
    let n = level as f64;
    Ok(horizon as f64 * (n * (1.0 - r / 2.0)).exp2() * (2.0 / delta).powf(r) * moment)
}

/// The threshold `δ = 2^{−N/8}` paired with `r = 4`.
pub fn eighth_power_delta(level: u32) -> f64 {
    (-(level as f64) / 8.0).exp2()
}

/// Parameters of the Markov tail bound: the moment order and the moment value
/// plugged into it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub r: f64,
    pub moment: f64,
}

impl TailBound {
    /// Uses the conservative (estimate + 3 s.e.) moment.
    pub fn from_estimate(m: &MomentEstimate) -> Self {
        Self {
            r: m.r,
            moment: m.conservative(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationOutcome {
    pub level: u32,
    pub horizon: u32,
    pub delta: f64,
    pub certificate: f64,
    pub trials: usize,
    pub exceedances: usize,
    pub empirical_freq: f64,
    pub std_error: f64,
    pub verdict: bool,
}

/// Fraction of independent paths with `sup_deviation ≥ δ`, next to the
/// certificate. Passes when the frequency is at most the certificate plus
/// three binomial standard errors. Trial `i` draws from `stream.rng(i)`.
pub fn deviation_experiment(
    measure: &GaussianMeasure,
    horizon: u32,
    level: u32,
    delta: f64,
    bound: TailBound,
    trials: usize,
    stream: &SeedStream,
) -> Result<DeviationOutcome> {
    if trials == 0 {
        return Err(Error::domain("deviation experiment needs at least one trial"));
    }
    if level == 0 {
        return Err(Error::domain("refinement deviation needs level ≥ 1"));
    }
    let certificate = tail_certificate(horizon, level, delta, bound.r, bound.moment)?;
    let exceedances = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let path = build_path(measure, horizon, level, &mut stream.rng(i))?;
            Ok(usize::from(sup_deviation(&path, measure.norm())? >= delta))
        })
        .sum::<Result<usize>>()?;
    let p = exceedances as f64 / trials as f64;
    let std_error = (p * (1.0 - p) / trials as f64).sqrt();
    Ok(DeviationOutcome {
        level,
        horizon,
        delta,
        certificate,
        trials,
        exceedances,
        empirical_freq: p,
        std_error,
        verdict: p <= certificate + 3.0 * std_error,
    })
}

/// Closed interval `[start, end]` with endpoints on a dyadic grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicInterval {
    pub start: f64,
    pub end: f64,
}

impl DyadicInterval {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    fn grid_indices(&self, level: u32, horizon: u32) -> Result<(usize, usize)> {
        let scale = steps_per_unit(level) as f64;
        let (s, t) = (self.start * scale, self.end * scale);
        if !(self.start.is_finite() && self.end.is_finite()) || s.fract() != 0.0 || t.fract() != 0.0
        {
            return Err(Error::domain(format!(
                "interval [{}, {}] is not dyadic at level {level}",
                self.start, self.end
            )));
        }
        if !(self.start >= 0.0 && self.start < self.end && self.end <= horizon as f64) {
            return Err(Error::domain(format!(
                "interval [{}, {}] must satisfy 0 ≤ s < t ≤ {horizon}",
                self.start, self.end
            )));
        }
        Ok((s as usize, t as usize))
    }
}

/// Entrywise estimate with standard errors for a `d×d` second-moment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEstimate {
    pub estimate: DMatrix<f64>,
    pub std_error: DMatrix<f64>,
    pub expected: DMatrix<f64>,
}

impl MatrixEstimate {
    /// Largest `|estimate − expected| / std_error` over all entries.
    pub fn max_z(&self) -> f64 {
        self.estimate
            .iter()
            .zip(self.expected.iter())
            .zip(self.std_error.iter())
            .map(|((e, x), s)| {
                let dev = (e - x).abs();
                if dev == 0.0 {
                    0.0
                } else if *s == 0.0 {
                    f64::INFINITY
                } else {
                    dev / s
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn within(&self, z: f64) -> bool {
        self.max_z() <= z
    }
}

/// Sample cross-covariance of paired vectors, with entrywise standard errors.
fn cross_covariance(xs: &[Vec<f64>], ys: &[Vec<f64>], expected: DMatrix<f64>) -> MatrixEstimate {
    let n = xs.len();
    let d = xs[0].len();
    let mean = |v: &[Vec<f64>], i: usize| v.iter().map(|r| r[i]).sum::<f64>() / n as f64;
    let mx: Vec<f64> = (0..d).map(|i| mean(xs, i)).collect();
    let my: Vec<f64> = (0..d).map(|i| mean(ys, i)).collect();
    let mut estimate = DMatrix::zeros(d, d);
    let mut std_error = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let prods: Vec<f64> = xs
                .iter()
                .zip(ys)
                .map(|(x, y)| (x[a] - mx[a]) * (y[b] - my[b]))
                .collect();
            let m = MomentEstimate::from_values(2.0, &prods);
            estimate[(a, b)] = m.estimate * n as f64 / (n as f64 - 1.0).max(1.0);
            std_error[(a, b)] = m.std_error;
        }
    }
    MatrixEstimate {
        estimate,
        std_error,
        expected,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalStats {
    pub interval: DyadicInterval,
    pub mean: Vec<f64>,
    /// Empirical `Cov(X(t) − X(s))` against `(t − s)·Σ`.
    pub covariance: MatrixEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossStats {
    pub first: usize,
    pub second: usize,
    /// Empirical cross-covariance of the two increments against 0.
    pub covariance: MatrixEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementStats {
    pub intervals: Vec<IntervalStats>,
    pub cross: Vec<CrossStats>,
}

impl IncrementStats {
    pub fn max_z(&self) -> f64 {
        self.intervals
            .iter()
            .map(|s| s.covariance.max_z())
            .chain(self.cross.iter().map(|c| c.covariance.max_z()))
            .fold(0.0, f64::max)
    }
}

/// Empirical laws of increments over disjoint dyadic intervals.
pub fn increment_statistics(
    measure: &GaussianMeasure,
    horizon: u32,
    level: u32,
    intervals: &[DyadicInterval],
    trials: usize,
    stream: &SeedStream,
) -> Result<IncrementStats> {
    check_shape(horizon, level)?;
    if trials < 2 {
        return Err(Error::domain("increment statistics need at least two trials"));
    }
    if intervals.is_empty() {
        return Err(Error::domain("no intervals given"));
    }
    let idx = intervals
        .iter()
        .map(|iv| iv.grid_indices(level, horizon))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..idx.len()).collect();
    order.sort_by_key(|&i| idx[i].0);
    for w in order.windows(2) {
        if idx[w[0]].1 > idx[w[1]].0 {
            return Err(Error::domain(format!(
                "intervals [{}, {}] and [{}, {}] overlap",
                intervals[w[0]].start, intervals[w[0]].end, intervals[w[1]].start, intervals[w[1]].end
            )));
        }
    }

    // increments[trial][interval] = X(t) − X(s)
    let increments: Vec<Vec<Vec<f64>>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let path = build_path(measure, horizon, level, &mut stream.rng(i))?;
            Ok(idx
                .iter()
                .map(|&(s, t)| path.point(t).iter().zip(path.point(s)).map(|(a, b)| a - b).collect())
                .collect())
        })
        .collect::<Result<_>>()?;

    let column = |j: usize| -> Vec<Vec<f64>> { increments.iter().map(|tr| tr[j].clone()).collect() };
    let d = measure.dim();
    let per: Vec<Vec<Vec<f64>>> = (0..intervals.len()).map(column).collect();
    let stats = intervals
        .iter()
        .zip(&per)
        .map(|(iv, xs)| IntervalStats {
            interval: *iv,
            mean: (0..d)
                .map(|a| xs.iter().map(|x| x[a]).sum::<f64>() / trials as f64)
                .collect(),
            covariance: cross_covariance(xs, xs, measure.covariance() * (iv.end - iv.start)),
        })
        .collect();
    let mut cross = Vec::new();
    for i in 0..intervals.len() {
        for j in (i + 1)..intervals.len() {
            cross.push(CrossStats {
                first: i,
                second: j,
                covariance: cross_covariance(&per[i], &per[j], DMatrix::zeros(d, d)),
            });
        }
    }
    Ok(IncrementStats {
        intervals: stats,
        cross,
    })
}

/// Largest Euclidean distance from a grid value to `range(Σ)`, with the
/// largest grid norm as the scale it should be compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportResidual {
    pub max_residual: f64,
    pub max_norm: f64,
}

impl SupportResidual {
    pub fn relative(&self) -> f64 {
        if self.max_norm == 0.0 {
            self.max_residual
        } else {
            self.max_residual / self.max_norm
        }
    }
}

/// Distance of every grid value of `paths` to the support of a degenerate
/// measure.
pub fn support_check(measure: &GaussianMeasure, paths: &[DyadicPath]) -> Result<SupportResidual> {
    let d = measure.dim();
    let rank = measure.rank();
    if rank == d {
        return Err(Error::domain("covariance has full rank; the support check is vacuous"));
    }
    let basis = if rank == 0 {
        DMatrix::zeros(d, 0)
    } else {
        measure.factor().clone().qr().q()
    };
    let mut out = SupportResidual {
        max_residual: 0.0,
        max_norm: 0.0,
    };
    for path in paths {
        if path.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: path.dim(),
            });
        }
        for k in 0..path.num_points() {
            let x = nalgebra::DVectorView::from_slice(path.point(k), d);
            let proj = &basis * (basis.transpose() * x);
            out.max_residual = out.max_residual.max((x - proj).norm());
            out.max_norm = out.max_norm.max(x.norm());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn std1() -> GaussianMeasure {
        GaussianMeasure::identity(1, NormSpec::L2).unwrap()
    }

    #[test]
    fn point_mass_gives_zero_path() {
        let g = GaussianMeasure::point_mass(2, NormSpec::L2).unwrap();
        let p = build_path(&g, 2, 3, &mut SeedStream::new(0).rng(0)).unwrap();
        assert_eq!(p.num_points(), 17);
        assert!(p.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn level_zero_is_one_draw() {
        let g = GaussianMeasure::identity(2, NormSpec::L2).unwrap();
        let p = build_path(&g, 1, 0, &mut SeedStream::new(5).rng(1)).unwrap();
        let draw = g.sample(&mut SeedStream::new(5).rng(1));
        assert_eq!(p.num_points(), 2);
        assert_eq!(p.point(0), &[0.0, 0.0]);
        assert_eq!(p.point(1), draw.as_slice());
        assert!(coarsen(&p).is_err());
        assert!(sup_deviation(&p, &NormSpec::L2).is_err());
    }

    #[test]
    fn interpolation_between_grid_points() {
        let p = DyadicPath::from_values(1, 1, 1, vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(p.eval(0.5).unwrap(), vec![1.0]);
        assert_eq!(p.eval(0.25).unwrap(), vec![0.5]);
        assert_eq!(p.eval(0.75).unwrap(), vec![2.0]);
        assert_eq!(p.eval(1.0).unwrap(), vec![3.0]);
        assert!(p.eval(1.5).is_err());
        assert!(DyadicPath::from_values(1, 1, 1, vec![1.0, 1.0, 3.0]).is_err());
    }

    #[test]
    fn coarsen_keeps_endpoints() {
        let p = DyadicPath::from_values(1, 1, 1, vec![0.0, 0.7, 2.0]).unwrap();
        let c = coarsen(&p).unwrap();
        assert_eq!(c.level(), 0);
        assert_eq!(c.values(), &[0.0, 2.0]);
    }

    #[test]
    fn coarse_linear_paths_have_no_deviation() {
        let coarse = build_path(&std1(), 2, 4, &mut SeedStream::new(9).rng(0)).unwrap();
        let fine = coarse.refine();
        assert_eq!(coarsen(&fine).unwrap(), coarse);
        assert_eq!(sup_deviation(&fine, &NormSpec::L2).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_deviation() {
        let p = DyadicPath::from_values(1, 1, 1, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(sup_deviation(&p, &NormSpec::L2).unwrap(), 1.0);
    }

    #[test]
    fn tail_certificate_values() {
        assert_eq!(tail_certificate(1, 0, 2.0, 1.0, 0.37).unwrap(), 0.37);
        assert_eq!(tail_certificate(3, 7, 0.1, 4.0, 0.0).unwrap(), 0.0);
        for n in 1..20 {
            let got = tail_certificate(2, n, eighth_power_delta(n), 4.0, 3.0).unwrap();
            let closed = 16.0 * 2.0 * 3.0 * (-(n as f64) / 2.0).exp2();
            assert!((got - closed).abs() <= 1e-12 * closed);
        }
        assert!(tail_certificate(1, 1, 0.0, 4.0, 1.0).is_err());
        assert!(tail_certificate(1, 1, 1.0, 0.0, 1.0).is_err());
        assert!(tail_certificate(1, 1, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn tail_certificate_monotone() {
        let c = |b, n, delta, m| tail_certificate(b, n, delta, 4.0, m).unwrap();
        assert!(c(1, 5, 0.5, 1.0) >= c(1, 5, 0.6, 1.0));
        assert!(c(1, 5, 0.5, 1.0) >= c(1, 6, 0.5, 1.0));
        assert!((c(3, 5, 0.5, 1.0) - 3.0 * c(1, 5, 0.5, 1.0)).abs() < 1e-12 * c(3, 5, 0.5, 1.0));
        assert!((c(1, 5, 0.5, 2.5) - 2.5 * c(1, 5, 0.5, 1.0)).abs() < 1e-12 * c(1, 5, 0.5, 2.5));
    }

    proptest! {
        #[test]
        fn deviation_and_coarsening_invariants(seed in any::<u64>(), level in 1u32..7, horizon in 1u32..4, d in 1usize..4) {
            let g = GaussianMeasure::identity(d, NormSpec::Linf).unwrap();
            let p = build_path(&g, horizon, level, &mut SeedStream::new(seed).rng(0)).unwrap();
            for q in [NormSpec::L1, NormSpec::L2, NormSpec::Linf] {
                prop_assert!(sup_deviation(&p, &q).unwrap() <= increment_bound(&p, &q));
            }
            let c = coarsen(&p).unwrap();
            for k in 0..c.num_points() {
                prop_assert_eq!(c.point(k), p.point(2 * k));
            }
            if level >= 2 {
                let cc = coarsen(&c).unwrap();
                for k in 0..cc.num_points() {
                    prop_assert_eq!(cc.point(k), p.point(4 * k));
                }
            }
            let again = build_path(&g, horizon, level, &mut SeedStream::new(seed).rng(0)).unwrap();
            prop_assert_eq!(again, p);
        }
    }

    #[test]
    fn endpoint_variance_is_horizon() {
        let g = GaussianMeasure::identity(2, NormSpec::L2).unwrap();
        let stream = SeedStream::new(31);
        let trials = 10_000;
        let ends: Vec<f64> = (0..trials)
            .map(|i| build_path(&g, 1, 10, &mut stream.rng(i)).unwrap().point(1024)[0])
            .collect();
        let sq: Vec<f64> = ends.iter().map(|x| x * x).collect();
        let m = MomentEstimate::from_values(2.0, &sq);
        assert!((m.estimate - 1.0).abs() <= 5.0 * m.std_error);
    }

    #[test]
    fn deviation_experiment_cases() {
        let stream = SeedStream::new(77);
        let zero = GaussianMeasure::point_mass(1, NormSpec::L2).unwrap();
        let out = deviation_experiment(&zero, 1, 4, 0.5, TailBound { r: 4.0, moment: 0.0 }, 100, &stream).unwrap();
        assert_eq!(out.empirical_freq, 0.0);
        assert_eq!(out.certificate, 0.0);
        assert!(out.verdict);

        let g = std1();
        let bound = TailBound { r: 4.0, moment: 3.0 };
        let out = deviation_experiment(&g, 1, 8, 0.5, bound, 10_000, &stream).unwrap();
        assert!(out.verdict, "{out:?}");
        let out = deviation_experiment(&g, 1, 6, 1e3, bound, 1_000, &stream).unwrap();
        assert_eq!(out.exceedances, 0);

        let a = deviation_experiment(&g, 2, 5, 0.1, bound, 500, &stream).unwrap();
        let b = deviation_experiment(&g, 2, 5, 0.1, bound, 500, &stream).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn increments_over_halves() {
        let g = GaussianMeasure::identity(2, NormSpec::L2).unwrap();
        let halves = [DyadicInterval::new(0.0, 0.5), DyadicInterval::new(0.5, 1.0)];
        let s = increment_statistics(&g, 1, 10, &halves, 10_000, &SeedStream::new(4)).unwrap();
        assert_eq!(s.cross.len(), 1);
        assert!(s.max_z() <= 5.0, "max z {}", s.max_z());
        assert_eq!(s.intervals[0].covariance.expected, DMatrix::identity(2, 2) * 0.5);

        let whole = [DyadicInterval::new(0.0, 1.0)];
        let s = increment_statistics(&g, 1, 10, &whole, 10_000, &SeedStream::new(5)).unwrap();
        assert!(s.intervals[0].covariance.within(5.0));
    }

    #[test]
    fn bad_intervals_rejected() {
        let g = std1();
        let st = SeedStream::new(0);
        let run = |ivs: &[DyadicInterval]| increment_statistics(&g, 1, 3, ivs, 10, &st);
        assert!(run(&[DyadicInterval::new(0.25, 0.25)]).is_err());
        assert!(run(&[DyadicInterval::new(0.1, 0.5)]).is_err());
        assert!(run(&[DyadicInterval::new(0.0, 1.0 / 16.0)]).is_err());
        assert!(run(&[DyadicInterval::new(0.0, 0.5), DyadicInterval::new(0.25, 1.0)]).is_err());
        assert!(run(&[DyadicInterval::new(0.5, 1.5)]).is_err());
        assert!(run(&[DyadicInterval::new(0.5, 1.0), DyadicInterval::new(0.0, 0.5)]).is_ok());
    }

    #[test]
    fn support_of_degenerate_measures() {
        let st = SeedStream::new(12);
        let mut sigma = DMatrix::zeros(2, 2);
        sigma[(0, 0)] = 1.0;
        let g = GaussianMeasure::new(sigma, NormSpec::L2).unwrap();
        let p = build_path(&g, 1, 5, &mut st.rng(0)).unwrap();
        assert!((0..p.num_points()).all(|k| p.point(k)[1] == 0.0));
        assert!(support_check(&g, &[p]).unwrap().max_residual <= 1e-12);

        let v = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let g = GaussianMeasure::new(&v * v.transpose(), NormSpec::L1).unwrap();
        let paths: Vec<_> = (0..5).map(|i| build_path(&g, 2, 4, &mut st.rng(i)).unwrap()).collect();
        let res = support_check(&g, &paths).unwrap();
        assert!(res.relative() <= 1e-12, "{res:?}");

        let full = GaussianMeasure::identity(2, NormSpec::L2).unwrap();
        assert!(support_check(&full, &[]).is_err());
    }

    #[test]
    fn path_csv_layout() {
        let p = DyadicPath::from_values(1, 1, 2, vec![0.0, 0.0, 1.0, -1.0, 0.5, 0.25]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "t,x_1,x_2");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("5.0000000000000000e-1,1.0000000000000000e0,"));
    }
}
