//! Configuration, experiment drivers and report files behind the CLI.
//!
//! Every command writes a CSV table and a JSON summary into the output
//! directory and returns an exit code: 0 when everything verified, 1 when a
//! certificate or inequality was violated. Configuration problems surface as
//! errors, which the binary maps to exit code 2.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brownian::{self, TailBound};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianMeasure, MomentEstimate, NormSpec};
use crate::perturbation::{
    self, full_report, CheckRecord, PerturbationCase, Profile, Summary, Verdict,
};
use crate::report::{fmt_num, write_json, Table};
use crate::rng::{tags, SeedStream};
use crate::spectral::{oracle_spectrum, signed_spectrum, SymmetricOperator};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Picks the command-line seed over the config seed; one must be present.
pub fn resolve_seed(cli: Option<u64>, config: Option<u64>) -> Result<u64> {
    cli.or(config)
        .ok_or_else(|| Error::Config("a seed is required (--seed or \"seed\" in the config)".into()))
}

pub fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// The command-line directory wins over the config's `output_path`.
pub fn resolve_out(cli: Option<&Path>, config: Option<&Path>) -> PathBuf {
    cli.or(config).unwrap_or(Path::new(".")).to_path_buf()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// bm-converge

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovariancePreset {
    Identity,
    Zero,
}

/// Threshold schedule `δ(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DeltaRule {
    /// `δ = 2^{−exponent·N}`.
    Power { exponent: f64 },
    Fixed { delta: f64 },
}

impl Default for DeltaRule {
    fn default() -> Self {
        DeltaRule::Power { exponent: 0.125 }
    }
}

impl DeltaRule {
    pub fn delta(&self, level: u32) -> f64 {
        match *self {
            DeltaRule::Power { exponent } => (-exponent * level as f64).exp2(),
            DeltaRule::Fixed { delta } => delta,
        }
    }
}

fn default_b() -> u32 {
    1
}
fn default_r() -> f64 {
    4.0
}
fn default_moment_samples() -> usize {
    100_000
}
fn default_support_paths() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BmConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    pub dim: usize,
    #[serde(default)]
    pub covariance: Option<Vec<f64>>,
    #[serde(default)]
    pub preset: Option<CovariancePreset>,
    #[serde(default)]
    pub norm: NormSpec,
    #[serde(default = "default_b")]
    pub b: u32,
    #[serde(rename = "N_min")]
    pub n_min: u32,
    #[serde(rename = "N_max")]
    pub n_max: u32,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default)]
    pub delta_rule: DeltaRule,
    pub trials: usize,
    #[serde(default = "default_moment_samples")]
    pub moment_samples: usize,
    #[serde(default)]
    pub support_check: bool,
    #[serde(default = "default_support_paths")]
    pub support_paths: usize,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl BmConfig {
    pub fn measure(&self) -> Result<GaussianMeasure> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        let cov = match (&self.covariance, self.preset) {
            (Some(c), None) => {
                if c.len() != d * d {
                    return Err(Error::Config(format!(
                        "covariance has {} entries, expected {}",
                        c.len(),
                        d * d
                    )));
                }
                DMatrix::from_row_slice(d, d, c)
            }
            (None, Some(CovariancePreset::Identity)) => DMatrix::identity(d, d),
            (None, Some(CovariancePreset::Zero)) => DMatrix::zeros(d, d),
            _ => return Err(Error::Config("give exactly one of covariance or preset".into())),
        };
        GaussianMeasure::new(cov, self.norm.clone())
    }

    fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::Config(format!(
                "need 1 ≤ N_min ≤ N_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.b == 0 || self.trials == 0 || self.moment_samples == 0 || !(self.r > 0.0) {
            return Err(Error::Config("b, trials, moment_samples and r must be positive".into()));
        }
        if (1..=self.n_max).any(|n| !(self.delta_rule.delta(n) > 0.0)) {
            return Err(Error::Config("delta_rule must give positive thresholds".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BmRow {
    pub level: u32,
    pub delta: f64,
    pub certificate: f64,
    pub empirical_freq: f64,
    pub stderr: f64,
    pub verdict: bool,
    pub support_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BmSummary {
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub moment: MomentEstimate,
    pub moment_used: f64,
    pub max_support_residual: Option<f64>,
}

/// Computes the `bm-converge` table without touching the filesystem.
pub fn brownian_rows(cfg: &BmConfig, seed: u64) -> Result<(Vec<BmRow>, BmSummary)> {
    cfg.validate()?;
    let measure = cfg.measure()?;
    let root = SeedStream::new(seed);
    let moment = measure.empirical_q_moment(cfg.r, cfg.moment_samples, &mut root.domain(tags::MOMENTS).rng(0))?;
    let bound = TailBound::from_estimate(&moment);
    let support = cfg.support_check && measure.rank() < measure.dim();
    if cfg.support_check && !support {
        return Err(Error::Config("support_check needs a rank-deficient covariance".into()));
    }

    let mut rows = Vec::new();
    for level in cfg.n_min..=cfg.n_max {
        let delta = cfg.delta_rule.delta(level);
        let stream = root.domain(tags::PATHS).domain(level as u64);
        let out = brownian::deviation_experiment(&measure, cfg.b, level, delta, bound, cfg.trials, &stream)?;
        let support_residual = if support {
            let s = root.domain(tags::SUPPORT).domain(level as u64);
            let paths = (0..cfg.support_paths as u64)
                .into_par_iter()
                .map(|i| brownian::build_path(&measure, cfg.b, level, &mut s.rng(i)))
                .collect::<Result<Vec<_>>>()?;
            Some(brownian::support_check(&measure, &paths)?.relative())
        } else {
            None
        };
        rows.push(BmRow {
            level,
            delta,
            certificate: out.certificate,
            empirical_freq: out.empirical_freq,
            stderr: out.std_error,
            verdict: out.verdict && support_residual.is_none_or(|r| r <= 1e-10),
            support_residual,
        });
    }
    let passed = rows.iter().filter(|r| r.verdict).count();
    let summary = BmSummary {
        rows: rows.len(),
        passed,
        failed: rows.len() - passed,
        moment,
        moment_used: bound.moment,
        max_support_residual: rows
            .iter()
            .filter_map(|r| r.support_residual)
            .reduce(f64::max),
    };
    Ok((rows, summary))
}

pub fn run_brownian_experiment(cfg: &BmConfig, seed: u64, out: &Path) -> Result<Outcome> {
    let (rows, summary) = brownian_rows(cfg, seed)?;
    prepare_out(out)?;
    let with_support = rows.iter().any(|r| r.support_residual.is_some());
    let mut header = vec!["N", "delta", "certificate", "empirical_freq", "stderr", "verdict"];
    if with_support {
        header.push("support_residual");
    }
    let mut table = Table::new(header);
    for r in &rows {
        let mut row = vec![
            r.level.to_string(),
            fmt_num(r.delta),
            fmt_num(r.certificate),
            fmt_num(r.empirical_freq),
            fmt_num(r.stderr),
            if r.verdict { "pass" } else { "fail" }.to_string(),
        ];
        if with_support {
            row.push(r.support_residual.map(fmt_num).unwrap_or_default());
        }
        table.push(row);
    }
    let csv = out.join("bm_converge.csv");
    let json = out.join("bm_converge.json");
    table.write(&csv)?;
    write_json(&json, &summary)?;
    Ok(Outcome {
        exit_code: if summary.failed == 0 { EXIT_OK } else { EXIT_VIOLATION },
        files: vec![csv, json],
    })
}

// ---------------------------------------------------------------------------
// perturb-suite

fn default_dims() -> Vec<usize> {
    vec![2, 5, 10, 25, 50]
}
fn default_profiles() -> Vec<Profile> {
    Profile::ALL.to_vec()
}
fn default_pairs() -> usize {
    40
}
fn default_tol() -> f64 {
    perturbation::DEFAULT_TOL_FACTOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_profiles")]
    pub profiles: Vec<Profile>,
    #[serde(default = "default_pairs")]
    pub pairs_per_cell: usize,
    /// Relative tolerance factor; checks use `tol·max(‖A1‖, ‖A2‖, 1)`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: None,
            dims: default_dims(),
            profiles: default_profiles(),
            pairs_per_cell: default_pairs(),
            tol: default_tol(),
            output_path: None,
        }
    }
}

/// One generated pair's checks, tagged with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub dim: usize,
    pub profile: Profile,
    pub pair: usize,
    pub check: CheckRecord,
}

/// The pair for `(dim, profile, index)` under `seed`, independent of which
/// other cells are configured.
pub fn suite_pair(seed: u64, dim: usize, profile: Profile, index: usize) -> Result<(SymmetricOperator, SymmetricOperator)> {
    let profile_tag = Profile::ALL.iter().position(|p| *p == profile).unwrap_or(0) as u64;
    let stream = SeedStream::new(seed)
        .domain(tags::OPERATORS)
        .domain(dim as u64)
        .domain(profile_tag);
    perturbation::random_operator_pair(&mut stream.rng(index as u64), dim, profile)
}

pub fn suite_rows(cfg: &SuiteConfig, seed: u64) -> Result<Vec<SuiteRow>> {
    if !(cfg.tol >= 0.0) {
        return Err(Error::Config(format!("tol {} must be nonnegative", cfg.tol)));
    }
    if let Some(d) = cfg.dims.iter().find(|d| **d < 2) {
        return Err(Error::Config(format!("dimension {d} is below 2")));
    }
    let cells: Vec<(usize, Profile, usize)> = cfg
        .dims
        .iter()
        .flat_map(|&d| cfg.profiles.iter().map(move |&p| (d, p)))
        .flat_map(|(d, p)| (0..cfg.pairs_per_cell).map(move |i| (d, p, i)))
        .collect();
    let per_pair = cells
        .par_iter()
        .map(|&(dim, profile, pair)| {
            let (a1, a2) = suite_pair(seed, dim, profile, pair)?;
            let case = PerturbationCase::with_tol_factor(a1, a2, cfg.tol)?;
            Ok(full_report(&case)
                .checks
                .into_iter()
                .map(|check| SuiteRow { dim, profile, pair, check })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_pair.into_iter().flatten().collect())
}

pub fn suite_table(rows: &[SuiteRow]) -> Table {
    let mut t = Table::new([
        "dim", "profile", "pair", "check", "lhs", "rhs", "slack", "verdict", "skipped_reason",
    ]);
    for r in rows {
        let c = &r.check;
        let num = |x: f64| if c.verdict == Verdict::Skipped { String::new() } else { fmt_num(x) };
        t.push(vec![
            r.dim.to_string(),
            r.profile.as_str().to_string(),
            r.pair.to_string(),
            c.name.clone(),
            num(c.lhs),
            num(c.rhs),
            num(c.slack),
            c.verdict.as_str().to_string(),
            c.skipped_reason.clone().unwrap_or_default(),
        ]);
    }
    t
}

pub fn exit_code_for(summary: &Summary) -> i32 {
    if summary.failed == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

/// Writes the check table and summary for already computed rows.
pub fn write_suite(rows: &[SuiteRow], out: &Path, stem: &str) -> Result<Outcome> {
    prepare_out(out)?;
    let summary = Summary::of(rows.iter().map(|r| &r.check));
    let csv = out.join(format!("{stem}.csv"));
    let json = out.join(format!("{stem}.json"));
    suite_table(rows).write(&csv)?;
    write_json(&json, &summary)?;
    Ok(Outcome {
        exit_code: exit_code_for(&summary),
        files: vec![csv, json],
    })
}

pub fn run_perturbation_suite(cfg: &SuiteConfig, seed: u64, out: &Path) -> Result<Outcome> {
    let rows = suite_rows(cfg, seed)?;
    write_suite(&rows, out, "perturb_suite")
}

// ---------------------------------------------------------------------------
// spectrum, weyl-check, hausdorff

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
    pub zero_mult: usize,
    pub norm: f64,
    /// Largest difference to the Jacobi eigenvalues, index by index.
    pub oracle_max_diff: f64,
    pub within_tolerance: bool,
}

pub fn spectrum_report(op: &SymmetricOperator) -> Result<(SpectrumReport, Vec<f64>, Vec<f64>)> {
    let s = signed_spectrum(op, None)?;
    let o = oracle_spectrum(op);
    let mine = s.all_values();
    let diff = mine
        .iter()
        .zip(&o.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let norm = o.norm();
    let report = SpectrumReport {
        pos: s.pos_values(),
        neg: s.neg_values(),
        zero_mult: s.zero_mult,
        norm,
        oracle_max_diff: diff,
        within_tolerance: diff <= 1e-8 * norm.max(f64::MIN_POSITIVE) || diff == 0.0,
    };
    Ok((report, mine, o.values))
}

pub fn run_spectrum(op: &SymmetricOperator, out: &Path) -> Result<Outcome> {
    let (report, mine, oracle) = spectrum_report(op)?;
    prepare_out(out)?;
    let mut t = Table::new(["index", "deflation", "oracle", "diff"]);
    for (i, (a, b)) in mine.iter().zip(&oracle).enumerate() {
        t.push(vec![(i + 1).to_string(), fmt_num(*a), fmt_num(*b), fmt_num((a - b).abs())]);
    }
    let csv = out.join("spectrum.csv");
    let json = out.join("spectrum.json");
    t.write(&csv)?;
    write_json(&json, &report)?;
    Ok(Outcome {
        exit_code: if report.within_tolerance { EXIT_OK } else { EXIT_VIOLATION },
        files: vec![csv, json],
    })
}

fn tagged(dim: usize, checks: Vec<CheckRecord>) -> Vec<SuiteRow> {
    checks
        .into_iter()
        .map(|check| SuiteRow {
            dim,
            profile: Profile::Generic,
            pair: 0,
            check,
        })
        .collect()
}

pub fn weyl_checks(case: &PerturbationCase, p: usize, q: usize) -> Result<Vec<CheckRecord>> {
    if p == 0 || q == 0 {
        return Err(Error::Config("p and q must be at least 1".into()));
    }
    let mut checks = vec![
        perturbation::weyl_plus(case, p, q),
        perturbation::weyl_minus(case, p, q),
    ];
    checks.extend(perturbation::norm_shift_bounds(case, p));
    checks.extend(perturbation::sandwich_bounds(case, p));
    checks.extend(perturbation::two_sided_bounds(case, p));
    Ok(checks)
}

fn write_checks(checks: Vec<CheckRecord>, dim: usize, out: &Path, stem: &str) -> Result<Outcome> {
    prepare_out(out)?;
    let summary = Summary::of(&checks);
    let mut t = Table::new(["check", "lhs", "rhs", "slack", "verdict", "skipped_reason"]);
    for row in tagged(dim, checks) {
        let c = row.check;
        let num = |x: f64| if c.verdict == Verdict::Skipped { String::new() } else { fmt_num(x) };
        t.push(vec![
            c.name.clone(),
            num(c.lhs),
            num(c.rhs),
            num(c.slack),
            c.verdict.as_str().to_string(),
            c.skipped_reason.clone().unwrap_or_default(),
        ]);
    }
    let csv = out.join(format!("{stem}.csv"));
    let json = out.join(format!("{stem}.json"));
    t.write(&csv)?;
    write_json(&json, &summary)?;
    Ok(Outcome {
        exit_code: exit_code_for(&summary),
        files: vec![csv, json],
    })
}

pub fn run_weyl_check(a1: SymmetricOperator, a2: SymmetricOperator, p: usize, q: usize, out: &Path) -> Result<Outcome> {
    let case = PerturbationCase::new(a1, a2)?;
    let checks = weyl_checks(&case, p, q)?;
    write_checks(checks, case.dim(), out, "weyl_check")
}

pub fn run_hausdorff(a1: SymmetricOperator, a2: SymmetricOperator, out: &Path) -> Result<Outcome> {
    let case = PerturbationCase::new(a1, a2)?;
    let mut checks = perturbation::signed_inclusion_suite(&case);
    checks.extend(perturbation::full_spectrum_checks(&case));
    write_checks(checks, case.dim(), out, "hausdorff")
}
