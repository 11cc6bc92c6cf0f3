//! Scenario execution.
//!
//! Seeds: the scenario seed `s` gives `base = (s, 0)`; sample size `n` uses
//! `base.child(n)`, outer repetition `r` uses `base.child(n).child(r)` with
//! children 0 (data), 1 (bootstrap), 2 (second bootstrap / mean gap) and 3
//! (per-dataset oracle and limit samplers). Oracle and fresh-law passes use
//! their own children of `base.child(n)`, never shared with interval passes.
//! Every loop is indexed by these seeds, so the output does not depend on
//! the thread count.

use std::time::Instant;

use bootlab_core::diagnostics::{
    conditional_mean_gap, first_order_stability, log_log_slope, uniform_perturbation_sensitivity,
    Replacement,
};
use bootlab_core::intervals::{
    bootstrap_law, confidence_interval, pvalue_from_reference, CiMethod, CiRequest,
};
use bootlab_core::metric::{df_lower, ks_distance, ks_uniform};
use bootlab_core::resample::{column_mean, draw_swaps, permute_pairs, resample_empirical, shift};
use bootlab_core::statistics::{eval_stacked, KernelGram};
use bootlab_core::{Dataset, EmpiricalLaw, ResampleMode, ResamplePlan, RngSeed, StatisticSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    Estimand, LawComparison, LawResample, MethodSpec, ScenarioConfig, Study,
};
use crate::distribution::DistributionSpec;
use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

const ORACLE: u64 = u64::MAX - 1;
const FRESH: u64 = u64::MAX - 2;
const FRESH_WEIGHTS: u64 = u64::MAX - 3;
const STABILITY: u64 = u64::MAX - 4;
/// Fixed root of the random directions in multivariate offset grids.
const GRID_SEED: u64 = 0x6772_6964;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    /// One interval (or p-value) on one dataset.
    Rep,
    /// A comparison of two laws.
    Law,
    /// A stability diagnostic at one sample size.
    Stability,
}

/// One CSV row. Column order is the field order and is versioned by
/// [`SCHEMA_VERSION`]; absent values are empty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub schema_version: u32,
    pub scenario: String,
    pub record: RecordKind,
    pub n: usize,
    pub method: String,
    pub rep: Option<usize>,
    pub center: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub estimand: Option<f64>,
    pub covered: Option<bool>,
    /// Bootstrap replicates strictly below the observed statistic.
    pub boot_below: Option<usize>,
    pub p_value: Option<f64>,
    pub mean_gap: Option<f64>,
    pub mean_gap_se: Option<f64>,
    pub ks: Option<f64>,
    /// KS distance to the closed-form limit sampler.
    pub ks_limit: Option<f64>,
    /// KS distance to the limit sampler without the sample-mean term.
    pub ks_mean_free: Option<f64>,
    pub df_lower: Option<f64>,
    pub first_order_l3: Option<f64>,
    pub r_nb: Option<f64>,
    pub r_nb_se: Option<f64>,
}

impl Record {
    fn new(scenario: &str, record: RecordKind, n: usize, method: &str, rep: Option<usize>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.to_string(),
            record,
            n,
            method: method.to_string(),
            rep,
            center: None,
            lo: None,
            hi: None,
            estimand: None,
            covered: None,
            boot_below: None,
            p_value: None,
            mean_gap: None,
            mean_gap_se: None,
            ks: None,
            ks_limit: None,
            ks_mean_free: None,
            df_lower: None,
            first_order_l3: None,
            r_nb: None,
            r_nb_se: None,
        }
    }
}

/// Aggregates of the records sharing one `(n, method)`. Law-level values
/// (`ks`, `df_lower`, ...) are means over the law records of the group.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: usize,
    pub method: String,
    pub reps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub df_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_mean_free: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_gap: Option<f64>,
    /// Fraction of datasets whose mean gap exceeds three standard errors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_flagged_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boot_below_total: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_order_l3: Option<f64>,
    /// Log-log slope of `first_order_l3` against `n` over the diagnostic grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_nb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_nb_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub study: String,
    pub groups: Vec<GroupSummary>,
    pub config: ScenarioConfig,
    /// Excluded from any determinism guarantee.
    pub wall_time_secs: f64,
    #[serde(skip)]
    pub records: Vec<Record>,
}

impl ScenarioReport {
    pub fn group(&self, n: usize, method: &str) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.n == n && g.method == method)
    }
}

fn par_map<T: Send>(count: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..count).into_par_iter().map(f).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn default_gamma(n: usize) -> f64 {
    (n as f64).ln() / (n as f64).sqrt()
}

fn default_robust_radius(n: usize) -> f64 {
    2.0 / (n as f64).sqrt()
}

/// Offsets of norm at most `radius`: for one column, `points` evenly spaced
/// values on `[-r, r]` (the single point 0 when `points = 1`); otherwise the
/// origin, `±r e_k` and `4d` random directions of length `r`.
pub fn offset_grid(d: usize, radius: f64, points: usize) -> Vec<Vec<f64>> {
    if d == 1 {
        return (0..points)
            .map(|k| {
                if points == 1 {
                    vec![0.0]
                } else {
                    vec![radius * (-1.0 + 2.0 * k as f64 / (points - 1) as f64)]
                }
            })
            .collect();
    }
    let mut grid = vec![vec![0.0; d]];
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[k] = sign * radius;
            grid.push(v);
        }
    }
    let mut s = RngSeed::new(GRID_SEED, d as u64).open();
    for _ in 0..4 * d {
        let z: Vec<f64> = (0..d).map(|_| s.normal()).collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        // Scale slightly inside the ball so rounding never leaves it.
        grid.push(z.iter().map(|v| v * radius / norm * (1.0 - 1e-12)).collect());
    }
    grid
}

/// The interval construction for sample size `n`.
pub fn resolve_method(method: &MethodSpec, dist: &DistributionSpec, n: usize) -> CiMethod {
    let d = dist.dims();
    match method {
        MethodSpec::PlainQuantile => CiMethod::PlainQuantile,
        MethodSpec::Centered => CiMethod::Centered { known_mean: dist.mean() },
        MethodSpec::Corrected { holder_c, holder_alpha, gauss_draws } => CiMethod::Corrected {
            holder_c: *holder_c,
            holder_alpha: *holder_alpha,
            gauss_draws: *gauss_draws,
        },
        MethodSpec::ShiftedSup { gamma, grid_points } => {
            let gamma = gamma.unwrap_or_else(|| default_gamma(n));
            CiMethod::ShiftedSup { gamma, grid: offset_grid(d, gamma, *grid_points) }
        }
        MethodSpec::Robust { radius, grid_points } => {
            let r = radius.unwrap_or_else(|| default_robust_radius(n));
            let mu = dist.mean();
            let translation_set = offset_grid(d, r, *grid_points)
                .into_iter()
                .map(|o| o.iter().zip(&mu).map(|(a, m)| a + m).collect())
                .collect();
            CiMethod::Robust { translation_set }
        }
    }
}

/// The statistic on `count` fresh datasets of size `n`.
pub fn fresh_values(cfg: &ScenarioConfig, n: usize, count: usize, seed: RngSeed) -> Result<Vec<f64>> {
    par_map(count, |j| {
        Ok(cfg.statistic.eval(&cfg.distribution.generate(n, seed.replicate(j as u64))?)?)
    })
}

/// Runs the configured study and the stability diagnostics.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let start = Instant::now();
    let base = RngSeed::new(cfg.seed, 0);
    let mut records = Vec::new();
    for &n in &cfg.n_grid {
        let nseed = base.child(n as u64);
        let mut batch = match &cfg.study {
            Study::Coverage { .. } => coverage_study(cfg, n, nseed)?,
            Study::StackedLaw { limit_check } => stacked_study(cfg, n, nseed, false, *limit_check)?,
            Study::DoubleBootstrap => stacked_study(cfg, n, nseed, true, false)?,
            Study::KernelTest { shifts } => kernel_study(cfg, n, nseed, shifts)?,
        };
        records.append(&mut batch);
    }
    records.append(&mut stability_records(cfg, base.child(STABILITY))?);
    let groups = summarize(cfg, &records);
    Ok(ScenarioReport {
        schema_version: SCHEMA_VERSION,
        scenario: cfg.name.clone(),
        seed: cfg.seed,
        study: cfg.study.name().to_string(),
        groups,
        config: cfg.clone(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        records,
    })
}

/// [`run_scenario`] with the double-bootstrap study of a stacked-risk scenario.
pub fn run_double_bootstrap_stacked(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut cfg = cfg.clone();
    cfg.study = Study::DoubleBootstrap;
    run_scenario(&cfg)
}

/// [`run_scenario`] with the kernel two-sample test study; keeps the
/// configured shifts when the scenario already is a kernel test.
pub fn run_kernel_test_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut cfg = cfg.clone();
    if !matches!(cfg.study, Study::KernelTest { .. }) {
        cfg.study = Study::KernelTest { shifts: Vec::new() };
    }
    run_scenario(&cfg)
}

fn coverage_study(cfg: &ScenarioConfig, n: usize, nseed: RngSeed) -> Result<Vec<Record>> {
    let Study::Coverage { estimand, law_comparison, law_resample, law_reps, one_sided, mean_gap_replicates } =
        &cfg.study
    else {
        unreachable!("coverage_study called for another study");
    };
    let (stat, dist, b) = (&cfg.statistic, &cfg.distribution, cfg.replicates);
    let methods: Vec<CiMethod> = cfg.methods.iter().map(|m| resolve_method(m, dist, n)).collect();
    let fixed_estimand = match estimand {
        Estimand::OracleMean => Some(mean(&fresh_values(cfg, n, 4 * b, nseed.child(ORACLE))?)),
        Estimand::PlugInPopulationMean => {
            let sums: Vec<f64> = dist.mean().iter().map(|m| m * n as f64).collect();
            Some(stat.eval_from_sums(&sums, n)?)
        }
        Estimand::ConditionalOracleMean => None,
    };
    let fresh_law = match law_comparison {
        LawComparison::None => None,
        _ => Some(fresh_values(cfg, n, b, nseed.child(FRESH))?),
    };
    let per_rep = par_map(cfg.outer_reps, |r| {
        let rseed = nseed.child(r as u64);
        let data = dist.generate(n, rseed.child(0))?;
        let ci_seed = rseed.child(1);
        let target = match fixed_estimand {
            Some(v) => v,
            None => conditional_oracle(cfg, &data, 4 * b, rseed.child(3))?,
        };
        let gap = match mean_gap_replicates {
            0 => None,
            &m => Some(conditional_mean_gap(stat, &data, dist, m, rseed.child(2))?),
        };
        let below = if *one_sided {
            let law = bootstrap_law(stat, &data, &ResamplePlan::empirical(b), ci_seed)?;
            let g = stat.eval(&data)?;
            Some(law.raw.iter().filter(|&&v| v < g).count())
        } else {
            None
        };
        let mut out = Vec::with_capacity(methods.len() + 1);
        for (spec, method) in cfg.methods.iter().zip(&methods) {
            let ci = confidence_interval(&CiRequest {
                statistic: stat.clone(),
                data: data.clone(),
                replicates: b,
                alpha: cfg.alpha,
                method: method.clone(),
                seed: ci_seed,
            })?;
            let mut rec = Record::new(&cfg.name, RecordKind::Rep, n, spec.name(), Some(r));
            rec.center = Some(ci.center);
            rec.lo = Some(ci.lo);
            rec.hi = Some(ci.hi);
            rec.estimand = Some(target);
            rec.covered = Some(ci.contains(target));
            rec.boot_below = below;
            rec.mean_gap = gap.map(|g| g.value);
            rec.mean_gap_se = gap.map(|g| g.se);
            out.push(rec);
        }
        if let (Some(fresh), true) = (&fresh_law, r < *law_reps) {
            let mode = match law_resample {
                LawResample::Empirical => ResampleMode::Empirical,
                LawResample::Centered => ResampleMode::Centered(dist.mean()),
            };
            let law = bootstrap_law(stat, &data, &ResamplePlan::new(mode, b), ci_seed)?;
            let (boot, fresh) = match law_comparison {
                LawComparison::Centered => {
                    let fm = mean(fresh);
                    (law.centered.clone(), EmpiricalLaw::new(fresh.iter().map(|v| v - fm).collect())?)
                }
                _ => (EmpiricalLaw::new(law.raw.clone())?, EmpiricalLaw::new(fresh.clone())?),
            };
            let mut rec = Record::new(&cfg.name, RecordKind::Law, n, "law", Some(r));
            rec.ks = Some(ks_distance(&boot, &fresh));
            rec.df_lower = Some(df_lower(&boot, &fresh));
            out.push(rec);
        }
        Ok(out)
    })?;
    Ok(per_rep.into_iter().flatten().collect())
}

/// `E[g(Y - μ + X̄) | X]` from `count` fresh datasets.
fn conditional_oracle(cfg: &ScenarioConfig, data: &Dataset, count: usize, seed: RngSeed) -> Result<f64> {
    let mu = cfg.distribution.mean();
    let offset: Vec<f64> = column_mean(data).iter().zip(&mu).map(|(x, m)| x - m).collect();
    let values = par_map(count, |j| {
        let y = cfg.distribution.generate(data.rows(), seed.replicate(j as u64))?;
        Ok(cfg.statistic.eval(&shift(&y, &offset)?)?)
    })?;
    Ok(mean(&values))
}

/// Stacked risk of weights fitted on `weights` and evaluated on `eval`,
/// minus `√|eval|` times its expectation under a law with moments `(m1, m2)`.
pub fn centered_stacked_risk(
    spec: &StatisticSpec,
    weights: &Dataset,
    eval: &Dataset,
    m1: f64,
    m2: f64,
) -> Result<f64> {
    let StatisticSpec::StackedRisk { loss, .. } = spec else {
        return Err(HarnessError::Config(format!("{} is not a stacked risk", spec.name())));
    };
    let out = eval_stacked(weights, eval, spec)?;
    Ok(out.risk - (eval.rows() as f64).sqrt() * loss.expected(out.prediction, m1, m2))
}

/// Rows used by the stacked studies: the `n - ⌊n/2⌋` observations left
/// after holding out `m = ⌊n/2⌋`.
pub fn stacked_rows(n: usize) -> usize {
    n - n / 2
}

fn stacked_study(
    cfg: &ScenarioConfig,
    n: usize,
    nseed: RngSeed,
    double: bool,
    limit_check: bool,
) -> Result<Vec<Record>> {
    let (stat, dist, b) = (&cfg.statistic, &cfg.distribution, cfg.replicates);
    let rows = stacked_rows(n);
    let (mu1, mu2) = (dist.mean()[0], dist.second_moment()[0]);
    let (fseed, wseed) = (nseed.child(FRESH), nseed.child(FRESH_WEIGHTS));
    let fresh_single = EmpiricalLaw::new(par_map(b, |j| {
        let y = dist.generate(rows, fseed.replicate(j as u64))?;
        centered_stacked_risk(stat, &y, &y, mu1, mu2)
    })?)?;
    let fresh_double = if double {
        Some(EmpiricalLaw::new(par_map(b, |j| {
            let y = dist.generate(rows, fseed.replicate(j as u64))?;
            let w = dist.generate(rows, wseed.replicate(j as u64))?;
            centered_stacked_risk(stat, &w, &y, mu1, mu2)
        })?)?)
    } else {
        None
    };
    let per_rep = par_map(cfg.outer_reps, |r| {
        let rseed = nseed.child(r as u64);
        let x = dist.generate(rows, rseed.child(0))?;
        let m1 = mean(x.values());
        let m2 = x.values().iter().map(|v| v * v).sum::<f64>() / rows as f64;
        let (s1, s2) = (rseed.child(1), rseed.child(2));
        let single: Vec<f64> = (0..b as u64)
            .map(|j| {
                let z = resample_empirical(&x, s1.replicate(j));
                centered_stacked_risk(stat, &z, &z, m1, m2)
            })
            .collect::<Result<_>>()?;
        let single = EmpiricalLaw::new(single)?;
        let mut rec = Record::new(&cfg.name, RecordKind::Law, n, "single", Some(r));
        rec.center = Some(centered_stacked_risk(stat, &x, &x, mu1, mu2)?);
        rec.ks = Some(ks_distance(&single, &fresh_single));
        rec.df_lower = Some(df_lower(&single, &fresh_single));
        if limit_check {
            // Z₁ + Z₂ tanh(4Z₂ + 4√n X̄), (Z₁, Z₂) ~ N(0, diag(4, 1)), and the
            // same expression without the sample-mean term.
            let shift = 4.0 * (n as f64).sqrt() * m1;
            let ls = rseed.child(3);
            let (with_mean, free): (Vec<f64>, Vec<f64>) = (0..b as u64)
                .map(|j| {
                    let mut s = ls.replicate(j).open();
                    let (z1, z2) = (2.0 * s.normal(), s.normal());
                    (z1 + z2 * (4.0 * z2 + shift).tanh(), z1 + z2 * (4.0 * z2).tanh())
                })
                .unzip();
            rec.ks_limit = Some(ks_distance(&single, &EmpiricalLaw::new(with_mean)?));
            rec.ks_mean_free = Some(ks_distance(&single, &EmpiricalLaw::new(free)?));
        }
        let mut out = vec![rec];
        if let Some(fresh) = &fresh_double {
            let values: Vec<f64> = (0..b as u64)
                .map(|j| {
                    let z1 = resample_empirical(&x, s1.replicate(j));
                    let z2 = resample_empirical(&x, s2.replicate(j));
                    centered_stacked_risk(stat, &z2, &z1, m1, m2)
                })
                .collect::<Result<_>>()?;
            let law = EmpiricalLaw::new(values)?;
            let mut rec = Record::new(&cfg.name, RecordKind::Law, n, "double", Some(r));
            rec.ks = Some(ks_distance(&law, fresh));
            rec.df_lower = Some(df_lower(&law, fresh));
            out.push(rec);
        }
        Ok(out)
    })?;
    Ok(per_rep.into_iter().flatten().collect())
}

fn kernel_study(cfg: &ScenarioConfig, n: usize, nseed: RngSeed, shifts: &[f64]) -> Result<Vec<Record>> {
    let StatisticSpec::KernelSoftmaxMmd { kernels, beta, lambda } = &cfg.statistic else {
        unreachable!("validated kernel statistic");
    };
    let DistributionSpec::TwoSampleGaussian { shift: own, dims } = cfg.distribution else {
        unreachable!("validated two-sample distribution");
    };
    let shifts = if shifts.is_empty() { vec![own] } else { shifts.to_vec() };
    let mut out = Vec::new();
    for delta in shifts {
        let dist = DistributionSpec::TwoSampleGaussian { shift: delta, dims };
        let method = format!("delta={delta}");
        let mut reps = par_map(cfg.outer_reps, |r| {
            let rseed = nseed.child(r as u64);
            let data = dist.generate(n, rseed.child(0))?;
            let observed = cfg.statistic.eval(&data)?;
            let permuted = permute_pairs(&data, rseed.child(1))?;
            let gram = KernelGram::new(&permuted, kernels)?;
            let boot = rseed.child(2);
            let reference = (0..cfg.replicates as u64)
                .into_par_iter()
                .map(|j| {
                    let (idx, swaps) = draw_swaps(n, boot.replicate(j));
                    Ok(n as f64 * gram.components_indexed(&idx, Some(&swaps), *beta, *lambda)?.t_hat)
                })
                .collect::<Result<Vec<f64>>>()?;
            let mut rec = Record::new(&cfg.name, RecordKind::Rep, n, &method, Some(r));
            rec.center = Some(observed);
            rec.p_value = Some(pvalue_from_reference(observed, &reference)?);
            Ok(rec)
        })?;
        let p: Vec<f64> = reps.iter().filter_map(|r| r.p_value).collect();
        let mut law = Record::new(&cfg.name, RecordKind::Law, n, &method, None);
        law.ks = Some(ks_uniform(&p));
        out.append(&mut reps);
        out.push(law);
    }
    Ok(out)
}

fn replacement_name(r: Replacement) -> &'static str {
    match r {
        Replacement::Zero => "first_order_zero",
        Replacement::IndependentCopy => "first_order_independent_copy",
    }
}

fn stability_records(cfg: &ScenarioConfig, seed: RngSeed) -> Result<Vec<Record>> {
    let diag = &cfg.diagnostics;
    if diag.is_empty() {
        return Ok(Vec::new());
    }
    let grid = diag.n_grid.as_ref().unwrap_or(&cfg.n_grid);
    let mut out = Vec::new();
    for &n in grid {
        let nseed = seed.child(n as u64);
        if let Some(fo) = &diag.first_order {
            for (k, &rep) in fo.replacements.iter().enumerate() {
                let l3 = first_order_stability(
                    &cfg.statistic,
                    &cfg.distribution,
                    n,
                    fo.trials,
                    rep,
                    nseed.child(k as u64),
                )?;
                let mut rec = Record::new(&cfg.name, RecordKind::Stability, n, replacement_name(rep), None);
                rec.first_order_l3 = Some(l3);
                out.push(rec);
            }
        }
        if let Some(s) = &diag.sensitivity {
            let est = uniform_perturbation_sensitivity(
                &cfg.statistic,
                &cfg.distribution,
                n,
                s.radius,
                s.grid_size,
                s.trials,
                s.inner,
                nseed.child(100),
            )?;
            let mut rec = Record::new(&cfg.name, RecordKind::Stability, n, "sensitivity", None);
            rec.r_nb = Some(est.value);
            rec.r_nb_se = Some(est.se);
            out.push(rec);
        }
    }
    Ok(out)
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| mean(&v))
}

/// Groups records by `(n, method)` in order of first appearance.
pub fn summarize(cfg: &ScenarioConfig, records: &[Record]) -> Vec<GroupSummary> {
    let mut keys: Vec<(usize, String)> = Vec::new();
    for r in records {
        if !keys.iter().any(|(n, m)| *n == r.n && *m == r.method) {
            keys.push((r.n, r.method.clone()));
        }
    }
    let mut groups: Vec<GroupSummary> = keys
        .into_iter()
        .map(|(n, method)| {
            let recs: Vec<&Record> = records.iter().filter(|r| r.n == n && r.method == method).collect();
            let reps: Vec<&Record> = recs.iter().copied().filter(|r| r.record == RecordKind::Rep).collect();
            let laws: Vec<&Record> = recs.iter().copied().filter(|r| r.record != RecordKind::Rep).collect();
            let covered: Vec<bool> = reps.iter().filter_map(|r| r.covered).collect();
            let gaps: Vec<(f64, f64)> =
                reps.iter().filter_map(|r| Some((r.mean_gap?, r.mean_gap_se?))).collect();
            let p: Vec<f64> = reps.iter().filter_map(|r| r.p_value).collect();
            let below: Vec<usize> = reps.iter().filter_map(|r| r.boot_below).collect();
            GroupSummary {
                n,
                method,
                reps: reps.len(),
                coverage: (!covered.is_empty())
                    .then(|| covered.iter().filter(|&&c| c).count() as f64 / covered.len() as f64),
                mean_width: mean_of(reps.iter().filter_map(|r| Some(r.hi? - r.lo?))),
                df_lower: mean_of(laws.iter().filter_map(|r| r.df_lower)),
                ks: mean_of(laws.iter().filter_map(|r| r.ks)),
                ks_limit: mean_of(laws.iter().filter_map(|r| r.ks_limit)),
                ks_mean_free: mean_of(laws.iter().filter_map(|r| r.ks_mean_free)),
                mean_gap: mean_of(gaps.iter().map(|g| g.0)),
                gap_flagged_fraction: (!gaps.is_empty()).then(|| {
                    gaps.iter().filter(|(v, se)| *v > 3.0 * se).count() as f64 / gaps.len() as f64
                }),
                boot_below_total: (!below.is_empty()).then(|| below.iter().sum()),
                rejection_rate: (!p.is_empty())
                    .then(|| p.iter().filter(|&&v| v <= cfg.alpha).count() as f64 / p.len() as f64),
                first_order_l3: mean_of(laws.iter().filter_map(|r| r.first_order_l3)),
                rate_exponent: None,
                r_nb: mean_of(laws.iter().filter_map(|r| r.r_nb)),
                r_nb_se: mean_of(laws.iter().filter_map(|r| r.r_nb_se)),
            }
        })
        .collect();
    let methods: Vec<String> = groups
        .iter()
        .filter(|g| g.first_order_l3.is_some())
        .map(|g| g.method.clone())
        .collect();
    for method in methods {
        let (xs, ys): (Vec<f64>, Vec<f64>) = groups
            .iter()
            .filter(|g| g.method == method)
            .filter_map(|g| Some((g.n as f64, g.first_order_l3?)))
            .unzip();
        if let Ok(slope) = log_log_slope(&xs, &ys) {
            groups.iter_mut().filter(|g| g.method == method).for_each(|g| g.rate_exponent = Some(slope));
        }
    }
    groups
}
