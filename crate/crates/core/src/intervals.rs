//! Bootstrap confidence intervals and p-values.
//!
//! All constructions start from a [`BootstrapLaw`]: `B` evaluations of the
//! statistic on resamples, replicate `b` drawn with `seed.replicate(b)`. The
//! same replicates provide both the conditional mean and the quantiles.
//! Quantiles are type 1 (right-continuous inverse), so a threshold `t` with
//! `P(|T| ≥ t) ≤ α` is the `(1 - α)` quantile of `|T|`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::law::EmpiricalLaw;
use crate::resample::{column_mean, draw_indices, shift, ResampleMode, ResamplePlan};
use crate::rng::RngSeed;
use crate::statistics::StatisticSpec;

/// Smallest replicate count accepted for confidence intervals.
pub const MIN_CI_REPLICATES: usize = 100;
/// Smallest number of Gaussian draws accepted by [`gaussian_max_quantile`].
pub const MIN_GAUSS_DRAWS: usize = 1000;

#[derive(Debug, Clone)]
pub struct BootstrapLaw {
    /// Statistic values in replicate order.
    pub raw: Vec<f64>,
    /// Mean of `raw`: the estimate of the conditional mean.
    pub mean: f64,
    /// Law of `raw - mean`.
    pub centered: EmpiricalLaw,
}

impl BootstrapLaw {
    pub fn from_values(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidArgument("bootstrap law needs at least one replicate".into()));
        }
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let centered = EmpiricalLaw::new(raw.iter().map(|v| v - mean).collect())?;
        Ok(Self { raw, mean, centered })
    }

    /// `(1 - α)` quantile of `|g(Z) - mean|`.
    pub fn abs_quantile(&self, alpha: f64) -> f64 {
        self.centered.abs().quantile(1.0 - alpha)
    }
}

/// Evaluates `statistic` on `plan.replicates` resamples of `data`.
pub fn bootstrap_law(
    statistic: &StatisticSpec,
    data: &Dataset,
    plan: &ResamplePlan,
    seed: RngSeed,
) -> Result<BootstrapLaw> {
    plan.validate(data)?;
    let offset = match &plan.mode {
        ResampleMode::Empirical => Some(None),
        ResampleMode::Centered(mu) => Some(Some(
            column_mean(data).iter().zip(mu).map(|(m, mu)| mu - m).collect::<Vec<f64>>(),
        )),
        ResampleMode::Shifted(o) => Some(Some(o.clone())),
        ResampleMode::PairPermuted => None,
    };
    let raw = match offset {
        // Sums-only statistics skip materializing the resample; the sums are
        // accumulated in the same order, so the values are bit-identical.
        Some(offset) if statistic.depends_on_sums_only() => {
            statistic.check_shape(data)?;
            (0..plan.replicates as u64)
                .into_par_iter()
                .map(|b| {
                    let idx = draw_indices(data.rows(), seed.replicate(b));
                    statistic.eval_from_sums(&resample_sums(data, &idx, offset.as_deref()), data.rows())
                })
                .collect::<Result<Vec<f64>>>()?
        }
        _ => (0..plan.replicates as u64)
            .into_par_iter()
            .map(|b| statistic.eval(&plan.draw(data, seed.replicate(b))?))
            .collect::<Result<Vec<f64>>>()?,
    };
    BootstrapLaw::from_values(raw)
}

/// Column sums of `data.select_rows(idx)` translated by `offset`, in row order.
fn resample_sums(data: &Dataset, idx: &[usize], offset: Option<&[f64]>) -> Vec<f64> {
    let mut acc = vec![0.0; data.cols()];
    for &i in idx {
        let row = data.row(i);
        match offset {
            None => acc.iter_mut().zip(row).for_each(|(a, v)| *a += v),
            Some(o) => acc.iter_mut().zip(row).zip(o).for_each(|((a, v), c)| *a += v + c),
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CiMethod {
    /// Quantile-reflection interval from the empirical bootstrap.
    PlainQuantile,
    /// Quantile-reflection interval from the bootstrap recentred on a known mean.
    Centered { known_mean: Vec<f64> },
    /// `g ± (t_b + t_g)`, widened by a Gaussian-max Hölder term.
    Corrected { holder_c: f64, holder_alpha: f64, gauss_draws: usize },
    /// `g ± t*`, `t*` the largest bootstrap threshold over shifted resamples.
    ShiftedSup { gamma: f64, grid: Vec<Vec<f64>> },
    /// `g ± t`, `t` the largest threshold over candidate population means.
    Robust { translation_set: Vec<Vec<f64>> },
}

impl CiMethod {
    pub fn name(&self) -> &'static str {
        match self {
            CiMethod::PlainQuantile => "plain",
            CiMethod::Centered { .. } => "centered",
            CiMethod::Corrected { .. } => "corrected",
            CiMethod::ShiftedSup { .. } => "shifted_sup",
            CiMethod::Robust { .. } => "robust",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CiRequest {
    pub statistic: StatisticSpec,
    pub data: Dataset,
    pub replicates: usize,
    pub alpha: f64,
    pub method: CiMethod,
    pub seed: RngSeed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    pub method: String,
    pub alpha: f64,
    /// The statistic on the observed data.
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    /// Bootstrap threshold (`t_b`); for quantile-reflection intervals, the
    /// symmetric `(1 - α)` quantile of the centered law.
    pub t_b: Option<f64>,
    /// Gaussian Hölder correction.
    pub t_g: Option<f64>,
    /// Supremum threshold of the shifted and robust intervals.
    pub t_star: Option<f64>,
    #[serde(rename = "B")]
    pub replicates: usize,
    pub seed: RngSeed,
    #[serde(skip)]
    pub bootstrap_mean: f64,
}

impl CiResult {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

fn check_request(req: &CiRequest) -> Result<()> {
    if req.replicates < MIN_CI_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "confidence intervals need at least {MIN_CI_REPLICATES} replicates, got {}",
            req.replicates
        )));
    }
    if !(req.alpha > 0.0 && req.alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0, 1), got {}", req.alpha)));
    }
    req.statistic.check_shape(&req.data)
}

fn base_result(req: &CiRequest, center: f64) -> CiResult {
    CiResult {
        method: req.method.name().to_string(),
        alpha: req.alpha,
        center,
        lo: center,
        hi: center,
        t_b: None,
        t_g: None,
        t_star: None,
        replicates: req.replicates,
        seed: req.seed,
        bootstrap_mean: f64::NAN,
    }
}

fn reflection(req: &CiRequest, mode: ResampleMode) -> Result<CiResult> {
    check_request(req)?;
    let center = req.statistic.eval(&req.data)?;
    let plan = ResamplePlan::new(mode, req.replicates);
    let law = bootstrap_law(&req.statistic, &req.data, &plan, req.seed)?;
    let mut out = base_result(req, center);
    out.lo = center - law.centered.quantile(1.0 - req.alpha / 2.0);
    out.hi = center - law.centered.quantile(req.alpha / 2.0);
    out.t_b = Some(law.abs_quantile(req.alpha));
    out.bootstrap_mean = law.mean;
    Ok(out)
}

/// `(g - q_{1-α/2}, g - q_{α/2})` with `q` quantiles of the centered
/// empirical-bootstrap law.
pub fn ci_plain(req: &CiRequest) -> Result<CiResult> {
    if req.method != CiMethod::PlainQuantile {
        return Err(Error::InvalidArgument("ci_plain needs the plain_quantile method".into()));
    }
    reflection(req, ResampleMode::Empirical)
}

/// As [`ci_plain`], resampling `Z - X̄ + μ` for the known mean `μ`.
pub fn ci_centered(req: &CiRequest) -> Result<CiResult> {
    let CiMethod::Centered { known_mean } = &req.method else {
        return Err(Error::InvalidArgument("ci_centered needs the centered method".into()));
    };
    if known_mean.len() != req.data.cols() {
        return Err(Error::DimensionMismatch { expected: req.data.cols(), got: known_mean.len() });
    }
    reflection(req, ResampleMode::Centered(known_mean.clone()))
}

/// `g ± (t_b + t_g)`: `t_b` is the `(1 - α/2)` quantile of the absolute
/// centered bootstrap law and `t_g = C · q^{a}`, `q` the `(1 - α/2)` quantile
/// of `max_k |N_k|` under `N(0, Σ̂)`.
pub fn ci_corrected(req: &CiRequest) -> Result<CiResult> {
    let CiMethod::Corrected { holder_c, holder_alpha, gauss_draws } = req.method else {
        return Err(Error::InvalidArgument("ci_corrected needs the corrected method".into()));
    };
    if !(holder_c >= 0.0 && holder_alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Hölder constants must satisfy C ≥ 0 and exponent > 0, got {holder_c}, {holder_alpha}"
        )));
    }
    check_request(req)?;
    let center = req.statistic.eval(&req.data)?;
    let plan = ResamplePlan::empirical(req.replicates);
    let law = bootstrap_law(&req.statistic, &req.data, &plan, req.seed)?;
    let t_b = law.abs_quantile(req.alpha / 2.0);
    let t_g = if holder_c == 0.0 {
        0.0
    } else {
        let q = gaussian_max_quantile(&req.data, req.alpha / 2.0, gauss_draws, req.seed.child(1))?;
        holder_c * q.powf(holder_alpha)
    };
    let mut out = base_result(req, center);
    out.lo = center - t_b - t_g;
    out.hi = center + t_b + t_g;
    out.t_b = Some(t_b);
    out.t_g = Some(t_g);
    out.bootstrap_mean = law.mean;
    Ok(out)
}

/// Largest `(1 - α)` absolute-deviation quantile over resamples translated by
/// each offset. All offsets share the same resample indices.
fn sup_threshold(req: &CiRequest, offsets: &[Vec<f64>]) -> Result<(f64, f64)> {
    if offsets.is_empty() {
        return Err(Error::InvalidArgument("offset set is empty".into()));
    }
    for o in offsets {
        if o.len() != req.data.cols() {
            return Err(Error::DimensionMismatch { expected: req.data.cols(), got: o.len() });
        }
    }
    let plan = ResamplePlan::empirical(req.replicates);
    let n = req.data.rows();
    let per_rep: Vec<Vec<f64>> = (0..req.replicates as u64)
        .into_par_iter()
        .map(|b| {
            if req.statistic.depends_on_sums_only() {
                // a translation by o adds n·o to every column sum
                let sums = resample_sums(&req.data, &draw_indices(n, req.seed.replicate(b)), None);
                return offsets
                    .iter()
                    .map(|o| {
                        let moved: Vec<f64> =
                            sums.iter().zip(o).map(|(s, c)| s + n as f64 * c).collect();
                        req.statistic.eval_from_sums(&moved, n)
                    })
                    .collect();
            }
            let z = plan.draw(&req.data, req.seed.replicate(b))?;
            offsets.iter().map(|o| req.statistic.eval(&shift(&z, o)?)).collect()
        })
        .collect::<Result<_>>()?;
    let mut best = f64::NEG_INFINITY;
    let mut mean_at_best = f64::NAN;
    for k in 0..offsets.len() {
        let law = BootstrapLaw::from_values(per_rep.iter().map(|r| r[k]).collect())?;
        let t = law.abs_quantile(req.alpha);
        if t > best {
            best = t;
            mean_at_best = law.mean;
        }
    }
    Ok((best, mean_at_best))
}

/// `g ± t*`, `t* = max_μ q_{1-α}|g(Z + μ) - E[g(Z + μ) | X]|` over the grid.
pub fn ci_shifted_sup(req: &CiRequest) -> Result<CiResult> {
    let CiMethod::ShiftedSup { gamma, grid } = &req.method else {
        return Err(Error::InvalidArgument("ci_shifted_sup needs the shifted_sup method".into()));
    };
    check_request(req)?;
    let tol = 1e-12 * gamma.max(1.0);
    if let Some(o) = grid.iter().find(|o| o.iter().map(|v| v * v).sum::<f64>().sqrt() > gamma + tol) {
        return Err(Error::InvalidArgument(format!("offset {o:?} lies outside the radius {gamma}")));
    }
    let center = req.statistic.eval(&req.data)?;
    let (t, mean) = sup_threshold(req, grid)?;
    let mut out = base_result(req, center);
    out.lo = center - t;
    out.hi = center + t;
    out.t_star = Some(t);
    out.bootstrap_mean = mean;
    Ok(out)
}

/// `g ± t`, `t = max_{μ ∈ A} q_{1-α}|g(Z + μ - X̄) - E[· | X]|`.
pub fn ci_robust(req: &CiRequest) -> Result<CiResult> {
    let CiMethod::Robust { translation_set } = &req.method else {
        return Err(Error::InvalidArgument("ci_robust needs the robust method".into()));
    };
    check_request(req)?;
    let xbar = column_mean(&req.data);
    let offsets: Vec<Vec<f64>> = translation_set
        .iter()
        .map(|mu| {
            if mu.len() != xbar.len() {
                return Err(Error::DimensionMismatch { expected: xbar.len(), got: mu.len() });
            }
            Ok(mu.iter().zip(&xbar).map(|(m, x)| m - x).collect())
        })
        .collect::<Result<_>>()?;
    let center = req.statistic.eval(&req.data)?;
    let (t, mean) = sup_threshold(req, &offsets)?;
    let mut out = base_result(req, center);
    out.lo = center - t;
    out.hi = center + t;
    out.t_star = Some(t);
    out.bootstrap_mean = mean;
    Ok(out)
}

/// Dispatches on the request's method.
pub fn confidence_interval(req: &CiRequest) -> Result<CiResult> {
    match req.method {
        CiMethod::PlainQuantile => ci_plain(req),
        CiMethod::Centered { .. } => ci_centered(req),
        CiMethod::Corrected { .. } => ci_corrected(req),
        CiMethod::ShiftedSup { .. } => ci_shifted_sup(req),
        CiMethod::Robust { .. } => ci_robust(req),
    }
}

/// Sample covariance (denominator `n - 1`, zero for a single row).
pub fn sample_covariance(data: &Dataset) -> DMatrix<f64> {
    let (n, d) = (data.rows(), data.cols());
    let mean = column_mean(data);
    let mut cov = DMatrix::zeros(d, d);
    if n < 2 {
        return cov;
    }
    for row in data.iter_rows() {
        let c = DVector::from_iterator(d, row.iter().zip(&mean).map(|(v, m)| v - m));
        cov.ger(1.0, &c, &c, 1.0);
    }
    cov / (n - 1) as f64
}

/// Lower Cholesky factor of `cov + jitter·I`, starting from
/// `jitter = 10⁻¹⁰ (tr/d + 1)` and multiplying it by ten on each of up to
/// five retries.
pub fn jittered_cholesky(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = cov.nrows();
    let mut jitter = 1e-10 * (cov.trace() / d as f64 + 1.0);
    for _ in 0..=5 {
        let m = cov + DMatrix::identity(d, d) * jitter;
        if let Some(ch) = m.cholesky() {
            return Ok(ch.l());
        }
        jitter *= 10.0;
    }
    Err(Error::Numerical("covariance factorisation failed after jitter retries".into()))
}

/// `(1 - β)` quantile of `max_k |N_k|` over `draws` samples of `N ~ N(0, Σ̂)`,
/// `Σ̂` the sample covariance of `data`. Returns exactly 0 for constant data.
pub fn gaussian_max_quantile(data: &Dataset, beta: f64, draws: usize, seed: RngSeed) -> Result<f64> {
    if draws < MIN_GAUSS_DRAWS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_GAUSS_DRAWS} Gaussian draws, got {draws}"
        )));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!("level must be in (0, 1), got {beta}")));
    }
    let cov = sample_covariance(data);
    if cov.trace() == 0.0 {
        return Ok(0.0);
    }
    let l = jittered_cholesky(&cov)?;
    let d = l.nrows();
    let maxima: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|k| {
            let mut s = seed.replicate(k).open();
            let z = DVector::from_iterator(d, (0..d).map(|_| s.normal()));
            (&l * z).amax()
        })
        .collect();
    Ok(EmpiricalLaw::new(maxima)?.quantile(1.0 - beta))
}

/// `(1 + #{b : |T_b - T̄| ≥ |T_obs - T̄|}) / (B + 1)` with `T̄` the replicate mean.
pub fn pvalue_from_reference(observed: f64, replicates: &[f64]) -> Result<f64> {
    if replicates.is_empty() {
        return Err(Error::InvalidArgument("p-value needs at least one replicate".into()));
    }
    let mean = replicates.iter().sum::<f64>() / replicates.len() as f64;
    let obs = (observed - mean).abs();
    let hits = replicates.iter().filter(|&&t| (t - mean).abs() >= obs).count();
    Ok((1 + hits) as f64 / (replicates.len() + 1) as f64)
}

/// Bootstrap p-value of `statistic` with resamples drawn per `plan`.
pub fn pvalue_with_plan(
    statistic: &StatisticSpec,
    data: &Dataset,
    plan: &ResamplePlan,
    seed: RngSeed,
) -> Result<f64> {
    let observed = statistic.eval(data)?;
    let law = bootstrap_law(statistic, data, plan, seed)?;
    pvalue_from_reference(observed, &law.raw)
}

/// Bootstrap p-value for `H₀: E[X] = θ`, resampling `Z - X̄ + θ`.
pub fn pvalue_bootstrap(
    statistic: &StatisticSpec,
    data: &Dataset,
    theta: &[f64],
    replicates: usize,
    seed: RngSeed,
) -> Result<f64> {
    if theta.len() != data.cols() {
        return Err(Error::DimensionMismatch { expected: data.cols(), got: theta.len() });
    }
    let plan = ResamplePlan::new(ResampleMode::Centered(theta.to_vec()), replicates);
    pvalue_with_plan(statistic, data, &plan, seed)
}
