//! Monte Carlo stability diagnostics.
//!
//! These are computable proxies for the analytic stability conditions behind
//! bootstrap consistency. They can provide evidence against stability but
//! never certify it.
//!
//! * [`first_order_stability`]: `‖g(X) - g(X')‖_{L3}` where `X'` replaces
//!   the first observation (by the zero vector, or by an independent copy).
//! * [`conditional_mean_gap`]: `|E[g(Z)|X] - E[g(Ỹ)|X]|` with `Z` a bootstrap
//!   resample and `Ỹ = Y - μ + X̄` a recentred fresh sample.
//! * [`uniform_perturbation_sensitivity`]: the expected worst centred response
//!   of `g` to translating every observation by `x/√n`, `‖x‖ ≤ R`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::resample::{column_mean, resample_empirical, shift};
use crate::rng::RngSeed;
use crate::statistics::StatisticSpec;

/// Inner replicates used to estimate the mean response in
/// [`uniform_perturbation_sensitivity`].
pub const DEFAULT_INNER_REPLICATES: usize = 200;
/// Perturbation offsets are rounded to multiples of this step, so translated
/// lattice data stays exactly representable.
pub const OFFSET_LATTICE: f64 = 1.0 / (1u64 << 24) as f64;
pub const MIN_TRIALS: usize = 100;

/// A law that can produce fresh datasets of any size.
pub trait DataSource: Sync {
    fn draw(&self, n: usize, seed: RngSeed) -> Result<Dataset>;

    /// Population mean of one observation, when known.
    fn population_mean(&self) -> Option<Vec<f64>> {
        None
    }
}

impl<F> DataSource for F
where
    F: Fn(usize, RngSeed) -> Result<Dataset> + Sync,
{
    fn draw(&self, n: usize, seed: RngSeed) -> Result<Dataset> {
        self(n, seed)
    }
}

/// What replaces the first observation in [`first_order_stability`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Replacement {
    /// The zero vector, whether or not it lies in the support.
    #[default]
    Zero,
    /// An independent draw from the same law.
    IndependentCopy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Monte Carlo standard error.
    pub se: f64,
}

fn mean_se(v: &[f64]) -> Estimate {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Estimate { value: m, se: (var / n).sqrt() }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    Ok(())
}

fn replace_first_row(data: &Dataset, row: &[f64]) -> Result<Dataset> {
    let mut v = data.values().to_vec();
    v[..data.cols()].copy_from_slice(row);
    Dataset::new(data.rows(), data.cols(), v)
}

/// Monte Carlo estimate of `‖g(X) - g(X with its first row replaced)‖_{L3}`
/// over `trials` fresh datasets of size `n`.
pub fn first_order_stability(
    statistic: &StatisticSpec,
    source: &dyn DataSource,
    n: usize,
    trials: usize,
    replacement: Replacement,
    seed: RngSeed,
) -> Result<f64> {
    check_trials(trials)?;
    let cubes = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial = seed.child(t);
            let x = source.draw(n, trial.replicate(0))?;
            let row = match replacement {
                Replacement::Zero => vec![0.0; x.cols()],
                Replacement::IndependentCopy => source.draw(1, trial.replicate(1))?.row(0).to_vec(),
            };
            let diff = statistic.eval(&x)? - statistic.eval(&replace_first_row(&x, &row)?)?;
            Ok(diff.abs().powi(3))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((cubes.iter().sum::<f64>() / trials as f64).cbrt())
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("slope fit needs at least two paired points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("slope fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope fit needs distinct sizes".into()));
    }
    Ok(sxy / sxx)
}

/// `|mean_b g(Z_b) - mean_b g(Y_b - μ + X̄)|` from `replicates` bootstrap
/// resamples and as many fresh datasets. The standard error combines the
/// two independent Monte Carlo means.
pub fn conditional_mean_gap(
    statistic: &StatisticSpec,
    data: &Dataset,
    source: &dyn DataSource,
    replicates: usize,
    seed: RngSeed,
) -> Result<Estimate> {
    if replicates < 2 {
        return Err(Error::InvalidArgument("need at least two replicates".into()));
    }
    let mu = source
        .population_mean()
        .ok_or_else(|| Error::InvalidArgument("the data source has no known mean".into()))?;
    let xbar = column_mean(data);
    if mu.len() != xbar.len() {
        return Err(Error::DimensionMismatch { expected: xbar.len(), got: mu.len() });
    }
    let offset: Vec<f64> = xbar.iter().zip(&mu).map(|(x, m)| x - m).collect();
    let boot_seed = seed.child(0);
    let fresh_seed = seed.child(1);
    let pairs = (0..replicates as u64)
        .into_par_iter()
        .map(|b| {
            let z = resample_empirical(data, boot_seed.replicate(b));
            let y = shift(&source.draw(data.rows(), fresh_seed.replicate(b))?, &offset)?;
            Ok((statistic.eval(&z)?, statistic.eval(&y)?))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (boot, fresh): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (a, b) = (mean_se(&boot), mean_se(&fresh));
    Ok(Estimate { value: (a.value - b.value).abs(), se: (a.se * a.se + b.se * b.se).sqrt() })
}

/// Per-observation offsets `x/√n` for `grid_size` points `x = t·u`, `t`
/// evenly spaced on `[-R, R]` and `u = (1, …, 1)/√d`, rounded to
/// [`OFFSET_LATTICE`]. A single point sits at `t = R`.
pub fn perturbation_grid(d: usize, n: usize, radius: f64, grid_size: usize) -> Vec<Vec<f64>> {
    let scale = 1.0 / ((d as f64).sqrt() * (n as f64).sqrt());
    (0..grid_size)
        .map(|k| {
            let t = if grid_size == 1 {
                radius
            } else {
                radius * (-1.0 + 2.0 * k as f64 / (grid_size - 1) as f64)
            };
            let delta = (t * scale / OFFSET_LATTICE).round() * OFFSET_LATTICE;
            vec![delta; d]
        })
        .collect()
}

/// `E[ sup_x | g(X + x/√n) - g(X) - E[g(X + x/√n) - g(X)] | ]` over the
/// offsets of [`perturbation_grid`]. The inner expectation uses `inner`
/// fresh datasets, the outer one `trials` further datasets.
#[allow(clippy::too_many_arguments)]
pub fn uniform_perturbation_sensitivity(
    statistic: &StatisticSpec,
    source: &dyn DataSource,
    n: usize,
    radius: f64,
    grid_size: usize,
    trials: usize,
    inner: usize,
    seed: RngSeed,
) -> Result<Estimate> {
    if grid_size == 0 {
        return Err(Error::InvalidArgument("grid must contain at least one offset".into()));
    }
    if !(radius >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be non-negative, got {radius}")));
    }
    check_trials(trials)?;
    if inner == 0 {
        return Err(Error::InvalidArgument("need at least one inner replicate".into()));
    }
    let d = source.draw(1, seed.child(u64::MAX))?.cols();
    let grid = perturbation_grid(d, n, radius, grid_size);
    let responses = |x: &Dataset| -> Result<Vec<f64>> {
        let base = statistic.eval(x)?;
        grid.iter().map(|o| Ok(statistic.eval(&shift(x, o)?)? - base)).collect()
    };
    let inner_seed = seed.child(0);
    let inner_rows = (0..inner as u64)
        .into_par_iter()
        .map(|t| responses(&source.draw(n, inner_seed.replicate(t))?))
        .collect::<Result<Vec<_>>>()?;
    let mean: Vec<f64> = (0..grid.len())
        .map(|k| inner_rows.iter().map(|r| r[k]).sum::<f64>() / inner as f64)
        .collect();
    let outer_seed = seed.child(1);
    let sups = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let r = responses(&source.draw(n, outer_seed.replicate(t))?)?;
            Ok(r.iter().zip(&mean).map(|(v, m)| (v - m).abs()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_se(&sups))
}

/// One row of stability diagnostics for a statistic at sample size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub n: usize,
    pub first_order_l3: Option<f64>,
    pub rate_exponent_fit: Option<f64>,
    pub mean_gap: Option<f64>,
    pub r_nb: Option<f64>,
    pub b_used: Option<f64>,
}
