//! Scalar statistics of a dataset.
//!
//! A [`StatisticSpec`] names a statistic and its parameters; [`StatisticSpec::eval`]
//! evaluates it. Specs serialize as `{"kind": ..., "params": {...}}` with
//! snake_case kinds, for example
//!
//! ```json
//! {"kind": "scaled_mean_power", "params": {"p": 2}}
//! {"kind": "max_coord_mean", "params": {"beta": "infinite"}}
//! {"kind": "scaled_min"}
//! ```
//!
//! Kinds whose parameters are all optional may omit `params`.

mod kernel;
mod scalar;
pub mod smooth;
mod spin;
mod stacked;
mod temperature;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub use kernel::{eval_kernel_components, KernelComponents, KernelGram, KernelSpec};
pub use scalar::eval_isolated_count;
pub use spin::MAX_SPINS;
pub use stacked::{eval_stacked, stacked_weights, LossSpec, StackedOutput};
pub use temperature::Temperature;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum StatisticSpec {
    /// `(n^{-1/2} Σ x_i)^p`.
    ScaledMeanPower { p: u32 },
    /// `max(0, n^{-1/2} Σ x_i)`.
    PositivePartMean,
    /// `√n [∏ (1 + y_i/n) - 1]` with `y = x`, or `y = x - x̄` when `centered`.
    ProductStatistic {
        #[serde(default)]
        centered: bool,
    },
    /// `(n^{-1/2} Σ_{i<h} (x_i - x_{i+h}))²` with `h = ⌊n/2⌋`.
    PairedDiffSq,
    /// `n · min x_i`.
    ScaledMin,
    /// `n^{-1/2} (#{i : min_{j≠i} |x_i - x_j| > 1/n} - n·c)`.
    IsolatedCount {
        #[serde(default)]
        centering_c: f64,
    },
    /// `max_k n^{-1/2} Σ_i x_ik`, or its log-sum-exp surrogate for finite `beta`.
    MaxCoordMean {
        #[serde(default)]
        beta: Temperature,
    },
    /// `min_i max_j n^{-1/2} Σ_l x_{l,(i,j)}` over a `p × p` grid stored row-major
    /// in the columns, or its nested log-sum-exp surrogate.
    MinMaxCoordMean {
        p: usize,
        #[serde(default)]
        beta: Temperature,
    },
    /// `(1/m) log Σ_{s ∈ {±1}^m} exp(sᵀ X s / √m)` with `X` the `m × m` matrix
    /// formed row-major from the `m²` scalar observations.
    SpinGlassEntropy { spins: usize },
    /// `n · T̂`: softmax-weighted kernel two-sample discrepancy between the two
    /// column blocks.
    KernelSoftmaxMmd {
        kernels: Vec<KernelSpec>,
        beta: f64,
        #[serde(default)]
        lambda: f64,
    },
    /// Risk `n^{-1/2} Σ L(x_i, Θ)` of the smooth-stacked combination `Θ` of
    /// constant base predictions, with weights fitted on the same data.
    StackedRisk {
        base_predictions: Vec<f64>,
        #[serde(default = "default_stacked_beta")]
        beta: Temperature,
        #[serde(default)]
        loss: LossSpec,
    },
}

fn default_stacked_beta() -> Temperature {
    Temperature::SqrtRows
}

pub(crate) fn require_cols(data: &Dataset, cols: usize, what: &str) -> Result<()> {
    if data.cols() != cols {
        return Err(Error::Shape(format!("{what} needs {cols} column(s), got {}", data.cols())));
    }
    Ok(())
}

/// `n^{-1/2} Σ_i x_ik` for every column `k`.
pub fn scaled_column_sums(data: &Dataset) -> Vec<f64> {
    let mut acc = column_sums(data);
    let s = (data.rows() as f64).sqrt();
    acc.iter_mut().for_each(|a| *a /= s);
    acc
}

/// Column sums accumulated in row order.
pub fn column_sums(data: &Dataset) -> Vec<f64> {
    let mut acc = vec![0.0; data.cols()];
    for row in data.iter_rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    acc
}

/// Default `β` of the max-of-means surrogate: `½ n^{1/8} / √(log p)`.
pub fn max_coord_default_beta(n: f64, p: usize) -> f64 {
    0.5 * n.powf(0.125) / (p as f64).ln().sqrt()
}

/// Default `β` of the min-max surrogate: `n^{1/6} / (log p)^{2/3}`.
pub fn minmax_default_beta(n: f64, p: usize) -> f64 {
    n.powf(1.0 / 6.0) / (p as f64).ln().powf(2.0 / 3.0)
}

/// Max of the scaled coordinate means, smoothed with `LSE(c·R)/c`, `c = β log p`.
///
/// The smoothed value exceeds the exact maximum by at most `1/β`.
pub fn max_coord_mean(data: &Dataset, beta: f64) -> f64 {
    max_of_scaled(&scaled_column_sums(data), beta)
}

fn max_of_scaled(r: &[f64], beta: f64) -> f64 {
    let p = r.len();
    let exact = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if beta.is_infinite() || p == 1 {
        return exact;
    }
    smooth::smooth_max(r, beta * (p as f64).ln())
}

/// Min over rows of the max over columns of a `p × p` grid of scaled
/// coordinate means, smoothed as `-(1/c) log Σ_i (Σ_j e^{c R_ij})^{-1}`,
/// `c = β log p`.
///
/// The inner smooth max overshoots by at most `1/(β)·log p/ log p`, the outer
/// smooth min undershoots by at most the same amount, and the two errors have
/// opposite signs, so the surrogate is within `1/β` of the exact value.
pub fn minmax_coord_mean(data: &Dataset, p: usize, beta: f64) -> Result<f64> {
    if p == 0 || data.cols() != p * p {
        return Err(Error::Shape(format!(
            "min-max over a {p}x{p} grid needs {} columns, got {}",
            p * p,
            data.cols()
        )));
    }
    Ok(minmax_of_scaled(&scaled_column_sums(data), p, beta))
}

fn minmax_of_scaled(r: &[f64], p: usize, beta: f64) -> f64 {
    if beta.is_infinite() || p == 1 {
        return r
            .chunks_exact(p)
            .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min);
    }
    let c = beta * (p as f64).ln();
    let inner: Vec<f64> = r.chunks_exact(p).map(|row| smooth::smooth_max(row, c)).collect();
    smooth::smooth_min(&inner, c)
}

impl StatisticSpec {
    pub fn name(&self) -> &'static str {
        match self {
            StatisticSpec::ScaledMeanPower { .. } => "scaled_mean_power",
            StatisticSpec::PositivePartMean => "positive_part_mean",
            StatisticSpec::ProductStatistic { .. } => "product_statistic",
            StatisticSpec::PairedDiffSq => "paired_diff_sq",
            StatisticSpec::ScaledMin => "scaled_min",
            StatisticSpec::IsolatedCount { .. } => "isolated_count",
            StatisticSpec::MaxCoordMean { .. } => "max_coord_mean",
            StatisticSpec::MinMaxCoordMean { .. } => "min_max_coord_mean",
            StatisticSpec::SpinGlassEntropy { .. } => "spin_glass_entropy",
            StatisticSpec::KernelSoftmaxMmd { .. } => "kernel_softmax_mmd",
            StatisticSpec::StackedRisk { .. } => "stacked_risk",
        }
    }

    /// Checks that `data` has the shape this statistic needs.
    pub fn check_shape(&self, data: &Dataset) -> Result<()> {
        match self {
            StatisticSpec::ScaledMeanPower { p } => {
                if *p == 0 {
                    return Err(Error::InvalidArgument("power must be at least 1".into()));
                }
                require_cols(data, 1, self.name())
            }
            StatisticSpec::PositivePartMean
            | StatisticSpec::ProductStatistic { .. }
            | StatisticSpec::PairedDiffSq
            | StatisticSpec::ScaledMin => require_cols(data, 1, self.name()),
            StatisticSpec::IsolatedCount { .. } => {
                require_cols(data, 1, self.name())?;
                if data.rows() < 2 {
                    return Err(Error::Shape("isolated count needs at least two rows".into()));
                }
                Ok(())
            }
            StatisticSpec::MaxCoordMean { .. } => Ok(()),
            StatisticSpec::MinMaxCoordMean { p, .. } => {
                if *p == 0 || data.cols() != p * p {
                    return Err(Error::Shape(format!(
                        "min-max over a {p}x{p} grid needs {} columns, got {}",
                        p * p,
                        data.cols()
                    )));
                }
                Ok(())
            }
            StatisticSpec::SpinGlassEntropy { spins } => spin::check(data, *spins),
            StatisticSpec::KernelSoftmaxMmd { kernels, lambda, .. } => {
                kernel::check(data, kernels, *lambda)
            }
            StatisticSpec::StackedRisk { base_predictions, .. } => {
                require_cols(data, 1, self.name())?;
                if base_predictions.is_empty() {
                    return Err(Error::InvalidArgument("stacking needs a base prediction".into()));
                }
                Ok(())
            }
        }
    }

    /// Evaluates the statistic on `data`.
    pub fn eval(&self, data: &Dataset) -> Result<f64> {
        self.check_shape(data)?;
        let v = match self {
            StatisticSpec::ScaledMeanPower { .. }
            | StatisticSpec::PositivePartMean
            | StatisticSpec::MaxCoordMean { .. }
            | StatisticSpec::MinMaxCoordMean { .. } => {
                return self.eval_from_sums(&column_sums(data), data.rows());
            }
            StatisticSpec::ProductStatistic { centered } => scalar::product(data, *centered),
            StatisticSpec::PairedDiffSq => scalar::paired_diff_sq(data),
            StatisticSpec::ScaledMin => scalar::scaled_min(data),
            StatisticSpec::IsolatedCount { centering_c } => {
                scalar::eval_isolated_count(data, *centering_c)?
            }
            StatisticSpec::SpinGlassEntropy { spins } => spin::entropy(data, *spins),
            StatisticSpec::KernelSoftmaxMmd { kernels, beta, lambda } => {
                let c = eval_kernel_components(data, kernels, *beta, *lambda)?;
                data.rows() as f64 * c.t_hat
            }
            StatisticSpec::StackedRisk { .. } => eval_stacked(data, data, self)?.risk,
        };
        if !v.is_finite() {
            return Err(Error::Numerical(format!("{} evaluated to {v}", self.name())));
        }
        Ok(v)
    }

    /// Whether the statistic is a function of the column sums alone, so that
    /// [`StatisticSpec::eval_from_sums`] applies.
    pub fn depends_on_sums_only(&self) -> bool {
        matches!(
            self,
            StatisticSpec::ScaledMeanPower { .. }
                | StatisticSpec::PositivePartMean
                | StatisticSpec::MaxCoordMean { .. }
                | StatisticSpec::MinMaxCoordMean { .. }
        )
    }

    /// Evaluates a sums-only statistic from the raw column sums of an
    /// `n`-row dataset. Agrees bit-for-bit with [`StatisticSpec::eval`] when
    /// the sums are accumulated in row order.
    pub fn eval_from_sums(&self, sums: &[f64], n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        let cols = sums.len();
        let root = (n as f64).sqrt();
        let v = match self {
            StatisticSpec::ScaledMeanPower { p } => {
                if *p == 0 {
                    return Err(Error::InvalidArgument("power must be at least 1".into()));
                }
                if cols != 1 {
                    return Err(Error::Shape(format!("{} needs 1 column(s), got {cols}", self.name())));
                }
                (sums[0] / root).powi(*p as i32)
            }
            StatisticSpec::PositivePartMean => {
                if cols != 1 {
                    return Err(Error::Shape(format!("{} needs 1 column(s), got {cols}", self.name())));
                }
                (sums[0] / root).max(0.0)
            }
            StatisticSpec::MaxCoordMean { beta } => {
                let b = beta.resolve(n, |m| max_coord_default_beta(m, cols))?;
                let r: Vec<f64> = sums.iter().map(|s| s / root).collect();
                max_of_scaled(&r, b)
            }
            StatisticSpec::MinMaxCoordMean { p, beta } => {
                if *p == 0 || cols != p * p {
                    return Err(Error::Shape(format!(
                        "min-max over a {p}x{p} grid needs {} columns, got {cols}",
                        p * p
                    )));
                }
                let b = beta.resolve(n, |m| minmax_default_beta(m, *p))?;
                let r: Vec<f64> = sums.iter().map(|s| s / root).collect();
                minmax_of_scaled(&r, *p, b)
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "{} is not a function of the column sums",
                    self.name()
                )))
            }
        };
        if !v.is_finite() {
            return Err(Error::Numerical(format!("{} evaluated to {v}", self.name())));
        }
        Ok(v)
    }

    /// Whether the statistic depends on the data only through differences
    /// between rows (and is therefore unchanged by a common translation).
    pub fn is_difference_only(&self) -> bool {
        matches!(self, StatisticSpec::PairedDiffSq | StatisticSpec::IsolatedCount { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;

    fn col(v: &[f64]) -> Dataset {
        Dataset::from_column(v.to_vec()).unwrap()
    }

    fn normal_data(n: usize, d: usize, seed: u64) -> Dataset {
        let mut s = RngSeed::new(seed, 0).open();
        Dataset::new(n, d, (0..n * d).map(|_| s.normal()).collect()).unwrap()
    }

    #[test]
    fn spec_examples() {
        let four = col(&[1.0; 4]);
        assert_eq!(StatisticSpec::ScaledMeanPower { p: 2 }.eval(&four).unwrap(), 4.0);
        let d = col(&[0.2, 0.1, 0.4]);
        assert!((StatisticSpec::ScaledMin.eval(&d).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(StatisticSpec::PositivePartMean.eval(&col(&[-1.0, -2.0])).unwrap(), 0.0);
        assert!((StatisticSpec::PositivePartMean.eval(&col(&[2.0, 2.0])).unwrap() - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn squared_mean_has_chi_square_mean() {
        let spec = StatisticSpec::ScaledMeanPower { p: 2 };
        let n = 2000;
        let reps = 5000;
        let mut s = RngSeed::new(77, 0).open();
        let mut total = 0.0;
        let mut buf = vec![0.0; n];
        for _ in 0..reps {
            buf.iter_mut().for_each(|v| *v = s.normal());
            total += spec.eval(&col(&buf)).unwrap();
        }
        assert!((total / reps as f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn shape_errors() {
        let two = Dataset::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(StatisticSpec::ScaledMin.eval(&two).is_err());
        assert!(StatisticSpec::MinMaxCoordMean { p: 2, beta: Temperature::Infinite }
            .eval(&two)
            .is_err());
        assert!(StatisticSpec::ScaledMeanPower { p: 0 }.eval(&col(&[1.0])).is_err());
    }

    #[test]
    fn max_surrogate_gap() {
        for seed in 0..50 {
            let d = normal_data(40, 7, seed);
            let exact = max_coord_mean(&d, f64::INFINITY);
            for beta in [0.1, 1.0, 3.0, 50.0] {
                let f = max_coord_mean(&d, beta);
                assert!(f >= exact && f - exact <= 1.0 / beta, "{f} {exact} {beta}");
            }
        }
    }

    #[test]
    fn minmax_surrogate_gap() {
        for seed in 0..50 {
            let d = normal_data(30, 9, 100 + seed);
            let exact = minmax_coord_mean(&d, 3, f64::INFINITY).unwrap();
            for beta in [0.1, 1.0, 3.0, 50.0] {
                let f = minmax_coord_mean(&d, 3, beta).unwrap();
                assert!((f - exact).abs() <= 1.0 / beta, "{f} {exact} {beta}");
            }
        }
    }

    #[test]
    fn minmax_exact_value() {
        // grid means: row 0 = (1, 3), row 1 = (2, 0) -> min(max(1,3), max(2,0)) = 2
        let d = Dataset::from_rows(&[[1.0, 3.0, 2.0, 0.0]]).unwrap();
        assert_eq!(minmax_coord_mean(&d, 2, f64::INFINITY).unwrap(), 2.0);
        let spec = StatisticSpec::MinMaxCoordMean { p: 1, beta: Temperature::Default };
        assert_eq!(spec.eval(&col(&[1.0, 3.0])).unwrap(), 4.0 / 2f64.sqrt());
    }

    #[test]
    fn json_round_trip() {
        let specs = vec![
            StatisticSpec::ScaledMeanPower { p: 3 },
            StatisticSpec::PositivePartMean,
            StatisticSpec::ProductStatistic { centered: true },
            StatisticSpec::PairedDiffSq,
            StatisticSpec::ScaledMin,
            StatisticSpec::IsolatedCount { centering_c: 0.125 },
            StatisticSpec::MaxCoordMean { beta: Temperature::Infinite },
            StatisticSpec::MinMaxCoordMean { p: 4, beta: Temperature::Value(2.0) },
            StatisticSpec::SpinGlassEntropy { spins: 5 },
            StatisticSpec::KernelSoftmaxMmd {
                kernels: vec![
                    KernelSpec::Gaussian { bandwidth: 0.5 },
                    KernelSpec::Linear,
                    KernelSpec::Polynomial { degree: 2, offset: 1.0 },
                ],
                beta: 5.0,
                lambda: 1e-3,
            },
            StatisticSpec::StackedRisk {
                base_predictions: vec![1.0, -1.0],
                beta: Temperature::SqrtRows,
                loss: LossSpec::Square,
            },
        ];
        for s in specs {
            let text = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<StatisticSpec>(&text).unwrap(), s, "{text}");
        }
        let parsed: StatisticSpec = serde_json::from_str(r#"{"kind":"scaled_min"}"#).unwrap();
        assert_eq!(parsed, StatisticSpec::ScaledMin);
        let parsed: StatisticSpec =
            serde_json::from_str(r#"{"kind":"scaled_mean_power","params":{"p":2}}"#).unwrap();
        assert_eq!(parsed, StatisticSpec::ScaledMeanPower { p: 2 });
        assert!(serde_json::from_str::<StatisticSpec>(
            r#"{"kind":"scaled_mean_power","params":{"p":2,"q":1}}"#
        )
        .is_err());
    }
}
