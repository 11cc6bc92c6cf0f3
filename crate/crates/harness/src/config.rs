//! Scenario configuration (TOML).
//!
//! ```toml
//! name = "squared_mean"
//! seed = 7
//! n_grid = [250, 1000]
//! replicates = 1000          # B, bootstrap replicates per interval
//! outer_reps = 200           # fresh datasets per n
//! alpha = 0.05               # optional, default 0.05
//!
//! [distribution]
//! kind = "std_normal"
//!
//! [statistic]
//! kind = "scaled_mean_power"
//! params = { p = 2 }
//!
//! [[methods]]                # optional, default a single plain_quantile
//! kind = "corrected"
//! holder_c = 1.0
//! holder_alpha = 2.0
//!
//! [study]                    # optional, default coverage
//! kind = "coverage"
//! estimand = "oracle_mean"
//!
//! [diagnostics]              # optional
//! n_grid = [250, 1000, 4000]
//! sensitivity = { radius = 1.0, grid_size = 9, trials = 200 }
//!
//! [outputs]                  # optional
//! dir = "results"
//! ```
//!
//! Unknown keys anywhere are errors. `study.kind` is one of `coverage`,
//! `stacked_law`, `double_bootstrap` or `kernel_test`; see [`Study`].

use std::path::{Path, PathBuf};

use bootlab_core::diagnostics::Replacement;
use bootlab_core::StatisticSpec;
use serde::{Deserialize, Serialize};

use crate::distribution::DistributionSpec;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub n_grid: Vec<usize>,
    /// Bootstrap replicates `B` per interval, p-value or law.
    pub replicates: usize,
    pub outer_reps: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub distribution: DistributionSpec,
    pub statistic: StatisticSpec,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub study: Study,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_methods() -> Vec<MethodSpec> {
    vec![MethodSpec::PlainQuantile]
}

/// Interval construction, with the data-dependent parts (known mean, offset
/// grids) filled in by the runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    PlainQuantile,
    /// Recentred on the distribution's population mean.
    Centered,
    Corrected {
        holder_c: f64,
        holder_alpha: f64,
        #[serde(default = "default_gauss_draws")]
        gauss_draws: usize,
    },
    /// Radius `gamma` (default `log n / √n`); offsets: `grid_points` evenly
    /// spaced on `[-γ, γ]` for one column, otherwise the `2d` points `±γ e_k`
    /// plus `4d` random directions of length `γ`.
    ShiftedSup {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default = "default_shift_points")]
        grid_points: usize,
    },
    /// Candidate means: the population mean plus the same offset layout as
    /// `shifted_sup` with radius `radius` (default `2 / √n`).
    Robust {
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default = "default_robust_points")]
        grid_points: usize,
    },
}

fn default_gauss_draws() -> usize {
    4000
}

fn default_shift_points() -> usize {
    41
}

fn default_robust_points() -> usize {
    11
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::PlainQuantile => "plain",
            MethodSpec::Centered => "centered",
            MethodSpec::Corrected { .. } => "corrected",
            MethodSpec::ShiftedSup { .. } => "shifted_sup",
            MethodSpec::Robust { .. } => "robust",
        }
    }
}

/// What the interval is expected to cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimand {
    /// `E[g(Y)]`, estimated once per `n` from `4·B` fresh datasets.
    #[default]
    OracleMean,
    /// `E[g(Y - μ + X̄) | X]`, estimated per dataset from `4·B` recentred
    /// fresh datasets.
    ConditionalOracleMean,
    /// The statistic applied to the population mean (sums-only statistics).
    PlugInPopulationMean,
}

/// How the bootstrap law is compared with the law of the statistic on fresh data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawComparison {
    #[default]
    None,
    /// `g(Z)` against `g(Y)`.
    Raw,
    /// `g(Z) - E[g(Z)|X]` against `g(Y) - E[g(Y)]`.
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawResample {
    #[default]
    Empirical,
    /// Recentred on the distribution's population mean.
    Centered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Study {
    /// Interval coverage over `outer_reps` datasets per `n`, optionally with
    /// a bootstrap-versus-fresh law comparison on the first `law_reps`
    /// datasets and per-dataset conditional-mean gaps.
    Coverage {
        #[serde(default)]
        estimand: Estimand,
        #[serde(default)]
        law_comparison: LawComparison,
        /// Resampling scheme of the compared bootstrap law.
        #[serde(default)]
        law_resample: LawResample,
        #[serde(default = "one")]
        law_reps: usize,
        /// Count bootstrap replicates falling below the observed statistic.
        #[serde(default)]
        one_sided: bool,
        /// Replicates for a per-dataset conditional-mean gap (0 = off).
        #[serde(default)]
        mean_gap_replicates: usize,
    },
    /// Stacked risk on `n - ⌊n/2⌋` observations: bootstrap law of the
    /// conditionally centred risk against its fresh analogue, optionally
    /// against the closed-form limit samplers.
    StackedLaw {
        #[serde(default)]
        limit_check: bool,
    },
    /// As `stacked_law`, with weights fitted on a second, independent resample.
    DoubleBootstrap,
    /// Two-sample kernel test calibrated by bootstrapping the pair-permuted
    /// data, once per block shift in `shifts` (default: the distribution's).
    KernelTest {
        #[serde(default)]
        shifts: Vec<f64>,
    },
}

fn one() -> usize {
    1
}

impl Default for Study {
    fn default() -> Self {
        Study::Coverage {
            estimand: Estimand::default(),
            law_comparison: LawComparison::default(),
            law_resample: LawResample::default(),
            law_reps: 1,
            one_sided: false,
            mean_gap_replicates: 0,
        }
    }
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Study::Coverage { .. } => "coverage",
            Study::StackedLaw { .. } => "stacked_law",
            Study::DoubleBootstrap => "double_bootstrap",
            Study::KernelTest { .. } => "kernel_test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstOrderConfig {
    pub trials: usize,
    #[serde(default = "both_replacements")]
    pub replacements: Vec<Replacement>,
}

fn both_replacements() -> Vec<Replacement> {
    vec![Replacement::Zero, Replacement::IndependentCopy]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityConfig {
    pub radius: f64,
    pub grid_size: usize,
    pub trials: usize,
    #[serde(default = "default_inner")]
    pub inner: usize,
}

fn default_inner() -> usize {
    bootlab_core::diagnostics::DEFAULT_INNER_REPLICATES
}

/// Stability diagnostics, run over their own sample-size grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Defaults to the scenario's `n_grid`.
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub first_order: Option<FirstOrderConfig>,
    #[serde(default)]
    pub sensitivity: Option<SensitivityConfig>,
}

impl DiagnosticsConfig {
    pub fn is_empty(&self) -> bool {
        self.first_order.is_none() && self.sensitivity.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("results")
}

impl Default for Outputs {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(format!("{}: {m}", self.name)));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(HarnessError::Config(format!(
                "scenario name `{}` must be non-empty ASCII letters, digits, `_` or `-`",
                self.name
            )));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return bad("n_grid must be a non-empty list of positive sizes".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_grid must be strictly ascending".into());
        }
        if self.replicates == 0 || self.outer_reps == 0 {
            return bad("replicates and outer_reps must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        self.distribution.validate()?;
        let data_mean = self.distribution.mean();
        match &self.study {
            Study::Coverage { law_reps, estimand, .. } => {
                if self.methods.is_empty() {
                    return bad("at least one method is required".into());
                }
                if *law_reps == 0 {
                    return bad("law_reps must be at least 1".into());
                }
                if *estimand == Estimand::PlugInPopulationMean && !self.statistic.depends_on_sums_only() {
                    return bad(format!(
                        "plug_in_population_mean needs a statistic of the column sums, not {}",
                        self.statistic.name()
                    ));
                }
            }
            Study::StackedLaw { .. } | Study::DoubleBootstrap => {
                if !matches!(self.statistic, StatisticSpec::StackedRisk { .. }) {
                    return bad(format!("{} needs a stacked_risk statistic", self.study.name()));
                }
                if self.n_grid[0] < 2 {
                    return bad("stacked studies need n ≥ 2".into());
                }
            }
            Study::KernelTest { .. } => {
                if !matches!(self.statistic, StatisticSpec::KernelSoftmaxMmd { .. }) {
                    return bad("kernel_test needs a kernel_softmax_mmd statistic".into());
                }
                if !matches!(self.distribution, DistributionSpec::TwoSampleGaussian { .. }) {
                    return bad("kernel_test needs a two_sample_gaussian distribution".into());
                }
            }
        }
        for m in &self.methods {
            match m {
                MethodSpec::Corrected { holder_c, holder_alpha, .. }
                    if !(*holder_c >= 0.0 && *holder_alpha > 0.0) =>
                {
                    return bad("corrected needs holder_c ≥ 0 and holder_alpha > 0".into());
                }
                MethodSpec::ShiftedSup { gamma: Some(g), .. } if !(*g >= 0.0) => {
                    return bad(format!("shifted_sup gamma must be non-negative, got {g}"));
                }
                MethodSpec::Robust { radius: Some(r), .. } if !(*r >= 0.0) => {
                    return bad(format!("robust radius must be non-negative, got {r}"));
                }
                MethodSpec::ShiftedSup { grid_points: 0, .. } | MethodSpec::Robust { grid_points: 0, .. } => {
                    return bad("offset grids need at least one point".into());
                }
                _ => {}
            }
        }
        if let Some(g) = &self.diagnostics.n_grid {
            if g.is_empty() || g.contains(&0) || g.windows(2).any(|w| w[0] >= w[1]) {
                return bad("diagnostics.n_grid must be strictly ascending positive sizes".into());
            }
        }
        if let Some(f) = &self.diagnostics.first_order {
            if f.trials < bootlab_core::diagnostics::MIN_TRIALS || f.replacements.is_empty() {
                return bad(format!(
                    "first_order needs at least {} trials and one replacement",
                    bootlab_core::diagnostics::MIN_TRIALS
                ));
            }
        }
        if let Some(s) = &self.diagnostics.sensitivity {
            if s.trials < bootlab_core::diagnostics::MIN_TRIALS || s.grid_size == 0 || s.inner == 0 || !(s.radius >= 0.0) {
                return bad("sensitivity needs trials ≥ 100, grid_size ≥ 1, inner ≥ 1 and radius ≥ 0".into());
            }
        }
        // Shape problems surface here rather than deep inside a run.
        let probe = self.distribution.generate(self.n_grid[0], bootlab_core::RngSeed::new(0, 0))?;
        if let Err(e) = self.statistic.check_shape(&probe) {
            return bad(format!("statistic does not fit the data: {e}"));
        }
        if data_mean.len() != probe.cols() {
            return bad("distribution mean has the wrong length".into());
        }
        Ok(())
    }

    /// The same scenario with outputs redirected and/or a new seed.
    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<PathBuf>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(d) = out {
            self.outputs.dir = d;
        }
        self
    }
}
