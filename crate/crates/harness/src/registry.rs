//! Built-in scenarios.
//!
//! Each scenario exists in two profiles: `desk` (the sizes used by the
//! acceptance suite, minutes on a single core) and `smoke` (`n = 100`,
//! 20 outer repetitions, 100 replicates; seconds).

use bootlab_core::diagnostics::Replacement;
use bootlab_core::statistics::{KernelSpec, LossSpec, Temperature};
use bootlab_core::StatisticSpec;
use serde::{Deserialize, Serialize};

use crate::config::{
    DiagnosticsConfig, Estimand, FirstOrderConfig, LawComparison, LawResample, MethodSpec,
    Outputs, ScenarioConfig, SensitivityConfig, Study,
};
use crate::distribution::DistributionSpec;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Desk,
    Smoke,
}

pub const SCENARIOS: [&str; 16] = [
    "example1_min",
    "example22_isolated",
    "ex33_invariant_pair",
    "ex34_squared_mean",
    "ex36_corrected",
    "ex37_shifted_sup",
    "ex41_power",
    "ex42_product",
    "ex43_positive_part",
    "ex44_spin_glass",
    "prop51_bands",
    "prop61_minmax",
    "prop71_kernel",
    "prop81_stacked",
    "example82_tanh",
    "prop83_double",
];

/// Sizes that differ between the profiles.
struct Scale {
    smoke: bool,
}

impl Scale {
    fn pick<T>(&self, desk: T, smoke: T) -> T {
        if self.smoke {
            smoke
        } else {
            desk
        }
    }

    fn n(&self, desk: &[usize]) -> Vec<usize> {
        self.pick(desk.to_vec(), vec![100])
    }

    fn reps(&self, desk: usize) -> usize {
        self.pick(desk, 20)
    }

    fn b(&self, desk: usize) -> usize {
        self.pick(desk, 100)
    }
}

fn coverage(estimand: Estimand) -> Study {
    Study::Coverage {
        estimand,
        law_comparison: LawComparison::None,
        law_resample: LawResample::Empirical,
        law_reps: 1,
        one_sided: false,
        mean_gap_replicates: 0,
    }
}

fn law_study(comparison: LawComparison, resample: LawResample, law_reps: usize) -> Study {
    Study::Coverage {
        estimand: Estimand::OracleMean,
        law_comparison: comparison,
        law_resample: resample,
        law_reps,
        one_sided: false,
        mean_gap_replicates: 0,
    }
}

#[allow(clippy::too_many_arguments)]
fn scenario(
    name: &str,
    seed: u64,
    n_grid: Vec<usize>,
    replicates: usize,
    outer_reps: usize,
    distribution: DistributionSpec,
    statistic: StatisticSpec,
    methods: Vec<MethodSpec>,
    study: Study,
) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        seed,
        n_grid,
        replicates,
        outer_reps,
        alpha: 0.05,
        distribution,
        statistic,
        methods,
        study,
        diagnostics: DiagnosticsConfig::default(),
        outputs: Outputs::default(),
    }
}

fn stacked(beta: Temperature) -> StatisticSpec {
    StatisticSpec::StackedRisk { base_predictions: vec![-1.0, 1.0], beta, loss: LossSpec::Square }
}

fn squared_mean() -> StatisticSpec {
    StatisticSpec::ScaledMeanPower { p: 2 }
}

const NORMAL: DistributionSpec = DistributionSpec::StdNormal { dims: 1 };

/// Grid side of the min-max scenario and the spacing of its cell means.
pub const MINMAX_SIDE: usize = 10;
pub const MINMAX_STEP: f64 = 0.5;

/// Cell means `μ_ij = step·(j - i)` of a `p × p` grid, row-major.
pub fn minmax_means(p: usize, step: f64) -> Vec<f64> {
    (0..p * p).map(|k| step * ((k % p) as f64 - (k / p) as f64)).collect()
}

/// The built-in scenario `name` at the given profile.
pub fn builtin(name: &str, profile: Profile) -> Result<ScenarioConfig> {
    let s = Scale { smoke: profile == Profile::Smoke };
    let plain = vec![MethodSpec::PlainQuantile];
    let cfg = match name {
        "example1_min" => {
            let mut c = scenario(
                name,
                101,
                s.n(&[1000]),
                s.b(1000),
                s.reps(400),
                DistributionSpec::UniformUnit { dims: 1 },
                StatisticSpec::ScaledMin,
                plain,
                Study::Coverage {
                    estimand: Estimand::OracleMean,
                    law_comparison: LawComparison::Raw,
                    law_resample: LawResample::Empirical,
                    law_reps: s.pick(20, 2),
                    one_sided: true,
                    mean_gap_replicates: 0,
                },
            );
            c.diagnostics = DiagnosticsConfig {
                n_grid: Some(s.pick(vec![250, 500, 1000, 2000], vec![50, 100])),
                first_order: Some(FirstOrderConfig {
                    trials: s.pick(1_000_000, 100),
                    replacements: vec![Replacement::IndependentCopy, Replacement::Zero],
                }),
                sensitivity: None,
            };
            c
        }
        "example22_isolated" => scenario(
            name,
            102,
            s.n(&[2000]),
            s.b(200),
            s.reps(100),
            DistributionSpec::UniformUnit { dims: 1 },
            // Centred at e^{-2}, the isolation probability of uniform data
            // (a point is isolated when no other point lies within ±1/n).
            StatisticSpec::IsolatedCount { centering_c: (-2.0f64).exp() },
            plain,
            Study::Coverage {
                estimand: Estimand::OracleMean,
                law_comparison: LawComparison::None,
                law_resample: LawResample::Empirical,
                law_reps: 1,
                one_sided: false,
                mean_gap_replicates: s.pick(400, 20),
            },
        ),
        "ex33_invariant_pair" => {
            let mut c = scenario(
                name,
                103,
                s.n(&[500]),
                s.b(1000),
                s.reps(200),
                DistributionSpec::BoundedCentered { c: 1.0, dims: 1 },
                StatisticSpec::PairedDiffSq,
                vec![MethodSpec::PlainQuantile, MethodSpec::Centered],
                coverage(Estimand::OracleMean),
            );
            c.diagnostics = DiagnosticsConfig {
                n_grid: Some(s.pick(vec![250, 1000, 4000], vec![50, 100])),
                first_order: None,
                sensitivity: Some(SensitivityConfig {
                    radius: 1.0,
                    grid_size: 9,
                    trials: 100,
                    inner: s.pick(100, 10),
                }),
            };
            c
        }
        "ex34_squared_mean" => {
            let mut c = scenario(
                name,
                104,
                s.n(&[1000]),
                s.b(2000),
                s.reps(2000),
                NORMAL,
                squared_mean(),
                plain,
                coverage(Estimand::OracleMean),
            );
            c.diagnostics = DiagnosticsConfig {
                n_grid: Some(s.pick(vec![250, 1000, 4000], vec![50, 100])),
                first_order: None,
                sensitivity: Some(SensitivityConfig {
                    radius: 1.0,
                    grid_size: 9,
                    trials: s.pick(2000, 100),
                    inner: s.pick(2000, 20),
                }),
            };
            c
        }
        "ex36_corrected" => scenario(
            name,
            106,
            s.n(&[500]),
            s.b(1000),
            s.reps(2000),
            NORMAL,
            squared_mean(),
            vec![MethodSpec::PlainQuantile, MethodSpec::Corrected {
                holder_c: 1.0,
                holder_alpha: 2.0,
                gauss_draws: s.pick(4000, 1000),
            }],
            coverage(Estimand::OracleMean),
        ),
        "ex37_shifted_sup" => scenario(
            name,
            107,
            s.n(&[500]),
            s.b(1000),
            s.reps(2000),
            NORMAL,
            squared_mean(),
            vec![
                MethodSpec::ShiftedSup { gamma: None, grid_points: 41 },
                MethodSpec::Robust { radius: None, grid_points: 11 },
            ],
            coverage(Estimand::OracleMean),
        ),
        "ex41_power" => scenario(
            name,
            141,
            s.n(&[250, 1000]),
            s.b(1000),
            s.reps(400),
            NORMAL,
            StatisticSpec::ScaledMeanPower { p: 3 },
            vec![MethodSpec::PlainQuantile, MethodSpec::Centered],
            coverage(Estimand::OracleMean),
        ),
        "ex42_product" => scenario(
            name,
            142,
            s.n(&[500]),
            s.b(2000),
            s.reps(200),
            DistributionSpec::BoundedCentered { c: 1.0, dims: 1 },
            StatisticSpec::ProductStatistic { centered: false },
            vec![MethodSpec::PlainQuantile, MethodSpec::Centered],
            law_study(LawComparison::Raw, LawResample::Centered, s.pick(20, 2)),
        ),
        "ex43_positive_part" => scenario(
            name,
            143,
            s.n(&[250, 1000]),
            s.b(1000),
            s.reps(400),
            NORMAL,
            StatisticSpec::PositivePartMean,
            vec![MethodSpec::PlainQuantile, MethodSpec::Centered],
            coverage(Estimand::OracleMean),
        ),
        "ex44_spin_glass" => scenario(
            name,
            144,
            vec![100],
            s.b(200),
            s.reps(100),
            DistributionSpec::GaussianMatrix { m: 10 },
            StatisticSpec::SpinGlassEntropy { spins: 10 },
            vec![MethodSpec::PlainQuantile, MethodSpec::Centered],
            coverage(Estimand::OracleMean),
        ),
        "prop51_bands" => scenario(
            name,
            151,
            s.n(&[1000]),
            s.b(2000),
            s.reps(100),
            DistributionSpec::StdNormal { dims: 50 },
            StatisticSpec::MaxCoordMean { beta: Temperature::Infinite },
            vec![MethodSpec::Centered],
            law_study(LawComparison::Raw, LawResample::Centered, s.pick(20, 2)),
        ),
        "prop61_minmax" => scenario(
            name,
            161,
            s.n(&[1000]),
            s.b(500),
            s.reps(400),
            DistributionSpec::MeanShiftedNormal { mean: minmax_means(MINMAX_SIDE, MINMAX_STEP) },
            StatisticSpec::MinMaxCoordMean { p: MINMAX_SIDE, beta: Temperature::Infinite },
            vec![MethodSpec::Centered],
            coverage(Estimand::PlugInPopulationMean),
        ),
        "prop71_kernel" => scenario(
            name,
            171,
            s.n(&[200]),
            s.b(200),
            s.reps(200),
            DistributionSpec::TwoSampleGaussian { shift: 0.0, dims: 1 },
            StatisticSpec::KernelSoftmaxMmd {
                kernels: [0.5, 1.0, 2.0].map(|bandwidth| KernelSpec::Gaussian { bandwidth }).to_vec(),
                beta: 5.0,
                lambda: 1e-3,
            },
            Vec::new(),
            Study::KernelTest { shifts: vec![0.0, 1.0] },
        ),
        "prop81_stacked" => scenario(
            name,
            181,
            s.n(&[2000]),
            s.b(2000),
            s.reps(100),
            NORMAL,
            stacked(Temperature::QuarterRows),
            Vec::new(),
            Study::StackedLaw { limit_check: false },
        ),
        "example82_tanh" => scenario(
            name,
            182,
            s.n(&[2000]),
            s.b(2000),
            s.reps(100),
            NORMAL,
            stacked(Temperature::SqrtRows),
            Vec::new(),
            Study::StackedLaw { limit_check: true },
        ),
        "prop83_double" => scenario(
            name,
            183,
            s.n(&[2000]),
            s.b(2000),
            s.reps(100),
            NORMAL,
            stacked(Temperature::QuarterRows),
            Vec::new(),
            Study::DoubleBootstrap,
        ),
        other => return Err(HarnessError::UnknownScenario(other.to_string())),
    };
    Ok(cfg)
}

/// Every built-in scenario at the given profile, in [`SCENARIOS`] order.
pub fn all(profile: Profile) -> Vec<ScenarioConfig> {
    SCENARIOS.iter().map(|n| builtin(n, profile).expect("registered scenario")).collect()
}
