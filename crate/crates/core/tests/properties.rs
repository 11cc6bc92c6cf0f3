use bootlab_core::diagnostics::{uniform_perturbation_sensitivity, DataSource};
use bootlab_core::metric::{estimate_df, TestDictionary};
use bootlab_core::resample::{resample_centered, resample_empirical, shift};
use bootlab_core::statistics::{KernelSpec, Temperature};
use bootlab_core::{Dataset, EmpiricalLaw, Result, RngSeed, StatisticSpec};
use proptest::prelude::*;

/// Values on a dyadic lattice, so that shifts by dyadic constants are exact.
fn lattice(k: i32) -> f64 {
    k as f64 / 1024.0
}

fn lattice_column(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-4096i32..4096).prop_map(lattice), min..max)
}

fn column(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, min..max)
}

fn scalar_specs() -> Vec<StatisticSpec> {
    vec![
        StatisticSpec::ScaledMeanPower { p: 1 },
        StatisticSpec::ScaledMeanPower { p: 3 },
        StatisticSpec::PositivePartMean,
        StatisticSpec::ProductStatistic { centered: false },
        StatisticSpec::ProductStatistic { centered: true },
        StatisticSpec::ScaledMin,
        StatisticSpec::IsolatedCount { centering_c: 0.1 },
        StatisticSpec::MaxCoordMean { beta: Temperature::Infinite },
        StatisticSpec::StackedRisk {
            base_predictions: vec![-1.0, 1.0],
            beta: Temperature::SqrtRows,
            loss: Default::default(),
        },
    ]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_statistics_ignore_row_order(v in column(4, 40), seed in any::<u64>()) {
        let data = Dataset::from_column(v.clone()).unwrap();
        let mut idx: Vec<usize> = (0..v.len()).collect();
        let mut s = RngSeed::new(seed, 0).open();
        for i in (1..idx.len()).rev() {
            idx.swap(i, s.index(i + 1));
        }
        let permuted = data.select_rows(&idx);
        for spec in scalar_specs() {
            let (a, b) = (spec.eval(&data).unwrap(), spec.eval(&permuted).unwrap());
            prop_assert!(close(a, b), "{}: {a} vs {b}", spec.name());
        }
    }

    #[test]
    fn multivariate_statistics_ignore_row_order(v in prop::collection::vec(-3.0f64..3.0, 8..120), seed in any::<u64>()) {
        let rows = v.len() / 4;
        let data = Dataset::new(rows, 4, v[..rows * 4].to_vec()).unwrap();
        let mut idx: Vec<usize> = (0..rows).rev().collect();
        idx.rotate_left((seed % rows as u64) as usize);
        let permuted = data.select_rows(&idx);
        let specs = [
            StatisticSpec::MaxCoordMean { beta: Temperature::Default },
            StatisticSpec::MinMaxCoordMean { p: 2, beta: Temperature::Infinite },
            StatisticSpec::MinMaxCoordMean { p: 2, beta: Temperature::Default },
            StatisticSpec::KernelSoftmaxMmd {
                kernels: vec![KernelSpec::Gaussian { bandwidth: 1.0 }, KernelSpec::Linear],
                beta: 2.0,
                lambda: 0.0,
            },
        ];
        for spec in specs {
            let (a, b) = (spec.eval(&data).unwrap(), spec.eval(&permuted).unwrap());
            prop_assert!(close(a, b), "{}: {a} vs {b}", spec.name());
        }
    }

    #[test]
    fn difference_statistics_ignore_shifts(v in lattice_column(2, 60), k in -2048i32..2048) {
        let data = Dataset::from_column(v).unwrap();
        let shifted = shift(&data, &[lattice(k)]).unwrap();
        for spec in [StatisticSpec::PairedDiffSq, StatisticSpec::IsolatedCount { centering_c: 0.3 }] {
            prop_assert!(spec.is_difference_only());
            prop_assert_eq!(spec.eval(&data).unwrap(), spec.eval(&shifted).unwrap());
        }
    }

    #[test]
    fn linear_statistic_moves_with_shifts(v in column(1, 50), c in -2.0f64..2.0) {
        let data = Dataset::from_column(v).unwrap();
        let spec = StatisticSpec::ScaledMeanPower { p: 1 };
        let moved = spec.eval(&shift(&data, &[c]).unwrap()).unwrap();
        let expected = spec.eval(&data).unwrap() + (data.rows() as f64).sqrt() * c;
        prop_assert!(close(moved, expected));
    }

    #[test]
    fn max_surrogate_within_one_over_beta(v in prop::collection::vec(-5.0f64..5.0, 6..90), beta in 0.05f64..20.0) {
        let rows = v.len() / 3;
        let data = Dataset::new(rows, 3, v[..rows * 3].to_vec()).unwrap();
        let exact = StatisticSpec::MaxCoordMean { beta: Temperature::Infinite }.eval(&data).unwrap();
        let smooth = StatisticSpec::MaxCoordMean { beta: Temperature::Value(beta) }.eval(&data).unwrap();
        prop_assert!(smooth >= exact - 1e-12);
        prop_assert!(smooth - exact <= 1.0 / beta + 1e-12);
    }

    #[test]
    fn minmax_surrogate_within_two_over_beta(v in prop::collection::vec(-5.0f64..5.0, 9..90), beta in 0.05f64..20.0) {
        let rows = v.len() / 9;
        let data = Dataset::new(rows, 9, v[..rows * 9].to_vec()).unwrap();
        let exact = StatisticSpec::MinMaxCoordMean { p: 3, beta: Temperature::Infinite }.eval(&data).unwrap();
        let smooth = StatisticSpec::MinMaxCoordMean { p: 3, beta: Temperature::Value(beta) }.eval(&data).unwrap();
        prop_assert!((smooth - exact).abs() <= 2.0 / beta + 1e-12, "{smooth} vs {exact}");
    }

    #[test]
    fn kernel_statistic_unchanged_by_swapping_every_row(v in prop::collection::vec(-2.0f64..2.0, 8..80)) {
        let rows = v.len() / 4;
        let data = Dataset::new(rows, 4, v[..rows * 4].to_vec()).unwrap();
        let swapped = Dataset::from_rows(
            &data.iter_rows().map(|r| vec![r[2], r[3], r[0], r[1]]).collect::<Vec<_>>(),
        ).unwrap();
        let spec = StatisticSpec::KernelSoftmaxMmd {
            kernels: vec![KernelSpec::Gaussian { bandwidth: 0.7 }, KernelSpec::Polynomial { degree: 2, offset: 1.0 }],
            beta: 5.0,
            lambda: 1e-3,
        };
        prop_assert!(close(spec.eval(&data).unwrap(), spec.eval(&swapped).unwrap()));
    }

    #[test]
    fn centered_resamples_keep_differences(v in column(2, 50), log_n in 1u32..6, mu in -1.0f64..1.0, seed in any::<u64>()) {
        let data = Dataset::from_column(v).unwrap();
        let s = RngSeed::new(seed, 3);
        let z = resample_empirical(&data, s);
        let zc = resample_centered(&data, &[mu], s).unwrap();
        let spec = StatisticSpec::IsolatedCount { centering_c: 0.0 };
        for i in 1..z.rows() {
            let (a, b) = (z.get(i, 0) - z.get(0, 0), zc.get(i, 0) - zc.get(0, 0));
            prop_assert!((a - b).abs() <= 1e-12);
        }
        // Exact when the recentring constant is itself on the lattice: dyadic
        // data with a power-of-two row count has a dyadic mean.
        let rows: Vec<f64> = (0..1usize << log_n).map(|i| data.get(i % data.rows(), 0)).collect();
        let lat = Dataset::from_column(rows).unwrap().map(|x| (x * 1024.0).round() / 1024.0).unwrap();
        let m = (mu * 1024.0).round() / 1024.0;
        let z = resample_empirical(&lat, s);
        let zc = resample_centered(&lat, &[m], s).unwrap();
        prop_assert_eq!(spec.eval(&z).unwrap(), spec.eval(&zc).unwrap());
        prop_assert_eq!(StatisticSpec::PairedDiffSq.eval(&z).unwrap(), StatisticSpec::PairedDiffSq.eval(&zc).unwrap());
    }

    #[test]
    fn df_is_symmetric_and_translation_equivariant(a in column(5, 60), b in column(5, 60), k in -512i32..512) {
        let (la, lb) = (EmpiricalLaw::new(a).unwrap(), EmpiricalLaw::new(b).unwrap());
        let dict = TestDictionary::default_for(&la, &lb);
        let d = estimate_df(&la, &lb, &dict).unwrap();
        prop_assert_eq!(d, estimate_df(&lb, &la, &dict).unwrap());
        prop_assert!(d >= 0.0);
        let c = lattice(k);
        let shifted = estimate_df(&la.shifted(c), &lb.shifted(c), &dict).unwrap();
        prop_assert!((shifted - d).abs() <= 1e-12, "{shifted} vs {d}");
    }
}

fn lattice_source(n: usize, seed: RngSeed) -> Result<Dataset> {
    let mut s = seed.open();
    Dataset::from_column((0..n).map(|_| (s.next_u32() as f64 - 2147483648.0) / 2147483648.0).collect())
}

#[test]
fn difference_statistics_are_insensitive_to_uniform_perturbations() {
    for spec in [StatisticSpec::PairedDiffSq, StatisticSpec::IsolatedCount { centering_c: 0.1 }] {
        for (radius, grid) in [(0.5, 3), (3.0, 9), (10.0, 1)] {
            let v = uniform_perturbation_sensitivity(&spec, &lattice_source as &dyn DataSource, 128, radius, grid, 100, 10, RngSeed::new(9, 0))
                .unwrap();
            assert_eq!(v.value, 0.0, "{} radius {radius}", spec.name());
        }
    }
}

#[test]
fn spin_glass_single_spin_closed_form() {
    let spec = StatisticSpec::SpinGlassEntropy { spins: 1 };
    for x in [-2.5, 0.0, 0.3, 7.0] {
        let v = spec.eval(&Dataset::from_column(vec![x]).unwrap()).unwrap();
        assert!((v - (x + std::f64::consts::LN_2)).abs() < 1e-12);
    }
}
