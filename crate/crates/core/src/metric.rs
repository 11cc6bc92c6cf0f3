//! Distances between empirical laws.
//!
//! [`estimate_df`] lower-bounds the smooth-test-function distance
//! `sup_h |E_a h - E_b h|` over functions whose first three derivatives are
//! bounded by one, by maximising over a finite [`TestDictionary`]. Every
//! dictionary entry is itself in that class, so the estimate never exceeds
//! the true distance; reports label it `df_lower`.
//!
//! Entries are positioned relative to the pooled mean of the two laws being
//! compared, which makes the estimate translation equivariant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::EmpiricalLaw;

/// CDF of the quadratic B-spline supported on `[0, 3]`, evaluated at `u`.
fn spline_cdf(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u < 1.0 {
        u * u * u / 6.0
    } else if u < 2.0 {
        (-2.0 * u * u * u + 9.0 * u * u - 9.0 * u + 3.0) / 6.0
    } else if u < 3.0 {
        let v = 3.0 - u;
        1.0 - v * v * v / 6.0
    } else {
        1.0
    }
}

/// The spline density and its first two derivatives at `u`.
fn spline_density(u: f64) -> [f64; 3] {
    if u <= 0.0 || u >= 3.0 {
        [0.0; 3]
    } else if u < 1.0 {
        [0.5 * u * u, u, 1.0]
    } else if u < 2.0 {
        [-u * u + 3.0 * u - 1.5, 3.0 - 2.0 * u, -2.0]
    } else {
        let v = 3.0 - u;
        [0.5 * v * v, -v, 1.0]
    }
}

fn indicator_unchecked(x: f64, a: f64, b: f64, eps: f64) -> f64 {
    spline_cdf((x - a) / eps) - spline_cdf((x - b) / eps)
}

/// Triple one-sided moving average (window `ε`) of the indicator of `[a, b]`:
/// `h(x) = P(x - ε(U₁ + U₂ + U₃) ∈ [a, b])` with `Uᵢ` uniform on `[0, 1]`.
///
/// `h` is a piecewise cubic, three times differentiable away from finitely
/// many points, equal to 1 when `[x - 3ε, x] ⊆ [a, b]` and to 0 when the two
/// intervals are disjoint.
pub fn smoothed_indicator(x: f64, a: f64, b: f64, eps: f64) -> Result<f64> {
    if !(a < b) || !(eps > 0.0) || !a.is_finite() || !b.is_finite() || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "smoothed indicator needs a < b and ε > 0, got [{a}, {b}], ε = {eps}"
        )));
    }
    Ok(indicator_unchecked(x, a, b, eps))
}

/// Upper bounds on `sup |h'|, |h''|, |h'''|` of the smoothed indicator.
///
/// When `b - a ≥ 3ε` the rising and falling edges do not overlap and the
/// bounds are attained; otherwise the edges may add up and the bounds double.
pub fn indicator_derivative_bounds(a: f64, b: f64, eps: f64) -> [f64; 3] {
    let edge = [0.75 / eps, 1.0 / (eps * eps), 2.0 / (eps * eps * eps)];
    if b - a >= 3.0 * eps {
        edge
    } else {
        edge.map(|v| 2.0 * v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TestFunction {
    /// `amplitude · h(x - center)` for the smoothed indicator of `[lo, hi]`.
    SmoothedIndicator { lo: f64, hi: f64, eps: f64, amplitude: f64 },
    /// `amplitude · sin(ω (x - center) + φ)`.
    ScaledSinusoid { omega: f64, phase: f64, amplitude: f64 },
}

impl TestFunction {
    /// Smoothed indicator scaled so that its first three derivatives are bounded by one.
    pub fn indicator(lo: f64, hi: f64, eps: f64) -> Result<Self> {
        smoothed_indicator(lo, lo, hi, eps)?;
        let m = indicator_derivative_bounds(lo, hi, eps).into_iter().fold(0.0, f64::max);
        Ok(TestFunction::SmoothedIndicator { lo, hi, eps, amplitude: 1.0 / m })
    }

    /// Sinusoid with amplitude `1 / max(ω, ω², ω³)`.
    pub fn sinusoid(omega: f64, phase: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidArgument(format!("frequency must be positive, got {omega}")));
        }
        let amplitude = 1.0 / omega.max(omega * omega).max(omega * omega * omega);
        Ok(TestFunction::ScaledSinusoid { omega, phase, amplitude })
    }

    /// Value at `y = x - center`.
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            TestFunction::SmoothedIndicator { lo, hi, eps, amplitude } => {
                amplitude * indicator_unchecked(y, lo, hi, eps)
            }
            TestFunction::ScaledSinusoid { omega, phase, amplitude } => {
                amplitude * (omega * y + phase).sin()
            }
        }
    }

    /// First three derivatives at `y = x - center` (one-sided at the
    /// finitely many knots of the indicator, where the third jumps).
    pub fn derivatives(&self, y: f64) -> [f64; 3] {
        match *self {
            TestFunction::SmoothedIndicator { lo, hi, eps, amplitude } => {
                let (da, db) = (spline_density((y - lo) / eps), spline_density((y - hi) / eps));
                let mut out = [0.0; 3];
                let mut scale = amplitude;
                for k in 0..3 {
                    scale /= eps;
                    out[k] = scale * (da[k] - db[k]);
                }
                out
            }
            TestFunction::ScaledSinusoid { omega, phase, amplitude } => {
                let (s, c) = (omega * y + phase).sin_cos();
                [amplitude * omega * c, -amplitude * omega * omega * s, -amplitude * omega.powi(3) * c]
            }
        }
    }

    /// Interval outside of which every derivative vanishes, or one period.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            TestFunction::SmoothedIndicator { lo, hi, eps, .. } => (lo, hi + 3.0 * eps),
            TestFunction::ScaledSinusoid { omega, phase, .. } => {
                let start = -phase / omega;
                (start, start + std::f64::consts::TAU / omega)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterRule {
    /// Entries are evaluated at `x - mean(a ∪ b)`.
    #[default]
    PooledMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestDictionary {
    #[serde(default)]
    pub center_rule: CenterRule,
    pub entries: Vec<TestFunction>,
}

/// Pooled-quantile levels anchoring the default indicator intervals.
const LEVELS: usize = 19;
const EPS_FACTORS: [f64; 3] = [0.05, 0.15, 0.5];
const FREQ_FACTORS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
const EPS_FALLBACK: f64 = 1e-3;

fn pooled(a: &EmpiricalLaw, b: &EmpiricalLaw) -> EmpiricalLaw {
    let mut v = a.values().to_vec();
    v.extend_from_slice(b.values());
    EmpiricalLaw::new(v).expect("laws are non-empty and finite")
}

fn pooled_mean(a: &EmpiricalLaw, b: &EmpiricalLaw) -> f64 {
    // summed per law so the result does not depend on argument order
    let s = a.values().iter().sum::<f64>() + b.values().iter().sum::<f64>();
    s / (a.len() + b.len()) as f64
}

impl TestDictionary {
    pub fn new(entries: Vec<TestFunction>) -> Self {
        Self { center_rule: CenterRule::PooledMean, entries }
    }

    /// The default dictionary for comparing `a` with `b`:
    ///
    /// * smoothed indicators of `[q_k, q_{k+2}]` for the pooled quantiles
    ///   `q_1..q_19` at levels `0.05, 0.10, ..., 0.95` (17 intervals), each at
    ///   `ε ∈ {0.05, 0.15, 0.5} × IQR` (`ε = 10⁻³` if the IQR vanishes);
    ///   intervals that collapse to a point are skipped;
    /// * sinusoids at `ω ∈ {0.5, 1, 2, 4} / SD` with phases `0` and `π/2`
    ///   (skipped if the pooled standard deviation vanishes).
    ///
    /// Positions are stored relative to the pooled mean.
    pub fn default_for(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Self {
        let p = pooled(a, b);
        let center = pooled_mean(a, b);
        let q: Vec<f64> = (1..=LEVELS).map(|k| p.quantile(0.05 * k as f64)).collect();
        let iqr = p.quantile(0.75) - p.quantile(0.25);
        let eps: Vec<f64> = if iqr > 0.0 {
            EPS_FACTORS.iter().map(|f| f * iqr).collect()
        } else {
            vec![EPS_FALLBACK]
        };
        let mut entries = Vec::new();
        for k in 0..LEVELS - 2 {
            let (lo, hi) = (q[k] - center, q[k + 2] - center);
            if !(lo < hi) {
                continue;
            }
            for &e in &eps {
                entries.push(TestFunction::indicator(lo, hi, e).expect("valid interval"));
            }
        }
        let sd = p.variance().sqrt();
        if sd > 0.0 {
            for f in FREQ_FACTORS {
                for phase in [0.0, std::f64::consts::FRAC_PI_2] {
                    entries.push(TestFunction::sinusoid(f / sd, phase).expect("positive frequency"));
                }
            }
        }
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn law_mean(law: &EmpiricalLaw, f: &TestFunction, center: f64) -> f64 {
    law.values().iter().map(|&x| f.eval(x - center)).sum::<f64>() / law.len() as f64
}

/// `max_h |E_a h - E_b h|` over the dictionary entries.
pub fn estimate_df(a: &EmpiricalLaw, b: &EmpiricalLaw, dict: &TestDictionary) -> Result<f64> {
    if dict.is_empty() {
        return Err(Error::InvalidArgument("test dictionary is empty".into()));
    }
    let center = match dict.center_rule {
        CenterRule::PooledMean => pooled_mean(a, b),
    };
    let gaps: Vec<f64> = dict
        .entries
        .par_iter()
        .map(|f| (law_mean(a, f, center) - law_mean(b, f, center)).abs())
        .collect();
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// [`estimate_df`] with the default dictionary for the pair.
pub fn df_lower(a: &EmpiricalLaw, b: &EmpiricalLaw) -> f64 {
    let dict = TestDictionary::default_for(a, b);
    if dict.is_empty() {
        // Both laws are the same point mass.
        return 0.0;
    }
    estimate_df(a, b, &dict).expect("dictionary is non-empty")
}

/// Two-sample Kolmogorov–Smirnov distance `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_distance(a: &EmpiricalLaw, b: &EmpiricalLaw) -> f64 {
    let (xa, xb) = (a.values(), b.values());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// KS distance of a sample from the uniform law on `[0, 1]`.
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            (x - i as f64 / n).max((i + 1) as f64 / n - x)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;

    fn law(v: Vec<f64>) -> EmpiricalLaw {
        EmpiricalLaw::new(v).unwrap()
    }

    fn normal_law(n: usize, seed: u64) -> EmpiricalLaw {
        let mut s = RngSeed::new(seed, 0).open();
        law((0..n).map(|_| s.normal()).collect())
    }

    #[test]
    fn indicator_examples() {
        assert_eq!(smoothed_indicator(0.5, 0.0, 1.0, 0.01).unwrap(), 1.0);
        assert_eq!(smoothed_indicator(-1.0, 0.0, 1.0, 0.01).unwrap(), 0.0);
        // reference value from a nested trapezoid quadrature of the triple average
        let v = smoothed_indicator(0.05, 0.0, 1.0, 0.1).unwrap();
        assert!((v - 0.02083329).abs() < 1e-6);
        assert!(smoothed_indicator(0.0, 1.0, 1.0, 0.1).is_err());
        assert!(smoothed_indicator(0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn indicator_is_continuous_at_knots() {
        for u in [0.0, 1.0, 2.0, 3.0] {
            let l = spline_cdf(u - 1e-12);
            let r = spline_cdf(u + 1e-12);
            assert!((l - r).abs() < 1e-10, "{u}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences_and_stay_below_one() {
        let dict = TestDictionary::default_for(&normal_law(500, 1), &normal_law(300, 2).shifted(0.5));
        assert!(dict.len() > 40);
        for f in &dict.entries {
            let (a, b) = f.support();
            let h = (b - a) * 1e-5;
            for k in 0..=2000 {
                let y = a + (b - a) * k as f64 / 2000.0 + 0.37 * h;
                let d = f.derivatives(y);
                assert!(d.iter().all(|v| v.abs() <= 1.0 + 1e-12), "{f:?} at {y}: {d:?}");
                let fd = (f.eval(y + h) - f.eval(y - h)) / (2.0 * h);
                assert!((fd - d[0]).abs() < 1e-6, "{f:?} at {y}: {fd} vs {}", d[0]);
                // the third derivative jumps at the knots lo + kε, hi + kε,
                // which spoils central differences of the lower ones there
                let near_knot = match *f {
                    TestFunction::SmoothedIndicator { lo, hi, eps, .. } => (0..4)
                        .any(|k| [lo, hi].iter().any(|e| (y - e - k as f64 * eps).abs() < 2.0 * h)),
                    _ => false,
                };
                if !near_knot {
                    let dd = (f.derivatives(y + h)[0] - f.derivatives(y - h)[0]) / (2.0 * h);
                    assert!((dd - d[1]).abs() < 1e-6, "{f:?} at {y}");
                    let td = (f.derivatives(y + h)[1] - f.derivatives(y - h)[1]) / (2.0 * h);
                    assert!((td - d[2]).abs() < 1e-6, "{f:?} at {y}");
                }
            }
        }
    }

    #[test]
    fn identical_laws_are_at_distance_zero() {
        let a = normal_law(300, 1);
        assert_eq!(df_lower(&a, &a), 0.0);
        assert_eq!(ks_distance(&a, &a), 0.0);
        let p = law(vec![0.0]);
        assert_eq!(df_lower(&p, &p), 0.0);
    }

    #[test]
    fn point_masses_apart() {
        let a = law(vec![0.0]);
        let b = law(vec![3.0]);
        let dict = TestDictionary::default_for(&a, &b);
        let v = estimate_df(&a, &b, &dict).unwrap();
        assert!(v > 0.0);
        assert_eq!(ks_distance(&a, &b), 1.0);
        assert_eq!(estimate_df(&a, &b, &dict).unwrap(), estimate_df(&b, &a, &dict).unwrap());
    }

    #[test]
    fn ks_of_two_normal_samples_is_small() {
        let a = normal_law(5000, 2);
        let b = normal_law(5000, 3);
        assert!(ks_distance(&a, &b) <= 0.04);
    }

    #[test]
    fn ks_counts_ties() {
        let a = law(vec![1.0, 2.0]);
        let b = law(vec![1.0, 1.0, 3.0, 3.0]);
        // F_a(1) = 0.5, F_b(1) = 0.5; F_a(2) = 1, F_b(2) = 0.5
        assert_eq!(ks_distance(&a, &b), 0.5);
    }

    #[test]
    fn ks_uniform_reference() {
        assert!((ks_uniform(&[0.5]) - 0.5).abs() < 1e-15);
        let grid: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_uniform(&grid) - 0.005).abs() < 1e-12);
    }

    #[test]
    fn growing_dictionary_never_decreases() {
        let a = normal_law(200, 4);
        let b = normal_law(200, 5).shifted(0.3);
        let full = TestDictionary::default_for(&a, &b);
        let mut prev = 0.0;
        for k in 1..=full.len() {
            let d = TestDictionary::new(full.entries[..k].to_vec());
            let v = estimate_df(&a, &b, &d).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(estimate_df(&a, &b, &TestDictionary::new(vec![])).is_err());
    }

    #[test]
    fn dictionary_json_round_trip() {
        let a = normal_law(50, 6);
        let d = TestDictionary::default_for(&a, &a.shifted(1.0));
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<TestDictionary>(&text).unwrap(), d);
    }
}
