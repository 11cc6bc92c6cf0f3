//! Data-generating laws.
//!
//! Every law produces i.i.d. rows with all moments finite. Rows are filled
//! in row-major order from a single stream opened from the dataset seed.

use bootlab_core::diagnostics::DataSource;
use bootlab_core::{Dataset, RngSeed};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

const LATTICE: f64 = 4294967296.0; // 2^32

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    /// Uniform on `[0, 1]^d`.
    UniformUnit {
        #[serde(default = "one")]
        dims: usize,
    },
    /// `N(0, I_d)`.
    StdNormal {
        #[serde(default = "one")]
        dims: usize,
    },
    /// `N(0, σ² I_d)`.
    ScaledNormal {
        sigma: f64,
        #[serde(default = "one")]
        dims: usize,
    },
    /// Uniform on the symmetric dyadic lattice `c·(2k + 1 - 2³²)/2³²`,
    /// `k ∈ [0, 2³²)`, which has mean exactly zero and support in `[-c, c]`.
    BoundedCentered {
        c: f64,
        #[serde(default = "one")]
        dims: usize,
    },
    /// The `m²` entries of an `m × m` standard Gaussian matrix as scalar
    /// observations; only `n = m²` rows can be drawn.
    GaussianMatrix { m: usize },
    /// Rows `(U, V)` with `U ~ N(0, I_d)` and `V ~ N(δ·1, I_d)`.
    TwoSampleGaussian {
        #[serde(default)]
        shift: f64,
        #[serde(default = "one")]
        dims: usize,
    },
    /// `N(mean, I)`.
    MeanShiftedNormal { mean: Vec<f64> },
}

fn one() -> usize {
    1
}

impl DistributionSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DistributionSpec::UniformUnit { .. } => "uniform_unit",
            DistributionSpec::StdNormal { .. } => "std_normal",
            DistributionSpec::ScaledNormal { .. } => "scaled_normal",
            DistributionSpec::BoundedCentered { .. } => "bounded_centered",
            DistributionSpec::GaussianMatrix { .. } => "gaussian_matrix",
            DistributionSpec::TwoSampleGaussian { .. } => "two_sample_gaussian",
            DistributionSpec::MeanShiftedNormal { .. } => "mean_shifted_normal",
        }
    }

    /// Number of columns of a generated dataset.
    pub fn dims(&self) -> usize {
        match self {
            DistributionSpec::UniformUnit { dims }
            | DistributionSpec::StdNormal { dims }
            | DistributionSpec::ScaledNormal { dims, .. }
            | DistributionSpec::BoundedCentered { dims, .. } => *dims,
            DistributionSpec::GaussianMatrix { .. } => 1,
            DistributionSpec::TwoSampleGaussian { dims, .. } => 2 * dims,
            DistributionSpec::MeanShiftedNormal { mean } => mean.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.dims() == 0 {
            return bad(format!("{}: dimension must be at least 1", self.name()));
        }
        match self {
            DistributionSpec::ScaledNormal { sigma, .. } if !(*sigma >= 0.0 && sigma.is_finite()) => {
                bad(format!("scaled_normal: sigma must be finite and non-negative, got {sigma}"))
            }
            DistributionSpec::BoundedCentered { c, .. } if !(*c > 0.0 && c.is_finite()) => {
                bad(format!("bounded_centered: c must be finite and positive, got {c}"))
            }
            DistributionSpec::GaussianMatrix { m } if *m == 0 => {
                bad("gaussian_matrix: m must be at least 1".into())
            }
            DistributionSpec::TwoSampleGaussian { shift, .. } if !shift.is_finite() => {
                bad(format!("two_sample_gaussian: shift must be finite, got {shift}"))
            }
            DistributionSpec::MeanShiftedNormal { mean } if mean.iter().any(|v| !v.is_finite()) => {
                bad("mean_shifted_normal: mean must be finite".into())
            }
            _ => Ok(()),
        }
    }

    /// Population mean of one row.
    pub fn mean(&self) -> Vec<f64> {
        match self {
            DistributionSpec::UniformUnit { dims } => vec![0.5; *dims],
            DistributionSpec::StdNormal { dims }
            | DistributionSpec::ScaledNormal { dims, .. }
            | DistributionSpec::BoundedCentered { dims, .. } => vec![0.0; *dims],
            DistributionSpec::GaussianMatrix { .. } => vec![0.0],
            DistributionSpec::TwoSampleGaussian { shift, dims } => {
                let mut m = vec![0.0; *dims];
                m.extend(std::iter::repeat(*shift).take(*dims));
                m
            }
            DistributionSpec::MeanShiftedNormal { mean } => mean.clone(),
        }
    }

    /// Second raw moment of each column.
    pub fn second_moment(&self) -> Vec<f64> {
        let var = match self {
            DistributionSpec::UniformUnit { .. } => 1.0 / 12.0,
            DistributionSpec::ScaledNormal { sigma, .. } => sigma * sigma,
            DistributionSpec::BoundedCentered { c, .. } => {
                // discrete uniform on the lattice: c²(1 - 2^{-64})/3
                c * c * (1.0 - 1.0 / (LATTICE * LATTICE)) / 3.0
            }
            _ => 1.0,
        };
        self.mean().iter().map(|m| m * m + var).collect()
    }

    /// Draws `n` i.i.d. rows.
    pub fn generate(&self, n: usize, seed: RngSeed) -> Result<Dataset> {
        self.validate()?;
        if n == 0 {
            return Err(HarnessError::Config("cannot generate an empty dataset".into()));
        }
        let d = self.dims();
        let mut s = seed.open();
        let mut values = Vec::with_capacity(n * d);
        match self {
            DistributionSpec::UniformUnit { .. } => {
                values.extend((0..n * d).map(|_| s.uniform()));
            }
            DistributionSpec::StdNormal { .. } => values.extend((0..n * d).map(|_| s.normal())),
            DistributionSpec::ScaledNormal { sigma, .. } => {
                values.extend((0..n * d).map(|_| sigma * s.normal()))
            }
            DistributionSpec::BoundedCentered { c, .. } => values.extend((0..n * d).map(|_| {
                let k = s.next_u32() as f64;
                c * (2.0 * k + 1.0 - LATTICE) / LATTICE
            })),
            DistributionSpec::GaussianMatrix { m } => {
                if n != m * m {
                    return Err(HarnessError::Config(format!(
                        "gaussian_matrix with m = {m} has exactly {} entries, {n} requested",
                        m * m
                    )));
                }
                values.extend((0..n).map(|_| s.normal()));
            }
            DistributionSpec::TwoSampleGaussian { shift, dims } => {
                for _ in 0..n {
                    values.extend((0..*dims).map(|_| s.normal()));
                    values.extend((0..*dims).map(|_| shift + s.normal()));
                }
            }
            DistributionSpec::MeanShiftedNormal { mean } => {
                for _ in 0..n {
                    values.extend(mean.iter().map(|m| m + s.normal()));
                }
            }
        }
        Ok(Dataset::new(n, d, values)?)
    }
}

impl DataSource for DistributionSpec {
    fn draw(&self, n: usize, seed: RngSeed) -> bootlab_core::Result<Dataset> {
        self.generate(n, seed).map_err(|e| match e {
            HarnessError::Core(c) => c,
            other => bootlab_core::Error::InvalidArgument(other.to_string()),
        })
    }

    fn population_mean(&self) -> Option<Vec<f64>> {
        Some(self.mean())
    }
}
