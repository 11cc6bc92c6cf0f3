use crate::error::{Error, Result};

/// A finite sample of scalar values with uniform weights, kept sorted.
///
/// Quantiles use the right-continuous inverse of the empirical CDF
/// (type 1): `quantile(q)` is the smallest value `v` with `F(v) ≥ q`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLaw {
    values: Vec<f64>,
}

impl EmpiricalLaw {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empirical law needs at least one value".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("empirical law contains a non-finite value".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.values.len() as f64
    }

    /// Type-1 quantile; `q` is clamped to `[0, 1]`.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.values.len();
        let k = (q.clamp(0.0, 1.0) * n as f64).ceil() as usize;
        self.values[k.saturating_sub(1).min(n - 1)]
    }

    /// Fraction of values `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.values.partition_point(|v| *v <= x) as f64 / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    /// The law translated by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v + c).collect() }
    }

    /// The law of absolute values.
    pub fn abs(&self) -> Self {
        let mut values: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        values.sort_by(f64::total_cmp);
        Self { values }
    }
}
