use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::smooth::softmax;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Floor applied to the variance regulariser so the power proxy stays finite
/// on degenerate data.
pub const LAMBDA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `exp(-‖a - b‖² / (2σ²))`.
    Gaussian { bandwidth: f64 },
    /// `⟨a, b⟩`.
    Linear,
    /// `(⟨a, b⟩ + offset)^degree`.
    Polynomial { degree: u32, offset: f64 },
}

impl KernelSpec {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { bandwidth } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-d2 / (2.0 * bandwidth * bandwidth)).exp()
            }
            KernelSpec::Linear => dot(a, b),
            KernelSpec::Polynomial { degree, offset } => (dot(a, b) + offset).powi(degree as i32),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { bandwidth } if !(bandwidth > 0.0 && bandwidth.is_finite()) => {
                Err(Error::InvalidArgument(format!("bandwidth must be positive, got {bandwidth}")))
            }
            KernelSpec::Polynomial { offset, .. } if !(offset >= 0.0 && offset.is_finite()) => {
                Err(Error::InvalidArgument(format!("offset must be non-negative, got {offset}")))
            }
            _ => Ok(()),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check(data: &Dataset, kernels: &[KernelSpec], lambda: f64) -> Result<()> {
    if data.cols() % 2 != 0 {
        return Err(Error::Shape(format!(
            "two-sample statistic needs an even number of columns, got {}",
            data.cols()
        )));
    }
    if kernels.is_empty() {
        return Err(Error::InvalidArgument("at least one kernel is required".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be non-negative, got {lambda}")));
    }
    kernels.iter().try_for_each(KernelSpec::validate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelComponents {
    /// `M̂_k = n^{-2} Σ_ij H^k_ij` per kernel.
    pub m_hat: Vec<f64>,
    /// Power proxy `p_k` per kernel.
    pub p_theta: Vec<f64>,
    /// Softmax weights `softmax(β p)`.
    pub omega: Vec<f64>,
    /// `Σ_k ω_k M̂_k`.
    pub t_hat: f64,
}

/// The matrices `H^k_ij = K(x_j1, x_i1) + K(x_j2, x_i2) - K(x_j1, x_i2) - K(x_j2, x_i1)`
/// of a dataset, one per kernel.
///
/// Swapping the two blocks of row `i` flips the sign of row and column `i`
/// of every `H^k`, so any bootstrap or pair-permuted resample of the data can
/// be evaluated from these matrices without touching the kernels again.
#[derive(Debug, Clone)]
pub struct KernelGram {
    n: usize,
    h: Vec<Vec<f64>>,
}

impl KernelGram {
    pub fn new(data: &Dataset, kernels: &[KernelSpec]) -> Result<Self> {
        check(data, kernels, 0.0)?;
        let n = data.rows();
        let half = data.cols() / 2;
        let h = kernels
            .iter()
            .map(|k| {
                let rows: Vec<Vec<f64>> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let (xi1, xi2) = data.row(i).split_at(half);
                        (0..n)
                            .map(|j| {
                                let (xj1, xj2) = data.row(j).split_at(half);
                                k.eval(xj1, xi1) + k.eval(xj2, xi2)
                                    - k.eval(xj1, xi2)
                                    - k.eval(xj2, xi1)
                            })
                            .collect()
                    })
                    .collect();
                rows.concat()
            })
            .collect();
        Ok(Self { n, h })
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn kernel_count(&self) -> usize {
        self.h.len()
    }

    /// Entry `H^k_ij` of the original data.
    pub fn entry(&self, k: usize, i: usize, j: usize) -> f64 {
        self.h[k][i * self.n + j]
    }

    /// Components on the original data.
    pub fn components(&self, beta: f64, lambda: f64) -> Result<KernelComponents> {
        let idx: Vec<usize> = (0..self.n).collect();
        self.components_indexed(&idx, None, beta, lambda)
    }

    /// Components on the resample whose row `i` is original row `idx[i]`,
    /// with its blocks swapped when `swaps[i]` is set.
    pub fn components_indexed(
        &self,
        idx: &[usize],
        swaps: Option<&[bool]>,
        beta: f64,
        lambda: f64,
    ) -> Result<KernelComponents> {
        let n = idx.len();
        if n == 0 || idx.iter().any(|&i| i >= self.n) {
            return Err(Error::InvalidArgument("resample indices out of range".into()));
        }
        let sign: Vec<f64> = match swaps {
            Some(s) if s.len() == n => s.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect(),
            Some(_) => return Err(Error::InvalidArgument("one swap flag per row required".into())),
            None => vec![1.0; n],
        };
        let nf = n as f64;
        let lam = lambda.max(LAMBDA_FLOOR);
        let mut m_hat = Vec::with_capacity(self.h.len());
        let mut p_theta = Vec::with_capacity(self.h.len());
        for h in &self.h {
            let mut total = 0.0;
            let mut sq = 0.0;
            for i in 0..n {
                let row = &h[idx[i] * self.n..(idx[i] + 1) * self.n];
                let r: f64 = sign[i] * (0..n).map(|j| sign[j] * row[idx[j]]).sum::<f64>();
                total += r;
                sq += r * r;
            }
            let m = total / (nf * nf);
            let den = 4.0 * sq / nf.powi(3) - 4.0 * total * total / nf.powi(4) + lam;
            if !(den.is_finite() && den > 0.0) {
                return Err(Error::Numerical(format!("power proxy denominator is {den}")));
            }
            m_hat.push(m);
            p_theta.push(m / den);
        }
        let scaled: Vec<f64> = p_theta.iter().map(|p| beta * p).collect();
        let omega = softmax(&scaled);
        let t_hat = omega.iter().zip(&m_hat).map(|(w, m)| w * m).sum();
        Ok(KernelComponents { m_hat, p_theta, omega, t_hat })
    }
}

/// Kernel discrepancies, power proxies, softmax weights and `T̂` of `data`,
/// whose first `d/2` columns are sample one and last `d/2` sample two.
pub fn eval_kernel_components(
    data: &Dataset,
    kernels: &[KernelSpec],
    beta: f64,
    lambda: f64,
) -> Result<KernelComponents> {
    check(data, kernels, lambda)?;
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
    }
    KernelGram::new(data, kernels)?.components(beta, lambda)
}
