use serde::{Deserialize, Serialize};

use super::smooth::softmax;
use super::{StatisticSpec, Temperature};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    /// `(x - θ)²`.
    #[default]
    Square,
}

impl LossSpec {
    pub fn eval(&self, x: f64, theta: f64) -> f64 {
        match self {
            LossSpec::Square => (x - theta) * (x - theta),
        }
    }

    /// `E[L(X, θ)]` for a law with first and second raw moments `m1`, `m2`.
    pub fn expected(&self, theta: f64, m1: f64, m2: f64) -> f64 {
        match self {
            LossSpec::Square => m2 - 2.0 * theta * m1 + theta * theta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackedOutput {
    /// Softmax weight of each base prediction.
    pub weights: Vec<f64>,
    /// The stacked prediction `Θ = Σ_k w_k θ_k`.
    pub prediction: f64,
    /// `|eval|^{-1/2} Σ_i L(x_i, Θ)`.
    pub risk: f64,
}

/// Weights `softmax(-β R^k)`, `R^k` the mean loss of base prediction `k` on `data`.
pub fn stacked_weights(
    data: &Dataset,
    base_predictions: &[f64],
    beta: f64,
    loss: LossSpec,
) -> Vec<f64> {
    let n = data.rows() as f64;
    let neg: Vec<f64> = base_predictions
        .iter()
        .map(|&t| -beta * data.values().iter().map(|&x| loss.eval(x, t)).sum::<f64>() / n)
        .collect();
    softmax(&neg)
}

/// Fits the stacking weights on `weights_data` and evaluates the risk of the
/// stacked prediction on `eval_data`. `spec` must be a `StackedRisk`; its
/// temperature rule is resolved against the row count of `weights_data`.
pub fn eval_stacked(
    weights_data: &Dataset,
    eval_data: &Dataset,
    spec: &StatisticSpec,
) -> Result<StackedOutput> {
    let StatisticSpec::StackedRisk { base_predictions, beta, loss } = spec else {
        return Err(Error::InvalidArgument(format!("{} is not a stacked risk", spec.name())));
    };
    if base_predictions.is_empty() {
        return Err(Error::InvalidArgument("stacking needs a base prediction".into()));
    }
    for d in [weights_data, eval_data] {
        super::require_cols(d, 1, "stacked risk")?;
    }
    let b = resolve_beta(beta, weights_data.rows())?;
    let weights = stacked_weights(weights_data, base_predictions, b, *loss);
    let prediction = weights.iter().zip(base_predictions).map(|(w, t)| w * t).sum();
    let risk = eval_data.values().iter().map(|&x| loss.eval(x, prediction)).sum::<f64>()
        / (eval_data.rows() as f64).sqrt();
    Ok(StackedOutput { weights, prediction, risk })
}

fn resolve_beta(beta: &Temperature, n: usize) -> Result<f64> {
    let b = beta.resolve(n, |n| n.sqrt())?;
    if b.is_infinite() {
        return Err(Error::InvalidArgument("stacking needs a finite temperature".into()));
    }
    Ok(b)
}
