use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub(crate) fn product(data: &Dataset, centered: bool) -> f64 {
    let n = data.rows() as f64;
    let mean = if centered { data.values().iter().sum::<f64>() / n } else { 0.0 };
    let terms = data.values().iter().map(|x| (x - mean) / n);
    // Work in log space when every factor is positive: expm1(Σ log1p(y/n))
    // keeps precision when the product is close to 1.
    let mut log_sum = 0.0;
    let mut positive = true;
    for t in terms.clone() {
        if t <= -1.0 {
            positive = false;
            break;
        }
        log_sum += t.ln_1p();
    }
    let prod_minus_one = if positive {
        log_sum.exp_m1()
    } else {
        terms.fold(1.0, |acc, t| acc * (1.0 + t)) - 1.0
    };
    n.sqrt() * prod_minus_one
}

pub(crate) fn paired_diff_sq(data: &Dataset) -> f64 {
    let x = data.values();
    let h = x.len() / 2;
    let s: f64 = (0..h).map(|i| x[i] - x[i + h]).sum();
    let v = s / (x.len() as f64).sqrt();
    v * v
}

pub(crate) fn scaled_min(data: &Dataset) -> f64 {
    let m = data.values().iter().copied().fold(f64::INFINITY, f64::min);
    data.rows() as f64 * m
}

/// Number of observations whose nearest other observation is strictly
/// farther than `1/n`.
pub fn isolated_count(values: &[f64]) -> usize {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let thr = 1.0 / n as f64;
    (0..n)
        .filter(|&i| {
            let left = i == 0 || sorted[i] - sorted[i - 1] > thr;
            let right = i + 1 == n || sorted[i + 1] - sorted[i] > thr;
            left && right
        })
        .count()
}

/// `n^{-1/2} (#isolated - n·c)` for one-column data with at least two rows.
pub fn eval_isolated_count(data: &Dataset, centering_c: f64) -> Result<f64> {
    if data.cols() != 1 || data.rows() < 2 {
        return Err(Error::Shape(format!(
            "isolated count needs one column and at least two rows, got {}x{}",
            data.rows(),
            data.cols()
        )));
    }
    let n = data.rows() as f64;
    Ok((isolated_count(data.values()) as f64 - n * centering_c) / n.sqrt())
}
