//! Numerically stable log-sum-exp and softmax.

/// `log Σ exp(x_i)`, computed with the maximum subtracted first.
/// Returns `-∞` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Softmax weights `exp(x_i) / Σ exp(x_j)`.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Smooth maximum `LSE(c·x) / c`. Lies in `[max x, max x + log(len)/c]`.
pub fn smooth_max(xs: &[f64], c: f64) -> f64 {
    // factored as max + log(Σ e^{c(x - max)}) / c so the lower bound holds
    // in floating point too: the sum includes e^0 = 1
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (c * (x - m)).exp()).sum::<f64>().ln() / c
}

/// Smooth minimum `-LSE(-c·x) / c`. Lies in `[min x - log(len)/c, min x]`.
pub fn smooth_min(xs: &[f64], c: f64) -> f64 {
    let m = xs.iter().copied().fold(f64::INFINITY, f64::min);
    if !m.is_finite() {
        return m;
    }
    m - xs.iter().map(|x| (-c * (x - m)).exp()).sum::<f64>().ln() / c
}
