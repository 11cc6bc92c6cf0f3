use super::smooth::log_sum_exp;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Largest supported number of spins; all `2^m` configurations are enumerated.
pub const MAX_SPINS: usize = 14;

pub(crate) fn check(data: &Dataset, m: usize) -> Result<()> {
    if m == 0 || m > MAX_SPINS {
        return Err(Error::InvalidArgument(format!("spins must be in 1..={MAX_SPINS}, got {m}")));
    }
    if data.cols() != 1 || data.rows() != m * m {
        return Err(Error::Shape(format!(
            "{m} spins need {} one-column rows, got {}x{}",
            m * m,
            data.rows(),
            data.cols()
        )));
    }
    Ok(())
}

/// `(1/m) log Σ_s exp(sᵀ X s / √m)`.
///
/// Configurations are visited in Gray-code order so each step flips one spin
/// and updates the quadratic form in `O(m)`. Since `sᵀXs` is invariant under
/// `s → -s`, only configurations with the last spin fixed are visited and
/// `log 2` is added.
pub(crate) fn entropy(data: &Dataset, m: usize) -> f64 {
    let x = data.values();
    // a[k][j] = X_kj + X_jk for j != k
    let mut a = vec![0.0; m * m];
    for k in 0..m {
        for j in 0..m {
            if j != k {
                a[k * m + j] = x[k * m + j] + x[j * m + k];
            }
        }
    }
    let mut s = vec![1.0f64; m];
    let mut q: f64 = x.iter().sum();
    let free = m - 1;
    let count = 1usize << free;
    let scale = 1.0 / (m as f64).sqrt();
    let mut energies = Vec::with_capacity(count);
    energies.push(q * scale);
    for step in 1..count {
        let k = step.trailing_zeros() as usize;
        let field: f64 = (0..m).map(|j| a[k * m + j] * s[j]).sum();
        q -= 2.0 * s[k] * field;
        s[k] = -s[k];
        energies.push(q * scale);
    }
    (log_sum_exp(&energies) + std::f64::consts::LN_2) / m as f64
}
