//! Resampling schemes.
//!
//! Every scheme draws its randomness from a single stream opened from the
//! replicate seed: first `n` row indices, then (pair-permuted only) `n`
//! swap coins. [`draw_indices`] and [`draw_swaps`] expose exactly the same
//! draws so that index-based fast paths reproduce materialized resamples.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{RngSeed, Stream};

pub fn column_mean(data: &Dataset) -> Vec<f64> {
    let mut acc = vec![0.0; data.cols()];
    for row in data.iter_rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = data.rows() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

fn check_len(data: &Dataset, v: &[f64]) -> Result<()> {
    if v.len() != data.cols() {
        return Err(Error::DimensionMismatch { expected: data.cols(), got: v.len() });
    }
    Ok(())
}

fn indices_from(stream: &mut Stream, n: usize) -> Vec<usize> {
    (0..n).map(|_| stream.index(n)).collect()
}

/// Row indices of the empirical resample drawn with `seed`.
pub fn draw_indices(n: usize, seed: RngSeed) -> Vec<usize> {
    indices_from(&mut seed.open(), n)
}

/// Row indices and block-swap coins of the pair-permuted resample drawn with `seed`.
pub fn draw_swaps(n: usize, seed: RngSeed) -> (Vec<usize>, Vec<bool>) {
    let mut s = seed.open();
    let idx = indices_from(&mut s, n);
    let swaps = (0..n).map(|_| s.coin()).collect();
    (idx, swaps)
}

/// `n` rows drawn uniformly with replacement.
pub fn resample_empirical(data: &Dataset, seed: RngSeed) -> Dataset {
    data.select_rows(&draw_indices(data.rows(), seed))
}

/// Empirical resample translated so that its conditional mean is `known_mean`:
/// row `i` is `Z_i - mean(data) + known_mean`.
pub fn resample_centered(data: &Dataset, known_mean: &[f64], seed: RngSeed) -> Result<Dataset> {
    check_len(data, known_mean)?;
    let delta: Vec<f64> = column_mean(data)
        .iter()
        .zip(known_mean)
        .map(|(m, mu)| mu - m)
        .collect();
    shift(&resample_empirical(data, seed), &delta)
}

/// Translates every row by `offset`.
pub fn shift(data: &Dataset, offset: &[f64]) -> Result<Dataset> {
    check_len(data, offset)?;
    let d = data.cols();
    let values = data
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v + offset[i % d])
        .collect();
    Dataset::new(data.rows(), d, values)
}

fn swap_blocks(data: &Dataset, idx: Option<&[usize]>, swaps: &[bool]) -> Dataset {
    let d = data.cols();
    let h = d / 2;
    let mut values = Vec::with_capacity(swaps.len() * d);
    for (i, &sw) in swaps.iter().enumerate() {
        let row = data.row(idx.map_or(i, |ix| ix[i]));
        if sw {
            values.extend_from_slice(&row[h..]);
            values.extend_from_slice(&row[..h]);
        } else {
            values.extend_from_slice(row);
        }
    }
    Dataset::from_parts(swaps.len(), d, values)
}

fn check_even(data: &Dataset) -> Result<()> {
    if data.cols() % 2 != 0 {
        return Err(Error::Shape(format!(
            "pair permutation needs an even number of columns, got {}",
            data.cols()
        )));
    }
    Ok(())
}

/// Swaps the two column blocks of each row independently with probability ½.
pub fn permute_pairs(data: &Dataset, seed: RngSeed) -> Result<Dataset> {
    check_even(data)?;
    let mut s = seed.open();
    let swaps: Vec<bool> = (0..data.rows()).map(|_| s.coin()).collect();
    Ok(swap_blocks(data, None, &swaps))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResampleMode {
    Empirical,
    /// Empirical resample recentred on a known population mean.
    Centered(Vec<f64>),
    /// Empirical resample translated by a fixed offset.
    Shifted(Vec<f64>),
    /// Empirical resample followed by an independent block swap of each row.
    PairPermuted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResamplePlan {
    pub mode: ResampleMode,
    pub replicates: usize,
}

impl ResamplePlan {
    pub fn new(mode: ResampleMode, replicates: usize) -> Self {
        Self { mode, replicates }
    }

    pub fn empirical(replicates: usize) -> Self {
        Self::new(ResampleMode::Empirical, replicates)
    }

    pub fn validate(&self, data: &Dataset) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("replicate count must be at least 1".into()));
        }
        match &self.mode {
            ResampleMode::Empirical => Ok(()),
            ResampleMode::Centered(v) | ResampleMode::Shifted(v) => check_len(data, v),
            ResampleMode::PairPermuted => check_even(data),
        }
    }

    /// One resample drawn with the given replicate seed.
    pub fn draw(&self, data: &Dataset, seed: RngSeed) -> Result<Dataset> {
        match &self.mode {
            ResampleMode::Empirical => Ok(resample_empirical(data, seed)),
            ResampleMode::Centered(mu) => resample_centered(data, mu, seed),
            ResampleMode::Shifted(off) => shift(&resample_empirical(data, seed), off),
            ResampleMode::PairPermuted => {
                check_even(data)?;
                let (idx, swaps) = draw_swaps(data.rows(), seed);
                Ok(swap_blocks(data, Some(&idx), &swaps))
            }
        }
    }
}
