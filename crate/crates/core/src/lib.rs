//! Bootstrap calibration toolkit.
//!
//! The crate is organised around a few small pieces:
//!
//! * [`Dataset`] — an immutable `n × d` table of observations;
//! * [`rng`] — reproducible ChaCha8 streams keyed by [`RngSeed`];
//! * [`resample`] — empirical, centered, shifted and pair-permuted resampling;
//! * [`statistics`] — the catalogue of scalar statistics and their smooth surrogates;
//! * [`metric`] — empirical laws, the smooth-test-function distance and KS;
//! * [`intervals`] — bootstrap confidence intervals and p-values;
//! * [`diagnostics`] — Monte Carlo stability checks.

pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod intervals;
pub mod io;
pub mod law;
pub mod metric;
pub mod resample;
pub mod rng;
pub mod statistics;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use law::EmpiricalLaw;
pub use resample::{ResampleMode, ResamplePlan};
pub use rng::{RngSeed, Stream};
pub use statistics::StatisticSpec;
