//! Discrete beta-Stacy processes: construction, conjugate updating under
//! right censoring, moments, and pointwise beta approximation.

mod beta;
mod cdf;
mod data;
mod process;

pub use beta::{beta_match, BetaShape};
pub use cdf::{union_grid, DiscreteCdf};
pub use data::{counting_summary, CountingSummary, LifetimeSample};
pub(crate) use process::check_level;
pub use process::{
    bsp_prior, dp_prior, interval_from_moments, posterior_update, BetaStacyProcess, Precision,
};
