//! Hierarchical nonparametric reliability estimation with beta-Stacy processes.
//!
//! Component, subsystem and system lifetime data (possibly right censored) are
//! fused bottom-up through a reliability block diagram: each node's posterior
//! moments are combined with its siblings', the combined moments are fitted
//! back to a beta-Stacy prior for the parent, and the parent's own data update
//! that prior.

pub mod bsp;
pub mod demo;
pub mod error;
pub mod fusion;
pub mod io;
pub mod oracle;
pub mod pipeline;
pub mod rbd;
pub mod validation;

pub use bsp::{
    beta_match, bsp_prior, counting_summary, dp_prior, posterior_update, BetaShape,
    BetaStacyProcess, CountingSummary, DiscreteCdf, LifetimeSample, Precision,
};
pub use error::{Error, Result};
pub use fusion::{
    align_grids, combine_parallel, combine_series, fuse_to_prior, moments_of, recover_precision,
    reduce_rbd, MomentCurve, RecoveryOptions,
};
pub use pipeline::{fit_system, FitOptions, SystemFit};
pub use rbd::{parse_rbd, validate_bindings, RbdNode, SystemSpec};
