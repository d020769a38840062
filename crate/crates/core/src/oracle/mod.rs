//! Reference computations that check the closed forms by independent routes:
//! Monte Carlo sampling of beta-Stacy paths, the product-limit estimator, the
//! exact density of a product of three betas, and a synthetic data generator.

mod km;
mod paths;
mod product;
mod quad;
mod simulate;

pub use km::kaplan_meier;
pub use paths::{
    path_rng, sample_path, simulate_bsp_paths, simulate_structure_paths, PathStats, RngSeed,
};
pub use product::{exact_three_beta_product_cdf, exact_three_beta_product_pdf, THREE_BETA_SHAPES};
pub use quad::integrate;
pub use simulate::{
    calibrate_censoring_rate, expected_censored_fraction, simulate_lifetimes, LifetimeModel,
};
