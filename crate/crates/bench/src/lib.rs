//! Fixtures shared by the benchmarks.

use std::collections::BTreeMap;

use relfuse_core::bsp::{posterior_update, BetaStacyProcess, LifetimeSample};
use relfuse_core::demo::{DemoBundle, DemoConfig};
use relfuse_core::oracle::RngSeed;

/// One simulated SHERPA replicate.
pub fn sherpa_bundle(seed: u64) -> DemoBundle {
    DemoConfig::sherpa()
        .system()
        .and_then(|s| s.simulate(RngSeed(seed)))
        .expect("demo configuration is valid")
}

/// All samples of a bundle pooled, for single-process benchmarks.
pub fn pooled_samples(bundle: &DemoBundle) -> Vec<LifetimeSample> {
    bundle
        .datasets
        .iter()
        .flat_map(|d| d.samples.iter().copied())
        .collect()
}

pub fn pooled_posterior(bundle: &DemoBundle) -> BetaStacyProcess {
    posterior_update(&BetaStacyProcess::noninformative(), &pooled_samples(bundle))
        .expect("simulated samples are valid")
}

pub fn data_map(bundle: &DemoBundle) -> BTreeMap<String, Vec<LifetimeSample>> {
    bundle.data_map()
}
