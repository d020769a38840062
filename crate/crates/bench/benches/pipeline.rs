use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use relfuse_bench::{data_map, pooled_posterior, pooled_samples, sherpa_bundle};
use relfuse_core::bsp::{posterior_update, BetaStacyProcess};
use relfuse_core::fusion::{moments_of, recover_precision, RecoveryOptions};
use relfuse_core::pipeline::{fit_system, FitOptions};

fn single_process(c: &mut Criterion) {
    let bundle = sherpa_bundle(1);
    let samples = pooled_samples(&bundle);
    let prior = BetaStacyProcess::noninformative();
    c.bench_function("posterior_update/390", |b| {
        b.iter(|| posterior_update(black_box(&prior), black_box(&samples)).unwrap())
    });
    let post = pooled_posterior(&bundle);
    c.bench_function("second_moments/390", |b| {
        b.iter(|| black_box(&post).second_moments())
    });
    let curve = moments_of(&post);
    let opts = RecoveryOptions::default();
    c.bench_function("recover_precision/390", |b| {
        b.iter(|| recover_precision(black_box(&curve), &opts).unwrap())
    });
}

fn sherpa(c: &mut Criterion) {
    let bundle = sherpa_bundle(1);
    let data = data_map(&bundle);
    let priors = BTreeMap::new();
    let opts = FitOptions::default();
    c.bench_function("fit_system/sherpa", |b| {
        b.iter(|| {
            let fit = fit_system(&bundle.spec, black_box(&data), &priors, &opts).unwrap();
            fit.export().unwrap()
        })
    });
}

criterion_group!(benches, single_process, sherpa);
criterion_main!(benches);
