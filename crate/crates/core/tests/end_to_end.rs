use std::collections::BTreeMap;

use relfuse_core::demo::DemoConfig;
use relfuse_core::io::{load_prior_spec, write_csv, write_svg, CurveExport};
use relfuse_core::oracle::{simulate_bsp_paths, RngSeed};
use relfuse_core::pipeline::{fit_system, FitOptions};
use relfuse_core::rbd::{parse_system, to_json};

fn sherpa(seed: u64) -> relfuse_core::demo::DemoBundle {
    DemoConfig::sherpa()
        .system()
        .unwrap()
        .simulate(RngSeed(seed))
        .unwrap()
}

fn check_export(e: &CurveExport) {
    for w in e.rows.windows(2) {
        assert!(w[0].t < w[1].t);
        assert!(w[0].mean <= w[1].mean);
    }
    for r in &e.rows {
        assert!(r.lower <= r.mean && r.mean <= r.upper, "{r:?}");
        assert!(r.mean * r.mean <= r.second_moment + 1e-12 && r.second_moment <= r.mean + 1e-12);
    }
}

#[test]
fn every_node_export_is_well_formed() {
    let bundle = sherpa(11);
    let fit = fit_system(
        &bundle.spec,
        &bundle.data_map(),
        &BTreeMap::new(),
        &FitOptions::default(),
    )
    .unwrap();
    assert_eq!(fit.nodes.len(), 13);
    check_export(&fit.export().unwrap());
    for label in fit.nodes.keys() {
        check_export(&fit.export_node(label).unwrap().unwrap());
    }
}

#[test]
fn json_and_dsl_diagrams_fit_identically() {
    let bundle = sherpa(12);
    let mut json_spec = parse_system(&to_json(&bundle.spec.root)).unwrap();
    json_spec.data = bundle.spec.data.clone();
    let data = bundle.data_map();
    let opts = FitOptions::default();
    let a = fit_system(&bundle.spec, &data, &BTreeMap::new(), &opts).unwrap();
    let b = fit_system(&json_spec, &data, &BTreeMap::new(), &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fit_does_not_depend_on_thread_count() {
    let bundle = sherpa(13);
    let data = bundle.data_map();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                fit_system(
                    &bundle.spec,
                    &data,
                    &BTreeMap::new(),
                    &FitOptions::default(),
                )
                .unwrap()
            })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn path_statistics_do_not_depend_on_thread_count() {
    let bundle = sherpa(14);
    let fit = fit_system(
        &bundle.spec,
        &bundle.data_map(),
        &BTreeMap::new(),
        &FitOptions::default(),
    )
    .unwrap();
    let bsp = &fit.nodes["motor"];
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_bsp_paths(bsp, 10_000, RngSeed(3)).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn subsystem_prior_is_merged() {
    let bundle = sherpa(15);
    let data = bundle.data_map();
    let priors_csv =
        "node,time,cdf,precision\nelectric,100,0.1,20\nelectric,400,0.6,20\nelectric,2000,1,20\n";
    let priors = load_prior_spec(priors_csv.as_bytes()).unwrap();
    let mut spec = bundle.spec.clone();
    spec.bind_by_name([], ["electric"]);
    let opts = FitOptions::default();
    let with = fit_system(&spec, &data, &priors, &opts).unwrap();
    let without = fit_system(&bundle.spec, &data, &BTreeMap::new(), &opts).unwrap();
    assert_ne!(with.nodes["electric"], without.nodes["electric"]);
    check_export(&with.export().unwrap());
}

#[test]
fn level_changes_band_width_only() {
    let bundle = sherpa(16);
    let data = bundle.data_map();
    let narrow = FitOptions {
        level: 0.5,
        ..FitOptions::default()
    };
    let a = fit_system(&bundle.spec, &data, &BTreeMap::new(), &narrow)
        .unwrap()
        .export()
        .unwrap();
    let b = fit_system(
        &bundle.spec,
        &data,
        &BTreeMap::new(),
        &FitOptions::default(),
    )
    .unwrap()
    .export()
    .unwrap();
    assert!(a.mean_band_width() < b.mean_band_width());
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.mean, y.mean);
    }
    let bad = FitOptions {
        level: 1.0,
        ..FitOptions::default()
    };
    assert!(fit_system(&bundle.spec, &data, &BTreeMap::new(), &bad).is_err());
}

#[test]
fn csv_and_svg_outputs() {
    let bundle = sherpa(17);
    let system = DemoConfig::sherpa().system().unwrap();
    let fit = fit_system(
        &bundle.spec,
        &bundle.data_map(),
        &BTreeMap::new(),
        &FitOptions::default(),
    )
    .unwrap();
    let export = fit.export().unwrap();
    let mut csv = Vec::new();
    write_csv(&export, &mut csv).unwrap();
    assert_eq!(
        String::from_utf8(csv).unwrap().lines().count(),
        export.rows.len() + 1
    );

    let times: Vec<f64> = export.rows.iter().map(|r| r.t).collect();
    let truth = system.truth_curve(&times);
    let mut svg = Vec::new();
    write_svg(&export, Some(&truth), "sherpa", &mut svg).unwrap();
    let svg = String::from_utf8(svg).unwrap();
    assert!(svg.contains(r#"stroke="gray""#));
    assert!(svg.contains("stroke-dasharray"));
    assert!(svg.trim_end().ends_with("</svg>"));
}
