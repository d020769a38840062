//! Self-checks that compare the closed forms against the oracles.
//!
//! Each check returns a [`CheckReport`]; the CLI `validate` command and the
//! acceptance tests both run them.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::beta::beta_reg;

use crate::bsp::{
    beta_match, dp_prior, posterior_update, union_grid, BetaStacyProcess, DiscreteCdf,
    LifetimeSample, Precision,
};
use crate::error::Result;
use crate::fusion::{
    align_grids, combine_parallel, combine_series_with, moments_of, recover_precision, MomentCurve,
    RecoveryOptions, SeriesFormula,
};
use crate::oracle::{
    exact_three_beta_product_pdf, integrate, kaplan_meier, path_rng, simulate_bsp_paths,
    simulate_structure_paths, PathStats, RngSeed, THREE_BETA_SHAPES,
};
use crate::rbd::RbdNode;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Sizes for the randomized checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationPlan {
    pub seed: RngSeed,
    pub km_datasets: usize,
    pub random_processes: usize,
    pub fusion_cases: usize,
    pub roundtrip_curves: usize,
    pub paths: usize,
    pub product_samples: usize,
    pub formula: SeriesFormula,
}

impl Default for ValidationPlan {
    fn default() -> Self {
        Self {
            seed: RngSeed(20240601),
            km_datasets: 1000,
            random_processes: 100,
            fusion_cases: 100,
            roundtrip_curves: 100,
            paths: 200_000,
            product_samples: 200_000,
            formula: SeriesFormula::Derived,
        }
    }
}

pub fn run_all(plan: &ValidationPlan) -> Vec<CheckReport> {
    vec![
        prior_only_example(),
        data_only_example(),
        km_equivalence(plan.km_datasets, plan.seed),
        second_moment_oracle(plan.random_processes, plan.paths, plan.seed),
        series_degenerate_case(plan.formula),
        fusion_oracle(plan.fusion_cases, plan.paths, plan.seed, plan.formula),
        recovery_roundtrip(plan.roundtrip_curves, plan.seed),
        beta_approximation(plan.product_samples, plan.seed),
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

const H_GRID: [f64; 3] = [1.0, 2.0, 3.0];
const H_VALUES: [f64; 3] = [1.0 / 3.0, 2.0 / 3.0, 1.0];

/// `H(t)` prior with no data: the posterior is the prior.
pub fn prior_only_example() -> CheckReport {
    let name = "prior-only posterior equals prior";
    let run = || -> Result<(bool, f64)> {
        let prior = dp_prior(&H_GRID, &H_VALUES, 5.0)?;
        let start = Instant::now();
        let post = posterior_update(&prior, &[])?;
        let elapsed = start.elapsed().as_secs_f64();
        let ok = post.grid() == H_GRID
            && (0..3).all(|i| close(post.base().values()[i], H_VALUES[i], 1e-12))
            && (0..2).all(|i| close(post.precision()[i], 5.0, 1e-12));
        Ok((ok, elapsed))
    };
    match run() {
        Ok((ok, secs)) => CheckReport::new(name, ok, format!("{:.1} us", secs * 1e6)),
        Err(e) => CheckReport::new(name, false, e.to_string()),
    }
}

/// Zero-precision prior with failures at 1, 2, 3: the ECDF with precision 3.
pub fn data_only_example() -> CheckReport {
    let name = "data-only posterior is the ECDF";
    let run = || -> Result<(bool, f64)> {
        let samples: Vec<_> = H_GRID
            .iter()
            .map(|&t| LifetimeSample::failure(t))
            .collect::<Result<_>>()?;
        let start = Instant::now();
        let post = posterior_update(&BetaStacyProcess::noninformative(), &samples)?;
        let elapsed = start.elapsed().as_secs_f64();
        let ok = post.grid() == H_GRID
            && (0..3).all(|i| close(post.base().values()[i], H_VALUES[i], 1e-12))
            && (0..3).all(|i| close(post.precision()[i], 3.0, 1e-12))
            && post.precision_at(2) == Precision::Undefined;
        Ok((ok, elapsed))
    };
    match run() {
        Ok((ok, secs)) => CheckReport::new(name, ok, format!("{:.1} us", secs * 1e6)),
        Err(e) => CheckReport::new(name, false, e.to_string()),
    }
}

/// Random right-censored sample of size 1 to 50 with at least one failure.
///
/// Times sit on a coarse lattice so that ties are common.
pub fn random_censored_sample(rng: &mut ChaCha8Rng) -> Vec<LifetimeSample> {
    loop {
        let n = rng.random_range(1..=50);
        let samples: Vec<_> = (0..n)
            .map(|_| {
                let t = 0.5 * rng.random_range(1..=40) as f64;
                LifetimeSample {
                    time: t,
                    failed: rng.random_bool(0.7),
                }
            })
            .collect();
        if samples.iter().any(|s| s.failed) {
            return samples;
        }
    }
}

/// Zero-prior posterior base against the product-limit oracle.
pub fn km_equivalence(n_datasets: usize, seed: RngSeed) -> CheckReport {
    let name = "zero-prior posterior equals Kaplan-Meier";
    let mut worst = 0.0f64;
    let mut rng = path_rng(seed, 1);
    for _ in 0..n_datasets {
        let samples = random_censored_sample(&mut rng);
        let km = match kaplan_meier(&samples) {
            Ok(km) => km,
            Err(e) => return CheckReport::new(name, false, e.to_string()),
        };
        let post = match posterior_update(&BetaStacyProcess::noninformative(), &samples) {
            Ok(p) => p,
            Err(e) => return CheckReport::new(name, false, e.to_string()),
        };
        for s in &samples {
            worst = worst.max((post.base().eval(s.time) - km.eval(s.time)).abs());
        }
    }
    CheckReport::new(
        name,
        worst <= 1e-12,
        format!("{n_datasets} datasets, max |diff| = {worst:.3e} (tol 1e-12)"),
    )
}

/// Random beta-Stacy process with up to `max_points` grid points.
///
/// Some points carry no mass, and some processes end with a terminal jump.
pub fn random_process(rng: &mut ChaCha8Rng, max_points: usize, terminal: bool) -> BetaStacyProcess {
    let n = rng.random_range(1..=max_points);
    let mut t = 0.0;
    let grid: Vec<f64> = (0..n)
        .map(|_| {
            t += rng.random_range(0.1..2.0);
            t
        })
        .collect();
    let top = if terminal {
        1.0
    } else {
        rng.random_range(0.3..0.95)
    };
    let mut weights: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(0.15) {
                0.0
            } else {
                rng.random_range(0.05..1.0)
            }
        })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        weights[n - 1] = 1.0;
    }
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut values: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            (top * acc / total).min(top)
        })
        .collect();
    if terminal {
        let last = values
            .iter()
            .rposition(|&v| v < 1.0 - 1e-9)
            .map_or(0, |i| i + 1);
        values.truncate(last + 1);
        values[last] = 1.0;
    }
    let grid = grid[..values.len()].to_vec();
    let precision: Vec<f64> = (0..values.len())
        .map(|_| 10f64.powf(rng.random_range(-0.5..2.0)))
        .collect();
    let base = DiscreteCdf::new(grid, values).expect("generated CDF is valid");
    BetaStacyProcess::new(base, precision).expect("generated process is valid")
}

fn within_se(exact: f64, est: f64, se: f64) -> (bool, f64) {
    let diff = (exact - est).abs();
    let z = if se > 0.0 {
        diff / se
    } else if diff <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    (diff <= 4.0 * se + 1e-12, z)
}

/// Closed-form `E[F^2]` against sampled paths.
pub fn second_moment_oracle(n_processes: usize, n_paths: usize, seed: RngSeed) -> CheckReport {
    let name = "second moment matches Monte Carlo";
    let start = Instant::now();
    let mut rng = path_rng(seed, 2);
    let (mut failures, mut points, mut worst_z) = (0usize, 0usize, 0.0f64);
    for k in 0..n_processes {
        let terminal = rng.random_bool(0.3);
        let bsp = random_process(&mut rng, 20, terminal);
        let stats =
            match simulate_bsp_paths(&bsp, n_paths, RngSeed(seed.0 ^ ((k as u64 + 1) << 20))) {
                Ok(s) => s,
                Err(e) => return CheckReport::new(name, false, e.to_string()),
            };
        let exact = bsp.second_moments();
        for i in 0..bsp.len() {
            let (ok, z) = within_se(exact[i], stats.second[i], stats.second_se[i]);
            points += 1;
            failures += usize::from(!ok);
            worst_z = worst_z.max(z);
        }
    }
    CheckReport::new(
        name,
        failures == 0,
        format!(
            "{n_processes} processes, {points} points, {failures} beyond 4 SE, max z = {worst_z:.2}, {:.1} s",
            start.elapsed().as_secs_f64()
        ),
    )
}

/// Both components never fail: the series second moment must be 0.
pub fn series_degenerate_case(formula: SeriesFormula) -> CheckReport {
    let name = "series of two zero curves has second moment 0";
    let zero = MomentCurve::new(vec![1.0], vec![0.0], vec![0.0]).expect("valid curve");
    let s = combine_series_with(&zero, &zero, formula);
    CheckReport::new(
        name,
        s.first[0] == 0.0 && s.second[0] == 0.0,
        format!("first = {}, second = {}", s.first[0], s.second[0]),
    )
}

fn fused_two_node(
    a: &BetaStacyProcess,
    b: &BetaStacyProcess,
    series: bool,
    formula: SeriesFormula,
) -> MomentCurve {
    let (ma, mb) = align_grids(&moments_of(a), &moments_of(b));
    if series {
        combine_series_with(&ma, &mb, formula)
    } else {
        combine_parallel(&ma, &mb)
    }
}

/// Series and parallel fused moments against pathwise structure sampling.
pub fn fusion_oracle(
    n_cases: usize,
    n_paths: usize,
    seed: RngSeed,
    formula: SeriesFormula,
) -> CheckReport {
    let name = "fused moments match Monte Carlo";
    let start = Instant::now();
    let mut rng = path_rng(seed, 3);
    let (mut failures, mut points, mut worst_z) = (0usize, 0usize, 0.0f64);
    for k in 0..n_cases {
        let (ta, tb) = (rng.random_bool(0.3), rng.random_bool(0.3));
        let a = random_process(&mut rng, 10, ta);
        let b = random_process(&mut rng, 10, tb);
        let series = k % 2 == 0;
        let children = vec![RbdNode::component("a"), RbdNode::component("b")];
        let node = if series {
            RbdNode::series(children)
        } else {
            RbdNode::parallel(children)
        };
        let grid = union_grid(a.grid(), b.grid());
        let leaves = BTreeMap::from([("a".to_string(), a.clone()), ("b".to_string(), b.clone())]);
        let stats: PathStats = match simulate_structure_paths(
            &node,
            &leaves,
            &grid,
            n_paths,
            RngSeed(seed.0 ^ ((k as u64 + 1) << 24)),
        ) {
            Ok(s) => s,
            Err(e) => return CheckReport::new(name, false, e.to_string()),
        };
        let fused = fused_two_node(&a, &b, series, formula);
        for i in 0..grid.len() {
            for (exact, est, se) in [
                (fused.first[i], stats.mean[i], stats.mean_se[i]),
                (fused.second[i], stats.second[i], stats.second_se[i]),
            ] {
                let (ok, z) = within_se(exact, est, se);
                points += 1;
                failures += usize::from(!ok);
                worst_z = worst_z.max(z);
            }
        }
    }
    CheckReport::new(
        name,
        failures == 0,
        format!(
            "{n_cases} cases, {points} moments, {failures} beyond 4 SE, max z = {worst_z:.2}, {:.1} s",
            start.elapsed().as_secs_f64()
        ),
    )
}

/// Moment curve of a random nonterminal process.
pub fn random_curve(rng: &mut ChaCha8Rng, max_points: usize) -> MomentCurve {
    moments_of(&random_process(rng, max_points, false))
}

/// `moments_of(recover_precision(curve))` reproduces `curve`.
pub fn recovery_roundtrip(n_curves: usize, seed: RngSeed) -> CheckReport {
    let name = "precision recovery roundtrip";
    let mut rng = path_rng(seed, 4);
    let mut worst = 0.0f64;
    let mut warnings = 0usize;
    for _ in 0..n_curves {
        let curve = random_curve(&mut rng, 20);
        let rec = match recover_precision(&curve, &RecoveryOptions::default()) {
            Ok(r) => r,
            Err(e) => return CheckReport::new(name, false, e.to_string()),
        };
        warnings += rec.warnings.len();
        let back = moments_of(&rec.process);
        if back.grid != curve.grid {
            return CheckReport::new(name, false, "grid changed".to_string());
        }
        for i in 0..curve.len() {
            if curve.terminal[i] {
                continue;
            }
            worst = worst.max((back.first[i] - curve.first[i]).abs());
            worst = worst.max((back.second[i] - curve.second[i]).abs());
        }
    }
    CheckReport::new(
        name,
        worst <= 1e-9,
        format!("{n_curves} curves, sup error = {worst:.3e} (tol 1e-9), {warnings} warnings"),
    )
}

/// Result of the three-beta product check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductCheck {
    pub integral: f64,
    pub mean: f64,
    pub ks: f64,
}

/// Moment-matched beta for the product of three betas against its exact law.
pub fn product_approximation(n_samples: usize, seed: RngSeed) -> ProductCheck {
    let pdf = |y: f64| exact_three_beta_product_pdf(y).unwrap_or(0.0);
    let integral = integrate(pdf, 0.0, 1.0, 1e-12);
    let mean = integrate(|y| y * pdf(y), 0.0, 1.0, 1e-12);

    let betas: Vec<Beta<f64>> = THREE_BETA_SHAPES
        .iter()
        .map(|&(a, b)| Beta::new(a, b).expect("fixed shapes are valid"))
        .collect();
    let mut rng = path_rng(seed, 5);
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n_samples {
        let y: f64 = betas.iter().map(|b| b.sample(&mut rng)).product();
        s1 += y;
        s2 += y * y;
    }
    let n = n_samples as f64;
    let shape = beta_match(s1 / n, s2 / n);

    let ks = match shape {
        Ok(shape) => {
            let steps = 2000;
            let mut exact = 0.0;
            let mut worst = 0.0f64;
            for k in 1..=steps {
                let (lo, hi) = ((k - 1) as f64 / steps as f64, k as f64 / steps as f64);
                exact += integrate(pdf, lo, hi, 1e-14);
                worst = worst.max((beta_reg(shape.a, shape.b, hi) - exact).abs());
            }
            worst
        }
        Err(_) => f64::INFINITY,
    };
    ProductCheck { integral, mean, ks }
}

pub fn beta_approximation(n_samples: usize, seed: RngSeed) -> CheckReport {
    let name = "beta approximation of a product of betas";
    let c = product_approximation(n_samples, seed);
    let ok =
        (c.integral - 1.0).abs() <= 1e-6 && (c.mean - 4.0 / 11.0).abs() <= 1e-6 && c.ks <= 0.05;
    CheckReport::new(
        name,
        ok,
        format!(
            "integral = {:.9}, mean - 4/11 = {:.2e}, KS = {:.4} (tol 0.05)",
            c.integral,
            c.mean - 4.0 / 11.0,
            c.ks
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_plan_passes() {
        let plan = ValidationPlan {
            km_datasets: 50,
            random_processes: 5,
            fusion_cases: 5,
            roundtrip_curves: 20,
            paths: 20_000,
            product_samples: 20_000,
            ..ValidationPlan::default()
        };
        for report in run_all(&plan) {
            assert!(report.passed, "{report}");
        }
    }

    #[test]
    fn printed_series_formula_is_caught() {
        let r = series_degenerate_case(SeriesFormula::AsPrinted);
        assert!(!r.passed);
        assert!(r.detail.contains("second = 2"));
        let r = fusion_oracle(4, 20_000, RngSeed(1), SeriesFormula::AsPrinted);
        assert!(!r.passed, "{r}");
    }

    #[test]
    fn generated_processes_are_valid() {
        let mut rng = path_rng(RngSeed(3), 0);
        for _ in 0..200 {
            let p = random_process(&mut rng, 20, true);
            assert_eq!(p.base().last_value(), 1.0);
            let q = random_process(&mut rng, 20, false);
            assert!(q.base().last_value() < 1.0);
        }
    }
}
