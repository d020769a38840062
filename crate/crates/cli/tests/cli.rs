use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn relfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relfuse"))
        .args(args)
        .env_remove("RELFUSE_PRECISION_CAP")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, seed: &str) -> Output {
    relfuse(&[
        "simulate",
        "--config",
        "demo",
        "--seed",
        seed,
        "--out",
        path(dir),
    ])
}

#[test]
fn simulate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(simulate(a.path(), "42").status.success());
    assert!(simulate(b.path(), "42").status.success());
    let read = |d: &Path| fs::read(d.join("lifetimes.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));

    let text = String::from_utf8(read(a.path())).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 13 * 30);
    assert_eq!(rows.iter().filter(|r| r.starts_with("motor,")).count(), 30);
    let censored = rows.iter().filter(|r| r.ends_with(",0")).count() as f64 / rows.len() as f64;
    assert!((censored - 0.15).abs() < 0.06, "{censored}");
}

#[test]
fn simulate_sample_size_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = relfuse(&[
        "simulate",
        "--n",
        "12",
        "--seed",
        "1",
        "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("lifetimes.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 13 * 12);
}

#[test]
fn hierarchical_fit_is_deterministic_and_narrower_than_system_only() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(simulate(d, "7").status.success());
    let rbd = d.join("system.rbd");
    let data = d.join("lifetimes.csv");
    let fit = |out: &str, extra: &[&str]| {
        let o = d.join(out);
        let mut args = vec![
            "fit",
            "--rbd",
            path(&rbd),
            "--data",
            path(&data),
            "--out",
            path(&o),
        ];
        args.extend_from_slice(extra);
        let res = relfuse(&args);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
        fs::read_to_string(o.join("system.csv")).unwrap()
    };
    let full = fit("a", &[]);
    assert_eq!(full, fit("b", &[]));
    let only = fit("c", &["--system-only"]);
    assert_eq!(full.lines().next(), only.lines().next());

    let widths = |text: &str| -> Vec<(String, f64)> {
        text.lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (
                    f[0].to_string(),
                    f[4].parse::<f64>().unwrap() - f[3].parse::<f64>().unwrap(),
                )
            })
            .collect()
    };
    let only_w = widths(&only);
    let full_w = widths(&full);
    let shared: Vec<(f64, f64)> = only_w
        .iter()
        .filter_map(|(t, w)| full_w.iter().find(|(u, _)| u == t).map(|(_, v)| (*v, *w)))
        .collect();
    assert!(!shared.is_empty());
    let (h, s) = shared
        .iter()
        .fold((0.0, 0.0), |acc, (h, s)| (acc.0 + h, acc.1 + s));
    assert!(h < s, "hierarchical {h} vs system-only {s}");
    assert!(d.join("a/nodes/electric.csv").exists());
}

#[test]
fn single_component_ecdf() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("sys.rbd"), "sys\n").unwrap();
    fs::write(
        d.join("data.csv"),
        "node,time,event\nsys,1,1\nsys,2,1\nsys,3,1\n",
    )
    .unwrap();
    let out = relfuse(&[
        "fit",
        "--rbd",
        path(&d.join("sys.rbd")),
        "--data",
        path(&d.join("data.csv")),
        "--out",
        path(d),
        "--svg",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(d.join("system.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,mean,second_moment,lower,upper,precision,flags");
    assert!(lines[1].starts_with("1,0.333333333333,"));
    assert!(lines[2].starts_with("2,0.666666666667,"));
    for l in &lines[1..] {
        assert_eq!(l.split(',').nth(5), Some("3"));
    }
    let svg = fs::read_to_string(d.join("system.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn priors_file_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("sys.rbd"), "sys@series(a, b)\n").unwrap();
    fs::write(d.join("data.csv"), "node,time,event\na,2,1\na,4,0\n").unwrap();
    fs::write(
        d.join("priors.csv"),
        "node,time,cdf,precision\nb,1,0.5,5\nb,3,1,5\n",
    )
    .unwrap();
    let out = relfuse(&[
        "fit",
        "--rbd",
        path(&d.join("sys.rbd")),
        "--data",
        path(&d.join("data.csv")),
        "--priors",
        path(&d.join("priors.csv")),
        "--out",
        path(d),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let b = fs::read_to_string(d.join("nodes/b.csv")).unwrap();
    assert!(b.lines().nth(1).unwrap().starts_with("1,0.5,"));
}

#[test]
fn parse_and_binding_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.rbd"), "series(a,\n  parallel(b))\n").unwrap();
    fs::write(d.join("good.rbd"), "series(a, b)\n").unwrap();
    fs::write(d.join("data.csv"), "node,time,event\nzzz,1,1\n").unwrap();
    fs::write(d.join("neg.csv"), "node,time,event\na,-1,1\n").unwrap();

    let run = |rbd: &str, data: &str| {
        relfuse(&[
            "fit",
            "--rbd",
            path(&d.join(rbd)),
            "--data",
            path(&d.join(data)),
            "--out",
            path(d),
        ])
    };
    let out = run("bad.rbd", "data.csv");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2:"));

    let out = run("good.rbd", "data.csv");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zzz"));

    let out = run("good.rbd", "neg.csv");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
}

#[test]
fn precision_cap_from_environment_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("s.rbd"), "s\n").unwrap();
    fs::write(d.join("data.csv"), "node,time,event\ns,1,1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_relfuse"))
        .args([
            "fit",
            "--rbd",
            path(&d.join("s.rbd")),
            "--data",
            path(&d.join("data.csv")),
            "--out",
            path(d),
        ])
        .env("RELFUSE_PRECISION_CAP", "-1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("precision cap"));
}

#[test]
fn validate_passes_and_catches_the_series_typo() {
    let ok = relfuse(&["validate", "--seed", "5", "--paths", "20000"]);
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(ok.status.success(), "{stdout}");
    assert!(stdout.contains("8 checks, 0 failed"));

    let bad = relfuse(&["validate", "--paths", "20000", "--inject-series-typo"]);
    assert_eq!(bad.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&bad.stdout);
    assert!(stdout
        .contains("FAIL series of two zero curves has second moment 0: first = 0, second = 2"));
}
