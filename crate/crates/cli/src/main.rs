use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use relfuse_core::demo::DemoConfig;
use relfuse_core::fusion::{RecoveryOptions, SeriesFormula};
use relfuse_core::io::{
    load_lifetimes_path, load_prior_spec_path, load_truth_path, save_lifetimes, save_truth,
    write_csv, write_svg, CurveExport,
};
use relfuse_core::oracle::RngSeed;
use relfuse_core::pipeline::{fit_system, FitOptions};
use relfuse_core::rbd::{parse_system, validate_bindings, Severity};
use relfuse_core::validation::{run_all, ValidationPlan};

/// Hierarchical Bayesian reliability estimation over block diagrams.
#[derive(Parser)]
#[command(name = "relfuse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the system CDF from component, subsystem and system data.
    Fit(FitArgs),
    /// Simulate a lifetime dataset bundle.
    Simulate(SimulateArgs),
    /// Run the oracle checks.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Block diagram, DSL or JSON.
    #[arg(long)]
    rbd: PathBuf,
    /// Lifetimes CSV with header node,time,event.
    #[arg(long)]
    data: PathBuf,
    /// Priors CSV with header node,time,cdf,precision.
    #[arg(long)]
    priors: Option<PathBuf>,
    /// Credible level of the pointwise bands.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Use only the root node's data and prior.
    #[arg(long)]
    system_only: bool,
    #[arg(long, env = "RELFUSE_PRECISION_CAP", default_value_t = relfuse_core::fusion::DEFAULT_PRECISION_CAP)]
    precision_cap: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write system.svg.
    #[arg(long)]
    svg: bool,
    /// CSV with header t,cdf drawn in gray on the SVG.
    #[arg(long, requires = "svg")]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// `demo` or a JSON configuration file.
    #[arg(long, default_value = "demo")]
    config: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Observations per node, overriding the configuration.
    #[arg(long)]
    n: Option<usize>,
    /// Expected censored fraction, overriding the configuration.
    #[arg(long)]
    censor_fraction: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = ValidationPlan::default().seed.0)]
    seed: u64,
    /// Monte Carlo paths per case.
    #[arg(long, default_value_t = ValidationPlan::default().paths)]
    paths: usize,
    #[arg(long, hide = true)]
    inject_series_typo: bool,
}

/// Failure classes with distinct exit codes.
enum Failure {
    /// Bad input, parse or binding errors: exit 1.
    Input(anyhow::Error),
    /// Degenerate numbers prevented estimation: exit 2.
    Numerical(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn classify(e: relfuse_core::Error) -> Failure {
    if e.is_numerical() {
        Failure::Numerical(e.into())
    } else {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => fit(args),
        Command::Simulate(args) => simulate(args).map_err(Failure::Input),
        Command::Validate(args) => return validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_export(curve: &CurveExport, path: &Path) -> anyhow::Result<()> {
    let mut w = create(path)?;
    write_csv(curve, &mut w)?;
    w.flush()?;
    Ok(())
}

fn fit(args: FitArgs) -> Result<(), Failure> {
    let start = Instant::now();
    if args.precision_cap.is_nan() || args.precision_cap <= 0.0 {
        return Err(anyhow!("precision cap must be positive, got {}", args.precision_cap).into());
    }
    let source = fs::read_to_string(&args.rbd)
        .with_context(|| format!("cannot read {}", args.rbd.display()))?;
    let mut spec = parse_system(&source).map_err(|e| anyhow!("{}: {e}", args.rbd.display()))?;
    let datasets =
        load_lifetimes_path(&args.data).map_err(|e| anyhow!("{}: {e}", args.data.display()))?;
    let priors = match &args.priors {
        Some(p) => load_prior_spec_path(p).map_err(|e| anyhow!("{}: {e}", p.display()))?,
        None => BTreeMap::new(),
    };

    spec.bind_by_name(
        datasets.iter().map(|d| d.node.as_str()),
        priors.keys().map(String::as_str),
    );
    let data_names: BTreeSet<String> = datasets.iter().map(|d| d.node.clone()).collect();
    let prior_names: BTreeSet<String> = priors.keys().cloned().collect();
    let diagnostics = validate_bindings(&spec, &data_names, &prior_names);
    for d in &diagnostics {
        match d.severity {
            Severity::Info => info!("{d}"),
            Severity::Error => eprintln!("{d}"),
        }
    }
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(anyhow!("block diagram bindings are inconsistent").into());
    }

    let options = FitOptions {
        level: args.level,
        recovery: RecoveryOptions {
            precision_cap: args.precision_cap,
        },
        system_only: args.system_only,
    };
    let data: BTreeMap<_, _> = datasets.into_iter().map(|d| (d.node, d.samples)).collect();
    let fit = fit_system(&spec, &data, &priors, &options).map_err(classify)?;
    for (label, w) in &fit.warnings {
        warn!("{label}: {w:?}");
    }
    let export = fit.export().map_err(classify)?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    write_export(&export, &args.out.join("system.csv"))?;
    if !args.system_only {
        let nodes = args.out.join("nodes");
        fs::create_dir_all(&nodes).with_context(|| format!("cannot create {}", nodes.display()))?;
        for (label, process) in &fit.nodes {
            let curve = CurveExport::from_process(process, args.level).map_err(classify)?;
            write_export(&curve, &nodes.join(format!("{label}.csv")))?;
        }
    }
    if args.svg {
        let truth = match &args.truth {
            Some(p) => Some(load_truth_path(p).map_err(|e| anyhow!("{}: {e}", p.display()))?),
            None => None,
        };
        let title = match (spec.root.label(), args.system_only) {
            (Some(l), true) => format!("{l} (system data only)"),
            (Some(l), false) => l.to_string(),
            (None, _) => "system".to_string(),
        };
        let mut w = create(&args.out.join("system.svg"))?;
        write_svg(&export, truth.as_deref(), &title, &mut w).context("writing system.svg")?;
        w.flush().context("writing system.svg")?;
    }

    println!(
        "fitted {} grid points, mean {:.0}% band width {:.4}, {} warnings, {:.1} ms",
        export.rows.len(),
        args.level * 100.0,
        export.mean_band_width(),
        fit.warnings.len(),
        start.elapsed().as_secs_f64() * 1e3
    );
    Ok(())
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let mut config = if args.config == "demo" {
        DemoConfig::sherpa()
    } else {
        let text = fs::read_to_string(&args.config)
            .with_context(|| format!("cannot read {}", args.config))?;
        DemoConfig::from_json(&text)?
    };
    if let Some(n) = args.n {
        config.n_per_node = n;
    }
    if let Some(c) = args.censor_fraction {
        config.censor_fraction = c;
    }
    let system = config.system()?;
    let bundle = system.simulate(RngSeed(args.seed))?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut w = create(&args.out.join("lifetimes.csv"))?;
    save_lifetimes(&bundle.datasets, &mut w)?;
    w.flush()?;
    fs::write(
        args.out.join("system.rbd"),
        format!("{}\n", system.spec.root),
    )
    .context("writing system.rbd")?;

    let t_max = bundle
        .datasets
        .iter()
        .flat_map(|d| d.samples.iter().map(|s| s.time))
        .fold(0.0, f64::max);
    let steps = 400;
    let times: Vec<f64> = (1..=steps)
        .map(|k| t_max * k as f64 / steps as f64)
        .collect();
    let mut w = create(&args.out.join("truth.csv"))?;
    save_truth(&system.truth_curve(&times), &mut w)?;
    w.flush()?;

    let rows: usize = bundle.datasets.iter().map(|d| d.samples.len()).sum();
    let censored: usize = bundle
        .datasets
        .iter()
        .map(|d| d.samples.iter().filter(|s| !s.failed).count())
        .sum();
    println!(
        "wrote {} datasets, {rows} rows, {:.1}% censored, to {}",
        bundle.datasets.len(),
        100.0 * censored as f64 / rows.max(1) as f64,
        args.out.display()
    );
    Ok(())
}

fn validate(args: ValidateArgs) -> ExitCode {
    let plan = ValidationPlan {
        seed: RngSeed(args.seed),
        paths: args.paths,
        formula: if args.inject_series_typo {
            SeriesFormula::AsPrinted
        } else {
            SeriesFormula::Derived
        },
        ..ValidationPlan::default()
    };
    let reports = run_all(&plan);
    let failed = reports.iter().filter(|r| !r.passed).count();
    for r in &reports {
        println!("{r}");
    }
    println!("{} checks, {failed} failed", reports.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
