//! End-to-end hierarchical fit of a block diagram.
//!
//! Every component starts from its elicited prior, or a zero-precision prior,
//! and is updated with its own data. Sibling moment curves are fused at each
//! group. A labeled group that carries data or a prior has its fused curve
//! fitted to a beta-Stacy prior, merged with any elicited prior, and updated
//! with its data. The root always ends as a beta-Stacy process.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bsp::{posterior_update, BetaStacyProcess, LifetimeSample};
use crate::error::{Error, Result};
use crate::fusion::{
    align_grids, combine_parallel, combine_series, merge_priors, moments_of, recover_precision,
    MomentCurve, RecoveryOptions, RecoveryWarning,
};
use crate::io::CurveExport;
use crate::rbd::{RbdNode, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Credible level for exported bands.
    pub level: f64,
    pub recovery: RecoveryOptions,
    /// Use only the root's own prior and data.
    pub system_only: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            level: 0.95,
            recovery: RecoveryOptions::default(),
            system_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemFit {
    pub posterior: BetaStacyProcess,
    /// Posterior of every node that was fitted as a process, keyed by label.
    pub nodes: BTreeMap<String, BetaStacyProcess>,
    /// Precision recovery warnings with the label of the node they arose at.
    pub warnings: Vec<(String, RecoveryWarning)>,
    pub level: f64,
}

impl SystemFit {
    pub fn export(&self) -> Result<CurveExport> {
        CurveExport::from_process(&self.posterior, self.level)
    }

    pub fn export_node(&self, label: &str) -> Option<Result<CurveExport>> {
        self.nodes
            .get(label)
            .map(|p| CurveExport::from_process(p, self.level))
    }
}

struct Context<'a> {
    spec: &'a SystemSpec,
    datasets: &'a BTreeMap<String, Vec<LifetimeSample>>,
    priors: &'a BTreeMap<String, BetaStacyProcess>,
    options: &'a FitOptions,
}

impl Context<'_> {
    fn data(&self, label: &str) -> Result<&[LifetimeSample]> {
        match self.spec.data.get(label) {
            Some(name) => self.datasets.get(name).map(Vec::as_slice).ok_or_else(|| {
                Error::Config(format!(
                    "dataset `{name}` bound to `{label}` was not supplied"
                ))
            }),
            None => Ok(&[]),
        }
    }

    fn prior(&self, label: &str) -> Result<Option<&BetaStacyProcess>> {
        match self.spec.priors.get(label) {
            Some(name) => self.priors.get(name).map(Some).ok_or_else(|| {
                Error::Config(format!(
                    "prior `{name}` bound to `{label}` was not supplied"
                ))
            }),
            None => Ok(None),
        }
    }
}

#[derive(Default)]
struct Partial {
    curve: Option<MomentCurve>,
    process: Option<BetaStacyProcess>,
    nodes: Vec<(String, BetaStacyProcess)>,
    warnings: Vec<(String, RecoveryWarning)>,
}

/// Fits the system described by `spec`.
///
/// `datasets` and `priors` are keyed by the names `spec` binds to node
/// labels. The result depends only on the inputs.
pub fn fit_system(
    spec: &SystemSpec,
    datasets: &BTreeMap<String, Vec<LifetimeSample>>,
    priors: &BTreeMap<String, BetaStacyProcess>,
    options: &FitOptions,
) -> Result<SystemFit> {
    crate::bsp::check_level(options.level)?;
    let ctx = Context {
        spec,
        datasets,
        priors,
        options,
    };
    let root = &spec.root;

    if options.system_only {
        let label = root.label();
        let (prior, data) = match label {
            Some(l) => (ctx.prior(l)?, ctx.data(l)?),
            None => (None, &[][..]),
        };
        let noninformative = BetaStacyProcess::noninformative();
        let posterior = posterior_update(prior.unwrap_or(&noninformative), data)?;
        let mut nodes = BTreeMap::new();
        if let Some(l) = label {
            nodes.insert(l.to_string(), posterior.clone());
        }
        return Ok(SystemFit {
            posterior,
            nodes,
            warnings: Vec::new(),
            level: options.level,
        });
    }

    let mut partial = fit_node(&ctx, root, true)?;
    let posterior = partial.process.take().expect("root is always fitted");
    Ok(SystemFit {
        posterior,
        nodes: partial.nodes.into_iter().collect(),
        warnings: partial.warnings,
        level: options.level,
    })
}

fn fit_node(ctx: &Context<'_>, node: &RbdNode, is_root: bool) -> Result<Partial> {
    let mut out = Partial::default();
    let label = node.label();

    if let RbdNode::Component { id } = node {
        let noninformative = BetaStacyProcess::noninformative();
        let prior = ctx.prior(id)?.unwrap_or(&noninformative);
        let posterior = posterior_update(prior, ctx.data(id)?)?;
        out.curve = Some(moments_of(&posterior));
        out.nodes.push((id.clone(), posterior.clone()));
        out.process = Some(posterior);
        return Ok(out);
    }

    let children = node.children();
    if children.len() < 2 {
        return Err(Error::EmptyGroup(children.len()));
    }
    let parts: Vec<Partial> = children
        .par_iter()
        .map(|c| fit_node(ctx, c, false))
        .collect::<Result<_>>()?;
    let mut curves = Vec::with_capacity(parts.len());
    for mut p in parts {
        curves.push(p.curve.take().expect("children report a curve"));
        out.nodes.append(&mut p.nodes);
        out.warnings.append(&mut p.warnings);
    }
    let series = matches!(node, RbdNode::Series { .. });
    let mut fused = curves[0].clone();
    for next in &curves[1..] {
        let (a, b) = align_grids(&fused, next);
        fused = if series {
            combine_series(&a, &b)
        } else {
            combine_parallel(&a, &b)
        };
    }

    let (data, extra) = match label {
        Some(l) => (ctx.data(l)?, ctx.prior(l)?),
        None => (&[][..], None),
    };
    let has_info = ctx.spec.data.contains_key(label.unwrap_or_default())
        || ctx.spec.priors.contains_key(label.unwrap_or_default());
    if !(is_root || label.is_some() && has_info) {
        out.curve = Some(fused);
        return Ok(out);
    }

    let tag = label.unwrap_or("<root>").to_string();
    let recovery = &ctx.options.recovery;
    let mut fit = recover_precision(&fused, recovery)?;
    if let Some(extra) = extra {
        let merged = merge_priors(&fit.process, extra, recovery)?;
        fit.process = merged.process;
        fit.warnings.extend(merged.warnings);
    }
    out.warnings
        .extend(fit.warnings.into_iter().map(|w| (tag.clone(), w)));
    let posterior = posterior_update(&fit.process, data)?;
    out.curve = Some(moments_of(&posterior));
    if let Some(l) = label {
        out.nodes.push((l.to_string(), posterior.clone()));
    }
    out.process = Some(posterior);
    Ok(out)
}

/// Mean band widths of two exports over the grid times they share.
///
/// Returns `None` when the grids have no time in common.
pub fn shared_band_widths(a: &CurveExport, b: &CurveExport) -> Option<(f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let (mut wa, mut wb, mut n) = (0.0, 0.0, 0usize);
    while i < a.rows.len() && j < b.rows.len() {
        let (ra, rb) = (&a.rows[i], &b.rows[j]);
        if ra.t < rb.t {
            i += 1;
        } else if rb.t < ra.t {
            j += 1;
        } else {
            wa += ra.upper - ra.lower;
            wb += rb.upper - rb.lower;
            n += 1;
            i += 1;
            j += 1;
        }
    }
    (n > 0).then(|| (wa / n as f64, wb / n as f64))
}
