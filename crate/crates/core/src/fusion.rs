//! Moment algebra for independent components in series and parallel, and
//! recovery of a beta-Stacy process from fused moment curves.
//!
//! Parallel groups fail when every member has failed, so `F_S = F_1 F_2`.
//! Series groups fail with any member, so `R_S = R_1 R_2` with `R = 1 - F`.
//! Independence lets both first and second moments multiply.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::bsp::{union_grid, BetaStacyProcess, DiscreteCdf};
use crate::error::{Error, Result};
use crate::rbd::RbdNode;

/// First and second moments of a random CDF on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCurve {
    pub grid: Vec<f64>,
    /// `E[F(t)]`
    pub first: Vec<f64>,
    /// `E[F(t)^2]`
    pub second: Vec<f64>,
    /// Points where `first == 1`.
    pub terminal: Vec<bool>,
}

impl MomentCurve {
    pub fn new(grid: Vec<f64>, first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        if first.len() != grid.len() || second.len() != grid.len() {
            return Err(Error::LengthMismatch {
                grid: grid.len(),
                values: first.len().min(second.len()),
            });
        }
        crate::bsp::DiscreteCdf::new(grid.clone(), first.clone())?;
        for (index, (&m, &s)) in first.iter().zip(&second).enumerate() {
            let slack = 1e-12;
            if !(s >= m * m - slack && s <= m + slack) {
                return Err(Error::InvalidCurve {
                    index,
                    reason: "second moment outside [first^2, first]",
                });
            }
        }
        let terminal = first.iter().map(|&m| m >= 1.0).collect();
        Ok(Self {
            grid,
            first,
            second,
            terminal,
        })
    }

    /// Curve of a random CDF that is 0 everywhere.
    pub fn empty() -> Self {
        Self {
            grid: Vec::new(),
            first: Vec::new(),
            second: Vec::new(),
            terminal: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `(E[F(t)], E[F(t)^2])` by right-continuous step lookup.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self.grid.partition_point(|&g| g <= t).checked_sub(1) {
            Some(i) => (self.first[i], self.second[i]),
            None => (0.0, 0.0),
        }
    }

    /// `E[R(t)^2] = E[F^2] + 1 - 2 E[F]` at grid point `i`.
    pub fn reliability_second(&self, i: usize) -> f64 {
        self.second[i] + 1.0 - 2.0 * self.first[i]
    }

    /// Re-express the curve on `grid`, which must contain `self.grid`.
    pub fn extend_to(&self, grid: &[f64]) -> Self {
        let mut first = Vec::with_capacity(grid.len());
        let mut second = Vec::with_capacity(grid.len());
        let mut terminal = Vec::with_capacity(grid.len());
        let mut k = 0;
        let mut current = (0.0, 0.0, false);
        for &t in grid {
            while k < self.grid.len() && self.grid[k] <= t {
                current = (self.first[k], self.second[k], self.terminal[k]);
                k += 1;
            }
            first.push(current.0);
            second.push(current.1);
            terminal.push(current.2);
        }
        Self {
            grid: grid.to_vec(),
            first,
            second,
            terminal,
        }
    }
}

/// Moments of a beta-Stacy process at each of its grid points.
pub fn moments_of(bsp: &BetaStacyProcess) -> MomentCurve {
    let first = bsp.base().values().to_vec();
    let terminal = (0..bsp.len()).map(|i| bsp.is_terminal(i)).collect();
    MomentCurve {
        grid: bsp.grid().to_vec(),
        second: bsp.second_moments(),
        first,
        terminal,
    }
}

/// Both curves on the union of their grids.
pub fn align_grids(a: &MomentCurve, b: &MomentCurve) -> (MomentCurve, MomentCurve) {
    if a.grid == b.grid {
        return (a.clone(), b.clone());
    }
    let grid = union_grid(&a.grid, &b.grid);
    (a.extend_to(&grid), b.extend_to(&grid))
}

fn check_aligned(a: &MomentCurve, b: &MomentCurve) {
    assert_eq!(a.grid, b.grid, "moment curves must be aligned first");
}

/// Max of two independent lifetimes.
pub fn combine_parallel(a: &MomentCurve, b: &MomentCurve) -> MomentCurve {
    check_aligned(a, b);
    let mut out = a.clone();
    for i in 0..a.len() {
        let m = a.first[i] * b.first[i];
        let s = a.second[i] * b.second[i];
        out.first[i] = m;
        out.second[i] = s.clamp(m * m, m);
        out.terminal[i] = a.terminal[i] && b.terminal[i];
    }
    out
}

/// Which algebraic form to use for the series second moment.
///
/// `AsPrinted` reproduces a well-known erroneous middle term,
/// `1 - 2 G_1 G_2 + ...`, and exists only so the validation suite can show
/// that its checks catch it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeriesFormula {
    #[default]
    Derived,
    AsPrinted,
}

/// Min of two independent lifetimes.
pub fn combine_series(a: &MomentCurve, b: &MomentCurve) -> MomentCurve {
    combine_series_with(a, b, SeriesFormula::Derived)
}

pub fn combine_series_with(
    a: &MomentCurve,
    b: &MomentCurve,
    formula: SeriesFormula,
) -> MomentCurve {
    check_aligned(a, b);
    let mut out = a.clone();
    for i in 0..a.len() {
        let (ga, gb) = (a.first[i], b.first[i]);
        let r2 = a.reliability_second(i) * b.reliability_second(i);
        let m = 1.0 - (1.0 - ga) * (1.0 - gb);
        let s = match formula {
            SeriesFormula::Derived => 1.0 - 2.0 * (1.0 - ga) * (1.0 - gb) + r2,
            SeriesFormula::AsPrinted => 1.0 - 2.0 * ga * gb + r2,
        };
        out.first[i] = m;
        out.second[i] = match formula {
            SeriesFormula::Derived => s.clamp(m * m, m),
            SeriesFormula::AsPrinted => s,
        };
        out.terminal[i] = a.terminal[i] || b.terminal[i];
    }
    out
}

/// Tuning for [`recover_precision`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryOptions {
    /// Ceiling for precisions of zero-variance increments.
    pub precision_cap: f64,
}

pub const DEFAULT_PRECISION_CAP: f64 = 1e12;

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            precision_cap: DEFAULT_PRECISION_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecoveryWarning {
    /// Zero-variance increment; precision set to the cap.
    Capped { time: f64 },
    /// Moments not attainable by any nonnegative precision; clamped to 0.
    ClampedNegative { time: f64, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub process: BetaStacyProcess,
    pub warnings: Vec<RecoveryWarning>,
}

/// Fits a beta-Stacy process whose moments match `curve` at every grid point.
///
/// The base is the first moment. Precision at jump `i` solves the ratio of
/// consecutive `E[R^2]` values, with `E[R(t_0)^2] = 1` at the origin. Points
/// without a jump leave the precision unidentified; they take the value of the
/// next jump. Terminal points reuse the previous precision.
pub fn recover_precision(curve: &MomentCurve, options: &RecoveryOptions) -> Result<Recovery> {
    let cap = options.precision_cap;
    if cap.is_nan() || cap <= 0.0 {
        return Err(Error::Config(format!(
            "precision cap must be positive, got {cap}"
        )));
    }
    let n = curve.len();
    let base = DiscreteCdf::new(curve.grid.clone(), curve.first.clone())?;
    let mut warnings = Vec::new();
    let mut alpha: Vec<Option<f64>> = vec![None; n];

    let (mut q_prev, mut s_prev) = (1.0, 1.0);
    for i in 0..n {
        let g = curve.first[i];
        if curve.terminal[i] || g >= 1.0 {
            break;
        }
        let s = 1.0 - g;
        let q = curve.reliability_second(i);
        let jump = s_prev - s;
        if jump > 1e-15 * s_prev {
            let num = q_prev * s - q * s_prev;
            let den = q * s_prev * s_prev - q_prev * s * s;
            let time = curve.grid[i];
            let value = if den <= 0.0 || !(num / den).is_finite() {
                if num > 0.0 || den == 0.0 {
                    warnings.push(RecoveryWarning::Capped { time });
                    cap
                } else {
                    warnings.push(RecoveryWarning::ClampedNegative {
                        time,
                        value: num / den,
                    });
                    0.0
                }
            } else {
                let raw = num / den;
                if raw < 0.0 {
                    warnings.push(RecoveryWarning::ClampedNegative { time, value: raw });
                    0.0
                } else if raw > cap {
                    warnings.push(RecoveryWarning::Capped { time });
                    cap
                } else {
                    raw
                }
            };
            alpha[i] = Some(value);
        }
        q_prev = q;
        s_prev = s;
    }

    // Zero-jump points borrow from the next jump, then the previous one.
    let mut precision = vec![0.0; n];
    let mut next: Option<f64> = None;
    for i in (0..n).rev() {
        if let Some(a) = alpha[i] {
            next = Some(a);
        }
        precision[i] = next.unwrap_or(f64::NAN);
    }
    let mut prev = 0.0;
    for p in precision.iter_mut() {
        if p.is_nan() {
            *p = prev;
        }
        prev = *p;
    }
    for (i, &a) in alpha.iter().enumerate() {
        if a.is_none() && curve.first[i] >= 1.0 {
            precision[i] = if i > 0 { precision[i - 1] } else { 0.0 };
        }
    }

    for w in &warnings {
        warn!("precision recovery: {w:?}");
    }
    Ok(Recovery {
        process: BetaStacyProcess::new(base, precision)?,
        warnings,
    })
}

/// Folds a block diagram into one moment curve, bottom-up and left to right.
pub fn reduce_rbd(node: &RbdNode, leaves: &BTreeMap<String, MomentCurve>) -> Result<MomentCurve> {
    reduce_with(node, leaves, SeriesFormula::Derived)
}

pub fn reduce_with(
    node: &RbdNode,
    leaves: &BTreeMap<String, MomentCurve>,
    formula: SeriesFormula,
) -> Result<MomentCurve> {
    match node {
        RbdNode::Component { id, .. } => leaves
            .get(id)
            .cloned()
            .ok_or_else(|| Error::MissingLeaf(id.clone())),
        RbdNode::Series { children, .. } => fold_group(children, leaves, formula, |a, b| {
            combine_series_with(a, b, formula)
        }),
        RbdNode::Parallel { children, .. } => {
            fold_group(children, leaves, formula, combine_parallel)
        }
    }
}

fn fold_group(
    children: &[RbdNode],
    leaves: &BTreeMap<String, MomentCurve>,
    formula: SeriesFormula,
    combine: impl Fn(&MomentCurve, &MomentCurve) -> MomentCurve,
) -> Result<MomentCurve> {
    if children.len() < 2 {
        return Err(Error::EmptyGroup(children.len()));
    }
    let mut acc = reduce_with(&children[0], leaves, formula)?;
    for child in &children[1..] {
        let next = reduce_with(child, leaves, formula)?;
        let (a, b) = align_grids(&acc, &next);
        acc = combine(&a, &b);
    }
    Ok(acc)
}

/// Reduces `node` and fits the result to a beta-Stacy prior.
///
/// When `extra_prior` is given it is merged with the fused prior through
/// [`merge_priors`].
pub fn fuse_to_prior(
    node: &RbdNode,
    leaves: &BTreeMap<String, MomentCurve>,
    extra_prior: Option<&BetaStacyProcess>,
    options: &RecoveryOptions,
) -> Result<Recovery> {
    let fused = reduce_rbd(node, leaves)?;
    let mut recovery = recover_precision(&fused, options)?;
    if let Some(extra) = extra_prior {
        let merged = merge_priors(&recovery.process, extra, options)?;
        recovery.process = merged.process;
        recovery.warnings.extend(merged.warnings);
    }
    Ok(recovery)
}

/// Combines two priors by matching the moments of their precision-weighted
/// mixture at each grid point.
///
/// Weights are `alpha_1(t) / (alpha_1(t) + alpha_2(t))`, equal when both are
/// zero. Pointwise weights can make the mixed mean dip, so the first moment is
/// made nondecreasing by a running max before refitting.
pub fn merge_priors(
    fused: &BetaStacyProcess,
    elicited: &BetaStacyProcess,
    options: &RecoveryOptions,
) -> Result<Recovery> {
    let a = moments_of(fused);
    let b = moments_of(elicited);
    let (a, b) = align_grids(&a, &b);
    let mut first = Vec::with_capacity(a.len());
    let mut second = Vec::with_capacity(a.len());
    let mut running = 0.0f64;
    for (i, &t) in a.grid.iter().enumerate() {
        let (wa, wb) = (fused.alpha_at(t), elicited.alpha_at(t));
        let wa = if wa + wb > 0.0 { wa / (wa + wb) } else { 0.5 };
        let wb = 1.0 - wa;
        let m = wa * a.first[i] + wb * b.first[i];
        let s = wa * a.second[i] + wb * b.second[i];
        running = running.max(m);
        let m = running.min(1.0);
        first.push(m);
        second.push(s.clamp(m * m, m));
    }
    let curve = MomentCurve::new(a.grid, first, second)?;
    recover_precision(&curve, options)
}
