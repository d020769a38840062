use serde::{Deserialize, Serialize};

use super::beta::{beta_match, BetaShape};
use super::cdf::{union_grid, DiscreteCdf};
use super::data::{summarize, LifetimeSample};
use crate::error::{Error, Result};

/// A beta-Stacy process with a discrete base measure.
///
/// `precision[i]` is the precision at the jump `grid[i]`. Where the base
/// measure has reached 1 the variance of `F` does not exist; those points are
/// reported as terminal, and their stored precision is the nominal value that
/// still governs posterior updates at that jump.
///
/// Between grid points the precision is taken from the next jump, so that
/// `alpha(t) * (1 - G(t))` is the total weight of the next jump's beta law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaStacyProcess {
    base: DiscreteCdf,
    precision: Vec<f64>,
    /// First time at which nothing is estimable; the grid stops before it.
    horizon: Option<f64>,
}

/// Precision as reported to callers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Precision {
    Defined(f64),
    /// Base measure equals 1: the variance of `F` does not exist.
    Undefined,
}

impl BetaStacyProcess {
    pub fn new(base: DiscreteCdf, precision: Vec<f64>) -> Result<Self> {
        if base.len() != precision.len() {
            return Err(Error::LengthMismatch {
                grid: base.len(),
                values: precision.len(),
            });
        }
        if let Some(&bad) = precision.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::NegativePrecision(bad));
        }
        Ok(Self {
            base,
            precision,
            horizon: None,
        })
    }

    /// Zero-precision process on an empty grid; carries no information.
    pub fn noninformative() -> Self {
        Self {
            base: DiscreteCdf::empty(),
            precision: Vec::new(),
            horizon: None,
        }
    }

    pub fn base(&self) -> &DiscreteCdf {
        &self.base
    }

    pub fn grid(&self) -> &[f64] {
        self.base.grid()
    }

    /// Nominal precision at each grid point.
    pub fn precision(&self) -> &[f64] {
        &self.precision
    }

    pub fn precision_at(&self, i: usize) -> Precision {
        if self.is_terminal(i) {
            Precision::Undefined
        } else {
            Precision::Defined(self.precision[i])
        }
    }

    pub fn is_terminal(&self, i: usize) -> bool {
        self.base.values()[i] >= 1.0
    }

    pub fn horizon(&self) -> Option<f64> {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// True when `t` is past the last grid point and the base has not reached 1.
    pub fn is_beyond_data(&self, t: f64) -> bool {
        match self.grid().last() {
            Some(&last) => t > last && self.base.last_value() < 1.0,
            None => true,
        }
    }

    /// Precision as a function of time.
    pub fn alpha_at(&self, t: f64) -> f64 {
        if let Some(h) = self.horizon {
            if t >= h {
                return 0.0;
            }
        }
        let i = self.grid().partition_point(|&g| g < t);
        match self.precision.get(i) {
            Some(&a) => a,
            None => self.precision.last().copied().unwrap_or(0.0),
        }
    }

    /// Beta shape `(alpha * dG, alpha * (1 - G))` of the jump at grid point `i`.
    pub fn jump_shape(&self, i: usize) -> (f64, f64) {
        let g = self.base.values()[i];
        let g_minus = self.base.left_limit_at(i);
        let a = self.precision[i];
        (a * (g - g_minus), a * (1.0 - g))
    }

    fn check_range(&self, t: f64) -> Result<()> {
        match self.horizon {
            Some(horizon) if t >= horizon => Err(Error::BeyondEstimableRange { time: t, horizon }),
            _ => Ok(()),
        }
    }

    /// `E[F(t)] = G(t)`.
    pub fn mean(&self, t: f64) -> Result<f64> {
        self.check_range(t)?;
        Ok(self.base.eval(t))
    }

    /// `E[F(t)^2]` from the product of per-jump second moments of `1 - W`.
    pub fn second_moment(&self, t: f64) -> Result<f64> {
        self.check_range(t)?;
        Ok(match self.base.index_at(t) {
            Some(i) => self.second_moments_upto(i + 1)[i],
            None => 0.0,
        })
    }

    /// `E[F(t_i)^2]` at every grid point.
    pub fn second_moments(&self) -> Vec<f64> {
        self.second_moments_upto(self.len())
    }

    fn second_moments_upto(&self, n: usize) -> Vec<f64> {
        let values = self.base.values();
        let mut out = Vec::with_capacity(n);
        // log E[R(t)^2]
        let mut log_q = 0.0;
        let mut terminal = false;
        for i in 0..n {
            let g = values[i];
            if terminal || g >= 1.0 {
                terminal = true;
                out.push(1.0);
                continue;
            }
            let s = 1.0 - g;
            let s_minus = 1.0 - self.base.left_limit_at(i);
            if s != s_minus {
                let a = self.precision[i];
                log_q += s.ln() + (a * s).ln_1p() - s_minus.ln() - (a * s_minus).ln_1p();
            }
            let second = log_q.exp() - 1.0 + 2.0 * g;
            out.push(second.clamp(g * g, g));
        }
        out
    }

    /// Equal-tailed pointwise interval from the moment-matched beta at `t`.
    pub fn credible_interval(&self, t: f64, level: f64) -> Result<(f64, f64)> {
        check_level(level)?;
        let m = self.mean(t)?;
        let s = self.second_moment(t)?;
        interval_from_moments(m, s, level)
    }
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(level))
    }
}

/// Relative variance below which an interval collapses to the mean.
const DEGENERATE_VARIANCE: f64 = 1e-14;

/// Equal-tailed interval of the beta law with mean `m` and second moment `s`.
///
/// Zero-variance points give `(m, m)`. Variance at the `m (1 - m)` bound is the
/// Bernoulli limit of the beta family. The interval is widened to contain `m`
/// when an extremely skewed beta puts its mean outside the central quantiles.
pub fn interval_from_moments(m: f64, s: f64, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if m <= 0.0 {
        return Ok((0.0, 0.0));
    }
    if m >= 1.0 {
        return Ok((1.0, 1.0));
    }
    let tail = 0.5 * (1.0 - level);
    let bound = m * (1.0 - m);
    let v = s - m * m;
    if v <= DEGENERATE_VARIANCE * bound {
        return Ok((m, m));
    }
    if v >= bound * (1.0 - 1e-12) {
        let q = |p: f64| -> f64 {
            if p <= 1.0 - m {
                0.0
            } else {
                1.0
            }
        };
        return Ok((q(tail).min(m), q(1.0 - tail).max(m)));
    }
    let shape: BetaShape = beta_match(m, s)?;
    let lower = shape.quantile(tail).min(m);
    let upper = shape.quantile(1.0 - tail).max(m);
    Ok((lower, upper))
}

/// DP-style prior: base measure from `(grid, cdf_values)` with constant precision.
pub fn dp_prior(grid: &[f64], cdf_values: &[f64], precision: f64) -> Result<BetaStacyProcess> {
    if !(precision.is_finite() && precision >= 0.0) {
        return Err(Error::NegativePrecision(precision));
    }
    bsp_prior(grid, cdf_values, &vec![precision; grid.len()])
}

/// General prior with a per-point precision; the base must end at 1.
pub fn bsp_prior(grid: &[f64], cdf_values: &[f64], precision: &[f64]) -> Result<BetaStacyProcess> {
    let mut values = cdf_values.to_vec();
    match values.last_mut() {
        Some(last) if (*last - 1.0).abs() <= 1e-12 => *last = 1.0,
        Some(last) => return Err(Error::FinalValueNotOne(*last)),
        None => return Err(Error::FinalValueNotOne(0.0)),
    }
    let base = DiscreteCdf::new(grid.to_vec(), values)?;
    BetaStacyProcess::new(base, precision.to_vec())
}

/// Conjugate update of `prior` with right-censored `samples`.
///
/// The posterior grid is the union of the prior grid and all distinct sample
/// times. It ends early at the first point where the base reaches 1, or just
/// before the first point with neither prior weight nor units at risk; in the
/// latter case that point becomes the horizon.
pub fn posterior_update(
    prior: &BetaStacyProcess,
    samples: &[LifetimeSample],
) -> Result<BetaStacyProcess> {
    let counts = summarize(samples)?;
    let grid = union_grid(prior.grid(), &counts.times);

    let mut out_grid = Vec::with_capacity(grid.len());
    let mut values = Vec::with_capacity(grid.len());
    let mut precision = Vec::with_capacity(grid.len());
    let mut horizon = None;

    // log(1 - G*(t-))
    let mut log_surv = 0.0f64;
    let mut k = 0;
    for &t in &grid {
        while k < counts.times.len() && counts.times[k] < t {
            k += 1;
        }
        let (at_risk, failed) = if counts.times.get(k) == Some(&t) {
            (counts.at_risk[k] as f64, counts.failures[k] as f64)
        } else {
            (counts.at_risk.get(k).copied().unwrap_or(0) as f64, 0.0)
        };
        let g = prior.base.eval(t);
        let g_minus = prior.base.left_limit(t);
        let alpha = prior.alpha_at(t);

        let den = alpha * (1.0 - g_minus) + at_risk;
        if den <= 0.0 {
            horizon = Some(t);
            break;
        }
        let num = alpha * (g - g_minus) + failed;
        let hazard = (num / den).clamp(0.0, 1.0);
        let surv_minus = log_surv.exp();

        out_grid.push(t);
        precision.push(den / surv_minus);
        if hazard >= 1.0 {
            values.push(1.0);
            break;
        }
        log_surv += (-hazard).ln_1p();
        values.push((1.0 - log_surv.exp()).clamp(0.0, 1.0));
    }

    // Running max guards against a last-ulp dip from the exp/log round trip.
    for i in 1..values.len() {
        if values[i] < values[i - 1] {
            values[i] = values[i - 1];
        }
    }

    Ok(BetaStacyProcess {
        base: DiscreteCdf::from_parts_unchecked(out_grid, values),
        precision,
        horizon,
    })
}
