use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp, Weibull};

use super::paths::{path_rng, RngSeed};
use super::quad::integrate;
use crate::bsp::{DiscreteCdf, LifetimeSample};
use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::rbd::RbdNode;

/// A known lifetime distribution used to generate synthetic test data.
#[derive(Debug, Clone, PartialEq)]
pub enum LifetimeModel {
    Weibull {
        shape: f64,
        scale: f64,
    },
    /// Step CDF ending at 1; samples land on its grid.
    Discrete(DiscreteCdf),
    /// Lifetime of a block diagram whose components follow `parts`.
    Structure {
        node: RbdNode,
        parts: BTreeMap<String, LifetimeModel>,
    },
}

impl LifetimeModel {
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        let m = LifetimeModel::Weibull { shape, scale };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LifetimeModel::Weibull { shape, scale } => {
                if !(*shape > 0.0 && *scale > 0.0 && shape.is_finite() && scale.is_finite()) {
                    return Err(Error::Config(format!(
                        "Weibull shape and scale must be positive, got ({shape}, {scale})"
                    )));
                }
            }
            LifetimeModel::Discrete(cdf) => {
                if cdf.last_value() < 1.0 {
                    return Err(Error::FinalValueNotOne(cdf.last_value()));
                }
            }
            LifetimeModel::Structure { node, parts } => {
                for id in node.component_ids() {
                    parts
                        .get(id)
                        .ok_or_else(|| Error::MissingLeaf(id.to_string()))?
                        .validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            LifetimeModel::Weibull { shape, scale } => Weibull::new(*scale, *shape)
                .expect("validated Weibull")
                .sample(rng),
            LifetimeModel::Discrete(cdf) => {
                let u: f64 = rng.random();
                let i = cdf.values().partition_point(|&v| v < u);
                cdf.grid()[i.min(cdf.len() - 1)]
            }
            LifetimeModel::Structure { node, parts } => sample_structure(node, parts, rng),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            LifetimeModel::Weibull { shape, scale } => -(-(t / scale).powf(*shape)).exp_m1(),
            LifetimeModel::Discrete(cdf) => cdf.eval(t),
            LifetimeModel::Structure { node, parts } => structure_cdf(node, parts, t),
        }
    }
}

fn sample_structure<R: Rng + ?Sized>(
    node: &RbdNode,
    parts: &BTreeMap<String, LifetimeModel>,
    rng: &mut R,
) -> f64 {
    match node {
        RbdNode::Component { id } => parts[id].sample(rng),
        RbdNode::Series { children, .. } => children
            .iter()
            .map(|c| sample_structure(c, parts, rng))
            .fold(f64::INFINITY, f64::min),
        RbdNode::Parallel { children, .. } => children
            .iter()
            .map(|c| sample_structure(c, parts, rng))
            .fold(0.0, f64::max),
    }
}

fn structure_cdf(node: &RbdNode, parts: &BTreeMap<String, LifetimeModel>, t: f64) -> f64 {
    match node {
        RbdNode::Component { id } => parts[id].cdf(t),
        RbdNode::Series { children, .. } => {
            1.0 - children
                .iter()
                .map(|c| 1.0 - structure_cdf(c, parts, t))
                .product::<f64>()
        }
        RbdNode::Parallel { children, .. } => children
            .iter()
            .map(|c| structure_cdf(c, parts, t))
            .product(),
    }
}

/// `P(C < T)` for `C ~ Exp(rate)` independent of `T ~ model`.
///
/// With `u = exp(-rate c)` this is the integral of `S_T(-ln(u) / rate)` over `[0, 1]`.
pub fn expected_censored_fraction(model: &LifetimeModel, rate: f64) -> f64 {
    if rate <= 0.0 {
        return 0.0;
    }
    integrate(|u| 1.0 - model.cdf(-u.ln() / rate), 0.0, 1.0, 1e-10)
}

/// Exponential censoring rate whose expected censored fraction is `fraction`.
pub fn calibrate_censoring_rate(model: &LifetimeModel, fraction: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidCensorFraction(fraction));
    }
    if fraction == 0.0 {
        return Ok(0.0);
    }
    let p = |rate: f64| expected_censored_fraction(model, rate);
    let (mut lo, mut hi) = (1.0, 1.0);
    for _ in 0..400 {
        if p(lo) <= fraction {
            break;
        }
        lo *= 0.5;
    }
    for _ in 0..400 {
        if p(hi) >= fraction {
            break;
        }
        hi *= 2.0;
    }
    let (mut lo, mut hi) = (lo.ln(), hi.ln());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if p(mid.exp()) < fraction {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Draws `n_per_node` right-censored lifetimes for each named model.
///
/// Node `k` uses random stream `k` of `seed`, so adding nodes at the end
/// leaves earlier datasets unchanged.
pub fn simulate_lifetimes(
    models: &[(String, LifetimeModel)],
    n_per_node: usize,
    censor_fraction: f64,
    seed: RngSeed,
) -> Result<Vec<Dataset>> {
    if !(0.0..1.0).contains(&censor_fraction) {
        return Err(Error::InvalidCensorFraction(censor_fraction));
    }
    let mut out = Vec::with_capacity(models.len());
    for (k, (name, model)) in models.iter().enumerate() {
        model.validate()?;
        let rate = calibrate_censoring_rate(model, censor_fraction)?;
        let censor = if rate > 0.0 {
            Some(Exp::new(rate).map_err(|e| Error::Config(e.to_string()))?)
        } else {
            None
        };
        let mut rng = path_rng(seed, k as u64);
        let mut samples = Vec::with_capacity(n_per_node);
        for _ in 0..n_per_node {
            let t = model.sample(&mut rng);
            let sample = match &censor {
                Some(exp) => {
                    let c = exp.sample(&mut rng);
                    if c < t {
                        LifetimeSample::censored(c)?
                    } else {
                        LifetimeSample::failure(t)?
                    }
                }
                None => LifetimeSample::failure(t)?,
            };
            samples.push(sample);
        }
        out.push(Dataset {
            node: name.clone(),
            samples,
        });
    }
    Ok(out)
}
