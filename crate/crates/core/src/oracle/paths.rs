use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;

use crate::bsp::BetaStacyProcess;
use crate::error::{Error, Result};
use crate::rbd::RbdNode;

/// Seed for reproducible random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

/// Independent stream `stream` derived from `seed`.
pub fn path_rng(seed: RngSeed, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    rng.set_stream(stream);
    rng
}

/// Monte Carlo estimates of `E[F]` and `E[F^2]` with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStats {
    pub grid: Vec<f64>,
    pub n_paths: usize,
    pub mean: Vec<f64>,
    pub mean_se: Vec<f64>,
    pub second: Vec<f64>,
    pub second_se: Vec<f64>,
}

enum Jump {
    None,
    Certain,
    Beta(Beta<f64>),
}

/// Per-jump increment laws `W_k ~ Beta(alpha dG, alpha (1 - G))`.
struct PathSampler {
    jumps: Vec<Jump>,
}

impl PathSampler {
    fn new(bsp: &BetaStacyProcess) -> Result<Self> {
        let mut jumps = Vec::with_capacity(bsp.len());
        for i in 0..bsp.len() {
            let (a, b) = bsp.jump_shape(i);
            let mass = bsp.base().values()[i] - bsp.base().left_limit_at(i);
            let jump = if mass <= 0.0 {
                Jump::None
            } else if bsp.is_terminal(i) && a > 0.0 {
                Jump::Certain
            } else if a > 0.0 && b > 0.0 {
                Jump::Beta(Beta::new(a, b).map_err(|_| Error::InvalidShape { index: i, a, b })?)
            } else {
                return Err(Error::InvalidShape { index: i, a, b });
            };
            jumps.push(jump);
        }
        Ok(Self { jumps })
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let mut survival = 1.0;
        for (jump, f) in self.jumps.iter().zip(out.iter_mut()) {
            match jump {
                Jump::None => {}
                Jump::Certain => survival = 0.0,
                Jump::Beta(beta) => survival *= 1.0 - beta.sample(rng),
            }
            *f = 1.0 - survival;
        }
    }
}

/// One random CDF path on the grid of `bsp`.
pub fn sample_path(bsp: &BetaStacyProcess, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let sampler = PathSampler::new(bsp)?;
    let mut out = vec![0.0; bsp.len()];
    sampler.sample_into(rng, &mut out);
    Ok(out)
}

const CHUNK: usize = 4096;

#[derive(Clone)]
struct Sums {
    s1: Vec<f64>,
    s2: Vec<f64>,
    s4: Vec<f64>,
}

impl Sums {
    fn zeros(n: usize) -> Self {
        Self {
            s1: vec![0.0; n],
            s2: vec![0.0; n],
            s4: vec![0.0; n],
        }
    }

    fn add_path(&mut self, f: &[f64]) {
        for (k, &x) in f.iter().enumerate() {
            let x2 = x * x;
            self.s1[k] += x;
            self.s2[k] += x2;
            self.s4[k] += x2 * x2;
        }
    }

    fn merge(&mut self, other: &Sums) {
        for k in 0..self.s1.len() {
            self.s1[k] += other.s1[k];
            self.s2[k] += other.s2[k];
            self.s4[k] += other.s4[k];
        }
    }
}

/// Runs `draw` once per path in fixed-size chunks. Each path has its own
/// stream, and chunk sums are combined in order, so results do not depend on
/// the thread count.
fn run_paths(
    grid: &[f64],
    n_paths: usize,
    seed: RngSeed,
    draw: impl Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
) -> PathStats {
    let n = grid.len();
    let chunks = n_paths.div_ceil(CHUNK);
    let partial: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sums = Sums::zeros(n);
            let mut path = vec![0.0; n];
            for p in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
                let mut rng = path_rng(seed, p as u64);
                draw(&mut rng, &mut path);
                sums.add_path(&path);
            }
            sums
        })
        .collect();
    let mut total = Sums::zeros(n);
    for s in &partial {
        total.merge(s);
    }

    let count = n_paths as f64;
    let mut stats = PathStats {
        grid: grid.to_vec(),
        n_paths,
        mean: Vec::with_capacity(n),
        mean_se: Vec::with_capacity(n),
        second: Vec::with_capacity(n),
        second_se: Vec::with_capacity(n),
    };
    for k in 0..n {
        let m1 = total.s1[k] / count;
        let m2 = total.s2[k] / count;
        let m4 = total.s4[k] / count;
        stats.mean.push(m1);
        stats.second.push(m2);
        stats.mean_se.push(((m2 - m1 * m1).max(0.0) / count).sqrt());
        stats
            .second_se
            .push(((m4 - m2 * m2).max(0.0) / count).sqrt());
    }
    stats
}

/// Samples `n_paths` independent paths of `bsp`; path `p` uses stream `p`.
pub fn simulate_bsp_paths(
    bsp: &BetaStacyProcess,
    n_paths: usize,
    seed: RngSeed,
) -> Result<PathStats> {
    let sampler = PathSampler::new(bsp)?;
    Ok(run_paths(bsp.grid(), n_paths, seed, |rng, out| {
        sampler.sample_into(rng, out)
    }))
}

/// Samples independent component paths, carries each forward onto `grid`, and
/// combines them through the block diagram pathwise.
pub fn simulate_structure_paths(
    node: &RbdNode,
    leaves: &BTreeMap<String, BetaStacyProcess>,
    grid: &[f64],
    n_paths: usize,
    seed: RngSeed,
) -> Result<PathStats> {
    let ids = node.component_ids();
    let mut samplers = Vec::with_capacity(ids.len());
    let mut lookup = Vec::with_capacity(ids.len());
    for id in &ids {
        let bsp = leaves
            .get(*id)
            .ok_or_else(|| Error::MissingLeaf(id.to_string()))?;
        samplers.push((PathSampler::new(bsp)?, bsp.len()));
        lookup.push(
            grid.iter()
                .map(|&t| bsp.base().index_at(t))
                .collect::<Vec<Option<usize>>>(),
        );
    }
    let slot: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(k, id)| (*id, k)).collect();

    Ok(run_paths(grid, n_paths, seed, |rng, out| {
        let leaf_paths: Vec<Vec<f64>> = samplers
            .iter()
            .map(|(s, len)| {
                let mut p = vec![0.0; *len];
                s.sample_into(rng, &mut p);
                p
            })
            .collect();
        for (k, f) in out.iter_mut().enumerate() {
            *f = structure_cdf(node, &|id| {
                let j = slot[id];
                lookup[j][k].map_or(0.0, |i| leaf_paths[j][i])
            });
        }
    }))
}

fn structure_cdf(node: &RbdNode, leaf: &dyn Fn(&str) -> f64) -> f64 {
    match node {
        RbdNode::Component { id } => leaf(id),
        RbdNode::Series { children, .. } => {
            1.0 - children
                .iter()
                .map(|c| 1.0 - structure_cdf(c, leaf))
                .product::<f64>()
        }
        RbdNode::Parallel { children, .. } => {
            children.iter().map(|c| structure_cdf(c, leaf)).product()
        }
    }
}
