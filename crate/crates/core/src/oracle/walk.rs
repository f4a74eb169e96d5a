//! Continuous-time random walk whose transition law is `exp(-t L)`.
//!
//! Unit-rate exponential clocks; at each ring the walker moves to the
//! predecessor with probability 1/2 and to each successor with probability
//! `1/(2q)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::tree::{TreeParams, VertexWord};

/// Replicates are split into this many streams regardless of thread count.
pub const STREAMS: u64 = 64;
pub const MIN_REPLICATES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkConfig {
    pub q: u32,
    pub start: VertexWord,
    pub t: f64,
    pub replicates: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkTarget {
    pub vertex: VertexWord,
    pub hits: u64,
    /// Estimate of `H_t(x, y) mu(y)`.
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkReport {
    pub config: WalkConfig,
    pub targets: Vec<WalkTarget>,
    /// Mean of `l(X_t) - l(X_0)`.
    pub drift_mean: f64,
    pub drift_std_error: f64,
    /// Mean number of jumps per walk.
    pub mean_jumps: f64,
}

#[derive(Default)]
struct Tally {
    hits: Vec<u64>,
    drift: i64,
    drift_sq: i64,
    jumps: u64,
}

impl WalkConfig {
    fn validate(&self) -> Result<TreeParams> {
        let p = TreeParams::new(self.q)?;
        if self.replicates < MIN_REPLICATES {
            return Err(invalid(format!(
                "need at least {MIN_REPLICATES} replicates, got {}",
                self.replicates
            )));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(invalid(format!("time must be nonnegative, got {}", self.t)));
        }
        if self.start.word().iter().any(|&d| u32::from(d) >= self.q) {
            return Err(invalid("start vertex has digits out of range"));
        }
        Ok(p)
    }
}

fn run_stream(cfg: &WalkConfig, stream: u64, count: u64, targets: &[VertexWord]) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let q = cfg.q;
    let start = cfg.start.word();
    let mut tally = Tally {
        hits: vec![0; targets.len()],
        ..Tally::default()
    };
    let mut word = Vec::with_capacity(start.len() + 64);
    for _ in 0..count {
        word.clear();
        word.extend_from_slice(start);
        let mut clock: f64 = rng.sample(Exp1);
        while clock <= cfg.t {
            tally.jumps += 1;
            let u = rng.gen_range(0..2 * q);
            if u < q {
                if word.pop().is_none() {
                    return Err(Error::TruncationOverflow {
                        vertex: cfg.start.to_string(),
                        needed: start.len() + 1,
                        available: start.len(),
                    });
                }
            } else {
                word.push((u - q) as u8);
            }
            let dt: f64 = rng.sample(Exp1);
            clock += dt;
        }
        let drift = start.len() as i64 - word.len() as i64;
        tally.drift += drift;
        tally.drift_sq += drift * drift;
        for (h, y) in tally.hits.iter_mut().zip(targets) {
            if y.word() == word.as_slice() {
                *h += 1;
            }
        }
    }
    Ok(tally)
}

/// Monte Carlo estimate of `P(X_t = y) = H_t(x, y) mu(y)` for each target.
///
/// Output is identical for a fixed seed whatever the thread count.
pub fn mc_heat(cfg: &WalkConfig, targets: &[VertexWord]) -> Result<WalkReport> {
    cfg.validate()?;
    for y in targets {
        if y.base_level() != cfg.start.base_level() {
            return Err(Error::MismatchedApex(cfg.start.base_level(), y.base_level()));
        }
    }
    let n = cfg.replicates;
    let tallies: Vec<Tally> = (0..STREAMS)
        .into_par_iter()
        .map(|s| {
            let lo = n * s / STREAMS;
            let hi = n * (s + 1) / STREAMS;
            run_stream(cfg, s, hi - lo, targets)
        })
        .collect::<Result<_>>()?;
    let mut hits = vec![0u64; targets.len()];
    let (mut drift, mut drift_sq, mut jumps) = (0i64, 0i64, 0u64);
    for t in &tallies {
        for (h, x) in hits.iter_mut().zip(&t.hits) {
            *h += x;
        }
        drift += t.drift;
        drift_sq += t.drift_sq;
        jumps += t.jumps;
    }
    let nf = n as f64;
    let targets = targets
        .iter()
        .zip(hits)
        .map(|(y, h)| {
            let est = h as f64 / nf;
            WalkTarget {
                vertex: y.clone(),
                hits: h,
                estimate: est,
                std_error: (est * (1.0 - est) / nf).sqrt(),
            }
        })
        .collect();
    let mean = drift as f64 / nf;
    let var = (drift_sq as f64 / nf - mean * mean).max(0.0);
    Ok(WalkReport {
        config: cfg.clone(),
        targets,
        drift_mean: mean,
        drift_std_error: (var / nf).sqrt(),
        mean_jumps: jumps as f64 / nf,
    })
}

/// The start, its predecessor, a child, a sibling and the grandparent.
pub fn default_targets(start: &VertexWord) -> Result<Vec<VertexWord>> {
    let parent = start.predecessor();
    let grand = start.ancestor(2);
    let (Some(parent), Some(grand)) = (parent, grand) else {
        return Err(invalid("start vertex needs two ancestors"));
    };
    let last = *start.word().last().expect("has a parent");
    let sibling = parent.child(if last == 0 { 1 } else { 0 });
    Ok(vec![start.clone(), parent, start.child(0), sibling, grand])
}
