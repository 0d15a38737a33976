//! Simulated annealing over a bounded box.
//!
//! Metropolis acceptance `exp(-ΔE/T)` with geometric cooling. Proposals are
//! Gaussian with a per-parameter scale proportional to the bound width; the
//! scale adapts to the acceptance rate at each temperature level so the
//! chain turns into a local search as the temperature drops. Half of the
//! proposals, once enough points have been accepted, are difference moves
//! `x + g (a - b)` between two archived accepted points, which follow the
//! orientation of narrow curved valleys that axis-aligned steps cross badly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::bounds::ParameterBounds;
use crate::error::{Error, Result};

const ARCHIVE: usize = 50;
const MIN_ARCHIVE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealerConfig {
    /// Starting temperature; the initial objective value when absent.
    pub initial_temperature: Option<f64>,
    pub cooling_factor: f64,
    pub iterations_per_temperature: usize,
    pub max_evaluations: usize,
    /// Initial proposal standard deviation as a fraction of each bound width.
    pub neighbor_scale: f64,
    /// Floor for the adapted proposal scale.
    pub min_neighbor_scale: f64,
    pub rng_seed: u64,
    /// Independent chains; each gets `max_evaluations`.
    pub restarts: usize,
}

impl Default for AnnealerConfig {
    fn default() -> Self {
        AnnealerConfig {
            initial_temperature: None,
            cooling_factor: 0.95,
            iterations_per_temperature: 50,
            max_evaluations: 2000,
            neighbor_scale: 0.1,
            min_neighbor_scale: 1e-6,
            rng_seed: 0,
            restarts: 1,
        }
    }
}

impl AnnealerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_temperature.is_none_or(|t| t > 0.0)
            && self.cooling_factor > 0.0
            && self.cooling_factor < 1.0
            && self.iterations_per_temperature > 0
            && self.max_evaluations > 0
            && self.restarts > 0
            && self.neighbor_scale > 0.0
            && self.min_neighbor_scale > 0.0
            && self.min_neighbor_scale <= self.neighbor_scale;
        if ok {
            Ok(())
        } else {
            Err(Error::validation(format!("invalid annealer settings: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealOutcome {
    pub best: Vec<f64>,
    pub error: f64,
    pub evaluations: usize,
    /// (evaluation index, objective value) for every evaluation, in order.
    pub trace: Vec<(usize, f64)>,
}

/// Minimizes `objective` inside `bounds`, starting from `start` (or the box
/// centre). Non-finite objective values mark infeasible points.
///
/// With `restarts > 1` independent chains run one after another with seeds
/// `rng_seed, rng_seed + 1, ...`; the lowest error wins (first chain on ties)
/// and the traces are concatenated.
pub fn simulated_annealing<F>(
    mut objective: F,
    bounds: &ParameterBounds,
    start: Option<&[f64]>,
    config: &AnnealerConfig,
) -> Result<AnnealOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    bounds.validate()?;
    config.validate()?;
    let mut trace = Vec::with_capacity(config.max_evaluations * config.restarts);
    let mut winner: Option<(Vec<f64>, f64)> = None;
    for k in 0..config.restarts {
        let seed = config.rng_seed.wrapping_add(k as u64);
        let (x, e) = run_chain(&mut objective, bounds, start, config, seed, &mut trace)?;
        if winner.as_ref().is_none_or(|w| e < w.1) {
            winner = Some((x, e));
        }
    }
    let (best, error) = winner.expect("at least one chain");
    Ok(AnnealOutcome {
        best,
        error,
        evaluations: trace.len(),
        trace,
    })
}

fn run_chain<F>(
    objective: &mut F,
    bounds: &ParameterBounds,
    start: Option<&[f64]>,
    config: &AnnealerConfig,
    seed: u64,
    trace: &mut Vec<(usize, f64)>,
) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = bounds.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = trace.len();
    let mut eval = |x: &[f64], trace: &mut Vec<(usize, f64)>| {
        let e = objective(x);
        let e = if e.is_finite() { e } else { f64::INFINITY };
        trace.push((trace.len(), e));
        e
    };

    let mut current = match start {
        Some(s) if s.len() == dim => s.to_vec(),
        Some(s) => {
            return Err(Error::validation(format!(
                "start point has {} entries, bounds have {dim}",
                s.len()
            )))
        }
        None => bounds.center(),
    };
    bounds.repair(&mut current);
    let mut current_e = eval(&current, trace);
    while !current_e.is_finite() {
        if trace.len() - offset >= config.max_evaluations {
            return Err(Error::Optimizer(format!(
                "objective was never finite in {} evaluations",
                trace.len() - offset
            )));
        }
        for (i, v) in current.iter_mut().enumerate() {
            let iv = &bounds.intervals[i];
            *v = rng.random_range(iv.lower..=iv.upper);
        }
        bounds.repair(&mut current);
        current_e = eval(&current, trace);
    }

    let mut best = current.clone();
    let mut best_e = current_e;
    let t0 = config.initial_temperature.unwrap_or(current_e);
    let mut temperature = t0;
    let mut scale = config.neighbor_scale;
    let mut candidate = vec![0.0; dim];
    let mut archive: Vec<Vec<f64>> = Vec::with_capacity(ARCHIVE);
    let mut slot = 0usize;
    let jump = 2.38 / (2.0 * dim as f64).sqrt();

    while best_e > 0.0 && trace.len() - offset < config.max_evaluations {
        let mut accepted = 0usize;
        let mut tried = 0usize;
        for _ in 0..config.iterations_per_temperature {
            if trace.len() - offset >= config.max_evaluations {
                break;
            }
            if archive.len() >= MIN_ARCHIVE && rng.random::<f64>() < 0.5 {
                let a = rng.random_range(0..archive.len());
                let mut b = rng.random_range(0..archive.len() - 1);
                if b >= a {
                    b += 1;
                }
                let g = if rng.random::<f64>() < 0.1 { 1.0 } else { jump };
                for (i, c) in candidate.iter_mut().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    *c = current[i] + g * (archive[a][i] - archive[b][i]) + 1e-3 * z * scale * bounds.width(i);
                }
            } else {
                for (i, c) in candidate.iter_mut().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    *c = current[i] + z * scale * bounds.width(i);
                }
            }
            bounds.repair(&mut candidate);
            let e = eval(&candidate, trace);
            tried += 1;
            let delta = e - current_e;
            let accept = if delta <= 0.0 {
                true
            } else if temperature > 0.0 && e.is_finite() {
                rng.random::<f64>() < (-delta / temperature).exp()
            } else {
                false
            };
            if accept {
                accepted += 1;
                current.copy_from_slice(&candidate);
                current_e = e;
                if archive.len() < ARCHIVE {
                    archive.push(candidate.clone());
                } else {
                    archive[slot].copy_from_slice(&candidate);
                    slot = (slot + 1) % ARCHIVE;
                }
                if e < best_e {
                    best_e = e;
                    best.copy_from_slice(&candidate);
                }
            }
        }
        if tried > 0 {
            let rate = accepted as f64 / tried as f64;
            if rate > 0.5 {
                scale = (scale * 1.5).min(config.neighbor_scale);
            } else if rate < 0.2 {
                scale = (scale * 0.6).max(config.min_neighbor_scale);
            }
        }
        temperature *= config.cooling_factor;
        // restart from the best point once the chain has cooled off
        if temperature < 1e-3 * t0 && current_e > best_e {
            current.copy_from_slice(&best);
            current_e = best_e;
        }
    }

    Ok((best, best_e))
}
