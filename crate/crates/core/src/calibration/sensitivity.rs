use std::collections::BTreeMap;

use rayon::prelude::*;

use super::error_functional;
use super::workflow::forward_q;
use crate::domain::{ExperimentSetup, ImbibitionDataset, MaterialSpec};
use crate::error::{Error, Result};
use crate::models::{KpModel, KpParams};
use crate::solver::SolverConfig;

/// One-factor-at-a-time sweep: for each named parameter, the error
/// functional over its grid with every other parameter held at `best`.
pub fn oat_sensitivity(
    best: &KpParams,
    data: &ImbibitionDataset,
    material: &MaterialSpec,
    setup: &ExperimentSetup,
    solver: &SolverConfig,
    sweep: &BTreeMap<String, Vec<f64>>,
) -> Result<BTreeMap<String, Vec<(f64, f64)>>> {
    best.validate()?;
    let observed = data.values();
    let mut cfg = solver.clone();
    cfg.dt = None;
    let mut out = BTreeMap::new();
    for (name, grid) in sweep {
        let curve = grid
            .par_iter()
            .map(|&value| {
                let mut params = best.to_params();
                let slot = params
                    .get_mut(name)
                    .ok_or_else(|| Error::validation(format!("unknown kp parameter `{name}`")))?;
                *slot = value;
                let model = KpModel::new(KpParams::from_params(&params)?, setup.mu)?;
                let q = forward_q(&model, data, material, setup, &cfg)?;
                Ok((value, error_functional(&q, &observed)?))
            })
            .collect::<Result<Vec<_>>>()?;
        out.insert(name.clone(), curve);
    }
    Ok(out)
}
