//! Two-step fit: the cubic family first, then the kP family warm-started
//! from it.

use serde::{Deserialize, Serialize};

use super::annealer::{simulated_annealing, AnnealerConfig};
use super::bounds::{Interval, LowerLink, ParameterBounds};
use super::error_functional;
use crate::domain::{ExperimentSetup, ImbibitionDataset, MaterialSpec};
use crate::error::{Error, Result};
use crate::models::{AbsorptionModel, CubicModel, CubicParams, KpModel, KpParams};
use crate::retention::{fit_capillary_scale, RetentionCurve};
use crate::solver::{simulate, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult<P> {
    pub params: P,
    pub error: f64,
    pub evaluations: usize,
    pub trace: Vec<(usize, f64)>,
}

/// Fitted kP parameters. Imbibition data fixes only `K_s · c`; the split
/// is present when a permeability or a retention curve was supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpFit {
    pub s_r: f64,
    pub s_s: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub conductance_product: f64,
    pub k_s: Option<f64>,
    pub c: Option<f64>,
}

impl KpFit {
    /// Full parameter set when the split is resolved.
    pub fn params(&self) -> Option<KpParams> {
        Some(KpParams {
            s_r: self.s_r,
            s_s: self.s_s,
            alpha: self.alpha,
            c: self.c?,
            k_s: self.k_s?,
            gamma: self.gamma,
        })
    }

    /// Parameters with the product carried entirely by `K_s` (c = 1).
    /// Gives the same B as any valid split.
    pub fn representative(&self) -> KpParams {
        KpParams {
            s_r: self.s_r,
            s_s: self.s_s,
            alpha: self.alpha,
            c: 1.0,
            k_s: self.conductance_product,
            gamma: self.gamma,
        }
    }
}

/// How to separate `K_s` and `c` after the fit.
#[derive(Debug, Clone, PartialEq)]
pub enum ProductSplit {
    Unresolved,
    /// Measured permeability at saturation, cm².
    KnownPermeability(f64),
    /// Fit `c` to a retention curve derived from porosimetry.
    Retention(RetentionCurve),
}

/// Absorbed mass predicted by `model` at the dataset times.
pub fn forward_q(
    model: &dyn AbsorptionModel,
    data: &ImbibitionDataset,
    material: &MaterialSpec,
    setup: &ExperimentSetup,
    solver: &SolverConfig,
) -> Result<Vec<f64>> {
    let mut cfg = solver.clone();
    cfg.q_times = data.times();
    cfg.snapshot_times.clear();
    let r = simulate(model, material, setup, &cfg)?;
    data.times()
        .iter()
        .map(|&t| {
            r.q_at(t)
                .ok_or_else(|| Error::validation(format!("no absorbed mass at t = {t}")))
        })
        .collect()
}

fn objective_for(
    model: Result<impl AbsorptionModel>,
    data: &ImbibitionDataset,
    material: &MaterialSpec,
    setup: &ExperimentSetup,
    solver: &SolverConfig,
) -> f64 {
    let Ok(model) = model else {
        return f64::INFINITY;
    };
    forward_q(&model, data, material, setup, solver)
        .and_then(|q| error_functional(&q, &data.values()))
        .unwrap_or(f64::INFINITY)
}

fn interval(name: &str, lower: f64, upper: f64) -> Interval {
    Interval {
        name: name.into(),
        lower,
        upper,
    }
}

/// Search box for the cubic family over `[s_r, s_s, log10 d]`.
pub fn default_cubic_bounds() -> ParameterBounds {
    ParameterBounds {
        intervals: vec![
            interval("s_r", 0.05, 0.95),
            interval("s_s", 0.06, 1.0),
            interval("log10_d", -5.0, 0.0),
        ],
        links: vec![LowerLink {
            param: 1,
            anchor: 0,
            offset: 0.01,
        }],
    }
}

/// Search box for the kP family over `[s_r, s_s, alpha, gamma, log10(K_s c)]`.
pub fn default_kp_bounds() -> ParameterBounds {
    ParameterBounds {
        intervals: vec![
            interval("s_r", 0.05, 0.95),
            interval("s_s", 0.06, 1.0),
            interval("alpha", 0.05, 0.95),
            interval("gamma", 1.06, 5.0),
            interval("log10_c_product", -7.0, -1.0),
        ],
        links: vec![
            LowerLink {
                param: 1,
                anchor: 0,
                offset: 0.01,
            },
            LowerLink {
                param: 3,
                anchor: 2,
                offset: 1.01,
            },
        ],
    }
}

fn cubic_from(x: &[f64]) -> Result<CubicParams> {
    CubicParams::new(x[0], x[1], 10f64.powf(x[2]))
}

fn kp_shape_from(x: &[f64]) -> Result<KpParams> {
    KpParams::new(x[0], x[1], x[2], 1.0, 10f64.powf(x[4]), x[3])
}

/// Step 1: fit `{s_R, s_S, D}` of the cubic family.
pub fn calibrate_cubic(
    data: &ImbibitionDataset,
    material: &MaterialSpec,
    setup: &ExperimentSetup,
    solver: &SolverConfig,
    bounds: &ParameterBounds,
    annealer: &AnnealerConfig,
) -> Result<CalibrationResult<CubicParams>> {
    data.validate()?;
    setup.validate(material)?;
    if bounds.dim() != 3 {
        return Err(Error::validation("cubic bounds need [s_r, s_s, log10_d]"));
    }
    let mut cfg = solver.clone();
    cfg.dt = None;
    let out = simulated_annealing(
        |x| objective_for(cubic_from(x).and_then(CubicModel::new), data, material, setup, &cfg),
        bounds,
        None,
        annealer,
    )?;
    Ok(CalibrationResult {
        params: cubic_from(&out.best)?,
        error: out.error,
        evaluations: out.evaluations,
        trace: out.trace,
    })
}

/// Options for the kP step.
#[derive(Debug, Clone, PartialEq)]
pub struct KpStepOptions {
    /// Half-width of the window s_R and s_S may move in around the warm start.
    pub saturation_window: f64,
    /// Starting exponent.
    pub alpha0: f64,
    /// Starting `gamma - alpha`.
    pub gamma_gap0: f64,
    /// Reject candidates whose peak diffusivity is more than this factor
    /// away from the warm-start D.
    pub peak_ratio_limit: f64,
    pub split: ProductSplit,
}

impl Default for KpStepOptions {
    fn default() -> Self {
        KpStepOptions {
            saturation_window: 0.05,
            alpha0: 0.25,
            gamma_gap0: 1.5,
            peak_ratio_limit: 10.0,
            split: ProductSplit::Unresolved,
        }
    }
}

/// Starting point of the kP search derived from a cubic fit: same
/// saturations, and `K_s c` chosen so the peak diffusivity equals `D`.
pub fn kp_initial_point(warm: &CubicParams, options: &KpStepOptions, mu: f64) -> Result<Vec<f64>> {
    let probe = KpParams::new(
        warm.s_r,
        warm.s_s,
        options.alpha0,
        1.0,
        1.0,
        options.alpha0 + options.gamma_gap0,
    )?;
    let peak_per_product = probe.diffusion_coefficient(mu);
    Ok(vec![
        warm.s_r,
        warm.s_s,
        options.alpha0,
        options.alpha0 + options.gamma_gap0,
        (warm.d / peak_per_product).log10(),
    ])
}

/// Step 2: fit the kP family starting from the cubic result.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_kp(
    data: &ImbibitionDataset,
    material: &MaterialSpec,
    setup: &ExperimentSetup,
    solver: &SolverConfig,
    bounds: &ParameterBounds,
    annealer: &AnnealerConfig,
    warm_start: &CubicParams,
    options: &KpStepOptions,
) -> Result<CalibrationResult<KpFit>> {
    data.validate()?;
    setup.validate(material)?;
    warm_start.validate()?;
    if bounds.dim() != 5 {
        return Err(Error::validation(
            "kp bounds need [s_r, s_s, alpha, gamma, log10_c_product]",
        ));
    }
    let w = options.saturation_window;
    let mut bounds = bounds.clone();
    bounds.restrict("s_r", warm_start.s_r - w, warm_start.s_r + w)?;
    bounds.restrict("s_s", warm_start.s_s - w, warm_start.s_s + w)?;

    let mut start = kp_initial_point(warm_start, options, setup.mu)?;
    bounds.repair(&mut start);

    let mut cfg = solver.clone();
    cfg.dt = None;
    let (lo, hi) = (
        warm_start.d / options.peak_ratio_limit,
        warm_start.d * options.peak_ratio_limit,
    );
    let out = simulated_annealing(
        |x| {
            let model = kp_shape_from(x).and_then(|p| KpModel::new(p, setup.mu));
            if let Ok(m) = &model {
                let peak = m.diffusion_coefficient();
                if peak < lo || peak > hi {
                    return f64::INFINITY;
                }
            }
            objective_for(model, data, material, setup, &cfg)
        },
        &bounds,
        Some(&start),
        annealer,
    )?;

    let x = &out.best;
    let mut fit = KpFit {
        s_r: x[0],
        s_s: x[1],
        alpha: x[2],
        gamma: x[3],
        conductance_product: 10f64.powf(x[4]),
        k_s: None,
        c: None,
    };
    resolve_split(&mut fit, &options.split)?;
    Ok(CalibrationResult {
        params: fit,
        error: out.error,
        evaluations: out.evaluations,
        trace: out.trace,
    })
}

/// Fills `k_s` and `c` in `fit` according to `split`.
pub fn resolve_split(fit: &mut KpFit, split: &ProductSplit) -> Result<()> {
    match split {
        ProductSplit::Unresolved => {}
        ProductSplit::KnownPermeability(k_s) => {
            if !(*k_s > 0.0) {
                return Err(Error::validation(format!("K_s = {k_s} must be > 0")));
            }
            fit.k_s = Some(*k_s);
            fit.c = Some(fit.conductance_product / k_s);
        }
        ProductSplit::Retention(curve) => {
            let c = fit_capillary_scale(curve, fit.s_r, fit.s_s, fit.alpha)?;
            fit.c = Some(c);
            fit.k_s = Some(fit.conductance_product / c);
        }
    }
    Ok(())
}
