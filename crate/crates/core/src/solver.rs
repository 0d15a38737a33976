//! Explicit finite-difference solver for `∂_t θ = ∂_zz B(θ / n0)` on a
//! vertical specimen wetted from below.
//!
//! Nodes `j = 0..=N` sit at `z_j = j Δz` with `N = floor(h1 / Δz)`. Node 0 is
//! the immersed face and is held at `n0`; node N is the top face, held at
//! `theta_ext` (Dirichlet) or set from a Robin exchange condition.

use serde::{Deserialize, Serialize};

use crate::domain::{ExperimentSetup, MaterialSpec};
use crate::error::{Error, Result};
use crate::models::AbsorptionModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TopBoundary {
    /// Top face held at the ambient moisture `theta_ext`.
    Dirichlet,
    /// Outward exchange `-∂_z θ = k_w (θ - theta_ext)` with rate `k_w` in 1/cm.
    Robin { k_w: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Grid spacing, cm.
    pub dz: f64,
    /// Time step, s. Derived from the stability bound when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl_safety")]
    pub cfl_safety: f64,
    #[serde(default = "default_top")]
    pub top_bc: TopBoundary,
    /// Times (s) at which full profiles are recorded.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Additional times (s) at which only the absorbed mass is needed.
    #[serde(default)]
    pub q_times: Vec<f64>,
    /// Saturation marking arrival at the top; defaults to the model's s_R.
    #[serde(default)]
    pub breakthrough_threshold: Option<f64>,
}

fn default_cfl_safety() -> f64 {
    0.9
}

fn default_top() -> TopBoundary {
    TopBoundary::Dirichlet
}

impl SolverConfig {
    pub fn new(dz: f64) -> Self {
        SolverConfig {
            dz,
            dt: None,
            cfl_safety: default_cfl_safety(),
            top_bc: TopBoundary::Dirichlet,
            snapshot_times: Vec::new(),
            q_times: Vec::new(),
            breakthrough_threshold: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dz > 0.0 && self.dz.is_finite()) {
            return Err(Error::validation(format!("dz = {} must be > 0", self.dz)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::validation(format!(
                "cfl_safety = {} must lie in (0, 1]",
                self.cfl_safety
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::validation(format!("dt = {dt} must be > 0")));
            }
        }
        if let TopBoundary::Robin { k_w } = self.top_bc {
            if !(k_w > 0.0 && k_w.is_finite()) {
                return Err(Error::validation(format!("Robin rate k_w = {k_w} must be > 0")));
            }
        }
        for &t in self.snapshot_times.iter().chain(&self.q_times) {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::validation(format!("output time {t} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Moisture content on the grid at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationProfile {
    pub t: f64,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub dz: f64,
    pub dt: f64,
    pub n0: f64,
    pub profiles: Vec<SaturationProfile>,
    /// (t in s, Q in g/cm²) at every requested time, increasing in t.
    pub q_curve: Vec<(f64, f64)>,
    /// First step at which the last interior node reached the threshold.
    pub breakthrough_time: Option<f64>,
}

impl SimulationResult {
    /// Absorbed mass at exactly one of the requested output times.
    pub fn q_at(&self, t: f64) -> Option<f64> {
        self.q_curve
            .binary_search_by(|probe| probe.0.total_cmp(&t))
            .ok()
            .map(|i| self.q_curve[i].1)
    }
}

/// Largest stable time step, scaled by `config.cfl_safety`.
pub fn stable_timestep(model: &dyn AbsorptionModel, material: &MaterialSpec, config: &SolverConfig) -> Result<f64> {
    let peak = model.diffusion_coefficient();
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::validation(format!(
            "degenerate absorption model: max B' = {peak}"
        )));
    }
    Ok(config.cfl_safety * material.n0 * config.dz * config.dz / (2.0 * peak))
}

/// Trapezoidal absorbed mass per unit area, g/cm².
pub fn absorbed_mass(profile: &SaturationProfile, dz: f64, rho: f64) -> f64 {
    trapezoid(&profile.theta, dz) * rho
}

fn trapezoid(theta: &[f64], dz: f64) -> f64 {
    match theta {
        [] => 0.0,
        [only] => 0.5 * dz * only,
        [first, inner @ .., last] => 0.5 * dz * (first + 2.0 * inner.iter().sum::<f64>() + last),
    }
}

/// Earliest snapshot at which the last interior node's saturation reaches `threshold`.
pub fn breakthrough_time(result: &SimulationResult, threshold: f64) -> Result<Option<f64>> {
    if result.profiles.is_empty() {
        return Err(Error::validation("simulation result holds no profiles"));
    }
    Ok(result.profiles.iter().find_map(|p| {
        let probe = p.theta[p.theta.len().saturating_sub(2)];
        (probe / result.n0 >= threshold).then_some(p.t)
    }))
}

/// Top-face rule for a [`Stepper`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopCondition {
    /// Keep the initial top value.
    Fixed,
    Robin {
        k_w: f64,
        theta_ext: f64,
    },
}

/// Explicit forward-time centred-space integrator on a fixed grid.
///
/// Node 0 keeps its initial value; the top node follows [`TopCondition`].
pub struct Stepper<'m> {
    model: &'m dyn AbsorptionModel,
    n0: f64,
    dz: f64,
    top: TopCondition,
    theta: Vec<f64>,
    b: Vec<f64>,
    steps: u64,
}

impl<'m> Stepper<'m> {
    pub fn new(model: &'m dyn AbsorptionModel, n0: f64, dz: f64, initial: Vec<f64>, top: TopCondition) -> Result<Self> {
        if initial.len() < 3 {
            return Err(Error::validation(format!(
                "grid needs at least 3 nodes, got {}",
                initial.len()
            )));
        }
        let n = initial.len();
        let mut s = Stepper {
            model,
            n0,
            dz,
            top,
            theta: initial,
            b: vec![0.0; n],
            steps: 0,
        };
        s.apply_top();
        Ok(s)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn apply_top(&mut self) {
        if let TopCondition::Robin { k_w, theta_ext } = self.top {
            let n = self.theta.len() - 1;
            let a = k_w * self.dz;
            self.theta[n] = (self.theta[n - 1] + a * theta_ext) / (1.0 + a);
        }
    }

    /// Advances by `dt` seconds.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let inv_n0 = 1.0 / self.n0;
        for (b, &th) in self.b.iter_mut().zip(&self.theta) {
            *b = self.model.b(th * inv_n0);
        }
        let r = dt / (self.dz * self.dz);
        let n = self.theta.len() - 1;
        let mut check = 0.0;
        for j in 1..n {
            let next = self.theta[j] + r * (self.b[j + 1] - 2.0 * self.b[j] + self.b[j - 1]);
            self.theta[j] = next;
            check += next;
        }
        self.steps += 1;
        if !check.is_finite() {
            return Err(Error::NonFinite { step: self.steps });
        }
        self.apply_top();
        Ok(())
    }
}

/// Runs the imbibition test from a dry specimen up to `setup.tf`.
pub fn simulate(
    model: &dyn AbsorptionModel,
    material: &MaterialSpec,
    setup: &ExperimentSetup,
    config: &SolverConfig,
) -> Result<SimulationResult> {
    material.validate()?;
    setup.validate(material)?;
    config.validate()?;
    if config.dz > setup.h1 {
        return Err(Error::validation(format!(
            "dz = {} exceeds the specimen height {}",
            config.dz, setup.h1
        )));
    }
    let bound = stable_timestep(model, material, config)?;
    let dt = match config.dt {
        Some(dt) if dt > bound * (1.0 + 1e-12) => return Err(Error::Cfl { dt, bound }),
        Some(dt) => dt,
        None => bound,
    };
    let tf = setup.tf;
    for &t in config.snapshot_times.iter().chain(&config.q_times) {
        if t > tf {
            return Err(Error::validation(format!(
                "output time {t} s lies beyond the final time {tf} s"
            )));
        }
    }

    let n = (setup.h1 / config.dz + 1e-9).floor() as usize;
    if n < 2 {
        return Err(Error::validation(format!(
            "dz = {} leaves no interior node on a {} cm specimen",
            config.dz, setup.h1
        )));
    }
    let n0 = material.n0;
    let mut initial = vec![0.0; n + 1];
    initial[0] = n0;
    initial[n] = setup.theta_ext;
    let top = match config.top_bc {
        TopBoundary::Dirichlet => TopCondition::Fixed,
        TopBoundary::Robin { k_w } => TopCondition::Robin {
            k_w,
            theta_ext: setup.theta_ext,
        },
    };
    let mut stepper = Stepper::new(model, n0, config.dz, initial, top)?;

    let mut snapshots = sorted_unique(config.snapshot_times.clone());
    let mut q_times = sorted_unique(config.snapshot_times.iter().chain(&config.q_times).copied().collect());
    snapshots.reverse();
    q_times.reverse();

    let threshold = config.breakthrough_threshold.unwrap_or(model.residual_saturation()) * n0;
    let probe = n - 1;
    let rho = setup.rho;

    let mut profiles = Vec::with_capacity(snapshots.len());
    let mut q_curve = Vec::with_capacity(q_times.len());
    let mut breakthrough = None;

    let mut t = 0.0;
    record_exact(
        &mut snapshots,
        &mut q_times,
        &mut profiles,
        &mut q_curve,
        t,
        stepper.theta(),
        config.dz,
        rho,
    );

    let total_steps = (tf / dt - 1e-9).ceil().max(1.0) as u64;
    for k in 1..=total_steps {
        let t_next = if k == total_steps { tf } else { (k as f64 * dt).min(tf) };
        let h = t_next - t;
        if h <= 0.0 {
            continue;
        }
        let due = q_times.last().is_some_and(|&tr| tr <= t_next);
        let before = due.then(|| stepper.theta().to_vec());
        stepper.step(h)?;

        if breakthrough.is_none() && stepper.theta()[probe] >= threshold {
            breakthrough = Some(t_next);
        }
        if let Some(before) = before {
            let after = stepper.theta();
            let q_before = trapezoid(&before, config.dz) * rho;
            let q_after = trapezoid(after, config.dz) * rho;
            while let Some(&tr) = q_times.last() {
                if tr > t_next {
                    break;
                }
                q_times.pop();
                let w = ((tr - t) / h).clamp(0.0, 1.0);
                q_curve.push((tr, q_before + w * (q_after - q_before)));
                if snapshots.last() == Some(&tr) {
                    snapshots.pop();
                    let theta = before.iter().zip(after).map(|(a, b)| a + w * (b - a)).collect();
                    profiles.push(SaturationProfile { t: tr, theta });
                }
            }
        }
        t = t_next;
    }

    Ok(SimulationResult {
        dz: config.dz,
        dt,
        n0,
        profiles,
        q_curve,
        breakthrough_time: breakthrough,
    })
}

#[allow(clippy::too_many_arguments)]
fn record_exact(
    snapshots: &mut Vec<f64>,
    q_times: &mut Vec<f64>,
    profiles: &mut Vec<SaturationProfile>,
    q_curve: &mut Vec<(f64, f64)>,
    t: f64,
    theta: &[f64],
    dz: f64,
    rho: f64,
) {
    while q_times.last() == Some(&t) {
        q_times.pop();
        q_curve.push((t, trapezoid(theta, dz) * rho));
    }
    while snapshots.last() == Some(&t) {
        snapshots.pop();
        profiles.push(SaturationProfile {
            t,
            theta: theta.to_vec(),
        });
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CubicModel, CubicParams, KpModel, KpParams};
    use approx::assert_relative_eq;

    fn small_setup() -> ExperimentSetup {
        ExperimentSetup {
            h1: 1.0,
            h2: 0.0,
            rho: 1.0,
            mu: 8.9e-3,
            tf: 60.0,
            theta_ext: 0.0,
            temperature: None,
            relative_humidity: None,
        }
    }

    fn cubic(d: f64) -> CubicModel {
        CubicModel::new(CubicParams::new(0.3, 0.95, d).unwrap()).unwrap()
    }

    #[test]
    fn stable_timestep_hand_value() {
        let m = cubic(1.95e-2);
        let mat = MaterialSpec::ghiara();
        let mut cfg = SolverConfig::new(2.5e-2);
        cfg.cfl_safety = 1.0;
        let dt = stable_timestep(&m, &mat, &cfg).unwrap();
        assert_relative_eq!(dt, 0.466 * 6.25e-4 / (2.0 * 1.95e-2), max_relative = 1e-14);
        assert_relative_eq!(dt, 7.47e-3, max_relative = 1e-3);
        cfg.dz /= 2.0;
        assert_relative_eq!(stable_timestep(&m, &mat, &cfg).unwrap(), dt / 4.0, max_relative = 1e-14);
        cfg.dz *= 2.0;
        assert_relative_eq!(
            stable_timestep(&cubic(3.9e-2), &mat, &cfg).unwrap(),
            dt / 2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn absorbed_mass_examples() {
        let p = SaturationProfile {
            t: 0.0,
            theta: vec![0.0; 11],
        };
        assert_eq!(absorbed_mass(&p, 0.5, 1.0), 0.0);
        let p = SaturationProfile {
            t: 0.0,
            theta: vec![0.466; 201],
        };
        assert_relative_eq!(absorbed_mass(&p, 5.0 / 200.0, 1.0), 2.33, max_relative = 1e-12);
        let p = SaturationProfile {
            t: 0.0,
            theta: vec![1.0, 0.0, 1.0],
        };
        assert_eq!(absorbed_mass(&p, 1.0, 1.0), 1.0);
    }

    #[test]
    fn rejects_unstable_dt() {
        let m = cubic(1e-2);
        let mat = MaterialSpec::ghiara();
        let mut cfg = SolverConfig::new(0.05);
        cfg.dt = Some(1.0);
        match simulate(&m, &mat, &small_setup(), &cfg) {
            Err(Error::Cfl { dt, bound }) => {
                assert_eq!(dt, 1.0);
                assert!(bound < 1.0);
            }
            other => panic!("expected CFL refusal, got {other:?}"),
        }
    }

    #[test]
    fn rejects_late_snapshot_and_coarse_grid() {
        let m = cubic(1e-2);
        let mat = MaterialSpec::ghiara();
        let mut cfg = SolverConfig::new(0.05);
        cfg.snapshot_times = vec![61.0];
        assert!(simulate(&m, &mat, &small_setup(), &cfg).is_err());
        let cfg = SolverConfig::new(0.6);
        assert!(simulate(&m, &mat, &small_setup(), &cfg).is_err());
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let m = cubic(1e-2);
        let n0 = 0.4;
        let init = vec![n0; 21];
        let mut st = Stepper::new(&m, n0, 0.05, init.clone(), TopCondition::Fixed).unwrap();
        for _ in 0..1000 {
            st.step(0.05).unwrap();
        }
        assert_eq!(st.theta(), &init[..]);
    }

    #[test]
    fn outputs_land_on_requested_times() {
        let m = cubic(2e-2);
        let mat = MaterialSpec::ghiara();
        let mut cfg = SolverConfig::new(0.05);
        cfg.snapshot_times = vec![0.0, 30.0, 60.0];
        cfg.q_times = vec![10.0, 30.0, 45.5];
        let r = simulate(&m, &mat, &small_setup(), &cfg).unwrap();
        let times: Vec<f64> = r.q_curve.iter().map(|q| q.0).collect();
        assert_eq!(times, vec![0.0, 10.0, 30.0, 45.5, 60.0]);
        assert_eq!(r.profiles.len(), 3);
        assert_eq!(r.profiles[2].t, 60.0);
        for p in &r.profiles {
            assert_relative_eq!(absorbed_mass(p, r.dz, 1.0), r.q_at(p.t).unwrap(), max_relative = 1e-12);
        }
        assert!(r.q_curve.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn breakthrough_thresholds() {
        let m = cubic(5e-2);
        let mat = MaterialSpec::ghiara();
        let mut cfg = SolverConfig::new(0.05);
        cfg.snapshot_times = (0..=12).map(|i| i as f64 * 5.0).collect();
        let r = simulate(&m, &mat, &small_setup(), &cfg).unwrap();
        assert_eq!(breakthrough_time(&r, 0.0).unwrap(), Some(0.0));
        assert_eq!(breakthrough_time(&r, 1.1).unwrap(), None);
        let empty = SimulationResult { profiles: vec![], ..r };
        assert!(breakthrough_time(&empty, 0.5).is_err());
    }

    #[test]
    fn robin_top_stays_between_neighbour_and_ambient() {
        let m = KpModel::new(KpParams::new(0.2, 0.95, 0.25, 1e6, 1e-9, 1.6).unwrap(), 8.9e-3).unwrap();
        let mat = MaterialSpec::ghiara();
        let mut cfg = SolverConfig::new(0.05);
        cfg.top_bc = TopBoundary::Robin { k_w: 5.0 };
        cfg.snapshot_times = vec![60.0];
        let mut setup = small_setup();
        setup.theta_ext = 0.01;
        let r = simulate(&m, &mat, &setup, &cfg).unwrap();
        let th = &r.profiles[0].theta;
        let n = th.len() - 1;
        let lo = th[n - 1].min(0.01);
        let hi = th[n - 1].max(0.01);
        assert!(th[n] >= lo && th[n] <= hi);
    }
}
