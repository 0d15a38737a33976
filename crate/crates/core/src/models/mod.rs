//! Absorption functions B(s) and their derivatives.
//!
//! Each family implements [`AbsorptionModel`]; a [`ModelRegistry`] maps
//! family names to builders so the solver, the calibration and the CLI can
//! pick one at runtime.

mod cubic;
mod kp;
mod registry;

use std::collections::BTreeMap;
use std::fmt;

pub use cubic::{CubicModel, CubicParams};
pub use kp::{KpModel, KpParams};
pub use registry::{CubicFamily, KpFamily, ModelFamily, ModelRegistry};

/// Named scalar parameters, as read from a manifest or produced by a fit.
pub type ParamSet = BTreeMap<String, f64>;

/// A saturation-dependent absorption function.
///
/// `b` is the potential whose Laplacian drives the moisture content; `b_prime`
/// acts as the diffusivity. Both are in cm²/s.
pub trait AbsorptionModel: fmt::Debug + Send + Sync {
    /// Registry name of the family.
    fn family(&self) -> &'static str;

    fn b(&self, s: f64) -> f64;

    fn b_prime(&self, s: f64) -> f64;

    /// Maximum of `b_prime` over the support; sets the stable time step.
    fn diffusion_coefficient(&self) -> f64;

    fn residual_saturation(&self) -> f64;

    fn max_saturation(&self) -> f64;

    fn parameters(&self) -> ParamSet;
}

pub(crate) fn take(params: &ParamSet, key: &str) -> crate::Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| crate::Error::validation(format!("missing model parameter `{key}`")))
}

pub(crate) fn check_saturation_window(s_r: f64, s_s: f64) -> crate::Result<()> {
    if !(0.0 <= s_r && s_r < s_s && s_s <= 1.0) {
        return Err(crate::Error::validation(format!(
            "saturations must satisfy 0 <= s_R < s_S <= 1 (got s_R = {s_r}, s_S = {s_s})"
        )));
    }
    Ok(())
}
