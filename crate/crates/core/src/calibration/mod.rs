//! Inverse problem: fit absorption-function parameters to measured uptake.

mod annealer;
mod bounds;
mod sensitivity;
mod workflow;

pub use annealer::{simulated_annealing, AnnealOutcome, AnnealerConfig};
pub use bounds::{Interval, LowerLink, ParameterBounds};
pub use sensitivity::oat_sensitivity;
pub use workflow::{
    calibrate_cubic, calibrate_kp, default_cubic_bounds, default_kp_bounds, forward_q, kp_initial_point, resolve_split,
    CalibrationResult, KpFit, KpStepOptions, ProductSplit,
};

use crate::error::{Error, Result};

/// Mean relative squared misfit `(1/N) Σ ((q_num - q_data) / q_num)²`.
pub fn error_functional(q_num: &[f64], q_data: &[f64]) -> Result<f64> {
    if q_num.len() != q_data.len() {
        return Err(Error::validation(format!(
            "length mismatch: {} simulated vs {} measured values",
            q_num.len(),
            q_data.len()
        )));
    }
    if q_num.is_empty() {
        return Err(Error::validation("error functional needs at least one sample"));
    }
    let mut acc = 0.0;
    for (i, (&num, &obs)) in q_num.iter().zip(q_data).enumerate() {
        if num == 0.0 {
            return Err(Error::DivisionByZero {
                index: i,
                context: "simulated absorbed mass",
            });
        }
        let r = (num - obs) / num;
        acc += r * r;
    }
    Ok(acc / q_num.len() as f64)
}
