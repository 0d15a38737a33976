//! Water-retention curves from mercury-intrusion porosimetry, and their
//! comparison with a calibrated capillary-pressure model.

use serde::{Deserialize, Serialize};

use crate::domain::MipDataset;
use crate::error::{Error, Result};
use crate::models::KpParams;

/// Pressure conversion MPa → g/(cm·s²).
pub const MPA_TO_CGS: f64 = 1e7;

/// Surface tensions (N/m) and contact angles (degrees) for water and mercury.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceConstants {
    pub t_w: f64,
    pub t_hg: f64,
    pub theta_w: f64,
    pub theta_hg: f64,
}

impl Default for LaplaceConstants {
    fn default() -> Self {
        LaplaceConstants {
            t_w: 0.073,
            t_hg: 0.489,
            theta_w: 0.0,
            theta_hg: 130.0,
        }
    }
}

impl LaplaceConstants {
    /// Dimensionless factor mapping mercury pressure to water suction.
    pub fn factor(&self) -> Result<f64> {
        if !(self.t_w > 0.0 && self.t_hg > 0.0) {
            return Err(Error::validation("surface tensions must be positive"));
        }
        let cos_hg = self.theta_hg.to_radians().cos().abs();
        if cos_hg < 1e-12 {
            return Err(Error::DivisionByZero {
                index: 0,
                context: "mercury contact angle of 90 degrees",
            });
        }
        Ok(self.t_w * self.theta_w.to_radians().cos() / (self.t_hg * cos_hg))
    }
}

/// Water suction equivalent to a mercury pressure (same unit in and out).
pub fn mip_to_suction(p_hg: f64, k: &LaplaceConstants) -> Result<f64> {
    if !(p_hg >= 0.0) {
        return Err(Error::Domain {
            what: "mercury pressure",
            value: p_hg,
            domain: "[0, inf)".into(),
        });
    }
    Ok(k.factor()? * p_hg)
}

/// Saturation left unintruded, `1 - v / v_max`.
pub fn mip_saturation(v: f64, v_max: f64) -> Result<f64> {
    if !(v_max > 0.0) {
        return Err(Error::validation(format!("v_max = {v_max} must be > 0")));
    }
    if !(0.0..=v_max).contains(&v) {
        return Err(Error::Domain {
            what: "intruded volume",
            value: v,
            domain: format!("[0, {v_max}]"),
        });
    }
    Ok(1.0 - v / v_max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionCurve {
    /// (saturation, suction in g/(cm·s²)), increasing in saturation.
    pub points: Vec<(f64, f64)>,
}

pub fn build_retention_curve(data: &MipDataset, k: &LaplaceConstants) -> Result<RetentionCurve> {
    data.validate()?;
    if data.points.is_empty() {
        return Err(Error::validation("porosimetry dataset is empty"));
    }
    let mut points = data
        .points
        .iter()
        .map(|&(p, v)| Ok((mip_saturation(v, data.v_max)?, mip_to_suction(p, k)?)))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(RetentionCurve { points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// Points compared (inside (s_R, s_S] with positive pressures).
    pub compared: usize,
    /// Points skipped: outside the support or with zero pressure.
    pub excluded: usize,
    /// Mean of log10(P_c / P_MIP).
    pub mean_log_ratio: f64,
    pub max_abs_log_ratio: f64,
    /// Share of compared points within one decade.
    pub within_one_decade: f64,
    /// (saturation, log10 ratio) per compared point.
    pub log_ratios: Vec<(f64, f64)>,
}

/// Log-space comparison of a retention curve with `P_c` of `p`.
pub fn retention_compare(curve: &RetentionCurve, p: &KpParams) -> Result<ComparisonReport> {
    p.validate()?;
    if curve.points.is_empty() {
        return Err(Error::validation("retention curve is empty"));
    }
    let mut log_ratios = Vec::new();
    for &(s, p_mip) in &curve.points {
        if s <= p.s_r || s > p.s_s || p_mip <= 0.0 {
            continue;
        }
        let p_model = p.capillary_pressure(s)?;
        if p_model <= 0.0 {
            continue;
        }
        log_ratios.push((s, (p_model / p_mip).log10()));
    }
    if log_ratios.is_empty() {
        return Err(Error::validation(format!(
            "no retention point falls inside (s_R, s_S] = ({}, {}]",
            p.s_r, p.s_s
        )));
    }
    let n = log_ratios.len() as f64;
    let mean = log_ratios.iter().map(|r| r.1).sum::<f64>() / n;
    let max_abs = log_ratios.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    let within = log_ratios.iter().filter(|r| r.1.abs() <= 1.0).count() as f64 / n;
    Ok(ComparisonReport {
        compared: log_ratios.len(),
        excluded: curve.points.len() - log_ratios.len(),
        mean_log_ratio: mean,
        max_abs_log_ratio: max_abs,
        within_one_decade: within,
        log_ratios,
    })
}

/// Least-squares estimate of `c` in log space given the shape parameters.
pub fn fit_capillary_scale(curve: &RetentionCurve, s_r: f64, s_s: f64, alpha: f64) -> Result<f64> {
    let logs: Vec<f64> = curve
        .points
        .iter()
        .filter(|&&(s, p)| s > s_r && s < s_s && p > 0.0)
        .map(|&(s, p)| p.log10() - ((s - s_s).powi(2) / (s - s_r).powf(alpha)).log10())
        .collect();
    if logs.is_empty() {
        return Err(Error::validation(
            "retention curve has no point inside the model support",
        ));
    }
    Ok(10f64.powf(logs.iter().sum::<f64>() / logs.len() as f64))
}
