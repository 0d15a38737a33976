//! Core value types shared by the solver, the calibration and the I/O layer.
//!
//! Units are CGS throughout: lengths in cm, masses in g, times in s, and
//! pressures in g/(cm·s²) (= 0.1 Pa). Conversion happens at ingestion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Porous medium description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub name: String,
    /// Open porosity, volume fraction in (0, 1).
    pub n0: f64,
    /// Tortuosity factor (informational).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl MaterialSpec {
    pub fn new(name: impl Into<String>, n0: f64, tau: Option<f64>) -> Result<Self> {
        let m = MaterialSpec {
            name: name.into(),
            n0,
            tau,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n0 > 0.0 && self.n0 < 1.0) {
            return Err(Error::validation(format!(
                "material `{}`: porosity n0 = {} must lie in (0, 1)",
                self.name, self.n0
            )));
        }
        if let Some(tau) = self.tau {
            if !(tau >= 1.0) {
                return Err(Error::validation(format!(
                    "material `{}`: tortuosity {tau} must be >= 1",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Lime mortar with ghiara aggregate.
    pub fn ghiara() -> Self {
        MaterialSpec {
            name: "ghiara".into(),
            n0: 0.466,
            tau: Some(9.9),
        }
    }

    /// Lime mortar with azolo aggregate.
    pub fn azolo() -> Self {
        MaterialSpec {
            name: "azolo".into(),
            n0: 0.385,
            tau: Some(7.6),
        }
    }
}

/// Geometry, liquid properties and ambient conditions of an imbibition test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSetup {
    /// Specimen height, cm.
    pub h1: f64,
    /// Immersed height, cm. Kept as metadata; the 1-D model saturates node 0 only.
    pub h2: f64,
    /// Liquid density, g/cm³.
    pub rho: f64,
    /// Liquid viscosity, Poise.
    pub mu: f64,
    /// Final observation time, s.
    pub tf: f64,
    /// Moisture volume fraction imposed at the top face.
    pub theta_ext: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_humidity: Option<f64>,
}

impl ExperimentSetup {
    /// Reference setup: 5 cm specimen, water at 25 °C, 90 min test.
    pub fn reference() -> Self {
        ExperimentSetup {
            h1: 5.0,
            h2: 2.5e-2,
            rho: 1.0,
            mu: 8.9e-3,
            tf: 5400.0,
            theta_ext: 2.1e-3,
            temperature: Some(25.0),
            relative_humidity: Some(0.9),
        }
    }

    pub fn validate(&self, material: &MaterialSpec) -> Result<()> {
        let ok =
            self.h1 > 0.0 && self.h2 >= 0.0 && self.h2 < self.h1 && self.rho > 0.0 && self.mu > 0.0 && self.tf > 0.0;
        if !ok {
            return Err(Error::validation(format!(
                "setup requires h1 > 0, 0 <= h2 < h1, rho > 0, mu > 0, tf > 0 \
                 (got h1 = {}, h2 = {}, rho = {}, mu = {}, tf = {})",
                self.h1, self.h2, self.rho, self.mu, self.tf
            )));
        }
        if !(self.theta_ext >= 0.0 && self.theta_ext < material.n0) {
            return Err(Error::validation(format!(
                "theta_ext = {} must lie in [0, n0 = {})",
                self.theta_ext, material.n0
            )));
        }
        if let Some(ur) = self.relative_humidity {
            if !(0.0..=1.0).contains(&ur) {
                return Err(Error::validation(format!("relative humidity {ur} must lie in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Compares the stored `theta_ext` with the value the vapour-density
    /// formula gives for the stored temperature and humidity.
    pub fn theta_ext_report(&self, material: &MaterialSpec) -> Result<ThetaExtReport> {
        let formula = match (self.temperature, self.relative_humidity) {
            (Some(t), Some(ur)) => Some(ambient_moisture(t, ur, material, self.rho)?),
            _ => None,
        };
        Ok(ThetaExtReport {
            used: self.theta_ext,
            formula,
            ratio: formula.filter(|f| *f > 0.0).map(|f| self.theta_ext / f),
        })
    }
}

/// Supplied versus formula-derived ambient moisture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaExtReport {
    pub used: f64,
    pub formula: Option<f64>,
    pub ratio: Option<f64>,
}

/// Measured absorbed water per unit area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbibitionDataset {
    /// (t in s, Q in g/cm²), strictly increasing in t.
    pub samples: Vec<(f64, f64)>,
}

impl ImbibitionDataset {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        let d = ImbibitionDataset { samples };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::validation("imbibition dataset is empty"));
        }
        let mut prev = 0.0;
        for (i, &(t, q)) in self.samples.iter().enumerate() {
            if !(t > prev) || !t.is_finite() {
                return Err(Error::Row {
                    row: i + 1,
                    message: format!("time {t} must be positive and strictly increasing"),
                });
            }
            if !(q >= 0.0) || !q.is_finite() {
                return Err(Error::Row {
                    row: i + 1,
                    message: format!("absorbed mass {q} must be finite and >= 0"),
                });
            }
            prev = t;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }
}

/// Mercury-intrusion porosimetry export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipDataset {
    /// (mercury pressure in g/(cm·s²), specific intruded volume).
    pub points: Vec<(f64, f64)>,
    pub v_max: f64,
}

impl MipDataset {
    pub fn new(points: Vec<(f64, f64)>, v_max: f64) -> Result<Self> {
        let d = MipDataset { points, v_max };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_max > 0.0) {
            return Err(Error::validation(format!(
                "maximum specific volume {} must be > 0",
                self.v_max
            )));
        }
        for (i, &(p, v)) in self.points.iter().enumerate() {
            if !(p >= 0.0) {
                return Err(Error::Row {
                    row: i + 1,
                    message: format!("mercury pressure {p} must be >= 0"),
                });
            }
            if !(0.0..=self.v_max).contains(&v) {
                return Err(Error::Row {
                    row: i + 1,
                    message: format!("volume {v} outside [0, {}]", self.v_max),
                });
            }
        }
        Ok(())
    }
}

/// Saturated vapour density in g/cm³ for a temperature in °C.
///
/// Cubic fit, valid on [-10, 60] °C.
pub fn saturated_vapor_density(temperature: f64) -> Result<f64> {
    if !(-10.0..=60.0).contains(&temperature) {
        return Err(Error::Domain {
            what: "temperature",
            value: temperature,
            domain: "[-10, 60] °C".into(),
        });
    }
    let t = temperature;
    Ok((5.018 + 0.32321 * t + 8.1847e-3 * t * t + 3.1243e-4 * t * t * t) * 1e-6)
}

/// Moisture volume fraction of the ambient air, `SVD(T)/rho · n0 · UR`.
pub fn ambient_moisture(temperature: f64, relative_humidity: f64, material: &MaterialSpec, rho: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&relative_humidity) {
        return Err(Error::Domain {
            what: "relative humidity",
            value: relative_humidity,
            domain: "[0, 1]".into(),
        });
    }
    if !(rho > 0.0) {
        return Err(Error::validation(format!("density {rho} must be > 0")));
    }
    material.validate()?;
    Ok(saturated_vapor_density(temperature)? / rho * material.n0 * relative_humidity)
}
