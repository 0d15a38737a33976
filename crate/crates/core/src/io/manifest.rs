//! TOML run manifests.
//!
//! Material and setup may be given inline or as a path to a separate TOML
//! file. Relative paths resolve against the manifest's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::{AnnealerConfig, ParameterBounds};
use crate::domain::{ambient_moisture, ExperimentSetup, MaterialSpec};
use crate::error::{Error, Result};
use crate::models::ParamSet;
use crate::retention::LaplaceConstants;
use crate::solver::{SolverConfig, TopBoundary};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

/// Setup as written in a manifest; `theta_ext` may be left to the
/// ambient-moisture formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupSpec {
    pub h1: f64,
    pub h2: f64,
    pub rho: f64,
    pub mu: f64,
    pub tf: f64,
    #[serde(default)]
    pub theta_ext: Option<f64>,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub relative_humidity: Option<f64>,
}

impl SetupSpec {
    pub fn resolve(&self, material: &MaterialSpec) -> Result<ExperimentSetup> {
        let theta_ext = match (self.theta_ext, self.temperature, self.relative_humidity) {
            (Some(v), _, _) => v,
            (None, Some(t), Some(ur)) => ambient_moisture(t, ur, material, self.rho)?,
            _ => {
                return Err(Error::validation(
                    "setup needs theta_ext, or temperature and relative_humidity",
                ))
            }
        };
        let setup = ExperimentSetup {
            h1: self.h1,
            h2: self.h2,
            rho: self.rho,
            mu: self.mu,
            tf: self.tf,
            theta_ext,
            temperature: self.temperature,
            relative_humidity: self.relative_humidity,
        };
        setup.validate(material)?;
        Ok(setup)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: String,
    #[serde(default)]
    pub params: Option<ParamSet>,
    /// Search intervals in natural units, e.g. `d = [1e-5, 1]`.
    #[serde(default)]
    pub bounds: Option<BTreeMap<String, [f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_dz")]
    pub dz: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    #[serde(default)]
    pub top_bc: Option<TopBoundary>,
    #[serde(default)]
    pub snapshot_times: Option<Vec<f64>>,
    /// Spacing of the emitted absorbed-mass curve, s.
    #[serde(default = "default_q_interval")]
    pub q_interval: f64,
    #[serde(default)]
    pub breakthrough_threshold: Option<f64>,
}

fn default_dz() -> f64 {
    2.5e-2
}

fn default_safety() -> f64 {
    0.9
}

fn default_q_interval() -> f64 {
    60.0
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            dz: default_dz(),
            dt: None,
            cfl_safety: default_safety(),
            top_bc: None,
            snapshot_times: None,
            q_interval: default_q_interval(),
            breakthrough_threshold: None,
        }
    }
}

impl SolverSection {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            dz: self.dz,
            dt: self.dt,
            cfl_safety: self.cfl_safety,
            top_bc: self.top_bc.unwrap_or(TopBoundary::Dirichlet),
            snapshot_times: self.snapshot_times.clone().unwrap_or_default(),
            q_times: Vec::new(),
            breakthrough_threshold: self.breakthrough_threshold,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Processed series `t_s,Q_g_per_cm2`.
    pub imbibition: Option<PathBuf>,
    /// Weighings `t_s,w_g` with `w0_g` and `area_cm2` metadata.
    pub raw_imbibition: Option<PathBuf>,
    /// Porosimetry export `P_Hg_MPa,V`.
    pub mip: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub annealer: AnnealerConfig,
    /// Step-1 intervals when the model kind is `kp`.
    #[serde(default)]
    pub cubic_bounds: Option<BTreeMap<String, [f64; 2]>>,
    #[serde(default = "default_window")]
    pub saturation_window: f64,
    #[serde(default = "default_alpha0")]
    pub alpha0: f64,
    #[serde(default = "default_gap0")]
    pub gamma_gap0: f64,
    #[serde(default = "default_peak_ratio")]
    pub peak_ratio_limit: f64,
    /// Measured permeability at saturation, cm².
    #[serde(default)]
    pub k_s: Option<f64>,
    /// Fit `c` to the porosimetry curve when one is given and `k_s` is not.
    #[serde(default = "yes")]
    pub split_from_mip: bool,
}

fn default_window() -> f64 {
    0.05
}
fn default_alpha0() -> f64 {
    0.25
}
fn default_gap0() -> f64 {
    1.5
}
fn default_peak_ratio() -> f64 {
    10.0
}
fn yes() -> bool {
    true
}

impl Default for CalibrationSection {
    fn default() -> Self {
        CalibrationSection {
            seed: None,
            annealer: AnnealerConfig::default(),
            cubic_bounds: None,
            saturation_window: default_window(),
            alpha0: default_alpha0(),
            gamma_gap0: default_gap0(),
            peak_ratio_limit: default_peak_ratio(),
            k_s: None,
            split_from_mip: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivitySection {
    /// Explicit grids per parameter.
    #[serde(default)]
    pub grids: BTreeMap<String, Vec<f64>>,
    /// Multipliers applied to the best value of each parameter in `parameters`
    /// that has no explicit grid.
    #[serde(default = "default_factors")]
    pub factors: Vec<f64>,
    #[serde(default)]
    pub parameters: Vec<String>,
}

fn default_factors() -> Vec<f64> {
    vec![0.8, 0.9, 1.0, 1.1, 1.2]
}

impl Default for SensitivitySection {
    fn default() -> Self {
        SensitivitySection {
            grids: BTreeMap::new(),
            factors: default_factors(),
            parameters: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetentionSection {
    #[serde(default)]
    pub laplace: Option<LaplaceConstants>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    #[serde(default)]
    pub material: Option<Source<MaterialSpec>>,
    #[serde(default)]
    pub setup: Option<Source<SetupSpec>>,
    #[serde(default)]
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub sensitivity: SensitivitySection,
    #[serde(default)]
    pub retention: RetentionSection,
}

/// Command-line values that take precedence over the manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Vec<f64>>,
}

/// A parsed manifest together with where it came from and which files it read.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub manifest: RunManifest,
    pub base_dir: PathBuf,
    /// (name as written, sha256 hex) for the manifest and every file it references.
    pub inputs: Vec<(String, String)>,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

fn parse_toml<T: serde::de::DeserializeOwned>(bytes: &[u8], path: &Path) -> Result<T> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        context: path.display().to_string(),
        message: e.to_string(),
    })?;
    toml::from_str(text).map_err(|e| Error::Parse {
        context: path.display().to_string(),
        message: e.to_string(),
    })
}

impl RunManifest {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            context: "manifest".into(),
            message: e.to_string(),
        })
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.calibration.seed = Some(seed);
        }
        if let Some(kind) = &o.model {
            match &mut self.model {
                Some(m) => m.kind = kind.clone(),
                None => {
                    self.model = Some(ModelSection {
                        kind: kind.clone(),
                        params: None,
                        bounds: None,
                    })
                }
            }
        }
        if let Some(dz) = o.dz {
            self.solver.dz = dz;
        }
        if let Some(dt) = o.dt {
            self.solver.dt = Some(dt);
        }
        if let Some(s) = &o.snapshots {
            self.solver.snapshot_times = Some(s.clone());
        }
        Ok(())
    }

    pub fn model(&self) -> Result<&ModelSection> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::validation("manifest has no [model] section"))
    }
}

impl LoadedManifest {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let bytes = read_bytes(path)?;
        let mut manifest: RunManifest = parse_toml(&bytes, path)?;
        manifest.apply(overrides)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut loaded = LoadedManifest {
            manifest,
            base_dir,
            inputs: vec![(name, sha256_hex(&bytes))],
        };
        for p in [
            &loaded.manifest.data.imbibition,
            &loaded.manifest.data.raw_imbibition,
            &loaded.manifest.data.mip,
        ]
        .into_iter()
        .flatten()
        .cloned()
        .collect::<Vec<_>>()
        {
            let digest = sha256_hex(&read_bytes(&loaded.resolve(&p))?);
            loaded.inputs.push((p.display().to_string(), digest));
        }
        Ok(loaded)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn referenced<T: serde::de::DeserializeOwned + Clone>(&mut self, src: Option<Source<T>>, what: &str) -> Result<T> {
        match src {
            None => Err(Error::validation(format!("manifest has no `{what}`"))),
            Some(Source::Inline(v)) => Ok(v),
            Some(Source::Path(p)) => {
                let full = self.resolve(&p);
                let bytes = read_bytes(&full)?;
                self.inputs.push((p.display().to_string(), sha256_hex(&bytes)));
                parse_toml(&bytes, &full)
            }
        }
    }

    pub fn material(&mut self) -> Result<MaterialSpec> {
        let m: MaterialSpec = self.referenced(self.manifest.material.clone(), "material")?;
        m.validate()?;
        Ok(m)
    }

    pub fn setup(&mut self, material: &MaterialSpec) -> Result<ExperimentSetup> {
        let s: SetupSpec = self.referenced(self.manifest.setup.clone(), "setup")?;
        s.resolve(material)
    }

    pub fn data_path(&self, field: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
        field
            .as_ref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Error::validation(format!("manifest has no data.{what}")))
    }
}

/// Overrides intervals of `bounds` from natural-unit entries. Names that are
/// searched in log10 space (`log10_x`) accept `x = [lo, hi]`.
pub fn apply_bounds(bounds: &mut ParameterBounds, entries: &BTreeMap<String, [f64; 2]>) -> Result<()> {
    for (name, [lo, hi]) in entries {
        if let Some(i) = bounds.index_of(name) {
            bounds.intervals[i].lower = *lo;
            bounds.intervals[i].upper = *hi;
        } else if let Some(i) = bounds.index_of(&format!("log10_{name}")) {
            if !(*lo > 0.0 && *hi > 0.0) {
                return Err(Error::validation(format!(
                    "bounds for `{name}` must be positive, got [{lo}, {hi}]"
                )));
            }
            bounds.intervals[i].lower = lo.log10();
            bounds.intervals[i].upper = hi.log10();
        } else {
            return Err(Error::validation(format!("unknown bound `{name}`")));
        }
    }
    bounds.validate()
}
