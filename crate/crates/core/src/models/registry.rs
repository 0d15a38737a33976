use std::collections::BTreeMap;

use super::{AbsorptionModel, CubicModel, CubicParams, KpModel, KpParams, ParamSet};
use crate::error::{Error, Result};

/// Builds absorption models of one family from named parameters.
pub trait ModelFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn parameter_names(&self) -> &'static [&'static str];

    /// `mu` is the liquid viscosity in Poise; families that do not use it ignore it.
    fn build(&self, params: &ParamSet, mu: f64) -> Result<Box<dyn AbsorptionModel>>;
}

pub struct CubicFamily;

impl ModelFamily for CubicFamily {
    fn name(&self) -> &'static str {
        "cubic"
    }

    fn parameter_names(&self) -> &'static [&'static str] {
        &["s_r", "s_s", "d"]
    }

    fn build(&self, params: &ParamSet, _mu: f64) -> Result<Box<dyn AbsorptionModel>> {
        Ok(Box::new(CubicModel::new(CubicParams::from_params(params)?)?))
    }
}

pub struct KpFamily;

impl ModelFamily for KpFamily {
    fn name(&self) -> &'static str {
        "kp"
    }

    fn parameter_names(&self) -> &'static [&'static str] {
        &["s_r", "s_s", "alpha", "c", "k_s", "gamma"]
    }

    fn build(&self, params: &ParamSet, mu: f64) -> Result<Box<dyn AbsorptionModel>> {
        Ok(Box::new(KpModel::new(KpParams::from_params(params)?, mu)?))
    }
}

/// Name → family lookup.
pub struct ModelRegistry {
    families: BTreeMap<&'static str, Box<dyn ModelFamily>>,
}

impl ModelRegistry {
    pub fn empty() -> Self {
        ModelRegistry {
            families: BTreeMap::new(),
        }
    }

    /// Registry holding the `cubic` and `kp` families.
    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(CubicFamily));
        r.register(Box::new(KpFamily));
        r
    }

    /// Adds a family, replacing any previous family of the same name.
    pub fn register(&mut self, family: Box<dyn ModelFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn get(&self, name: &str) -> Result<&dyn ModelFamily> {
        self.families
            .get(name)
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.families.keys().copied()
    }

    pub fn build(&self, name: &str, params: &ParamSet, mu: f64) -> Result<Box<dyn AbsorptionModel>> {
        let family = self.get(name)?;
        for key in params.keys() {
            if !family.parameter_names().contains(&key.as_str()) {
                return Err(Error::validation(format!(
                    "unknown parameter `{key}` for model `{name}`"
                )));
            }
        }
        family.build(params, mu)
    }
}

impl Default for ModelRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}
