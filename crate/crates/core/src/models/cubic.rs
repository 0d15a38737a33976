use serde::{Deserialize, Serialize};

use super::{check_saturation_window, take, AbsorptionModel, ParamSet};
use crate::error::{Error, Result};

/// Parameters of the cubic absorption function (parabolic diffusivity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicParams {
    pub s_r: f64,
    pub s_s: f64,
    /// Peak diffusivity, cm²/s, reached at the middle of the support.
    pub d: f64,
}

impl CubicParams {
    pub fn new(s_r: f64, s_s: f64, d: f64) -> Result<Self> {
        let p = CubicParams { s_r, s_s, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_saturation_window(self.s_r, self.s_s)?;
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::validation(format!(
                "diffusion coefficient D = {} must be > 0",
                self.d
            )));
        }
        Ok(())
    }

    pub fn from_params(params: &ParamSet) -> Result<Self> {
        Self::new(take(params, "s_r")?, take(params, "s_s")?, take(params, "d")?)
    }

    pub fn to_params(&self) -> ParamSet {
        [("s_r", self.s_r), ("s_s", self.s_s), ("d", self.d)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    pub fn b(&self, s: f64) -> f64 {
        let (sr, ss, d) = (self.s_r, self.s_s, self.d);
        if s < sr {
            0.0
        } else if s <= ss {
            let w = ss - sr;
            -2.0 * d * (sr - s) * (sr - s) * (sr - 3.0 * ss + 2.0 * s) / (3.0 * w * w)
        } else {
            self.plateau()
        }
    }

    pub fn b_prime(&self, s: f64) -> f64 {
        let w = self.s_s - self.s_r;
        (-4.0 * self.d * (self.s_r - s) * (self.s_s - s) / (w * w)).max(0.0)
    }

    /// `B` above the maximum saturation.
    pub fn plateau(&self) -> f64 {
        2.0 / 3.0 * self.d * (self.s_s - self.s_r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicModel {
    pub params: CubicParams,
}

impl CubicModel {
    pub fn new(params: CubicParams) -> Result<Self> {
        params.validate()?;
        Ok(CubicModel { params })
    }
}

impl AbsorptionModel for CubicModel {
    fn family(&self) -> &'static str {
        "cubic"
    }

    fn b(&self, s: f64) -> f64 {
        self.params.b(s)
    }

    fn b_prime(&self, s: f64) -> f64 {
        self.params.b_prime(s)
    }

    fn diffusion_coefficient(&self) -> f64 {
        self.params.d
    }

    fn residual_saturation(&self) -> f64 {
        self.params.s_r
    }

    fn max_saturation(&self) -> f64 {
        self.params.s_s
    }

    fn parameters(&self) -> ParamSet {
        self.params.to_params()
    }
}
