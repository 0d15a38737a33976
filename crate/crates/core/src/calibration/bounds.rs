use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed search interval for one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

/// Coupling `value[param] >= value[anchor] + offset`, enforced after
/// every proposal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerLink {
    pub param: usize,
    pub anchor: usize,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterBounds {
    pub intervals: Vec<Interval>,
    #[serde(default)]
    pub links: Vec<LowerLink>,
}

impl ParameterBounds {
    pub fn new(intervals: Vec<Interval>, links: Vec<LowerLink>) -> Result<Self> {
        let b = ParameterBounds { intervals, links };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.intervals.is_empty() {
            return Err(Error::validation("no parameters to calibrate"));
        }
        for iv in &self.intervals {
            if !(iv.lower < iv.upper) || !iv.lower.is_finite() || !iv.upper.is_finite() {
                return Err(Error::validation(format!(
                    "bounds for `{}` must satisfy lower < upper (got [{}, {}])",
                    iv.name, iv.lower, iv.upper
                )));
            }
        }
        for l in &self.links {
            if l.param >= self.dim() || l.anchor >= self.dim() || l.param == l.anchor {
                return Err(Error::validation("parameter link refers to an invalid index"));
            }
            let iv = &self.intervals[l.param];
            if self.intervals[l.anchor].lower + l.offset > iv.upper {
                return Err(Error::validation(format!(
                    "`{}` cannot satisfy its lower link inside [{}, {}]",
                    iv.name, iv.lower, iv.upper
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.intervals.iter().position(|iv| iv.name == name)
    }

    pub fn width(&self, i: usize) -> f64 {
        self.intervals[i].upper - self.intervals[i].lower
    }

    pub fn center(&self) -> Vec<f64> {
        let mut x: Vec<f64> = self.intervals.iter().map(|iv| 0.5 * (iv.lower + iv.upper)).collect();
        self.repair(&mut x);
        x
    }

    /// Clips into the box, then raises linked parameters to their floors.
    pub fn repair(&self, x: &mut [f64]) {
        for (v, iv) in x.iter_mut().zip(&self.intervals) {
            *v = v.clamp(iv.lower, iv.upper);
        }
        for l in &self.links {
            let floor = x[l.anchor] + l.offset;
            if x[l.param] < floor {
                x[l.param] = floor.min(self.intervals[l.param].upper);
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.intervals)
                .all(|(v, iv)| *v >= iv.lower && *v <= iv.upper)
            && self.links.iter().all(|l| x[l.param] >= x[l.anchor] + l.offset - 1e-15)
    }

    /// Intersects interval `name` with `[lower, upper]`.
    pub fn restrict(&mut self, name: &str, lower: f64, upper: f64) -> Result<()> {
        let i = self
            .index_of(name)
            .ok_or_else(|| Error::validation(format!("unknown bound `{name}`")))?;
        let iv = &mut self.intervals[i];
        iv.lower = iv.lower.max(lower);
        iv.upper = iv.upper.min(upper);
        self.validate()
    }
}
