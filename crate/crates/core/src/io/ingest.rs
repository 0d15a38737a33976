use std::path::Path;

use serde::{Deserialize, Serialize};

use super::table::{read_table, render_table, Table};
use crate::domain::{ImbibitionDataset, MipDataset};
use crate::error::{Error, Result};
use crate::retention::MPA_TO_CGS;

pub const Q_HEADER: [&str; 2] = ["t_s", "Q_g_per_cm2"];
pub const RAW_HEADER: [&str; 2] = ["t_s", "w_g"];
pub const MIP_HEADER: [&str; 2] = ["P_Hg_MPa", "V"];

/// Weighings of one specimen during an imbibition test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawImbibitionRecords {
    /// Dry weight, g.
    pub w0: f64,
    /// Area of the wetted face, cm².
    pub area: f64,
    /// (t in s, weight in g).
    pub weighings: Vec<(f64, f64)>,
}

/// Converts weighings to absorbed mass per unit area, `(w - w0) / A`.
///
/// Rows at t = 0 are the reference weighing and are dropped.
pub fn ingest_imbibition(records: &RawImbibitionRecords) -> Result<ImbibitionDataset> {
    if !(records.area > 0.0) {
        return Err(Error::validation(format!("area {} must be > 0", records.area)));
    }
    if !(records.w0 >= 0.0) {
        return Err(Error::validation(format!("dry weight {} must be >= 0", records.w0)));
    }
    let mut samples = Vec::with_capacity(records.weighings.len());
    let mut prev: Option<f64> = None;
    for (i, &(t, w)) in records.weighings.iter().enumerate() {
        let row = i + 1;
        if !(t >= 0.0) {
            return Err(Error::Row {
                row,
                message: format!("time {t} must be >= 0"),
            });
        }
        if prev.is_some_and(|p| t <= p) {
            return Err(Error::Row {
                row,
                message: format!("time {t} is not strictly increasing"),
            });
        }
        if !(w >= records.w0) {
            return Err(Error::Row {
                row,
                message: format!("weight {w} g is below the dry weight {} g", records.w0),
            });
        }
        prev = Some(t);
        if t > 0.0 {
            samples.push((t, (w - records.w0) / records.area));
        }
    }
    ImbibitionDataset::new(samples)
}

/// Capillary coefficient `0.1 (M2 - M1)` from the 10 min and 90 min weighings.
pub fn capillary_coefficient(m1: f64, m2: f64) -> Result<f64> {
    if !(m2 >= m1) {
        return Err(Error::validation(format!("M2 = {m2} g must not be below M1 = {m1} g")));
    }
    Ok(0.1 * (m2 - m1))
}

impl RawImbibitionRecords {
    /// `0.1 (M2 - M1)` from header values `m1_g`/`m2_g` when given, else
    /// from the weighings at 600 s and 5400 s.
    pub fn capillary_coefficient(&self, m1: Option<f64>, m2: Option<f64>) -> Option<Result<f64>> {
        let at = |t: f64| self.weighings.iter().find(|w| w.0 == t).map(|w| w.1);
        let m1 = m1.or_else(|| at(600.0))?;
        let m2 = m2.or_else(|| at(5400.0))?;
        Some(capillary_coefficient(m1, m2))
    }
}

pub fn raw_from_table(t: &Table) -> Result<RawImbibitionRecords> {
    t.expect_header(&RAW_HEADER, "raw imbibition")?;
    let w0 = t
        .meta_f64("w0_g")?
        .ok_or_else(|| Error::validation("raw imbibition file lacks `# w0_g = ...`"))?;
    let area = t
        .meta_f64("area_cm2")?
        .ok_or_else(|| Error::validation("raw imbibition file lacks `# area_cm2 = ...`"))?;
    Ok(RawImbibitionRecords {
        w0,
        area,
        weighings: t.rows.iter().map(|r| (r[0], r[1])).collect(),
    })
}

pub fn read_raw_imbibition(path: &Path) -> Result<(RawImbibitionRecords, Table)> {
    let t = read_table(path)?;
    Ok((raw_from_table(&t)?, t))
}

pub fn read_imbibition(path: &Path) -> Result<ImbibitionDataset> {
    let t = read_table(path)?;
    t.expect_header(&Q_HEADER, &path.display().to_string())?;
    ImbibitionDataset::new(t.rows.iter().map(|r| (r[0], r[1])).collect())
}

pub fn render_imbibition(data: &[(f64, f64)], metadata: &[(&str, String)]) -> String {
    let rows: Vec<Vec<Option<f64>>> = data.iter().map(|&(t, q)| vec![Some(t), Some(q)]).collect();
    render_table(metadata, &Q_HEADER, &rows)
}

/// Reads a porosimetry export. Pressures are converted from MPa to g/(cm·s²);
/// `v_max` comes from `# v_max = ...` or the largest intruded volume.
pub fn read_mip(path: &Path) -> Result<MipDataset> {
    let t = read_table(path)?;
    t.expect_header(&MIP_HEADER, &path.display().to_string())?;
    let points: Vec<(f64, f64)> = t.rows.iter().map(|r| (r[0] * MPA_TO_CGS, r[1])).collect();
    let v_max = match t.meta_f64("v_max")? {
        Some(v) => v,
        None => points.iter().map(|p| p.1).fold(0.0, f64::max),
    };
    MipDataset::new(points, v_max)
}
