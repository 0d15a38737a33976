use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use super::ingest::{ingest_imbibition, read_imbibition, read_mip, read_raw_imbibition, render_imbibition};
use super::manifest::{apply_bounds, LoadedManifest, ModelSection, Overrides};
use super::table::{fmt_num, render_table, write_text};
use crate::calibration::{
    calibrate_cubic, calibrate_kp, default_cubic_bounds, default_kp_bounds, oat_sensitivity, AnnealerConfig,
    KpStepOptions, ProductSplit,
};
use crate::domain::ImbibitionDataset;
use crate::error::{Error, Result};
use crate::models::{AbsorptionModel, KpModel, KpParams, ModelRegistry};
use crate::retention::{build_retention_curve, retention_compare, LaplaceConstants};
use crate::solver::simulate;

pub const Q_CURVE_HEADER: &str = "t_s,Q_g_per_cm2";
pub const PROFILES_HEADER: &str = "t_s,z_cm,theta";
pub const RETENTION_HEADER: &str = "saturation,P_model,P_mip";
pub const TRACE_HEADER: &str = "step,evaluation,error";
pub const SENSITIVITY_HEADER: &str = "value,E2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Calibrate,
    Retention,
    Sensitivity,
    Ingest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Calibrate => "calibrate",
            Command::Retention => "retention",
            Command::Sensitivity => "sensitivity",
            Command::Ingest => "ingest",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "simulate" => Command::Simulate,
            "calibrate" => Command::Calibrate,
            "retention" => Command::Retention,
            "sensitivity" => Command::Sensitivity,
            "ingest" => Command::Ingest,
            other => return Err(Error::validation(format!("unknown command `{other}`"))),
        })
    }
}

/// Files written and a short summary of one command run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_text(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse {
            context: name.into(),
            message: e.to_string(),
        })?;
        text.push('\n');
        self.write(name, &text)
    }
}

/// Runs `command` as configured by the manifest at `manifest_path`, writing
/// results under `out_dir`.
pub fn run_command(command: Command, manifest_path: &Path, overrides: &Overrides, out_dir: &Path) -> Result<RunReport> {
    let mut loaded = LoadedManifest::load(manifest_path, overrides)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut out = Outputs {
        dir: out_dir.to_path_buf(),
        files: Vec::new(),
    };
    let summary = match command {
        Command::Simulate => run_simulate(&mut loaded, &mut out)?,
        Command::Calibrate => run_calibrate(&mut loaded, &mut out)?,
        Command::Retention => run_retention(&mut loaded, &mut out)?,
        Command::Sensitivity => run_sensitivity(&mut loaded, &mut out)?,
        Command::Ingest => run_ingest(&mut loaded, &mut out)?,
    };

    let combined = {
        let mut all = String::new();
        for (name, digest) in &loaded.inputs {
            all.push_str(&format!("{name}\t{digest}\n"));
        }
        super::manifest::sha256_hex(all.as_bytes())
    };
    let record = json!({
        "command": command.name(),
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": loaded.manifest.calibration.seed,
        "overrides": overrides,
        "inputs": loaded.inputs.iter().map(|(n, d)| json!({"path": n, "sha256": d})).collect::<Vec<_>>(),
        "inputs_sha256": combined,
        "summary": summary,
    });
    out.json("run_record.json", &record)?;
    Ok(RunReport {
        files: out.files,
        summary,
    })
}

fn params_of(model: &ModelSection) -> Result<&crate::models::ParamSet> {
    if model.bounds.is_some() {
        return Err(Error::validation("this command takes model.params, not model.bounds"));
    }
    model
        .params
        .as_ref()
        .ok_or_else(|| Error::validation(format!("model `{}` needs params", model.kind)))
}

fn imbibition_data(loaded: &LoadedManifest) -> Result<ImbibitionDataset> {
    let d = &loaded.manifest.data;
    match (&d.imbibition, &d.raw_imbibition) {
        (Some(p), None) => read_imbibition(&loaded.resolve(p)),
        (None, Some(p)) => ingest_imbibition(&read_raw_imbibition(&loaded.resolve(p))?.0),
        (Some(_), Some(_)) => Err(Error::validation(
            "give either data.imbibition or data.raw_imbibition, not both",
        )),
        (None, None) => Err(Error::validation("manifest has no imbibition data")),
    }
}

fn output_grid(tf: f64, interval: f64) -> Result<Vec<f64>> {
    if !(interval > 0.0) {
        return Err(Error::validation(format!("q_interval = {interval} must be > 0")));
    }
    let n = (tf / interval).floor() as usize;
    let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * interval).collect();
    if ts.last().is_some_and(|&t| t < tf) {
        ts.push(tf);
    }
    Ok(ts)
}

fn run_simulate(loaded: &mut LoadedManifest, out: &mut Outputs) -> Result<Value> {
    let material = loaded.material()?;
    let setup = loaded.setup(&material)?;
    let section = loaded.manifest.model()?.clone();
    let model = ModelRegistry::with_builtin().build(&section.kind, params_of(&section)?, setup.mu)?;

    let mut cfg = loaded.manifest.solver.config();
    if loaded.manifest.solver.snapshot_times.is_none() {
        cfg.snapshot_times = (0..=6).map(|k| setup.tf * k as f64 / 6.0).collect();
    }
    cfg.q_times = output_grid(setup.tf, loaded.manifest.solver.q_interval)?;
    let result = simulate(model.as_ref(), &material, &setup, &cfg)?;

    let threshold = cfg.breakthrough_threshold.unwrap_or(model.residual_saturation());
    let mut meta = vec![
        ("material", material.name.clone()),
        ("model", section.kind.clone()),
        ("dz_cm", fmt_num(result.dz)),
        ("dt_s", fmt_num(result.dt)),
        ("theta_ext", fmt_num(setup.theta_ext)),
        ("breakthrough_threshold", fmt_num(threshold)),
    ];
    if let Some(tb) = result.breakthrough_time {
        meta.push(("breakthrough_time_s", fmt_num(tb)));
    }
    let q_rows: Vec<_> = result.q_curve.iter().map(|&(t, q)| vec![Some(t), Some(q)]).collect();
    out.write("q_curve.csv", &render_table(&meta, &q_header(), &q_rows))?;

    let mut p_rows = Vec::new();
    for p in &result.profiles {
        for (j, &th) in p.theta.iter().enumerate() {
            p_rows.push(vec![Some(p.t), Some(j as f64 * result.dz), Some(th)]);
        }
    }
    out.write("profiles.csv", &render_table(&meta, &split(PROFILES_HEADER), &p_rows))?;

    Ok(json!({
        "model": section.kind,
        "diffusion_coefficient": model.diffusion_coefficient(),
        "dt": result.dt,
        "q_final": result.q_curve.last().map(|q| q.1),
        "breakthrough_time": result.breakthrough_time,
        "theta_ext": setup.theta_ext_report(&material)?,
    }))
}

fn split(header: &str) -> Vec<&str> {
    header.split(',').collect()
}

fn q_header() -> Vec<&'static str> {
    split(Q_CURVE_HEADER)
}

#[derive(Serialize)]
struct StepRecord<P: Serialize> {
    params: P,
    error: f64,
    evaluations: usize,
}

fn run_calibrate(loaded: &mut LoadedManifest, out: &mut Outputs) -> Result<Value> {
    let material = loaded.material()?;
    let setup = loaded.setup(&material)?;
    let data = imbibition_data(loaded)?;
    let section = loaded.manifest.model()?.clone();
    if section.params.is_some() {
        return Err(Error::validation(
            "calibrate takes model.bounds (or defaults), not model.params",
        ));
    }
    let cal = loaded.manifest.calibration.clone();
    let annealer = AnnealerConfig {
        rng_seed: cal.seed.unwrap_or(cal.annealer.rng_seed),
        ..cal.annealer.clone()
    };
    let solver = loaded.manifest.solver.config();

    let mut cubic_bounds = default_cubic_bounds();
    let kp_run = match section.kind.as_str() {
        "cubic" => {
            if let Some(b) = &section.bounds {
                apply_bounds(&mut cubic_bounds, b)?;
            }
            false
        }
        "kp" => {
            if let Some(b) = &cal.cubic_bounds {
                apply_bounds(&mut cubic_bounds, b)?;
            }
            true
        }
        other => return Err(Error::UnknownModel(other.to_string())),
    };

    let step1 = calibrate_cubic(&data, &material, &setup, &solver, &cubic_bounds, &annealer)?;
    let mut trace_rows: Vec<Vec<Option<f64>>> = step1
        .trace
        .iter()
        .map(|&(k, e)| vec![Some(1.0), Some(k as f64), Some(e)])
        .collect();
    let mut params = BTreeMap::new();
    params.insert("family", json!(section.kind));
    params.insert("seed", json!(annealer.rng_seed));
    params.insert(
        "step1",
        json!(StepRecord {
            params: step1.params.to_params(),
            error: step1.error,
            evaluations: step1.evaluations,
        }),
    );

    let mut summary = json!({ "E1": step1.error });
    if kp_run {
        let mut kp_bounds = default_kp_bounds();
        if let Some(b) = &section.bounds {
            apply_bounds(&mut kp_bounds, b)?;
        }
        let split = if let Some(k_s) = cal.k_s {
            ProductSplit::KnownPermeability(k_s)
        } else if let (Some(p), true) = (&loaded.manifest.data.mip, cal.split_from_mip) {
            let mip = read_mip(&loaded.resolve(p))?;
            ProductSplit::Retention(build_retention_curve(&mip, &laplace(loaded))?)
        } else {
            ProductSplit::Unresolved
        };
        let options = KpStepOptions {
            saturation_window: cal.saturation_window,
            alpha0: cal.alpha0,
            gamma_gap0: cal.gamma_gap0,
            peak_ratio_limit: cal.peak_ratio_limit,
            split,
        };
        let annealer2 = AnnealerConfig {
            rng_seed: annealer.rng_seed.wrapping_add(1),
            ..annealer.clone()
        };
        let step2 = calibrate_kp(
            &data,
            &material,
            &setup,
            &solver,
            &kp_bounds,
            &annealer2,
            &step1.params,
            &options,
        )?;
        trace_rows.extend(
            step2
                .trace
                .iter()
                .map(|&(k, e)| vec![Some(2.0), Some(k as f64), Some(e)]),
        );
        let peak = KpModel::new(step2.params.representative(), setup.mu)?.diffusion_coefficient();
        params.insert(
            "step2",
            json!({
                "params": step2.params,
                "diffusion_coefficient": peak,
                "error": step2.error,
                "evaluations": step2.evaluations,
            }),
        );
        summary["E2"] = json!(step2.error);
        summary["conductance_product"] = json!(step2.params.conductance_product);
    }

    out.json("params.json", &params)?;
    out.write(
        "trace.csv",
        &render_table(&[("model", section.kind.clone())], &split(TRACE_HEADER), &trace_rows),
    )?;
    Ok(summary)
}

fn laplace(loaded: &LoadedManifest) -> LaplaceConstants {
    loaded.manifest.retention.laplace.unwrap_or_default()
}

fn kp_params(loaded: &LoadedManifest) -> Result<KpParams> {
    let section = loaded.manifest.model()?;
    if section.kind != "kp" {
        return Err(Error::validation(format!(
            "this command needs model kind `kp`, got `{}`",
            section.kind
        )));
    }
    KpParams::from_params(params_of(section)?)
}

fn run_retention(loaded: &mut LoadedManifest, out: &mut Outputs) -> Result<Value> {
    let p = kp_params(loaded)?;
    let path = loaded.data_path(&loaded.manifest.data.mip, "mip")?;
    let curve = build_retention_curve(&read_mip(&path)?, &laplace(loaded))?;
    let report = retention_compare(&curve, &p)?;
    let rows: Vec<_> = curve
        .points
        .iter()
        .map(|&(s, p_mip)| {
            let model = (s > p.s_r && s <= p.s_s)
                .then(|| p.capillary_pressure(s).ok())
                .flatten();
            vec![Some(s), model, Some(p_mip)]
        })
        .collect();
    out.write(
        "retention.csv",
        &render_table(
            &[("pressure_unit", "g/(cm*s^2)".into())],
            &split(RETENTION_HEADER),
            &rows,
        ),
    )?;
    out.json("comparison.json", &report)?;
    Ok(json!({
        "compared": report.compared,
        "excluded": report.excluded,
        "mean_log_ratio": report.mean_log_ratio,
        "within_one_decade": report.within_one_decade,
    }))
}

fn run_sensitivity(loaded: &mut LoadedManifest, out: &mut Outputs) -> Result<Value> {
    let material = loaded.material()?;
    let setup = loaded.setup(&material)?;
    let best = kp_params(loaded)?;
    let data = imbibition_data(loaded)?;
    let sec = loaded.manifest.sensitivity.clone();
    let base = best.to_params();

    let mut sweep = sec.grids.clone();
    for name in &sec.parameters {
        if sweep.contains_key(name) {
            continue;
        }
        let v = *base
            .get(name)
            .ok_or_else(|| Error::validation(format!("unknown kp parameter `{name}`")))?;
        sweep.insert(name.clone(), sec.factors.iter().map(|f| f * v).collect());
    }
    if sweep.is_empty() {
        return Err(Error::validation(
            "sensitivity needs sensitivity.grids or sensitivity.parameters",
        ));
    }
    let solver = loaded.manifest.solver.config();
    let curves = oat_sensitivity(&best, &data, &material, &setup, &solver, &sweep)?;
    let mut summary = BTreeMap::new();
    for (name, curve) in &curves {
        let rows: Vec<_> = curve.iter().map(|&(v, e)| vec![Some(v), Some(e)]).collect();
        out.write(
            &format!("sensitivity_{name}.csv"),
            &render_table(&[("parameter", name.clone())], &split(SENSITIVITY_HEADER), &rows),
        )?;
        let argmin = curve.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|p| p.0);
        summary.insert(name.clone(), json!({ "argmin": argmin }));
    }
    Ok(json!(summary))
}

fn run_ingest(loaded: &mut LoadedManifest, out: &mut Outputs) -> Result<Value> {
    let path = loaded.data_path(&loaded.manifest.data.raw_imbibition, "raw_imbibition")?;
    let (records, table) = read_raw_imbibition(&path)?;
    let data = ingest_imbibition(&records)?;
    let coefficient = records
        .capillary_coefficient(table.meta_f64("m1_g")?, table.meta_f64("m2_g")?)
        .transpose()?;
    let mut meta = vec![("w0_g", fmt_num(records.w0)), ("area_cm2", fmt_num(records.area))];
    if let Some(c) = coefficient {
        meta.push(("capillary_coefficient", fmt_num(c)));
    }
    out.write("imbibition.csv", &render_imbibition(&data.samples, &meta))?;
    Ok(json!({ "samples": data.len(), "capillary_coefficient": coefficient }))
}

/// Used by the binary for `--snapshots 0,600,1800`.
pub fn parse_times(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            x.trim().parse::<f64>().map_err(|e| Error::Parse {
                context: "--snapshots".into(),
                message: format!("`{x}`: {e}"),
            })
        })
        .collect()
}
