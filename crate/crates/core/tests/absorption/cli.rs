use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use capillary::io::{read_table, PROFILES_HEADER, Q_CURVE_HEADER, RETENTION_HEADER, SENSITIVITY_HEADER};
use serde_json::Value;

fn manifests() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../manifests")
}

fn capillary(args: &[&str], manifest: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capillary"))
        .args(args)
        .arg("--manifest")
        .arg(manifest)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn ok_json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "ok");
    v
}

fn error_kind(o: &Output) -> String {
    assert!(!o.status.success());
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["status"], "error");
    v["kind"].as_str().unwrap().to_string()
}

fn header_line(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_string()
}

/// The synthetic truth manifest, rewritten with `extra` appended.
fn truth_with(dir: &Path, extra: &str) -> PathBuf {
    let text = std::fs::read_to_string(manifests().join("synthetic_truth.toml")).unwrap();
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("{text}\n{extra}")).unwrap();
    path
}

#[test]
fn simulate_reproduces_the_shipped_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = capillary(&["simulate"], &manifests().join("synthetic_truth.toml"), dir.path());
    let v = ok_json(&o);
    assert!(v["files"].as_array().unwrap().len() >= 3);

    assert_eq!(header_line(&dir.path().join("q_curve.csv")), Q_CURVE_HEADER);
    assert_eq!(header_line(&dir.path().join("profiles.csv")), PROFILES_HEADER);

    let fresh = read_table(&dir.path().join("q_curve.csv")).unwrap();
    let shipped = read_table(&manifests().join("data/synthetic_q.csv")).unwrap();
    let fresh: Vec<_> = fresh.rows.iter().filter(|r| r[0] > 0.0).collect();
    assert_eq!(fresh.len(), shipped.rows.len());
    for (a, b) in fresh.iter().zip(&shipped.rows) {
        assert_eq!(a[0], b[0]);
        assert!((a[1] - b[1]).abs() <= 1e-12 * b[1].abs(), "{a:?} {b:?}");
    }

    let record: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_record.json")).unwrap()).unwrap();
    assert_eq!(record["command"], "simulate");
    assert_eq!(record["inputs_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn overrides_change_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifests().join("synthetic_truth.toml");
    let o = Command::new(env!("CARGO_BIN_EXE_capillary"))
        .args(["simulate", "--dz", "0.1", "--snapshots", "0,300,600", "--manifest"])
        .arg(&m)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    ok_json(&o);
    let profiles = read_table(&dir.path().join("profiles.csv")).unwrap();
    // 11 nodes at three instants
    assert_eq!(profiles.rows.len(), 33);
    assert_eq!(profiles.meta_f64("dz_cm").unwrap(), Some(0.1));
}

#[test]
fn bad_manifests_fail_with_json_errors() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = truth_with(dir.path(), "[bogus]\nx = 1\n");
    assert_eq!(
        error_kind(&capillary(&["simulate"], &unknown, &dir.path().join("o1"))),
        "parse"
    );

    let missing = dir.path().join("nope.toml");
    assert_eq!(
        error_kind(&capillary(&["simulate"], &missing, &dir.path().join("o2"))),
        "io"
    );

    let text = std::fs::read_to_string(manifests().join("synthetic_truth.toml"))
        .unwrap()
        .replace("n0 = 0.4", "n0 = 1.4");
    let invalid = dir.path().join("invalid.toml");
    std::fs::write(&invalid, text).unwrap();
    assert_eq!(
        error_kind(&capillary(&["simulate"], &invalid, &dir.path().join("o3"))),
        "validation"
    );

    // calibrate needs data
    assert_eq!(
        error_kind(&capillary(
            &["calibrate"],
            &manifests().join("synthetic_truth.toml"),
            &dir.path().join("o4")
        )),
        "validation"
    );
}

#[test]
fn ingest_writes_a_q_table() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    std::fs::write(
        &raw,
        "# w0_g = 100\n# area_cm2 = 25\nt_s,w_g\n0,100\n600,112.5\n1800,120\n5400,130\n",
    )
    .unwrap();
    let m = dir.path().join("ingest.toml");
    std::fs::write(&m, "[data]\nraw_imbibition = \"raw.csv\"\n").unwrap();
    let v = ok_json(&capillary(&["ingest"], &m, &dir.path().join("out")));
    assert_eq!(v["summary"]["samples"], 3);
    let t = read_table(&dir.path().join("out/imbibition.csv")).unwrap();
    assert_eq!(t.rows, vec![vec![600.0, 0.5], vec![1800.0, 0.8], vec![5400.0, 1.2]]);
    // 0.1 (M2 - M1) from the 600 s and 5400 s weighings
    let c = t.meta_f64("capillary_coefficient").unwrap().unwrap();
    assert!((c - 1.75).abs() < 1e-12);

    std::fs::write(&raw, "# w0_g = 100\n# area_cm2 = 25\nt_s,w_g\n600,101\n900,abc\n").unwrap();
    assert_eq!(error_kind(&capillary(&["ingest"], &m, &dir.path().join("bad"))), "row");
}

#[test]
fn sensitivity_bottoms_out_at_the_truth() {
    let dir = tempfile::tempdir().unwrap();
    let data = manifests().join("data/synthetic_q.csv");
    let m = truth_with(
        dir.path(),
        &format!(
            "[data]\nimbibition = {:?}\n\n[sensitivity]\ngrids = {{ s_r = [0.45, 0.5, 0.55] }}\nparameters = [\"alpha\"]\n",
            data.to_str().unwrap()
        ),
    );
    let v = ok_json(&capillary(&["sensitivity"], &m, &dir.path().join("out")));
    assert_eq!(v["summary"]["s_r"]["argmin"], 0.5);
    assert_eq!(v["summary"]["alpha"]["argmin"], 0.25);
    assert_eq!(
        header_line(&dir.path().join("out/sensitivity_s_r.csv")),
        SENSITIVITY_HEADER
    );
}

#[test]
fn retention_compares_against_porosimetry() {
    let dir = tempfile::tempdir().unwrap();
    let mut mip = String::from("P_Hg_MPa,V\n");
    for k in 0..12 {
        let p = 0.01 * 2f64.powi(k);
        mip.push_str(&format!("{p},{}\n", 0.05 + 0.9 * (1.0 - (-p).exp())));
    }
    std::fs::write(dir.path().join("mip.csv"), mip).unwrap();
    let m = truth_with(dir.path(), "[data]\nmip = \"mip.csv\"\n");
    let v = ok_json(&capillary(&["retention"], &m, &dir.path().join("out")));
    assert!(v["summary"]["compared"].as_u64().unwrap() > 0);
    assert_eq!(header_line(&dir.path().join("out/retention.csv")), RETENTION_HEADER);
    assert!(dir.path().join("out/comparison.json").exists());
}
