use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

/// Largest `abs_err` of `scenarios/perturbation.json` (`Omega/omega = 1e-3`),
/// measured once (1.923e-3) and frozen.
const PERTURB_MARKOV_BOUND: f64 = 2.0e-3;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subphase")).args(args).env_remove("SUBPHASE_THREADS").output().unwrap()
}

fn run_file(cmd: &str, scenario: &Path, out: &Path) -> Output {
    run(&[cmd, "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn write_scenario(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn status(o: &Output) -> Value {
    let stdout = String::from_utf8(o.stdout.clone()).unwrap();
    assert_eq!(stdout.lines().count(), 1, "stdout must be one status line: {stdout}");
    serde_json::from_str(stdout.trim()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Self {
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
        let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        for r in &rows {
            assert_eq!(r.len(), header.len(), "fixed column count");
        }
        Self { header, rows }
    }

    fn col(&self, name: &str) -> Vec<&str> {
        let i = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].as_str()).collect()
    }

    fn num(&self, name: &str) -> Vec<f64> {
        self.col(name).iter().map(|v| v.parse().unwrap()).collect()
    }
}

#[test]
fn zero_drive_propagation() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("z.csv");
    let o = run_file("propagate", &scenario("zero_drive.json"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(status(&o)["status"], "ok");
    let t = Table::read(&out);
    assert_eq!(
        t.header,
        ["t", "re_c_0", "im_c_0", "a_0", "phi_0", "P_0", "re_c_1", "im_c_1", "a_1", "phi_1", "P_1", "norm"]
    );
    assert_eq!(t.rows.len(), 101);
    assert!(t.num("P_0").iter().all(|&p| p == 1.0));
    assert!(t.num("P_1").iter().all(|&p| p == 0.0));
    assert!(t.num("norm").iter().all(|&p| p == 1.0));
    assert!(t.col("a_1").iter().all(|&v| v == "NA"));
    assert!(t.col("phi_1").iter().all(|&v| v == "NA"));
    assert!(t.num("phi_0").iter().all(|&v| v == 0.0));
    assert!(stderr(&o).contains("eigenstate 1"), "sparse-state warning expected");
}

#[test]
fn numbers_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.csv");
    assert!(run_file("propagate", &scenario("rabi.json"), &out).status.success());
    let t = Table::read(&out);
    for v in t.col("re_c_1").iter().chain(t.col("a_0").iter()).filter(|v| **v != "NA") {
        let x: f64 = v.parse().unwrap();
        assert_eq!(format!("{x:e}"), *v);
        assert!(v.contains('e'));
    }
}

#[test]
fn ramp_population_matches_log_amplitude() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ramp.csv");
    let o = run_file("propagate", &scenario("two_level_ramp.json"), &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("not Hermitian"));
    let t = Table::read(&out);
    for (a, p) in t.col("a_1").iter().zip(t.num("P_1")) {
        let a: f64 = a.parse().unwrap();
        assert!(((2.0 * a).exp() - p).abs() <= 1e-12 * p);
    }
}

#[test]
fn explicit_initial_vector() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(
        &dir,
        "v.json",
        r#"{"spectrum": {"energies": [0.0, 1.0]}, "grid": {"t_start": 0, "t_end": 1, "steps": 4},
            "initial": {"vector": [[0.6, 0.0], [0.0, 0.8]]}}"#,
    );
    let out = dir.path().join("v.csv");
    assert!(run_file("propagate", &s, &out).status.success());
    let t = Table::read(&out);
    assert!(t.num("P_0").iter().all(|p| (p - 0.36).abs() < 1e-15));
    assert!(t.num("phi_1").iter().all(|p| (p - std::f64::consts::FRAC_PI_2).abs() < 1e-15));
}

#[test]
fn malformed_scenarios_exit_one_and_name_the_key() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (
            r#"{"spectrum": {"energies": [0, 1]}, "grid": {"t_start": 0, "t_end": 1, "steps": -5}, "initial": {"index": 0}}"#,
            "grid.steps",
        ),
        (
            r#"{"spectrum": {"energies": [0, 1]}, "grid": {"t_start": 0, "t_end": 1, "steps": 5, "dt": 1}, "initial": {"index": 0}}"#,
            "grid",
        ),
        (
            r#"{"spectrum": {"energies": [0, 1]}, "grid": {"t_start": 0, "t_end": 1, "steps": 5}, "initial": {"index": 2}}"#,
            "initial.index",
        ),
        (
            r#"{"spectrum": {"energies": [0, 1]}, "drive": {"terms": [{"matrix": [[0, 0]], "carrier": 1}]},
                "grid": {"t_start": 0, "t_end": 1, "steps": 5}, "initial": {"index": 0}}"#,
            "drive.terms[0].matrix",
        ),
        (r#"{"grid": {"t_start": 0, "t_end": 1, "steps": 5}}"#, "spectrum"),
        (
            r#"{"spectrum": {"energies": [0, 1]}, "grid": {"t_start": 0, "t_end": 1, "steps": 5}, "initial": {"index": 0}"#,
            "",
        ),
    ];
    for (i, (json, key)) in cases.iter().enumerate() {
        let s = write_scenario(&dir, &format!("bad{i}.json"), json);
        let o = run_file("propagate", &s, &dir.path().join("x.csv"));
        assert_eq!(o.status.code(), Some(1), "case {i}: {}", stderr(&o));
        let st = status(&o);
        assert_eq!(st["status"], "error");
        assert!(st["message"].as_str().unwrap().contains(key), "case {i}: {st}");
    }
}

#[test]
fn divergence_exits_two() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(
        &dir,
        "d.json",
        r#"{"spectrum": {"energies": [0, 0]},
            "drive": {"terms": [{"matrix": [[0, 0], [1, 0], [1, 0], [0, 0]], "envelope": {"kind": "exponential", "rate": 800}, "carrier": 0}]},
            "grid": {"t_start": 0, "t_end": 2, "steps": 1000}, "initial": {"index": 0}}"#,
    );
    let o = run_file("propagate", &s, &dir.path().join("d.csv"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert_eq!(status(&o)["code"], 2);
}

#[test]
fn norm_violation_exits_two_and_keeps_the_series() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(
        &dir,
        "n.json",
        r#"{"spectrum": {"energies": [-0.5, 0.5]},
            "drive": {"terms": [{"matrix": [[0, 0], [1.5, 0], [1.5, 0], [0, 0]], "carrier": 0}]},
            "grid": {"t_start": 0, "t_end": 20, "steps": 40}, "initial": {"index": 0}}"#,
    );
    let out = dir.path().join("n.csv");
    let o = run_file("propagate", &s, &out);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("norm drift"));
    assert_eq!(Table::read(&out).rows.len(), 41);
}

#[test]
fn twolevel_columns() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.csv");
    let o = run_file("twolevel", &scenario("twolevel_generic.json"), &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::read(&out);
    assert_eq!(t.header, ["t", "a21_closed", "phi21_closed", "a21_quad", "phi21_quad", "P21"]);
    for (closed, quad) in [("a21_closed", "a21_quad"), ("phi21_closed", "phi21_quad")] {
        for (c, q) in t.num(closed).iter().zip(t.num(quad)) {
            assert!((c - q).abs() <= 1e-6 * c.abs(), "{closed}: {c} vs {q}");
        }
    }
    for (a, p) in t.num("a21_closed").iter().zip(t.num("P21")) {
        assert_eq!((2.0 * a).exp(), p);
    }
}

#[test]
fn twolevel_zero_coupling_and_phase_offset() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(
        &dir,
        "z.json",
        r#"{"grid": {"t_start": 0, "t_end": 5, "steps": 10},
            "model": {"kind": "two_level", "parameters": {"delta": 0.5, "b0": 0.0, "lambda": 0.2, "omega": 1.0}}}"#,
    );
    let out = dir.path().join("z.csv");
    assert!(run_file("twolevel", &s, &out).status.success());
    let t = Table::read(&out);
    for col in ["a21_closed", "phi21_closed", "a21_quad", "phi21_quad"] {
        assert!(t.col(col).iter().all(|v| *v == "0e0"), "{col}");
    }
    assert!(t.num("P21").iter().all(|&p| p == 1.0));

    let out = dir.path().join("p.csv");
    let o = run_file("twolevel", &scenario("twolevel_phase.json"), &out);
    assert!(o.status.success());
    let t = Table::read(&out);
    assert!(t.col("a21_closed").iter().chain(t.col("phi21_closed").iter()).all(|v| *v == "NA"));
    assert!(t.num("a21_quad").iter().all(|v| v.is_finite() && *v != 0.0));
}

#[test]
fn twolevel_requires_model() {
    let dir = TempDir::new().unwrap();
    let o = run_file("twolevel", &scenario("perturbation.json"), &dir.path().join("x.csv"));
    assert_eq!(o.status.code(), Some(1));
    assert!(status(&o)["message"].as_str().unwrap().contains("two_level"));
}

#[test]
fn perturb_columns_and_bounds() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("p.csv");
    let o = run_file("perturb", &scenario("perturbation.json"), &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::read(&out);
    assert_eq!(t.header, ["t", "re_c_exact", "im_c_exact", "re_c_markov", "im_c_markov", "abs_err"]);
    assert!(t.rows[0].iter().all(|v| v == "0e0"));
    let worst = t.num("abs_err").into_iter().fold(0.0, f64::max);
    assert!(worst > 0.0 && worst <= PERTURB_MARKOV_BOUND, "{worst}");

    let s = write_scenario(
        &dir,
        "o.json",
        r#"{"grid": {"t_start": 0, "t_end": 50, "steps": 500},
            "model": {"kind": "perturbation", "parameters": {"matrix_element": [0.02, -0.01], "big_omega": 0.0, "omega": 1.0, "omega_nk": 1.6}}}"#,
    );
    let out = dir.path().join("o.csv");
    assert!(run_file("perturb", &s, &out).status.success());
    assert!(Table::read(&out).num("abs_err").iter().all(|e| *e <= 1e-12));
}

#[test]
fn perturb_pole_and_regime_warning() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(
        &dir,
        "pole.json",
        r#"{"grid": {"t_start": 0, "t_end": 5, "steps": 5},
            "model": {"kind": "perturbation", "parameters": {"matrix_element": [0.02, 0], "big_omega": 0.5, "omega": 1.6, "omega_nk": 1.6}}}"#,
    );
    let o = run_file("perturb", &s, &dir.path().join("x.csv"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("warning: Omega/omega"));
    assert!(status(&o)["message"].as_str().unwrap().contains("pole"));
}

#[test]
fn scan_report_schema_and_peak() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("scan.csv");
    let o = run_file("scan", &scenario("scan_weak.json"), &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::read(&out);
    assert_eq!(t.header, ["omega", "P"]);
    assert_eq!(t.rows.len(), 101);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    let keys: Vec<&String> = report.as_object().unwrap().keys().collect();
    let mut want = ["peak_omega", "peak_P", "predicted_omega", "unshifted_omega"];
    want.sort();
    assert_eq!(keys, want);
    assert!((report["peak_omega"].as_f64().unwrap() - 1.0).abs() <= 0.02);
    assert_eq!(report["unshifted_omega"].as_f64().unwrap(), 1.0);
    assert!(t.num("P").iter().all(|p| (0.0..=1.0 + 1e-9).contains(p)));
}

#[test]
fn scan_zero_drive_warns_at_boundary() {
    let dir = TempDir::new().unwrap();
    let s = write_scenario(
        &dir,
        "z.json",
        r#"{"spectrum": {"energies": [-0.5, 0.5]}, "grid": {"t_start": 0, "t_end": 5, "steps": 500},
            "initial": {"index": 0}, "scan": {"omega_min": 0, "omega_max": 2, "points": 11, "target_index": 1}}"#,
    );
    let out = dir.path().join("z.csv");
    let o = run_file("scan", &s, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("boundary"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(report["peak_P"].as_f64(), Some(0.0));
    assert!(report["predicted_omega"].is_null());
}

#[test]
fn scan_rejects_bad_thread_cap() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_subphase"))
        .args(["scan", "--scenario", scenario("scan_weak.json").to_str().unwrap(), "--out"])
        .arg(dir.path().join("s.csv"))
        .env("SUBPHASE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(status(&o)["message"].as_str().unwrap().contains("SUBPHASE_THREADS"));
}

#[test]
fn validate_reports_findings() {
    for name in ["zero_drive.json", "rabi.json", "twolevel_generic.json", "perturbation.json", "scan_weak.json"] {
        let o = run(&["validate", "--scenario", scenario(name).to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
    }
    let o = run(&["validate", "--scenario", scenario("two_level_ramp.json").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("norm conservation will not be asserted"));

    let dir = TempDir::new().unwrap();
    let coarse = write_scenario(
        &dir,
        "c.json",
        r#"{"spectrum": {"energies": [0, 30]}, "grid": {"t_start": 0, "t_end": 10, "steps": 10}, "initial": {"index": 0},
            "drive": {"terms": [{"matrix": [[0, 0], [0.1, 0], [0.1, 0], [0, 0]], "carrier": 0}]}}"#,
    );
    let o = run(&["validate", "--scenario", coarse.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("grid too coarse"));
    assert_eq!(status(&o)["warnings"].as_array().unwrap().len(), 1);

    let shallow = write_scenario(
        &dir,
        "t.json",
        r#"{"grid": {"t_start": 0, "t_end": 5, "steps": 5},
            "model": {"kind": "two_level", "parameters": {"delta": 0.5, "b0": 0.1, "lambda": 0.2, "omega": 1.0, "floor_ratio": 1e-3}}}"#,
    );
    let o = run(&["validate", "--scenario", shallow.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(status(&o)["message"].as_str().unwrap().contains("truncation"));

    let unknown = write_scenario(&dir, "u.json", r#"{"grid": {"t_start": 0, "t_end": 5, "steps": 5}, "extra": 1}"#);
    assert_eq!(run(&["validate", "--scenario", unknown.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn coarse_grid_propagation_flags_unwrap_disagreement() {
    // A slightly dissipative diagonal term keeps the norm check off while each
    // step advances the phase by 2.5 rad.
    let dir = TempDir::new().unwrap();
    let s = write_scenario(
        &dir,
        "c.json",
        r#"{"spectrum": {"energies": [0, 1]}, "grid": {"t_start": 0, "t_end": 20, "steps": 10},
            "drive": {"terms": [{"matrix": [[0, 0], [0, 0], [0, 0], [1.25, -1e-6]], "carrier": 0}]},
            "initial": {"vector": [[0.6, 0], [0.8, 0]]}}"#,
    );
    let o = run_file("propagate", &s, &dir.path().join("c.csv"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("differs by"), "{}", stderr(&o));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    for (cmd, name) in
        [("propagate", "rabi.json"), ("twolevel", "twolevel_generic.json"), ("perturb", "perturbation.json")]
    {
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        assert!(run_file(cmd, &scenario(name), &a).status.success());
        assert!(run_file(cmd, &scenario(name), &b).status.success());
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{cmd}");
    }
}
