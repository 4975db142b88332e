use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn neelwall(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neelwall"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: [&str; 4] = ["--set", "solve.half_width=40", "--set", "solve.point_count=401"];

#[test]
fn minimize_writes_profile_and_result() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["minimize", "--set", "h=0.9", "--set", "degree=a"];
    args.extend(SMALL);
    let o = neelwall(&args, dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("x,phi,m1,m2"));
    assert_eq!(csv.lines().count(), 402);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(json["result"]["converged"], true);
    assert_eq!(json["run"]["degree"], "a");
}

#[test]
fn even_point_count_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = neelwall(&["minimize", "--set", "solve.point_count=400"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("odd"), "{}", stderr(&o));
    assert!(!dir.path().join("result.json").exists());
}

#[test]
fn every_violation_is_listed() {
    let dir = TempDir::new().unwrap();
    let o = neelwall(
        &[
            "minimize",
            "--set",
            "solve.point_count=400",
            "--set",
            "solve.solver.grad_tol=-1",
            "--set",
            "no_such_key=3",
            "--set",
            "h=1.5",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    let e = stderr(&o);
    for needle in ["odd", "grad_tol", "no_such_key", "1.5"] {
        assert!(e.contains(needle), "missing {needle} in {e}");
    }
}

#[test]
fn config_file_and_overrides_compose() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"h": 0.95, "degree": "a", "solve": {"half_width": 40, "point_count": 401}}"#).unwrap();
    let out = dir.path().join("o");
    let o = neelwall(&["minimize", "--config", cfg.to_str().unwrap(), "--set", "h=0.8"], &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(json["run"]["h"], 0.8);
    assert_eq!(json["run"]["solve"]["point_count"], 401);
}

#[test]
fn forced_non_convergence_still_writes() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["minimize", "--set", "h=0.99", "--set", "degree=2-a", "--set", "solve.solver.max_iters=1"];
    args.extend(SMALL);
    let o = neelwall(&args, dir.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(dir.path().join("profile.csv").exists());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(json["result"]["converged"], false);
    assert_eq!(json["result"]["iterations"], 1);
}

#[test]
fn reruns_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let mut args = vec!["minimize", "--set", "h=0.95", "--set", "degree=1+a"];
    args.extend(SMALL);
    assert_eq!(code(&neelwall(&args, a.path())), 0);
    assert_eq!(code(&neelwall(&args, b.path())), 0);
    for f in ["profile.csv", "result.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unknown_experiment_lists_names() {
    let dir = TempDir::new().unwrap();
    let o = neelwall(&["experiment", "nonsense"], dir.path());
    assert_eq!(code(&o), 1);
    let e = stderr(&o);
    for name in ["table", "split", "structure", "decay", "l1scan", "localest", "width", "appendix"] {
        assert!(e.contains(name), "{e}");
    }
}

#[test]
fn bad_flags_exit_with_config_code() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&neelwall(&["minimize", "--frobnicate"], dir.path())), 1);
    assert_eq!(code(&neelwall(&["--jobs", "0", "selftest"], dir.path())), 1);
}

#[test]
fn table_at_unit_field_has_three_rows() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["--jobs", "2", "experiment", "table", "--set", "h_values=[1.0]", "--set", r#"degrees=["1","2","3"]"#];
    args.extend(SMALL);
    let o = neelwall(&args, dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("energy_table.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4, "{csv}");
    let verdicts: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("energy_table.verdicts.json")).unwrap()).unwrap();
    assert!(!verdicts["verdicts"].as_array().unwrap().is_empty());
    for d in ["1", "2", "3"] {
        assert!(dir.path().join(format!("profiles/table_h1_d{d}.csv")).exists());
    }
}

#[test]
fn appendix_suite_passes() {
    let dir = TempDir::new().unwrap();
    let o = neelwall(&["experiment", "appendix"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("appendix.csv").exists());
    assert!(dir.path().join("appendix.verdicts.json").exists());
}

/// Pushes the phase below `2π` near `x = 20`, adding two spurious walls.
fn corrupt(src: &Path, dst: &Path) {
    let text = fs::read_to_string(src).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    let at20 = rows.iter().find(|(x, _)| (x - 20.0).abs() < 1e-9).unwrap().1;
    let depth = at20 - 2.0 * std::f64::consts::PI + 0.2;
    let mut out = String::from("x,phi,m1,m2\n");
    for (x, p) in rows {
        let q = p - depth * (-((x - 20.0) / 2.0).powi(2)).exp();
        out.push_str(&format!("{x:.15e},{q:.15e},{:.15e},{:.15e}\n", q.cos(), q.sin()));
    }
    fs::write(dst, out).unwrap();
}

#[test]
fn corrupted_profile_fails_structure_check() {
    let dir = TempDir::new().unwrap();
    let base = ["experiment", "structure", "--set", "h=0.9", "--set", "ell=2"];
    let mut args = base.to_vec();
    args.extend(["--set", "solve.half_width=60", "--set", "solve.point_count=601"]);
    let good = dir.path().join("good");
    let o = neelwall(&args, &good);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let bad_csv = dir.path().join("bad.csv");
    corrupt(&good.join("profiles/structure_h0.9_d2-a.csv"), &bad_csv);
    let set = format!("input_profile={}", bad_csv.display());
    let mut args = base.to_vec();
    args.extend(["--set", &set]);
    let o = neelwall(&args, &dir.path().join("bad"));
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let verdicts = fs::read_to_string(dir.path().join("bad/structure.verdicts.json")).unwrap();
    assert!(verdicts.contains("\"fail\"") || verdicts.contains("\"Fail\""), "{verdicts}");
}

#[test]
fn selftest_detects_wrong_normalisation() {
    let dir = TempDir::new().unwrap();
    let args = [
        "selftest",
        "--set",
        "spectral_normalisation=1.02",
        "--set",
        "bumps=4",
        "--set",
        "gradient_profiles=2",
    ];
    let o = neelwall(&args, dir.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn selftest_passes_from_an_empty_directory() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_neelwall"))
        .current_dir(dir.path())
        .arg("selftest")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("out/selftest.csv").exists());
}
