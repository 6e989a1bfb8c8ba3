//! End-to-end tests of the command-line interface: exit codes, output
//! schemas, config-file precedence and byte determinism.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphere-euler"))
}

#[test]
fn verify_irrotational_passes_with_json_report() {
    let out = bin()
        .args(["verify", "--family", "irrotational", "--l", "2", "--m", "0", "--nlat", "64"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], serde_json::json!(true));
    assert!(doc["reports"]["system"]["equations"].is_array());
    assert!(doc["reports"]["stream_gauge"]["pass"] == serde_json::json!(true));
}

#[test]
fn verify_rejects_degenerate_parameters_with_exit_2() {
    let out = bin()
        .args(["verify", "--family", "rotational", "--alpha", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out2 = bin().args(["verify", "--family", "nosuch"]).output().unwrap();
    assert_eq!(out2.status.code(), Some(2));
}

#[test]
fn verify_fails_with_exit_1_at_impossible_tolerance() {
    // A valid solution cannot beat a 1e-30 tolerance on a finite grid.
    let out = bin()
        .args([
            "verify", "--family", "two-half-d", "--nlat", "32", "--nlon", "32", "--tol", "1e-30",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scan2d_starts_at_the_oscillator_span_and_is_deterministic() {
    let args = ["scan2d", "--alpha", "-1", "--B-range", "0:10:5"];
    let out1 = bin().args(args).output().unwrap();
    assert_eq!(out1.status.code(), Some(0));
    let text = String::from_utf8(out1.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("B,T"));
    let first: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    // Byte-identical reruns, including under a thread pool.
    let out2 = bin().args(args).output().unwrap();
    assert_eq!(out1.stdout, out2.stdout);
    let out3 = bin().args(args).env("SPHERE_EULER_THREADS", "4").output().unwrap();
    assert_eq!(out1.stdout, out3.stdout);
}

#[test]
fn scan_axisym_writes_defect_table() {
    let dir = std::env::temp_dir().join("sphere_euler_cli_test_scan");
    let _ = std::fs::create_dir_all(&dir);
    let path = dir.join("defects.csv");
    let out = bin()
        .args([
            "scan-axisym",
            "--alpha-range",
            "-2.2:-1.8:5",
            "--b",
            "0",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("alpha,B,defect,blowup_flag\n"));
    assert_eq!(text.lines().count(), 6);
    // The α = -2 row has a near-vanishing defect.
    let mid: Vec<f64> = text.lines().nth(3).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((mid[0] + 2.0).abs() < 1e-12 && mid[2].abs() < 1e-4, "{mid:?}");
}

#[test]
fn landau_table_scales_linearly() {
    let out = bin().args(["landau", "--nu-ladder", "1,0.5", "--c", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!((rows[0][1] / rows[1][1] - 2.0).abs() < 1e-9);
    assert!(rows.iter().all(|r| r[2] < 1e-12));
}

#[test]
fn family_json_round_trips_through_the_library() {
    let out = bin()
        .args([
            "family", "--family", "rotational", "--alpha", "-1", "--amp", "1", "--nlat", "16",
            "--nlon", "8", "--format", "json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let sol = sphere_euler::io::solution_from_json(&text).unwrap();
    assert_eq!(sol.alpha, -1.0);
    let rep = sphere_euler::residuals::check_system(
        &sol,
        1e-8,
        &sphere_euler::residuals::CheckOptions::spectral(),
    );
    assert!(rep.pass);
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = std::env::temp_dir().join("sphere_euler_cli_test_cfg");
    let _ = std::fs::create_dir_all(&dir);
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "nlat = 8\nnlon = 8\ntolerance = 1e-3\nformat = \"csv\"\n").unwrap();
    // File values apply...
    let out = bin()
        .args(["family", "--family", "radial", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let n_rows = String::from_utf8(out.stdout).unwrap().lines().count();
    assert_eq!(n_rows, 1 + 8 * 8);
    // ...and flags win over them.
    let out2 = bin()
        .args([
            "family", "--family", "radial", "--config", cfg.to_str().unwrap(), "--nlat", "4",
            "--nlon", "4",
        ])
        .output()
        .unwrap();
    let n_rows2 = String::from_utf8(out2.stdout).unwrap().lines().count();
    assert_eq!(n_rows2, 1 + 16);
    // Unknown config keys are a usage error.
    std::fs::write(&cfg, "nlat = 8\nbogus = 1\n").unwrap();
    let out3 = bin()
        .args(["family", "--family", "radial", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out3.status.code(), Some(2));
}

#[test]
fn flux_reports_vanishing_moments() {
    let out = bin()
        .args(["flux", "--family", "shear", "--alpha", "-1", "--n-max", "3", "--nlat", "32", "--nlon", "32"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("flux"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,f_moment,omega_moment\n"));
    for line in text.lines().skip(1) {
        let row: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(row[1].abs() < 1e-9 && row[2].abs() < 1e-9, "{row:?}");
    }
}
