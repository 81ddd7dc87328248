use std::path::Path;
use std::process::{Command, Output};

use focklab_cli::Table;

fn focklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_focklab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> Table {
    Table::read_path(path).unwrap()
}

#[test]
fn r0_ginibre_column_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r0.csv");
    let o = focklab(&["r0", "--k", "1", "--c", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read(&out);
    assert_eq!(t.headers, ["r", "R0", "deltaQ0", "rel_err"]);
    assert_eq!(t.rows.len(), 101);
    for v in t.column("R0").unwrap() {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn csv_round_trip_through_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r0.csv");
    let o = focklab(&["r0", "--k", "2", "--c", "0", "--amplitude", "0.5", "--grid", "0:3:31", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let t = read(&out);
    let mut again = Vec::new();
    t.write_to(&mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text);
}

#[test]
fn stdout_without_out_flag() {
    let o = focklab(&["r0", "--k", "1", "--c", "1", "--amplitude", "2", "--grid", "0:1:3"]);
    assert!(o.status.success());
    let t = Table::read_from(o.stdout.as_slice()).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert_eq!(t.rows[0][1], 0.0);
}

#[test]
fn hermitian_r0_has_theta_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("q.toml");
    std::fs::write(&cfg, "kind = \"hermitian\"\nc = 0.0\nhermitian_coeffs = [[1, 1, 1.0, 0.0], [2, 0, 0.3, 0.0]]\n").unwrap();
    let out = dir.path().join("r0.csv");
    let o = focklab(&[
        "r0",
        "--coeffs-file",
        cfg.to_str().unwrap(),
        "--grid",
        "0:1:3",
        "--angles",
        "4",
        "--truncation",
        "24",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read(&out);
    assert_eq!(t.headers, ["r", "theta", "R0", "deltaQ0", "rel_err"]);
    assert_eq!(t.rows.len(), 12);
    // truncation error at the origin is about 1e-6 for N = 24
    assert!((t.rows[0][2] - 1.0).abs() < 1e-5);
    assert!(t.rows[0][2] < 1.0);
}

#[test]
fn verify_thm1_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("thm1.json");
    let o = focklab(&["verify-thm1", "--k", "1", "--c", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((v["slope"].as_f64().unwrap() + 1.0).abs() < 1e-6);

    let o = focklab(&["verify-thm1", "--k", "1", "--c", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["identically_zero"], true);

    let o = focklab(&["verify-thm1", "--k", "2", "--c", "0"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["slope"].as_f64().unwrap() + 1.0).abs() < 0.05, "{}", v["slope"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_thm1_fit_failure_exit_code() {
    // two grid points cannot support the fit
    let o = focklab(&["verify-thm1", "--k", "1", "--c", "1", "--grid", "1.5:2:2"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn rescale_reports_decreasing_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rescale.csv");
    let o = focklab(&[
        "rescale",
        "--k",
        "1",
        "--c",
        "0",
        "--n-list",
        "16,64,256",
        "--grid",
        "0:3:31",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read(&out);
    assert_eq!(t.headers, ["z", "R0", "R_16", "R_64", "R_256"]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rescale.json")).unwrap()).unwrap();
    let e: Vec<f64> = v["sup_error"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(e[1] < e[0] && e[2] < e[1], "{e:?}");
    assert_eq!(v["truncated_series_identity"], true);
}

#[test]
fn rescale_rejects_origin_for_negative_c() {
    let o = focklab(&["rescale", "--k", "1", "--c", "-0.5", "--n-list", "16", "--grid", "0:2:5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rejected"));
}

#[test]
fn equilibrium_ginibre_numbers() {
    let o = focklab(&["equilibrium", "--k", "1", "--c", "0", "--n", "100"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let rq: f64 = lines.next().unwrap().trim_start_matches("R_Q = ").parse().unwrap();
    let tau: f64 = lines.next().unwrap().trim_start_matches("tau0 = ").parse().unwrap();
    assert!((rq - 1.0).abs() < 1e-12 && (tau - 1.0).abs() < 1e-12);
    let rest: String = lines.map(|l| format!("{l}\n")).collect();
    let t = Table::read_from(rest.as_bytes()).unwrap();
    assert!((t.rows[0][1] - 0.1).abs() < 1e-12);
}

#[test]
fn sample_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = focklab(&[
            "sample", "--k", "1", "--c", "1", "--n", "6", "--seed", "17", "--sweeps", "4000", "--burn-in", "500", "--chains", "2",
            "--batch-size", "500", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(&out).unwrap(), std::fs::read(out.with_extension("json")).unwrap())
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn fig1_writes_svg_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.svg");
    let o = focklab(&["fig1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(&out).unwrap();
    assert!(svg.matches("<polyline").count() >= 3);
    assert_eq!(read(&out.with_extension("csv")).rows.len(), 301);
}

#[test]
fn gram_reports_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("q.toml");
    std::fs::write(&cfg, "kind = \"hermitian\"\nhermitian_coeffs = [[2, 2, 1.0, 0.0], [4, 0, 0.2, 0.0]]\n").unwrap();
    let out = dir.path().join("gram.csv");
    let o = focklab(&["gram", "--coeffs-file", cfg.to_str().unwrap(), "--truncation", "20", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert!(v["condition"].as_f64().unwrap() >= 1.0);
    assert_eq!(v["k"], 2);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"radial\"\nradial_coeffs = [1.0]\nbogus = 3\n").unwrap();
    assert_eq!(focklab(&["r0", "--coeffs-file", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(focklab(&["r0", "--coeffs-file", "/nonexistent.toml"]).status.code(), Some(2));
    assert_eq!(focklab(&["r0", "--k", "1", "--c", "-2"]).status.code(), Some(2));
    assert_eq!(focklab(&["r0", "--grid", "3:1:4"]).status.code(), Some(2));
    assert_eq!(focklab(&["r0", "--amplitude", "-1"]).status.code(), Some(2));
    // |z|^4 + Re(z^4) is only semidefinite
    std::fs::write(&cfg, "kind = \"hermitian\"\nhermitian_coeffs = [[2, 2, 1.0, 0.0], [4, 0, 0.5, 0.0]]\n").unwrap();
    assert_eq!(focklab(&["gram", "--coeffs-file", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn ill_conditioned_moment_matrix_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("q.toml");
    std::fs::write(&cfg, "kind = \"hermitian\"\nhermitian_coeffs = [[1, 1, 1.0, 0.0], [2, 0, 0.45, 0.0]]\n").unwrap();
    let o = focklab(&["gram", "--coeffs-file", cfg.to_str().unwrap(), "--truncation", "120"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
