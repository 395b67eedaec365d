use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_poisson-sharp"))
}

fn run(args: &[&str]) -> i32 {
    bin().args(args).output().unwrap().status.code().unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn default_verify_on_square_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["verify", "--domain", "square:1", "--h", "1/64", "--out", out]), 0);
    let text = std::fs::read_to_string(dir.path().join("reports.jsonl")).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["id"].is_string() && v["pass"].is_boolean());
    }
    assert!(dir.path().join("constants_discrepancy.csv").exists());
    assert!(dir.path().join("eigen_report.csv").exists());
}

#[test]
fn empty_suite_list_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["verify", "--suites", "", "--out", dir.path().to_str().unwrap()]), 0);
    assert_eq!(std::fs::read_to_string(dir.path().join("reports.jsonl")).unwrap(), "");
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["sigma", "--domain", "square:1", "--h", "1/16", "--betas", "0.5,1.5", "--out", out]), 2);
    assert_eq!(run(&["eigen", "--kmax", "0", "--h", "1/16", "--out", out]), 2);
    assert_eq!(run(&["verify", "--domain", "hexagon:1", "--out", out]), 2);
    assert_eq!(run(&["verify", "--suites", "sigma,colour", "--out", out]), 2);
    assert_eq!(run(&["verify", "--h", "-1", "--out", out]), 2);
    assert_eq!(run(&["verify", "--domain", "disk:1", "--h", "0.5", "--out", out]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
}

#[test]
fn unreachable_tolerance_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&["talenti", "--h", "1/16", "--rtol", "1e-30", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 3);
}

#[test]
fn sigma_command_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["sigma", "--domain", "disk:1", "--h", "1/32", "--betas", "4", "--out", out]), 0);
    let rows = csv_rows(&dir.path().join("sigma_curve.csv"));
    assert_eq!(rows.len(), 5);
    let col = |r: &csv::StringRecord, i: usize| r[i].parse::<f64>().unwrap();
    assert_eq!((col(&rows[0], 0), col(&rows[0], 1)), (0.0, 0.0));
    assert!(rows.windows(2).all(|w| col(&w[1], 1) >= col(&w[0], 1)));
    assert!((col(&rows[4], 1) - 0.25).abs() < 5e-3);
    let pgm = std::fs::read_to_string(dir.path().join("u_hat_04.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n"));
    assert!(dir.path().join("sigma_curve.json").exists());
    assert!(dir.path().join("constants_discrepancy.csv").exists());
}

#[test]
fn eigen_command_on_square() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["eigen", "--domain", "square:1", "--h", "1/64", "--kmax", "4", "--out", out]), 0);
    let rows = csv_rows(&dir.path().join("eigen_report.csv"));
    let pi2 = std::f64::consts::PI.powi(2);
    for (r, want) in rows.iter().zip([2.0 * pi2, 5.0 * pi2, 5.0 * pi2, 8.0 * pi2]) {
        let lambda: f64 = r[1].parse().unwrap();
        assert!((lambda / want - 1.0).abs() < 0.01, "{lambda} vs {want}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out");
    std::fs::write(&cfg, format!("domain = disk:1\nh = 1/16\nsuites = green\nout = {}\n", out.display())).unwrap();
    assert_eq!(run(&["verify", "--config", cfg.to_str().unwrap(), "--h", "1/32"]), 0);
    let text = std::fs::read_to_string(out.join("reports.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["context"]["h"], 1.0 / 32.0);
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec!["verify".to_string(), "--domain".into(), "disk:1".into(), "--h".into(), "1/24".into(), "--seed".into(),
             "77".into(), "--kmax".into(), "2".into(), "--out".into(), out.display().to_string()]
    };
    assert_eq!(bin().args(args(a.path())).env("POISSON_SHARP_THREADS", "1").output().unwrap().status.code(), Some(0));
    assert_eq!(bin().args(args(b.path())).env("POISSON_SHARP_THREADS", "2").output().unwrap().status.code(), Some(0));
    for name in ["reports.jsonl", "summary.csv", "sigma_curve.csv", "talenti_profile.csv", "green_profile.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}
