use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symbol-lab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn list_symbols_prints_the_catalog() {
    let out = bin(&["list", "symbols"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().any(|l| l.starts_with("q2_2d:")));
}

#[test]
fn describe_known_and_unknown() {
    let out = bin(&["describe", "p2_2d"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("2 levels, 4x4 blocks"));
    let out = bin(&["describe", "p3_2d"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert!(v["failures"][0]["detail"].as_str().unwrap().contains("p2_2d"));
}

#[test]
fn run_writes_the_csv_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"kind": "acs_1d", "n": [20, 40], "t": [2, 4, 8]}"#);
    let out_dir = dir.path().join("out");
    let out = bin(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let acs = fs::read_to_string(out_dir.join("acs.csv")).unwrap();
    assert!(acs.starts_with("n,t,N,gap,rank_witness,norm_witness,m_fraction\n"));
    let spectral = fs::read_to_string(out_dir.join("spectral_n20_t2.csv")).unwrap();
    assert!(spectral.starts_with("j,lambda_j,nearest_sample,min_dist\n"));
    assert_eq!(spectral.lines().count(), 21);
    let functional = fs::read_to_string(out_dir.join("functional_n40_t8.csv")).unwrap();
    assert!(functional.starts_with("F_id,lhs,rhs,gap\n"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], "1");
    assert_eq!(manifest["config"]["n"], serde_json::json!([20, 40]));
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), r#"{"kind": "domain_distribution", "symbol": "q1_2d", "n": [6, 10], "t": [2, 4]}"#);
    let one = dir.path().join("one");
    let four = dir.path().join("four");
    assert!(bin(&["run", &cfg, "--out", one.to_str().unwrap(), "--workers", "1"]).status.success());
    assert!(bin(&["run", &cfg, "--out", four.to_str().unwrap(), "--workers", "4"]).status.success());
    let mut names: Vec<_> = fs::read_dir(&one).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "mask_n10.csv"));
    for name in names.iter().filter(|n| n.to_str().unwrap().ends_with(".csv")) {
        assert_eq!(fs::read(one.join(name)).unwrap(), fs::read(four.join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn budget_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"kind": "conditioning", "n": [8, 16]}"#);
    let out = bin(&["run", &cfg, "--out", dir.path().join("o").to_str().unwrap(), "--budget", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("budget"));
}

#[test]
fn failed_soft_checks_exit_nonzero_with_a_list() {
    // a weak-star decrease check fails for the kinked hat at these sizes
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"kind": "toeplitz_distribution", "symbol": "p1_1d", "n": [8, 16]}"#);
    let out = bin(&["run", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    let names: Vec<&str> = v["failures"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"weak_star_decrease[hat(c=2,w=1)]"), "{names:?}");
}
