use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn permix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permix"))
        .args(args)
        .env_remove("PERMIX_WORKERS")
        .output()
        .expect("run permix")
}

fn permix_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permix"))
        .current_dir(dir)
        .args(args)
        .env_remove("PERMIX_WORKERS")
        .output()
        .expect("run permix")
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn theta_prints_json() {
    let out = permix(&["theta", "--class", "2:1", "--c", "2"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["theta"].as_f64().unwrap() - 0.796_812_1).abs() < 1e-7);
    assert!(v["residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["c_gamma"].as_f64().unwrap(), 1.0);
}

#[test]
fn walk_of_length_zero_is_identity() {
    let out = permix(&["walk", "--n", "3", "--class", "2:1", "--t", "0", "--seed", "1"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["permutation"], serde_json::json!([1, 2, 3]));
}

#[test]
fn walk_is_reproducible() {
    let args = ["walk", "--n", "30", "--class", "3:1", "--t", "25", "--seed", "4"];
    let a = permix(&args);
    let b = permix(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let mut images: Vec<u64> = v["permutation"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    images.sort_unstable();
    assert_eq!(images, (1..=30).collect::<Vec<_>>());
    let fine = permix(&["walk", "--n", "30", "--class", "3:1", "--fine", "50", "--mode", "relaxed", "--seed", "4"]);
    assert!(fine.status.success());
    let v: Value = serde_json::from_slice(&fine.stdout).unwrap();
    assert_eq!(v["fine_steps"], 50);
}

#[test]
fn unknown_flag_exits_2_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = permix_in(dir.path(), &["giant", "--n", "100", "--c", "2", "--frobnicate", "--out", "g.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(files_in(dir.path()).is_empty());
}

#[test]
fn invalid_config_exits_2_without_files() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["giant", "--c", "2", "--out", "g.csv"][..],
        &["giant", "--n", "100", "--c", "-1", "--out", "g.csv"],
        &["walk", "--n", "3", "--class", "4:1", "--t", "2", "--out", "w.json"],
        &["curvature", "--n", "100", "--c", "1", "--out", "c.csv"],
    ] {
        let out = permix_in(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(files_in(dir.path()).is_empty());
}

#[test]
fn resource_limit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = permix_in(dir.path(), &["tvprofile", "--n", "60", "--tmax", "3", "--out", "tv.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(files_in(dir.path()).is_empty());
}

#[test]
fn outputs_carry_a_sidecar_that_reproduces_them() {
    let dir = tempfile::tempdir().unwrap();
    let out = permix_in(
        dir.path(),
        &["giant", "--n", "2000", "--c", "0.5,2", "--reps", "4", "--seed", "8", "--out", "g.csv"],
    );
    assert!(out.status.success());
    assert_eq!(files_in(dir.path()), vec!["g.csv", "g.csv.meta.json"]);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["seed"], 8);
    assert_eq!(meta["config"]["experiment"], "giant");
    assert!(meta["version"].is_string());
    assert!(meta["wall_time_seconds"].as_f64().unwrap() >= 0.0);

    let csv = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("seed,n,c,largest_frac,second_largest,fraction_large"));
    assert_eq!(lines.count(), 8);
    assert!(!csv.contains('\r'));

    let rerun = permix_in(dir.path(), &["run", "--config", "g.csv.meta.json", "--out", "again.csv"]);
    assert!(rerun.status.success());
    assert_eq!(std::fs::read(dir.path().join("again.csv")).unwrap(), csv.as_bytes());
}

#[test]
fn env_sets_default_workers() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_permix"))
        .current_dir(dir.path())
        .args(["fragprob", "--n", "200", "--c", "2", "--reps", "20", "--out", "f.csv"])
        .env("PERMIX_WORKERS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["workers"], 3);
    let bad = Command::new(env!("CARGO_BIN_EXE_permix"))
        .args(["theta", "--c", "2"])
        .env("PERMIX_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn csv_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 5] = [
        (
            &["curvature", "--n", "200", "--c", "2", "--delta", "0.2", "--reps", "5"],
            "replicate,c,final_distance,A_delta_held,matched_at_s2",
        ),
        (&["tvprofile", "--n", "6", "--tmax", "4"], "t,tv_coset,tv_poissonized"),
        (&["pdtest", "--n", "300", "--c", "2", "--reps", "3", "--m", "4"], "replicate,coord_index,value"),
        (&["fragprob", "--n", "100", "--c", "2", "--reps", "5"], "replicate,c,fragments"),
        (
            &["curvature", "--n", "200", "--c", "2", "--reps", "5", "--estimator", "upper"],
            "replicate,c,pair_increment,single_increment,fragments",
        ),
    ];
    for (args, header) in cases {
        let out = permix_in(dir.path(), args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(String::from_utf8_lossy(&out.stdout).lines().next(), Some(header));
    }
    let tv = permix_in(dir.path(), &["tvprofile", "--n", "6", "--tmax", "4"]);
    assert_eq!(String::from_utf8_lossy(&tv.stdout).lines().count(), 6);
    let json = permix_in(dir.path(), &["tvprofile", "--n", "6", "--tmax", "4", "--format", "json"]);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
    assert!((v[0]["tv_coset"].as_f64().unwrap() - (1.0 - 1.0 / 360.0)).abs() < 1e-12);
}

#[test]
fn plot_structure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tv.csv"), "t,tv_coset,tv_poissonized\n0,1,1\n1,0.5,0.4\n2,0.2,0.1\n").unwrap();
    let out = permix_in(dir.path(), &["plot", "--csv", "tv.csv", "--kind", "tvprofile", "--out", "tv.svg"]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("tv.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="data-point""#).count(), 3);
    let again = permix_in(dir.path(), &["plot", "--csv", "tv.csv", "--kind", "tvprofile", "--out", "tv2.svg"]);
    assert!(again.status.success());
    assert_eq!(svg, std::fs::read_to_string(dir.path().join("tv2.svg")).unwrap());

    let g = permix_in(dir.path(), &["giant", "--n", "3000", "--c", "0.5,1,2,3", "--reps", "2", "--out", "g.csv"]);
    assert!(g.status.success());
    let out = permix_in(dir.path(), &["plot", "--csv", "g.csv", "--kind", "giant_vs_c"]);
    assert!(out.status.success());
    let svg = String::from_utf8(out.stdout).unwrap();
    assert_eq!(svg.matches(r#"class="data-point""#).count(), 4);
    assert_eq!(svg.matches(r#"class="overlay""#).count(), 1);
}

#[test]
fn plot_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "").unwrap();
    std::fs::write(dir.path().join("g.csv"), "seed,n,c,largest_frac,second_largest,fraction_large\n1,10,1,0.1,1,0\n").unwrap();
    for args in [
        &["plot", "--csv", "empty.csv", "--kind", "tvprofile", "--out", "a.svg"][..],
        &["plot", "--csv", "g.csv", "--kind", "tvprofile", "--out", "b.svg"],
        &["plot", "--csv", "missing.csv", "--kind", "tvprofile", "--out", "c.svg"],
        &["plot", "--csv", "g.csv", "--kind", "pie", "--out", "d.svg"],
    ] {
        let out = permix_in(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert_eq!(files_in(dir.path()), vec!["empty.csv", "g.csv"]);
}
