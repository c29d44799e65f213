use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn geoexplore(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_geoexplore"));
    cmd.args(args).arg("--out").arg(dir);
    if let Some(json) = config {
        let path = dir.with_extension("json");
        fs::write(&path, json).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn csv_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

#[test]
fn sim1_writes_documented_csv_and_svg() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let result = geoexplore(&["sim1"], None, &out);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));

    let euclid = csv_lines(&out.join("trajectory_euclidean.csv"));
    assert!(euclid[0].starts_with("# config: {"));
    assert_eq!(
        euclid[1],
        "step,x,y,chosen_move_angle_or_idle,value_idle,value_0,value_1,value_2,value_3,value_4,value_5,value_6,value_7"
    );
    // 20 steps plus the final position
    assert_eq!(euclid.len(), 2 + 21);
    for row in &euclid[2..] {
        assert!(row.starts_with(&format!("{},0.0,0.0,", row.split(',').next().unwrap())));
    }
    assert!(euclid[2..22].iter().all(|r| r.split(',').nth(3) == Some("idle")));

    let proj = csv_lines(&out.join("trajectory_projective.csv"));
    let ys: Vec<f64> = proj[2..].iter().map(|r| r.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(ys.windows(2).all(|w| w[1] > w[0]));
    let last: Vec<&str> = proj.last().unwrap().split(',').collect();
    assert!(last[3..].iter().all(|f| f.is_empty()));

    let svg = fs::read_to_string(out.join("trajectories.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<!-- {") && svg.contains("polyline"));
}

#[test]
fn sim1_rerun_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = r#"{"geometry": "projective", "seed": 7, "observation_noise": true}"#;
    let names = ["trajectory_projective.csv", "trajectories.svg"];
    assert!(geoexplore(&["sim1"], Some(cfg), &out).status.success());
    let first: Vec<Vec<u8>> = names.iter().map(|n| fs::read(out.join(n)).unwrap()).collect();
    assert!(geoexplore(&["sim1"], Some(cfg), &out).status.success());
    for (name, bytes) in names.iter().zip(first) {
        assert_eq!(fs::read(out.join(name)).unwrap(), bytes, "{name}");
    }
}

#[test]
fn zero_iterations_leave_header_and_initial_row() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let result = geoexplore(&["sim1"], Some(r#"{"iterations": 0}"#), &out);
    assert!(result.status.success());
    let lines = csv_lines(&out.join("trajectory_projective.csv"));
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[2], "0,0.0,0.0,,,,,,,,,,");
}

#[test]
fn three_dimensional_trajectories_have_a_z_column() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = r#"{"dim": 3, "start": [0, 0, 0], "object": [0, 2, 0], "iterations": 2}"#;
    assert!(geoexplore(&["sim1"], Some(cfg), &out).status.success());
    let lines = csv_lines(&out.join("trajectory_euclidean.csv"));
    assert!(lines[1].starts_with("step,x,y,z,chosen_move_angle_or_idle,"));
}

#[test]
fn sim2_grid_rows() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = r#"{"grid": {"cells": 4, "extent": 2.0}, "integration": {"sample_count": 5000}}"#;
    let result = geoexplore(&["sim2"], Some(cfg), &out);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    for kind in ["euclidean", "projective"] {
        let lines = csv_lines(&out.join(format!("grid_{kind}.csv")));
        assert_eq!(lines[1], "obj_x,obj_y,direction_bin,value");
        // 16 cells less the four centred at (±0.5, ±0.5), nine moves each
        assert_eq!(lines.len(), 2 + 12 * 9);
        assert!(lines[2].starts_with("-1.5,-1.5,idle,"));
    }
    let svg = fs::read_to_string(out.join("epistemic_by_direction.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn oracle_report_has_one_row_per_check() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = r#"{"oracle": {"epsilon_sweep": [0.1], "mi_instances": 5, "halving_seeds": 2}}"#;
    let result = geoexplore(&["oracle"], Some(cfg), &out);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stdout));
    let lines = csv_lines(&out.join("oracle_report.csv"));
    assert_eq!(lines[1], "name,statistic,threshold,pass");
    // MI (3) + precondition + ball checks at the default radius and one sweep
    // radius (2 × 3) + halving + Jacobian ratio and ranking
    assert_eq!(lines.len() - 2, 3 + 1 + 6 + 1 + 2);
    assert!(lines[2..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn oracle_rejects_oversized_epsilon() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = r#"{"oracle": {"epsilon_factor": 10.0, "epsilon_sweep": [], "mi_instances": 2, "halving_seeds": 1}}"#;
    let result = geoexplore(&["oracle"], Some(cfg), &out);
    assert_eq!(result.status.code(), Some(1));
    let report = fs::read_to_string(out.join("oracle_report.csv")).unwrap();
    let row = report.lines().find(|l| l.starts_with("epsilon_precondition,")).unwrap();
    assert!(row.ends_with(",false"), "{row}");
}

#[test]
fn check_suite_passes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let result = geoexplore(&["check", "--seed", "3"], None, &out);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stdout));
    assert!(out.join("check_report.csv").exists());
}

#[test]
fn bad_configuration_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    for cfg in [r#"{"gamma": -1}"#, r#"{"bogus": 1}"#, "[1, 2"] {
        assert_eq!(geoexplore(&["sim1"], Some(cfg), &out).status.code(), Some(2), "{cfg}");
    }
    let missing = Command::new(env!("CARGO_BIN_EXE_geoexplore"))
        .args(["sim1", "--config"])
        .arg(tmp.path().join("nope.json"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let flag = Command::new(env!("CARGO_BIN_EXE_geoexplore"))
        .args(["sim1", "--geometry", "spherical"])
        .output()
        .unwrap();
    assert_eq!(flag.status.code(), Some(2));
}

#[test]
fn geometry_flag_limits_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let result = geoexplore(&["sim1", "--geometry", "euclidean"], None, &out);
    assert!(result.status.success());
    assert!(out.join("trajectory_euclidean.csv").exists());
    assert!(!out.join("trajectory_projective.csv").exists());
}
