use std::path::Path;
use std::process::{Command, Output};

use pidmap_core::gainmap::forward_map;
use pidmap_core::sim::{run_closed_loop, Controller, SimConfig};
use pidmap_core::{AuxParams, DisturbanceSignal, PlantParams, PlantState, ReferenceTrajectory};
use serde_json::Value;

fn pidmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pidmap")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn map_prints_gains() {
    let o = pidmap(&["map", "--kp", "2", "--kd", "1.5", "--T", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "KP = 17\nKI = 20\nKD = 11.5\n");
    let v = json(&pidmap(&["map", "--kp", "1", "--kd", "2", "--T", "0.1", "--json"]));
    assert_eq!((v["KP"].as_f64(), v["KI"].as_f64(), v["KD"].as_f64()), (Some(21.0), Some(10.0), Some(12.0)));
}

#[test]
fn map_rejects_out_of_domain_parameters() {
    assert_eq!(pidmap(&["map", "--kp", "1", "--kd", "0", "--T", "0.1"]).status.code(), Some(2));
    assert_eq!(pidmap(&["map", "--kp", "1", "--kd", "2"]).status.code(), Some(1));
    assert_eq!(pidmap(&["map", "--kp", "x", "--kd", "2", "--T", "1"]).status.code(), Some(1));
}

#[test]
fn invert_lists_both_candidates() {
    let v = json(&pidmap(&["invert", "--KP", "21", "--KI", "10", "--KD", "12", "--json"]));
    let cands = v["candidates"].as_array().unwrap();
    assert_eq!(cands.len(), 2);
    let ts: Vec<f64> = cands.iter().map(|c| c["aux"]["T"].as_f64().unwrap()).collect();
    assert!((ts[0] - 0.1).abs() < 1e-9 && (ts[1] - 1.0).abs() < 1e-9);
    assert!(cands.iter().all(|c| c["kp_admissible"] == true && c["kd_admissible"] == true));

    let text = stdout(&pidmap(&["invert", "--KP", "21", "--KI", "10", "--KD", "12"]));
    assert_eq!(text.matches("admissible").count(), 2);
}

#[test]
fn invert_requires_positive_integral_gain() {
    let o = pidmap(&["invert", "--KP", "21", "--KI", "0", "--KD", "12"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("KI=0 must be positive"));
}

#[test]
fn jacobian_has_three_rows() {
    let v = json(&pidmap(&["jacobian", "--kp", "1", "--kd", "2", "--T", "0.5", "--json"]));
    let rows = v["entries"].as_array().unwrap();
    assert_eq!(rows[0][2].as_f64(), Some(-8.0));
    assert_eq!(rows[1][2].as_f64(), Some(-4.0));
    assert_eq!(rows[2][2].as_f64(), Some(-4.0));
}

#[test]
fn stability_reports() {
    let text = stdout(&pidmap(&["stability", "--kp", "1", "--kd", "2", "--T", "0.1"]));
    assert!(text.contains("routh-hurwitz: stable"));
    assert!(text.contains("all tested T"));

    let v = json(&pidmap(&["stability", "--kp", "1", "--kd", "1", "--T", "0.1", "--a2", "5", "--json"]));
    let t_bar = v["threshold"]["Finite"].as_f64().unwrap();
    let exact = 1.0 / (2.0 + 2.0 * 2f64.sqrt());
    assert!((t_bar - exact).abs() <= 1e-4 * exact, "{t_bar}");
    assert_eq!(v["routh_stable"], v["eigen_stable"]);

    let o = pidmap(&["stability", "--kp", "1", "--kd", "2", "--T", "0.1", "--b", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("b in (-1, 1)"));
}

#[test]
fn lyapunov_bound_report() {
    let v = json(&pidmap(&["lyapunov-bound", "--kp", "1", "--kd", "2", "--T", "0.1", "--u-inf", "0.345", "--json"]));
    assert!(v["residual"].as_f64().unwrap() <= 1e-9);
    assert!(v["lambda_min"].as_f64().unwrap() > 0.0);
    assert!(v["bound"].as_f64().unwrap() > 0.0);
    let o = pidmap(&["lyapunov-bound", "--kp", "1", "--kd", "1", "--T", "1", "--a2", "5", "--u-inf", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pidmap(&["lyapunov-bound", "--kp", "1", "--kd", "2", "--T", "0.1", "--u-inf", "1", "--theta", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_constant_disturbance_is_rejected() {
    let v = json(&pidmap(&["simulate", "--preset", "table1-P1-d1"]));
    assert!(v["ultimate_bound"].as_f64().unwrap() <= 1e-3);
    assert_eq!(v["settled"], true);
}

#[test]
fn simulate_zero_preset_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("zero.csv");
    let o = pidmap(&["simulate", "--preset", "zero", "--t-end", "2", "--out-csv", path_str(&csv_path)]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_path(&csv_path).unwrap();
    let mut n = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        assert!(rec.iter().skip(1).all(|f| f.parse::<f64>().unwrap() == 0.0));
        n += 1;
    }
    assert_eq!(n, 2001);
}

#[test]
fn simulate_csv_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("run.csv");
    let json_path = dir.path().join("run.json");
    let o = pidmap(&[
        "simulate",
        "--preset",
        "table1-P2-d2",
        "--t-end",
        "3",
        "--out-csv",
        path_str(&csv_path),
        "--out-json",
        path_str(&json_path),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());

    let cfg = SimConfig {
        t_end: 3.0,
        ..SimConfig::new(
            PlantParams::nominal(DisturbanceSignal::cosine(0.345, 1.0)),
            Controller::Aux(AuxParams::new(6.0, 4.0, 0.4)),
            ReferenceTrajectory::elevation(),
            PlantState::new(-25.7, 0.0),
        )
    };
    let want = run_closed_loop(&cfg).unwrap();

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["t", "q", "qdot", "e1", "e2", "qI", "u", "u0", "dhat", "d", "dtilde"]
    );
    let columns = [
        &want.times, &want.q, &want.qdot, &want.e1, &want.e2, &want.qi, &want.u, &want.u0, &want.dhat, &want.d,
        &want.dtilde,
    ];
    let mut k = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        for (field, col) in rec.iter().zip(columns) {
            assert_eq!(field.parse::<f64>().unwrap().to_bits(), col[k].to_bits(), "row {k}");
        }
        k += 1;
    }
    assert_eq!(k, want.len());
    let raw = std::fs::read_to_string(&csv_path).unwrap();
    assert!(raw.ends_with('\n') && !raw.contains('\r'));

    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    for key in ["ultimate_bound", "settling_time", "max_control", "max_dhat", "settled"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn simulate_ratio_matches_reference() {
    let ub = |p: &str| json(&pidmap(&["simulate", "--preset", p]))["ultimate_bound"].as_f64().unwrap();
    let ratio = ub("table1-P1-d2") / ub("table1-P3-d2");
    assert!((ratio - 0.268).abs() <= 0.05, "{ratio}");
}

#[test]
fn simulate_config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.json");
    let out = dir.path().join("out.json");
    std::fs::write(
        &cfg_path,
        format!(r#"{{"preset": "table1-P1-d2", "T": 0.05, "t_end": 100, "out_json": "{}"}}"#, path_str(&out)),
    )
    .unwrap();
    let o = pidmap(&["simulate", "--config", path_str(&cfg_path), "--t-end", "30"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let with_file = v["ultimate_bound"].as_f64().unwrap();

    let direct = json(&pidmap(&["simulate", "--preset", "table1-P1-d2", "--T", "0.05", "--t-end", "30"]));
    assert_eq!(direct["ultimate_bound"].as_f64().unwrap(), with_file);

    std::fs::write(&cfg_path, r#"{"preset": "table1-P1-d2", "unknown_key": 1}"#).unwrap();
    assert_eq!(pidmap(&["simulate", "--config", path_str(&cfg_path)]).status.code(), Some(1));
}

#[test]
fn simulate_exit_codes() {
    assert_eq!(pidmap(&["simulate", "--preset", "nope"]).status.code(), Some(1));
    assert_eq!(pidmap(&["simulate"]).status.code(), Some(1));
    assert_eq!(pidmap(&["simulate", "--preset", "zero", "--b", "2"]).status.code(), Some(2));
    assert_eq!(pidmap(&["simulate", "--preset", "zero", "--dt", "0.1"]).status.code(), Some(2));
    let o = pidmap(&[
        "simulate", "--preset", "zero", "--kp", "1", "--kd", "1", "--T", "1", "--a2", "5", "--q0", "1", "--t-end",
        "300", "--dt", "0.01",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let list = stdout(&pidmap(&["simulate", "--list-presets"]));
    assert!(list.lines().any(|l| l == "table1-P3-d2"));
}

#[test]
fn table1_report() {
    let v = json(&pidmap(&["table1", "--json"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let aux = AuxParams::new(
            row["aux"]["kp"].as_f64().unwrap(),
            row["aux"]["kd"].as_f64().unwrap(),
            row["aux"]["T"].as_f64().unwrap(),
        );
        let g = forward_map(&aux).unwrap();
        assert_eq!(row["gains"]["KP"].as_f64(), Some(g.kp));
        assert_eq!(row["gains"]["KI"].as_f64(), Some(g.ki));
        assert_eq!(row["gains"]["KD"].as_f64(), Some(g.kd));
        assert!(row["ub_d1"].as_f64().unwrap() <= 1e-3);
    }
    assert_eq!(rows[0]["gains"]["KP"].as_f64(), Some(21.0));
    assert!((v["ratio_p1_p3"].as_f64().unwrap() - 0.268).abs() <= 0.05);
    assert!((v["ratio_p2_p3"].as_f64().unwrap() - 0.313).abs() <= 0.05);
    assert!((v["reference_ratio_p1_p3"].as_f64().unwrap() - 0.95 / 3.55).abs() < 1e-15);
    assert_eq!(v["all_settled"], true);
}

#[test]
fn sp_study_table() {
    let o = pidmap(&["sp-study"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("T,gapE,gapD,ubE,ubD,ratio_prev"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][5], "");
    for r in &rows[1..] {
        let ratio: f64 = r[5].parse().unwrap();
        assert!((0.35..=0.65).contains(&ratio), "{ratio}");
    }

    let single = stdout(&pidmap(&["sp-study", "--T-list", "0.1"]));
    assert!(single.lines().nth(1).unwrap().ends_with(','));

    assert_eq!(pidmap(&["sp-study", "--T-list", "0.1,0.2"]).status.code(), Some(2));
}

#[test]
fn sweep_t_marks_unstable_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = pidmap(&[
        "sweep-T", "--kp", "1", "--kd", "1", "--a2", "5", "--T-min", "0.1", "--T-max", "0.4", "--points", "2", "--t-end", "10",
        "--out-csv", path_str(&path),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(&path).unwrap();
    assert_eq!(&r.headers().unwrap()[4], "stable");
    let stable: Vec<String> = r.records().map(|rec| rec.unwrap()[4].to_string()).collect();
    assert_eq!(stable, ["true", "false"]);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(pidmap(&["--help"]).status.code(), Some(0));
    assert_eq!(pidmap(&["--version"]).status.code(), Some(0));
    assert_eq!(pidmap(&[]).status.code(), Some(1));
}
