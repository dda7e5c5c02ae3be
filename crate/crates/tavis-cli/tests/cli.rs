use std::path::Path;
use std::process::Command;

use tavis::sweeps::{run_sweep, Grid, SweepMode, SweepSpec};
use tavis_cli::output::{num, sweep_table, write_csv};
use tavis_cli::{EXIT_CONFIG, EXIT_IO, EXIT_SOLVE, EXIT_USAGE};

fn tavis(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tavis")).current_dir(dir).args(args).output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn number_format_round_trips() {
    for v in [0.1, 1.0 / 3.0, 6.2188667980920513e-12, 1e300, -2.5e-308, 0.0] {
        let s = num(v);
        assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        assert!(!s.contains(','));
    }
}

#[test]
fn two_row_sweep_writes_three_lf_lines() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SweepSpec::new(SweepMode::Drive, Default::default(), Grid::log(1e-3, 1e-2, 2), vec![1]);
    let result = run_sweep(&spec).unwrap();
    let path = dir.path().join("two.csv");
    write_csv(&sweep_table(&result), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 3);
    let (header, rows) = read_csv(&path);
    assert_eq!(header[0], "drive_over_gcol");
    // exact double round trip through a generic reader
    for (row, r) in rows.iter().zip(&result.rows) {
        assert_eq!(row[0].parse::<f64>().unwrap(), r.x);
        let o = r.observables.as_ref().unwrap();
        let col = |name: &str| row[header.iter().position(|h| h == name).unwrap()].parse::<f64>().unwrap();
        assert_eq!(col("cavity_pop"), o.cavity_pop);
        assert_eq!(col("ensemble_pop"), o.ensemble_pop);
        assert_eq!(col("n_c"), r.classical.unwrap().n_c);
    }
}

#[test]
fn diagonals_mode_adds_rho_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = tavis(dir.path(), &["diagonals", "--grid", "1e-3:1e-1:3:log", "--n", "1,2", "--out", "d.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("d.csv"));
    assert_eq!(rows.len(), 6);
    let first = header.iter().position(|h| h == "rho_0G").unwrap();
    for (k, h) in header[first..].iter().enumerate() {
        assert_eq!(h, &format!("rho_{k}G"));
    }
    for row in &rows {
        let rho0: f64 = row[first].parse().unwrap();
        assert!(rho0 > 0.9 && rho0 <= 1.0);
    }
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert_eq!(meta["version"], tavis::VERSION);
    assert_eq!(meta["subcommand"], "diagonals");
    assert_eq!(meta["complete"], true);
    assert_eq!(meta["rows"].as_array().unwrap().len(), 6);
    assert!(meta["rows"][0]["residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(meta["spec"]["grid"]["count"], 3);
}

#[test]
fn spectrum_defaults_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "n = [3]\n[params]\ndrive_over_gcol = 0.1\n").unwrap();
    let out = tavis(
        dir.path(),
        &["spectrum", "--config", "run.toml", "--n", "1", "--grid", "0.98:1.02:5:lin", "--nmax", "6", "--threads", "2", "--out", "s.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("s.csv"));
    assert_eq!(header[0], "omega_d");
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[1] == "1"));
    let od: f64 = rows[0][3].parse().unwrap();
    assert!((od - 0.003).abs() < 1e-15);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(meta["rows"][0]["n_max"], 6);
    assert_eq!(meta["config"]["threads"], 2);
}

#[test]
fn classical_subcommand_is_analytic() {
    let dir = tempfile::tempdir().unwrap();
    let out = tavis(dir.path(), &["classical", "--grid", "0.99:1.01:3:lin", "--n", "1,2", "--out", "c.csv"]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("c.csv"));
    assert_eq!(header, ["omega_d", "n_emitters", "n_c", "n_ens", "n_c0"]);
    assert_eq!(rows.len(), 6);
    let n_c: f64 = rows[1][2].parse().unwrap();
    assert!((n_c / 3.886e-7 - 1.0).abs() < 1e-3);
}

#[test]
fn critical_table_writes_table_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = tavis(
        dir.path(),
        &["critical-table", "--n", "1", "--set", "table.values=[0.0003]", "--set", "table.count=9", "--out", "t.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("t.csv"));
    assert_eq!(header[..4], ["gamma_e", "n_emitters", "g_col", "cooperativity"]);
    assert_eq!(rows.len(), 1);
    let c: f64 = rows[0][3].parse().unwrap();
    assert!((c - 400.0).abs() < 1e-9);
    let (_, curve) = read_csv(&dir.path().join("t.curves.csv"));
    assert_eq!(curve.len(), 9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| tavis(dir.path(), args).status.code().unwrap();
    assert_eq!(code(&["spectrum", "--grid", "1:2"]), EXIT_USAGE);
    assert_eq!(code(&["nonsense"]), EXIT_USAGE);
    assert_eq!(code(&["spectrum", "--set", "params.gamma_e=-1"]), EXIT_CONFIG);
    let out = tavis(dir.path(), &["spectrum", "--set", "params.gamma_e=-1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma_e"));
    assert_eq!(code(&["spectrum", "--config", "missing.toml"]), EXIT_IO);
    assert_eq!(code(&["classical", "--out", "no/such/dir/x.csv"]), EXIT_IO);
    // a row that cannot be truncated: the sweep completes, reports, and fails
    let out = tavis(
        dir.path(),
        &["drive-sweep", "--grid", "1e-3:10:2:log", "--set", "frame.kind=lab", "--set", "truncation.cap=8", "--out", "f.csv"],
    );
    assert_eq!(out.status.code().unwrap(), EXIT_SOLVE);
    let (_, rows) = read_csv(&dir.path().join("f.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows[1][4].is_empty() && !rows[0][4].is_empty());
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.json")).unwrap()).unwrap();
    assert_eq!(meta["complete"], false);
    assert!(meta["rows"][1]["error"].as_str().unwrap().contains("prior bound"));
}
