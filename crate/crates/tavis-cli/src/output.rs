//! CSV tables and JSON sidecars.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`) so a reader
//! recovers the exact doubles; absent values are empty fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use tavis::analysis::coherent_amplitudes;
use tavis::sweeps::{CriticalTable, RowDiagnostics, SweepMode, SweepResult};

use crate::config::RunConfig;
use crate::CliError;

/// Rectangular output: header plus rows of already formatted fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn sweep_table(result: &SweepResult) -> Table {
    let spec = &result.spec;
    let mut header: Vec<String> = [spec.sweep_variable(), "n_emitters", "omega_d", "omega_drive_amp", "cavity_pop", "ensemble_pop", "scattering"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if spec.include_classical {
        header.extend(["n_c", "n_ens", "n_c0"].map(String::from));
    }
    let diagonals = spec.mode == SweepMode::Diagonals;
    let width = if diagonals {
        result.rows.iter().filter_map(|r| r.observables.as_ref()).map(|o| o.diagonals.len()).max().unwrap_or(0)
    } else {
        0
    };
    if diagonals {
        header.extend(["alpha_c_sq", "alpha_c0_sq"].map(String::from));
        header.extend((0..width).map(|n| format!("rho_{n}G")));
    }
    let rows = result
        .rows
        .iter()
        .map(|r| {
            let o = r.observables.as_ref();
            let mut f = vec![
                num(r.x),
                r.n_emitters.to_string(),
                num(r.omega_d),
                num(r.omega_drive_amp),
                opt(o.map(|o| o.cavity_pop)),
                opt(o.map(|o| o.ensemble_pop)),
                opt(o.map(|o| o.scattering)),
            ];
            if spec.include_classical {
                f.extend([opt(r.classical.map(|c| c.n_c)), opt(r.classical.map(|c| c.n_ens)), opt(r.classical.map(|c| c.n_c0))]);
            }
            if diagonals {
                let amps = coherent_amplitudes(&spec.row_params(r.x, r.n_emitters)).ok();
                f.extend([opt(amps.map(|a| a.alpha_c_sq)), opt(amps.map(|a| a.alpha_c0_sq))]);
                let d = o.map(|o| o.diagonals.as_slice()).unwrap_or(&[]);
                f.extend((0..width).map(|n| opt(d.get(n).copied())));
            }
            f
        })
        .collect();
    Table { header, rows }
}

pub fn critical_table(table: &CriticalTable) -> Table {
    // the scanned parameter leads; the other one follows
    let gamma_scan = table.scan.name() == "gamma_e";
    let header = [
        table.scan.name(),
        "n_emitters",
        if gamma_scan { "g_col" } else { "gamma_e" },
        "cooperativity",
        "omega_cr",
        "omega_cr_exact",
        "onset",
        "slope_half",
        "slope_double",
        "max_slope",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows = table
        .cells
        .iter()
        .map(|c| {
            vec![
                num(c.scan_value),
                c.n_emitters.to_string(),
                num(if gamma_scan { c.g_col } else { c.gamma_e }),
                num(c.cooperativity),
                num(c.omega_cr),
                num(c.omega_cr_exact),
                opt(c.onset),
                opt(c.slope_half),
                opt(c.slope_double),
                opt(c.max_slope),
            ]
        })
        .collect();
    Table { header, rows }
}

/// Long-format curves behind a critical table.
pub fn critical_curves(table: &CriticalTable) -> Table {
    let header = [table.scan.name(), "n_emitters", "omega_drive_amp", "drive_over_gcol", "cavity_pop", "omega_cr"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = table
        .cells
        .iter()
        .flat_map(|c| {
            c.curve.iter().map(move |&[od, n]| {
                vec![num(c.scan_value), c.n_emitters.to_string(), num(od), num(od / c.g_col), num(n), num(c.omega_cr)]
            })
        })
        .collect();
    Table { header, rows }
}

pub fn write_csv(table: &Table, path: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io { path: path.to_path_buf(), source: e };
    let file = File::create(path).map_err(io)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| CliError::Io { path: path.to_path_buf(), source: e.into() };
    w.write_record(&table.header).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

#[derive(Serialize)]
struct RowMeta<'a> {
    x: f64,
    n_emitters: usize,
    #[serde(flatten)]
    diagnostics: &'a RowDiagnostics,
}

#[derive(Serialize)]
struct Sidecar<'a, T: Serialize> {
    version: &'a str,
    subcommand: &'a str,
    config: &'a RunConfig,
    complete: bool,
    wall_time_s: f64,
    #[serde(flatten)]
    body: T,
}

pub fn sweep_sidecar(cfg: &RunConfig, result: &SweepResult) -> serde_json::Value {
    #[derive(Serialize)]
    struct Body<'a> {
        spec: &'a tavis::sweeps::SweepSpec,
        rows: Vec<RowMeta<'a>>,
    }
    let rows = result
        .rows
        .iter()
        .map(|r| RowMeta { x: r.x, n_emitters: r.n_emitters, diagnostics: &r.diagnostics })
        .collect();
    let s = Sidecar {
        version: tavis::VERSION,
        subcommand: cfg.mode.name(),
        config: cfg,
        complete: result.complete,
        wall_time_s: result.wall_time_s,
        body: Body { spec: &result.spec, rows },
    };
    serde_json::to_value(s).expect("sidecar serializes")
}

pub fn table_sidecar(cfg: &RunConfig, table: &CriticalTable, wall_time_s: f64) -> serde_json::Value {
    #[derive(Serialize)]
    struct Cell<'a> {
        scan_value: f64,
        n_emitters: usize,
        error: &'a Option<String>,
    }
    #[derive(Serialize)]
    struct Body<'a> {
        options: &'a tavis::sweeps::TableOptions,
        cells: Vec<Cell<'a>>,
    }
    let cells = table
        .cells
        .iter()
        .map(|c| Cell { scan_value: c.scan_value, n_emitters: c.n_emitters, error: &c.error })
        .collect();
    let s = Sidecar {
        version: tavis::VERSION,
        subcommand: cfg.mode.name(),
        config: cfg,
        complete: table.complete,
        wall_time_s,
        body: Body { options: &table.options, cells },
    };
    serde_json::to_value(s).expect("sidecar serializes")
}

pub fn plain_sidecar(cfg: &RunConfig, wall_time_s: f64) -> serde_json::Value {
    let s = Sidecar { version: tavis::VERSION, subcommand: cfg.mode.name(), config: cfg, complete: true, wall_time_s, body: () };
    serde_json::to_value(s).expect("sidecar serializes")
}

pub fn write_json(value: &serde_json::Value, path: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io { path: path.to_path_buf(), source: e };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.into() })?;
    w.write_all(b"\n").map_err(io)?;
    w.flush().map_err(io)
}

/// `out.csv` → `out.json`; `out.csv` → `out.curves.csv` for `suffix = "curves"`.
pub fn sibling(path: &Path, suffix: Option<&str>, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match suffix {
        Some(s) => format!("{stem}.{s}.{ext}"),
        None => format!("{stem}.{ext}"),
    };
    path.with_file_name(name)
}
