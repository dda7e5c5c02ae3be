use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use tavis::classical;
use tavis::sweeps::{self, Execution, Grid, Spacing};

use crate::config::{parse_config, apply_overrides, Mode, Nmax, RunConfig};
use crate::output::{self, Table};
use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "tavis", version, about = "Steady states of the driven dissipative Tavis-Cummings model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// CSV output path; the JSON sidecar goes next to it.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads for the sweep.
    #[arg(long, global = true, value_name = "K")]
    pub threads: Option<usize>,
    /// Emitter counts, comma separated.
    #[arg(long, global = true, value_name = "N[,N...]", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Fock cutoff: an integer or `auto`.
    #[arg(long, global = true, value_name = "M|auto")]
    pub nmax: Option<Nmax>,
    /// Sweep grid as start:stop:count:log|lin.
    #[arg(long, global = true, value_name = "SPEC", value_parser = parse_grid)]
    pub grid: Option<Grid>,
    /// Override any configuration key, e.g. `--set params.g_col=0.06`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Cavity population versus drive frequency ωd at fixed Ωd.
    Spectrum,
    /// Populations versus Ωd/g_col on resonance.
    DriveSweep,
    /// Drive sweep reporting ρ_{n,G} for every n.
    Diagonals,
    /// Predicted critical drive, cooperativity and detected onset per scan value.
    CriticalTable,
    /// Analytic coupled-oscillator spectrum only.
    Classical,
}

impl Command {
    fn mode(self) -> Mode {
        match self {
            Command::Spectrum => Mode::Spectrum,
            Command::DriveSweep => Mode::DriveSweep,
            Command::Diagonals => Mode::Diagonals,
            Command::CriticalTable => Mode::CriticalTable,
            Command::Classical => Mode::Classical,
        }
    }
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(format!("expected start:stop:count:log|lin, got `{s}`"));
    }
    let f = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    let count = parts[2].trim().parse::<usize>().map_err(|_| format!("`{}` is not a point count", parts[2]))?;
    let spacing = match parts[3].trim() {
        "log" => Spacing::Log,
        "lin" | "linear" => Spacing::Lin,
        other => return Err(format!("spacing must be log or lin, got `{other}`")),
    };
    let g = Grid { start: f(parts[0])?, stop: f(parts[1])?, count, spacing };
    g.validate().map_err(|e| e.to_string())?;
    Ok(g)
}

/// Configuration after file, `--set` overrides and flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io { path: p.clone(), source: e })?,
        None => String::new(),
    };
    let text = apply_overrides(&text, &cli.set)?;
    let mut cfg = parse_config(&text)?;
    cfg.mode = cli.command.mode();
    if !cli.n.is_empty() {
        cfg.n = cli.n.clone();
    }
    if let Some(m) = cli.nmax {
        cfg.truncation.nmax = m;
    }
    if let Some(g) = cli.grid {
        cfg.grid = Some(g);
    }
    if let Some(k) = cli.threads {
        cfg.threads = Some(k);
    }
    if let Some(p) = &cli.out {
        cfg.output.csv = Some(p.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    let csv_path = cfg.output.csv.clone().unwrap_or_else(|| PathBuf::from(format!("tavis-{}.csv", cfg.mode.name())));
    let json_path = cfg.output.json.clone().unwrap_or_else(|| output::sibling(&csv_path, None, "json"));
    let exec = Execution::Parallel(cfg.threads);
    let t0 = Instant::now();
    match cfg.mode {
        Mode::Spectrum | Mode::DriveSweep | Mode::Diagonals => {
            let spec = cfg.sweep_spec();
            let result = sweeps::run_sweep_with(&spec, exec).map_err(|e| CliError::Config(e.to_string()))?;
            output::write_csv(&output::sweep_table(&result), &csv_path)?;
            output::write_json(&output::sweep_sidecar(&cfg, &result), &json_path)?;
            report(&[&csv_path, &json_path]);
            let failed = result.failures().count();
            if failed > 0 {
                let first = result.failures().next().and_then(|r| r.diagnostics.error.clone()).unwrap_or_default();
                return Err(CliError::Solve(format!(
                    "{failed} of {} rows failed (first: {first}); see {}",
                    result.rows.len(),
                    json_path.display()
                )));
            }
        }
        Mode::CriticalTable => {
            let base = cfg.params.system();
            let table = sweeps::critical_table_with(&base, &cfg.n, &cfg.scan(), &cfg.table_options(), exec)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let curves_path = output::sibling(&csv_path, Some("curves"), "csv");
            output::write_csv(&output::critical_table(&table), &csv_path)?;
            output::write_csv(&output::critical_curves(&table), &curves_path)?;
            output::write_json(&output::table_sidecar(&cfg, &table, t0.elapsed().as_secs_f64()), &json_path)?;
            report(&[&csv_path, &curves_path, &json_path]);
            if !table.complete {
                let failed = table.cells.iter().filter(|c| c.error.is_some()).count();
                return Err(CliError::Solve(format!("{failed} table cells failed; see {}", json_path.display())));
            }
        }
        Mode::Classical => {
            output::write_csv(&classical_table(&cfg)?, &csv_path)?;
            output::write_json(&output::plain_sidecar(&cfg, t0.elapsed().as_secs_f64()), &json_path)?;
            report(&[&csv_path, &json_path]);
        }
    }
    Ok(())
}

fn classical_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let header = ["omega_d", "n_emitters", "n_c", "n_ens", "n_c0"].map(String::from).to_vec();
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let p = cfg.params.system().with_emitters(n);
        for wd in cfg.grid().values() {
            let solve = |e: tavis::Error| CliError::Solve(format!("ωd = {wd}: {e}"));
            let (n_c, n_ens) = classical::co_populations(&p, wd).map_err(solve)?;
            let n_c0 = classical::uncoupled_co_population(&p, wd).map_err(solve)?;
            rows.push(vec![output::num(wd), n.to_string(), output::num(n_c), output::num(n_ens), output::num(n_c0)]);
        }
    }
    Ok(Table { header, rows })
}

fn report(paths: &[&Path]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}
