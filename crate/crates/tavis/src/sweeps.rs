//! Parameter scans: drive-frequency spectra, drive-strength sweeps,
//! ρ_{n,G} diagonals and critical-drive tables.
//!
//! Every (grid point, N) pair is an independent solve with its own Fock
//! truncation and frame. Rows are computed in parallel but each solve is
//! sequential, so results do not depend on scheduling.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, DriveSweepSeries, SeriesPoint};
use crate::classical;
use crate::model::SystemParams;
use crate::observables::ObservableSet;
use crate::steady::{self, FramePolicy, SolverKind, SteadyOptions, TruncationOptions};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Vary the drive frequency ωd at fixed Ωd.
    Spectrum,
    /// Vary Ωd/g_col at fixed ωd.
    Drive,
    /// As `Drive`, reporting ρ_{n,G} for every n.
    Diagonals,
    CriticalTable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[serde(alias = "linear")]
    Lin,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn log(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count, spacing: Spacing::Log }
    }

    pub fn lin(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count, spacing: Spacing::Lin }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::invalid("count", "grid needs at least two points"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::invalid("start", "grid endpoints must be finite"));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(Error::invalid("start", "log spacing requires positive endpoints"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i + 1 == n {
                    return self.stop;
                }
                let f = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Lin => self.start + f * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Truncation {
    Fixed { n_max: usize },
    Auto { tail_tol: f64, cap: usize },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Auto { tail_tol: steady::DEFAULT_TAIL_TOL, cap: steady::DEFAULT_NMAX_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub mode: SweepMode,
    /// Base parameters; the swept field and `n_emitters` are overridden per row.
    pub params: SystemParams,
    pub grid: Grid,
    pub n_list: Vec<usize>,
    pub truncation: Truncation,
    pub include_classical: bool,
    pub frame: FramePolicy,
    pub solver: SolverKind,
    pub residual_tol: f64,
}

impl SweepSpec {
    pub fn new(mode: SweepMode, params: SystemParams, grid: Grid, n_list: Vec<usize>) -> Self {
        Self {
            mode,
            params,
            grid,
            n_list,
            truncation: Truncation::default(),
            include_classical: true,
            frame: FramePolicy::default(),
            solver: SolverKind::Auto,
            residual_tol: steady::DEFAULT_RESIDUAL_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.params.validate()?;
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(Error::invalid("n_list", "emitter counts must be a non-empty list of positive integers"));
        }
        if self.mode == SweepMode::CriticalTable {
            return Err(Error::invalid("mode", "critical tables are built with critical_table"));
        }
        if let Truncation::Auto { tail_tol, .. } = self.truncation {
            if !(tail_tol > 0.0 && tail_tol < 1.0) {
                return Err(Error::invalid("tail_tol", "must lie in (0, 1)"));
            }
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::invalid("residual_tol", "must be positive"));
        }
        Ok(())
    }

    /// Name of the swept quantity.
    pub fn sweep_variable(&self) -> &'static str {
        match self.mode {
            SweepMode::Spectrum => "omega_d",
            _ => "drive_over_gcol",
        }
    }

    /// Parameters of one row.
    pub fn row_params(&self, x: f64, n: usize) -> SystemParams {
        let mut p = self.params.with_emitters(n);
        match self.mode {
            SweepMode::Spectrum => p.omega_d = x,
            _ => p.omega_drive_amp = x * self.params.g_col,
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCompanions {
    pub n_c: f64,
    pub n_ens: f64,
    /// Cavity population with the emitters removed.
    pub n_c0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowDiagnostics {
    pub residual: f64,
    pub n_max: usize,
    pub displacement_re: f64,
    pub displacement_im: f64,
    pub solver: Option<SolverKind>,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub n_emitters: usize,
    pub omega_d: f64,
    pub omega_drive_amp: f64,
    pub observables: Option<ObservableSet>,
    pub classical: Option<ClassicalCompanions>,
    pub diagnostics: RowDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    /// False when at least one row failed.
    pub complete: bool,
    pub wall_time_s: f64,
}

impl SweepResult {
    /// Drive-mode rows for one emitter count as an analysis series; failed
    /// rows are skipped.
    pub fn series(&self, n: usize) -> Result<DriveSweepSeries> {
        let points = self
            .rows
            .iter()
            .filter(|r| r.n_emitters == n)
            .filter_map(|r| {
                r.observables.as_ref().map(|o| SeriesPoint {
                    omega_d: r.omega_drive_amp,
                    cavity_pop: o.cavity_pop,
                    ensemble_pop: o.ensemble_pop,
                    diagonals: o.diagonals.clone(),
                })
            })
            .collect();
        DriveSweepSeries::new(self.spec.params.with_emitters(n), points)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.diagnostics.error.is_some())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Serial,
    /// Rayon pool with the given number of threads (`None`: global pool).
    Parallel(Option<usize>),
}

/// Solve one parameter point under the given truncation and frame policy.
pub fn solve_point(
    params: &SystemParams,
    truncation: Truncation,
    frame: FramePolicy,
    steady_opts: SteadyOptions,
) -> Result<steady::SteadyState> {
    match truncation {
        Truncation::Fixed { n_max } => steady::solve_fixed(params, n_max, frame, &steady_opts),
        Truncation::Auto { tail_tol, cap } => steady::auto_truncate_with(
            params,
            &TruncationOptions { tail_tol, cap, frame, steady: steady_opts, ..Default::default() },
        ),
    }
}

fn compute_row(spec: &SweepSpec, x: f64, n: usize) -> SweepRow {
    let t0 = Instant::now();
    let p = spec.row_params(x, n);
    let mut diagnostics = RowDiagnostics {
        residual: f64::NAN,
        n_max: 0,
        displacement_re: 0.0,
        displacement_im: 0.0,
        solver: None,
        iterations: 0,
        wall_time_s: 0.0,
        error: None,
    };
    let steady_opts = SteadyOptions { tol: spec.residual_tol, solver: spec.solver };
    let observables = match solve_point(&p, spec.truncation, spec.frame, steady_opts)
        .and_then(|ss| ObservableSet::from_state(&ss, &p).map(|o| (ss, o)))
    {
        Ok((ss, o)) => {
            diagnostics.residual = ss.residual;
            diagnostics.n_max = ss.space.n_max;
            diagnostics.displacement_re = ss.frame.displacement.re;
            diagnostics.displacement_im = ss.frame.displacement.im;
            diagnostics.solver = Some(ss.solver);
            diagnostics.iterations = ss.iterations;
            Some(o)
        }
        Err(e) => {
            diagnostics.error = Some(e.to_string());
            None
        }
    };
    let classical = if spec.include_classical {
        match classical_companions(&p) {
            Ok(c) => Some(c),
            Err(e) => {
                diagnostics.error.get_or_insert_with(|| e.to_string());
                None
            }
        }
    } else {
        None
    };
    diagnostics.wall_time_s = t0.elapsed().as_secs_f64();
    SweepRow { x, n_emitters: n, omega_d: p.omega_d, omega_drive_amp: p.omega_drive_amp, observables, classical, diagnostics }
}

pub fn classical_companions(p: &SystemParams) -> Result<ClassicalCompanions> {
    let (n_c, n_ens) = classical::co_populations(p, p.omega_d)?;
    let n_c0 = classical::uncoupled_co_population(p, p.omega_d)?;
    Ok(ClassicalCompanions { n_c, n_ens, n_c0 })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, Execution::Parallel(None))
}

pub fn run_sweep_with(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let t0 = Instant::now();
    let xs = spec.grid.values();
    let work: Vec<(usize, f64)> = spec.n_list.iter().flat_map(|&n| xs.iter().map(move |&x| (n, x))).collect();
    let rows: Vec<SweepRow> = match exec {
        Execution::Serial => work.iter().map(|&(n, x)| compute_row(spec, x, n)).collect(),
        Execution::Parallel(None) => work.par_iter().map(|&(n, x)| compute_row(spec, x, n)).collect(),
        Execution::Parallel(Some(k)) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::invalid("threads", e.to_string()))?;
            pool.install(|| work.par_iter().map(|&(n, x)| compute_row(spec, x, n)).collect())
        }
    };
    let complete = rows.iter().all(|r| r.diagnostics.error.is_none());
    Ok(SweepResult { spec: spec.clone(), rows, complete, wall_time_s: t0.elapsed().as_secs_f64() })
}

/// Local log-log slope d ln⟨a†a⟩ / d ln Ωd from two solves at Ωd·e^{±h}.
pub fn local_slope(params: &SystemParams, truncation: Truncation, frame: FramePolicy, h: f64) -> Result<f64> {
    let pop = |od: f64| -> Result<f64> {
        let p = params.with_drive(od);
        let ss = solve_point(&p, truncation, frame, SteadyOptions::default())?;
        Ok(ObservableSet::from_state(&ss, &p)?.cavity_pop)
    };
    let od = params.omega_drive_amp;
    let (lo, hi) = (pop(od * (-h).exp())?, pop(od * h.exp())?);
    Ok((hi.ln() - lo.ln()) / (2.0 * h))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum Scan {
    GammaE(Vec<f64>),
    GCol(Vec<f64>),
}

impl Scan {
    pub fn name(&self) -> &'static str {
        match self {
            Scan::GammaE(_) => "gamma_e",
            Scan::GCol(_) => "g_col",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Scan::GammaE(v) | Scan::GCol(v) => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableOptions {
    /// The onset sweep covers [Ω_cr/span, Ω_cr·span].
    pub span: f64,
    pub count: usize,
    /// Fixed Ωd/g_col grid for every onset sweep, replacing span/count.
    pub sweep_grid: Option<Grid>,
    pub threshold: f64,
    pub truncation: Truncation,
    pub frame: FramePolicy,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            span: 30.0,
            count: 41,
            sweep_grid: None,
            threshold: analysis::DEFAULT_ONSET_THRESHOLD,
            truncation: Truncation::default(),
            frame: FramePolicy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalCell {
    pub scan_value: f64,
    pub n_emitters: usize,
    pub gamma_e: f64,
    pub g_col: f64,
    pub omega_cr: f64,
    pub omega_cr_exact: f64,
    pub cooperativity: f64,
    pub onset: Option<f64>,
    pub slope_half: Option<f64>,
    pub slope_double: Option<f64>,
    pub max_slope: Option<f64>,
    /// (Ωd, ⟨a†a⟩) of the onset sweep.
    pub curve: Vec<[f64; 2]>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalTable {
    pub scan: Scan,
    pub params: SystemParams,
    pub n_list: Vec<usize>,
    pub options: TableOptions,
    pub cells: Vec<CriticalCell>,
    pub complete: bool,
}

/// Predicted critical drive, cooperativity and the onset detected on a
/// fresh drive sweep around the prediction, per (scan value, N).
pub fn critical_table(
    params: &SystemParams,
    n_list: &[usize],
    scan: &Scan,
    opts: &TableOptions,
) -> Result<CriticalTable> {
    critical_table_with(params, n_list, scan, opts, Execution::Parallel(None))
}

pub fn critical_table_with(
    params: &SystemParams,
    n_list: &[usize],
    scan: &Scan,
    opts: &TableOptions,
    exec: Execution,
) -> Result<CriticalTable> {
    if scan.values().is_empty() || scan.values().iter().any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("scan", "scan values must be positive"));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::invalid("n_list", "emitter counts must be positive"));
    }
    match opts.sweep_grid {
        Some(g) => {
            g.validate()?;
            if g.spacing != Spacing::Log || g.count < 3 {
                return Err(Error::invalid("sweep_grid", "onset sweeps need a log grid with at least three points"));
            }
        }
        None if !(opts.span > 1.0) || opts.count < 3 => {
            return Err(Error::invalid("span", "onset sweep needs span > 1 and at least three points"));
        }
        None => {}
    }
    let mut cells = Vec::new();
    for &v in scan.values() {
        for &n in n_list {
            let mut p = params.with_emitters(n);
            match scan {
                Scan::GammaE(_) => p.gamma_e = v,
                Scan::GCol(_) => p.g_col = v,
            }
            cells.push(table_cell(&p, v, opts, exec));
        }
    }
    let complete = cells.iter().all(|c| c.error.is_none());
    Ok(CriticalTable { scan: scan.clone(), params: *params, n_list: n_list.to_vec(), options: *opts, cells, complete })
}

fn table_cell(p: &SystemParams, scan_value: f64, opts: &TableOptions, exec: Execution) -> CriticalCell {
    let n = p.n_emitters;
    let mut cell = CriticalCell {
        scan_value,
        n_emitters: n,
        gamma_e: p.gamma_e,
        g_col: p.g_col,
        omega_cr: f64::NAN,
        omega_cr_exact: f64::NAN,
        cooperativity: f64::NAN,
        onset: None,
        slope_half: None,
        slope_double: None,
        max_slope: None,
        curve: vec![],
        error: None,
    };
    let run = |cell: &mut CriticalCell| -> Result<()> {
        cell.omega_cr = analysis::critical_drive(p, n)?;
        cell.omega_cr_exact = analysis::critical_drive_exact(p, n)?;
        cell.cooperativity = analysis::cooperativity(p)?;
        let g = p.g_col;
        let grid = opts
            .sweep_grid
            .unwrap_or_else(|| Grid::log(cell.omega_cr / opts.span / g, cell.omega_cr * opts.span / g, opts.count));
        let mut spec = SweepSpec::new(SweepMode::Drive, *p, grid, vec![n]);
        spec.truncation = opts.truncation;
        spec.frame = opts.frame;
        spec.include_classical = false;
        let res = run_sweep_with(&spec, exec)?;
        if let Some(r) = res.failures().next() {
            return Err(Error::Singular(format!(
                "onset sweep failed at Ωd/g_col = {:e}: {}",
                r.x,
                r.diagnostics.error.clone().unwrap_or_default()
            )));
        }
        let series = res.series(n)?;
        cell.curve = series.points.iter().map(|q| [q.omega_d, q.cavity_pop]).collect();
        cell.onset = analysis::detect_onset(&series, opts.threshold)?;
        cell.slope_half = analysis::slope_at(&series, cell.omega_cr / 2.0)?;
        cell.slope_double = analysis::slope_at(&series, cell.omega_cr * 2.0)?;
        cell.max_slope = Some(analysis::max_interior_slope(&series)?);
        Ok(())
    };
    if let Err(e) = run(&mut cell) {
        cell.error = Some(e.to_string());
    }
    cell
}
