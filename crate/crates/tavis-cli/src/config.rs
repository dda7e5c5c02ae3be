//! Run configuration: a strict TOML document mapped onto sweep specs.
//!
//! Every section and key is optional; missing values take the reference
//! parameter set (ωc = ωe = 1, γc = 0.03, γe = 0.0003, g_col = 0.03) and
//! spectrum mode. Unknown keys are rejected.

use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use tavis::model::SystemParams;
use tavis::steady::{FramePolicy, SolverKind, DEFAULT_NMAX_CAP, DEFAULT_RESIDUAL_TOL, DEFAULT_TAIL_TOL};
use tavis::sweeps::{Grid, Scan, SweepMode, SweepSpec, TableOptions, Truncation};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Spectrum,
    DriveSweep,
    Diagonals,
    CriticalTable,
    /// Analytic coupled-oscillator spectrum, no master equation.
    Classical,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Spectrum => "spectrum",
            Mode::DriveSweep => "drive-sweep",
            Mode::Diagonals => "diagonals",
            Mode::CriticalTable => "critical-table",
            Mode::Classical => "classical",
        }
    }

    pub fn default_grid(self) -> Grid {
        match self {
            Mode::Spectrum | Mode::Classical => Grid::lin(0.9, 1.1, 201),
            _ => Grid::log(1e-3, 10.0, 60),
        }
    }
}

/// Physical parameters; the drive enters as Ωd/g_col.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub omega_c: f64,
    pub omega_e: f64,
    pub omega_d: f64,
    pub gamma_c: f64,
    /// Defaults to gamma_c.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_c_rad: Option<f64>,
    pub gamma_e: f64,
    pub g_col: f64,
    pub drive_over_gcol: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let p = SystemParams::default();
        Self {
            omega_c: p.omega_c,
            omega_e: p.omega_e,
            omega_d: p.omega_d,
            gamma_c: p.gamma_c,
            gamma_c_rad: None,
            gamma_e: p.gamma_e,
            g_col: p.g_col,
            drive_over_gcol: 0.25,
        }
    }
}

impl ParamsConfig {
    pub fn system(&self) -> SystemParams {
        SystemParams {
            omega_c: self.omega_c,
            omega_e: self.omega_e,
            omega_d: self.omega_d,
            gamma_c: self.gamma_c,
            gamma_c_rad: self.gamma_c_rad.unwrap_or(self.gamma_c),
            gamma_e: self.gamma_e,
            g_col: self.g_col,
            n_emitters: 1,
            omega_drive_amp: self.drive_over_gcol * self.g_col,
        }
    }
}

/// `nmax = "auto"` or a fixed Fock cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Nmax {
    #[default]
    Auto,
    Fixed(usize),
}

impl std::str::FromStr for Nmax {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Nmax::Auto);
        }
        s.parse::<usize>().map(Nmax::Fixed).map_err(|_| format!("expected `auto` or a non-negative integer, got `{s}`"))
    }
}

impl Serialize for Nmax {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Nmax::Auto => s.serialize_str("auto"),
            Nmax::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Nmax {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Nmax;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"auto\" or a non-negative integer")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Nmax, E> {
                usize::try_from(v).map(Nmax::Fixed).map_err(|_| E::custom(format!("nmax must be non-negative, got {v}")))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Nmax, E> {
                Ok(Nmax::Fixed(v as usize))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Nmax, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationConfig {
    pub nmax: Nmax,
    pub tail_tol: f64,
    pub cap: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self { nmax: Nmax::Auto, tail_tol: DEFAULT_TAIL_TOL, cap: DEFAULT_NMAX_CAP }
    }
}

impl TruncationConfig {
    pub fn truncation(&self) -> Truncation {
        match self.nmax {
            Nmax::Auto => Truncation::Auto { tail_tol: self.tail_tol, cap: self.cap },
            Nmax::Fixed(n_max) => Truncation::Fixed { n_max },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    #[default]
    Auto,
    Lab,
    Displaced,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameConfig {
    pub kind: FrameKind,
    /// Bare cavity population above which `auto` displaces.
    pub threshold: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self { kind: FrameKind::Auto, threshold: 4.0 }
    }
}

impl FrameConfig {
    pub fn policy(&self) -> FramePolicy {
        match self.kind {
            FrameKind::Auto => FramePolicy::Auto { threshold: self.threshold },
            FrameKind::Lab => FramePolicy::Lab,
            FrameKind::Displaced => FramePolicy::Displaced,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    #[default]
    GammaE,
    GCol,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableConfig {
    pub scan: ScanKind,
    pub values: Vec<f64>,
    pub span: f64,
    pub count: usize,
    pub threshold: f64,
}

impl Default for TableConfig {
    fn default() -> Self {
        let o = TableOptions::default();
        Self {
            scan: ScanKind::GammaE,
            // 0.5 %, 1 %, 2.5 % and 5 % of γc
            values: vec![0.00015, 0.0003, 0.00075, 0.0015],
            span: o.span,
            count: o.count,
            threshold: o.threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Defaults to the CSV path with a `.json` extension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Mode,
    /// Emitter counts.
    pub n: Vec<usize>,
    pub params: ParamsConfig,
    /// Spectrum/classical: ωd; drive sweeps: Ωd/g_col. Defaults per mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    pub truncation: TruncationConfig,
    pub frame: FrameConfig,
    pub solver: SolverKind,
    pub residual_tol: f64,
    pub include_classical: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub table: TableConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Spectrum,
            n: vec![1],
            params: ParamsConfig::default(),
            grid: None,
            truncation: TruncationConfig::default(),
            frame: FrameConfig::default(),
            solver: SolverKind::Auto,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            include_classical: true,
            threads: None,
            table: TableConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Apply `key.path=value` overrides to a configuration document. Values are
/// read as TOML when possible and as bare strings otherwise.
pub fn apply_overrides(text: &str, overrides: &[String]) -> Result<String, CliError> {
    if overrides.is_empty() {
        return Ok(text.to_string());
    }
    let mut doc: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got `{item}`")))?;
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        let parts: Vec<&str> = key.trim().split('.').collect();
        let mut table = &mut doc;
        for part in &parts[..parts.len() - 1] {
            let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry
                .as_table_mut()
                .ok_or_else(|| CliError::Config(format!("`{part}` in `{key}` is not a table")))?;
        }
        table.insert(parts[parts.len() - 1].to_string(), value);
    }
    toml::to_string(&doc).map_err(|e| CliError::Config(e.to_string()))
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.params;
        let named = [
            ("params.omega_c", p.omega_c),
            ("params.omega_e", p.omega_e),
            ("params.omega_d", p.omega_d),
            ("params.gamma_c", p.gamma_c),
            ("params.gamma_c_rad", p.gamma_c_rad.unwrap_or(p.gamma_c)),
            ("params.gamma_e", p.gamma_e),
            ("params.g_col", p.g_col),
            ("params.drive_over_gcol", p.drive_over_gcol),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 0.0 {
                return Err(CliError::Config(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        positive("params.gamma_c", p.gamma_c)?;
        positive("params.g_col", p.g_col)?;
        self.params.system().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(CliError::Config("n must list positive emitter counts".into()));
        }
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| CliError::Config(format!("grid: {e}")))?;
        }
        positive("truncation.tail_tol", self.truncation.tail_tol)?;
        positive("residual_tol", self.residual_tol)?;
        positive("frame.threshold", self.frame.threshold)?;
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        if self.mode == Mode::CriticalTable {
            if self.table.values.is_empty() {
                return Err(CliError::Config("table.values must not be empty".into()));
            }
            for &v in &self.table.values {
                positive("table.values", v)?;
            }
            if !(self.table.span > 1.0) || self.table.count < 3 {
                return Err(CliError::Config("table.span must exceed 1 and table.count be at least 3".into()));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        self.grid.unwrap_or_else(|| self.mode.default_grid())
    }

    /// Sweep spec for spectrum, drive-sweep and diagonals modes.
    pub fn sweep_spec(&self) -> SweepSpec {
        let mode = match self.mode {
            Mode::Spectrum | Mode::Classical => SweepMode::Spectrum,
            Mode::DriveSweep => SweepMode::Drive,
            Mode::Diagonals => SweepMode::Diagonals,
            Mode::CriticalTable => SweepMode::CriticalTable,
        };
        let mut spec = SweepSpec::new(mode, self.params.system(), self.grid(), self.n.clone());
        spec.truncation = self.truncation.truncation();
        spec.frame = self.frame.policy();
        spec.solver = self.solver;
        spec.residual_tol = self.residual_tol;
        spec.include_classical = self.include_classical;
        spec
    }

    pub fn scan(&self) -> Scan {
        match self.table.scan {
            ScanKind::GammaE => Scan::GammaE(self.table.values.clone()),
            ScanKind::GCol => Scan::GCol(self.table.values.clone()),
        }
    }

    /// Onset-sweep options; an explicit grid replaces the span around Ω_cr.
    pub fn table_options(&self) -> TableOptions {
        TableOptions {
            span: self.table.span,
            count: self.table.count,
            sweep_grid: self.grid,
            threshold: self.table.threshold,
            truncation: self.truncation.truncation(),
            frame: self.frame.policy(),
        }
    }
}
