//! Critical drive, cooperativity, coherent-state comparisons and the
//! log-log slope analysis of drive sweeps.

use serde::{Deserialize, Serialize};

use crate::classical::effective_drive;
use crate::model::SystemParams;
use crate::{Error, Result};

pub const DEFAULT_ONSET_THRESHOLD: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub omega_d: f64,
    pub cavity_pop: f64,
    pub ensemble_pop: f64,
    pub diagonals: Vec<f64>,
}

/// Cavity response versus drive strength at fixed remaining parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSweepSeries {
    pub points: Vec<SeriesPoint>,
    pub params: SystemParams,
}

impl DriveSweepSeries {
    pub fn new(params: SystemParams, points: Vec<SeriesPoint>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].omega_d > w[0].omega_d)) {
            return Err(Error::invalid("omega_d", "drive strengths must be strictly increasing"));
        }
        if points.iter().any(|p| p.cavity_pop < -1e-10 || p.ensemble_pop < -1e-10) {
            return Err(Error::invalid("cavity_pop", "populations must be non-negative"));
        }
        Ok(Self { points, params })
    }

    /// Series from bare (Ωd, ⟨a†a⟩) pairs.
    pub fn from_cavity(params: SystemParams, data: &[(f64, f64)]) -> Result<Self> {
        let points = data
            .iter()
            .map(|&(omega_d, cavity_pop)| SeriesPoint { omega_d, cavity_pop, ensemble_pop: 0.0, diagonals: vec![] })
            .collect();
        Self::new(params, points)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentAmplitudes {
    pub alpha_c_sq: f64,
    pub alpha_c0_sq: f64,
    pub alpha_ens_sq: f64,
    /// |(Ωd − Ω_ens)·T|² with T = 1/g_col.
    pub alpha_eff_sq: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoissonMode {
    Exact,
    Approximate,
}

/// C = 4g_col²/(γcγe).
pub fn cooperativity(params: &SystemParams) -> Result<f64> {
    let den = params.gamma_c * params.gamma_e;
    if den == 0.0 {
        return Err(Error::invalid("gamma_e", "cooperativity needs γc, γe > 0"));
    }
    Ok(4.0 * params.g_col * params.g_col / den)
}

/// Ω_cr(n) = (n!·γe²·g_col^{2(n−1)} / (16(1 + γcγe/4g_col²)²))^{1/2n}.
pub fn critical_drive(params: &SystemParams, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "emitter count must be at least 1"));
    }
    if !(params.g_col > 0.0 && params.gamma_e > 0.0) {
        return Err(Error::invalid("g_col", "critical drive needs g_col, γe > 0"));
    }
    let g = params.g_col;
    let x = 1.0 + params.gamma_c * params.gamma_e / (4.0 * g * g);
    let nf = factorial(n);
    // logs keep g^{2(n−1)} and n! well scaled for large n
    let ln = nf.ln() + 2.0 * params.gamma_e.ln() + 2.0 * (n as f64 - 1.0) * g.ln() - (16.0 * x * x).ln();
    Ok((ln / (2.0 * n as f64)).exp())
}

/// Drive solving the threshold condition weak_resonant_population =
/// (n+1)·P_{α_ens}(n+1) (approximate Poisson) exactly. It differs from
/// [`critical_drive`] by the factor x^{1+1/n}, x = 1 + γcγe/4g_col²,
/// because α_ens itself carries the effective-drive reduction.
pub fn critical_drive_exact(params: &SystemParams, n: usize) -> Result<f64> {
    let x = 1.0 + params.gamma_c * params.gamma_e / (4.0 * params.g_col * params.g_col);
    critical_drive(params, n)?;
    let g = params.g_col;
    let ln = factorial(n).ln() + 2.0 * params.gamma_e.ln() + 2.0 * (n as f64 - 1.0) * g.ln() - 16f64.ln();
    Ok(x * (ln / (2.0 * n as f64)).exp())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// P_α(n): e^{−|α|²}|α|^{2n}/n! (exact) or |α|^{2n}/n! (approximate).
pub fn poisson_weight(alpha_sq: f64, n: usize, mode: PoissonMode) -> Result<f64> {
    if !(alpha_sq >= 0.0) {
        return Err(Error::invalid("alpha_sq", "must be non-negative"));
    }
    let mut p = 1.0;
    for k in 1..=n {
        p *= alpha_sq / k as f64;
    }
    Ok(match mode {
        PoissonMode::Exact => p * (-alpha_sq).exp(),
        PoissonMode::Approximate => p,
    })
}

pub fn coherent_amplitudes(params: &SystemParams) -> Result<CoherentAmplitudes> {
    if !(params.gamma_c > 0.0) {
        return Err(Error::invalid("gamma_c", "must be positive"));
    }
    if !(params.g_col > 0.0) {
        return Err(Error::invalid("g_col", "must be positive"));
    }
    let od = params.omega_drive_amp;
    let g = params.g_col;
    let omega_eff = effective_drive(params)?;
    let omega_ens = od / (1.0 + params.gamma_c * params.gamma_e / (4.0 * g * g));
    Ok(CoherentAmplitudes {
        alpha_c_sq: (omega_eff / params.gamma_c).powi(2),
        alpha_c0_sq: (od / params.gamma_c).powi(2),
        alpha_ens_sq: (omega_ens / g).powi(2),
        alpha_eff_sq: ((od - omega_ens) / g).powi(2),
    })
}

/// Central differences of ln⟨a†a⟩ against ln Ωd at interior points.
pub fn loglog_slopes(series: &DriveSweepSeries) -> Result<Vec<(f64, f64)>> {
    let pts = &series.points;
    if pts.len() < 3 {
        return Err(Error::invalid("points", "slopes need at least three points"));
    }
    if let Some(p) = pts.iter().find(|p| !(p.cavity_pop > 0.0) || !(p.omega_d > 0.0)) {
        return Err(Error::invalid(
            "cavity_pop",
            format!("non-positive value at Ωd = {:e} (population {:e})", p.omega_d, p.cavity_pop),
        ));
    }
    let lx: Vec<f64> = pts.iter().map(|p| p.omega_d.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.cavity_pop.ln()).collect();
    Ok((1..pts.len() - 1)
        .map(|i| (pts[i].omega_d, (ly[i + 1] - ly[i - 1]) / (lx[i + 1] - lx[i - 1])))
        .collect())
}

/// First Ωd at which the local slope reaches 2 + threshold, linearly
/// interpolated in ln Ωd; `None` when the sweep never leaves the linear regime.
pub fn detect_onset(series: &DriveSweepSeries, threshold: f64) -> Result<Option<f64>> {
    let slopes = loglog_slopes(series)?;
    let level = 2.0 + threshold;
    if slopes[0].1 >= level {
        return Ok(Some(slopes[0].0));
    }
    for w in slopes.windows(2) {
        let ((x0, s0), (x1, s1)) = (w[0], w[1]);
        if s0 < level && s1 >= level {
            let f = (level - s0) / (s1 - s0);
            return Ok(Some((x0.ln() + f * (x1.ln() - x0.ln())).exp()));
        }
    }
    Ok(None)
}

/// Local slope at an arbitrary Ωd inside the sweep, interpolated in ln Ωd.
pub fn slope_at(series: &DriveSweepSeries, omega_d: f64) -> Result<Option<f64>> {
    let slopes = loglog_slopes(series)?;
    let x = omega_d.ln();
    for w in slopes.windows(2) {
        let ((x0, s0), (x1, s1)) = (w[0], w[1]);
        let (l0, l1) = (x0.ln(), x1.ln());
        if x >= l0 && x <= l1 {
            return Ok(Some(s0 + (s1 - s0) * (x - l0) / (l1 - l0)));
        }
    }
    Ok(None)
}

/// N̂ = round(max slope/2 − 1) ≥ 1; `None` if no slope exceeds 2.5.
pub fn infer_emitter_count(series: &DriveSweepSeries) -> Result<Option<usize>> {
    let smax = max_interior_slope(series)?;
    if !(smax > 2.5) {
        return Ok(None);
    }
    Ok(Some(((smax / 2.0 - 1.0).round() as usize).max(1)))
}

pub fn max_interior_slope(series: &DriveSweepSeries) -> Result<f64> {
    Ok(loglog_slopes(series)?.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max))
}
