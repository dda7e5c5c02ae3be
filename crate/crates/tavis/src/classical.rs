//! Coupled-oscillator analogue: one cavity oscillator driven at ωd, coupled
//! to N identical emitter oscillators. Steady amplitudes follow from
//! x = Re(C e^{iωd t}); populations are the energies divided by ħω.

use serde::{Deserialize, Serialize};

use crate::hilbert::C64;
use crate::model::SystemParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalAmplitudes {
    pub c0: C64,
    pub ci: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalMap {
    pub k: f64,
    pub omega0_sq: f64,
    pub omegai_sq: f64,
    pub drive_cl: f64,
}

fn coupling(params: &SystemParams) -> f64 {
    2.0 * params.g() * (params.omega_c * params.omega_e).sqrt()
}

fn drive_force(params: &SystemParams) -> f64 {
    params.omega_drive_amp * (2.0 * params.omega_c).sqrt()
}

pub fn co_amplitudes(params: &SystemParams, omega_d: f64) -> Result<ClassicalAmplitudes> {
    let (wc, we) = (params.omega_c, params.omega_e);
    let dc = C64::new(wc * wc - omega_d * omega_d, omega_d * params.gamma_c);
    let de = C64::new(we * we - omega_d * omega_d, omega_d * params.gamma_e);
    let g = params.g();
    let den = dc * de - 4.0 * params.n_emitters as f64 * g * g * wc * we;
    if den.norm() == 0.0 || !den.re.is_finite() {
        return Err(Error::VanishingDenominator);
    }
    let f = drive_force(params);
    Ok(ClassicalAmplitudes { c0: f * de / den, ci: -coupling(params) * f / den })
}

/// (⟨n_c⟩, ⟨n_ens⟩) = (ωc|C₀|²/2, N ωe|Cᵢ|²/2).
pub fn co_populations(params: &SystemParams, omega_d: f64) -> Result<(f64, f64)> {
    let amp = co_amplitudes(params, omega_d)?;
    Ok((
        params.omega_c * amp.c0.norm_sqr() / 2.0,
        params.n_emitters as f64 * params.omega_e * amp.ci.norm_sqr() / 2.0,
    ))
}

/// Cavity population of the same oscillator with the emitters removed.
pub fn uncoupled_co_population(params: &SystemParams, omega_d: f64) -> Result<f64> {
    co_populations(&SystemParams { g_col: 0.0, ..*params }, omega_d).map(|p| p.0)
}

/// Ω_eff = (1 − 1/(1 + γcγe/4g_col²))·Ωd.
pub fn effective_drive(params: &SystemParams) -> Result<f64> {
    let x = params.gamma_c * params.gamma_e / (4.0 * params.g_col * params.g_col);
    if x.is_nan() {
        return Err(Error::invalid("g_col", "effective drive undefined with g_col = 0 and γcγe = 0"));
    }
    if x.is_infinite() {
        return Ok(params.omega_drive_amp);
    }
    // x/(1+x) rather than 1 − 1/(1+x): no cancellation at large cooperativity
    Ok(x / (1.0 + x) * params.omega_drive_amp)
}

/// Weak-drive resonant cavity population Ωd²γe²/(16g_col⁴)·1/(1 + γcγe/4g_col²)².
pub fn weak_resonant_population(params: &SystemParams) -> Result<f64> {
    let g = params.g_col;
    if g == 0.0 {
        return Err(Error::invalid("g_col", "weak-drive formula diverges for g_col = 0; use uncoupled_population"));
    }
    let od = params.omega_drive_amp;
    let ge = params.gamma_e;
    let x = 1.0 + params.gamma_c * ge / (4.0 * g * g);
    Ok(od * od * ge * ge / (16.0 * g.powi(4)) / (x * x))
}

/// Ωd²/γc².
pub fn uncoupled_population(params: &SystemParams) -> Result<f64> {
    if params.gamma_c == 0.0 {
        return Err(Error::invalid("gamma_c", "uncoupled population diverges for γc = 0"));
    }
    Ok((params.omega_drive_amp / params.gamma_c).powi(2))
}

/// Weak-drive suppression of the resonant cavity population relative to the
/// bare cavity, from the two populations; equals 1/(C+1)².
pub fn suppression_ratio(params: &SystemParams) -> Result<f64> {
    if !(params.gamma_c > 0.0 && params.gamma_e > 0.0 && params.g_col > 0.0) {
        return Err(Error::invalid("g_col", "suppression ratio needs γc, γe, g_col > 0"));
    }
    // both populations are quadratic in Ωd; evaluate at unit drive
    let p = params.with_drive(1.0);
    Ok(weak_resonant_population(&p)? / uncoupled_population(&p)?)
}

/// The single-power form 1/(C+1), kept as a separately labeled diagnostic.
pub fn suppression_ratio_linear(params: &SystemParams) -> Result<f64> {
    Ok(1.0 / (crate::analysis::cooperativity(params)? + 1.0))
}

pub fn quantum_to_classical_map(params: &SystemParams) -> ClassicalMap {
    let k = -coupling(params);
    ClassicalMap {
        k,
        omega0_sq: params.omega_c * params.omega_c - k,
        omegai_sq: params.omega_e * params.omega_e - k,
        drive_cl: drive_force(params),
    }
}

/// Integrate the equations of motion with RK4 from rest and project the
/// final drive period onto cos/sin(ωd t).
///
///   ẍ₀ + γc ẋ₀ + ωc² x₀ + Σᵢ 2g√(ωcωe) xᵢ = Ωd√(2ωc) cos(ωd t)
///   ẍᵢ + γe ẋᵢ + ωe² xᵢ + 2g√(ωcωe) x₀ = 0
///
/// All emitters obey the same equation from identical initial data, so a
/// single representative emitter carries the full dynamics.
pub fn classical_ode_oracle(params: &SystemParams, omega_d: f64, t_end: f64) -> Result<ClassicalAmplitudes> {
    classical_ode_oracle_with(params, omega_d, t_end, 1000)
}

pub fn classical_ode_oracle_with(
    params: &SystemParams,
    omega_d: f64,
    t_end: f64,
    steps_per_period: usize,
) -> Result<ClassicalAmplitudes> {
    if !(omega_d > 0.0) {
        return Err(Error::invalid("omega_d", "drive frequency must be positive"));
    }
    let period = 2.0 * std::f64::consts::PI / omega_d;
    let periods = (t_end / period).ceil().max(2.0) as usize;
    let h = period / steps_per_period as f64;
    let kc = coupling(params);
    let n = params.n_emitters as f64;
    let f = drive_force(params);
    let (wc2, we2) = (params.omega_c * params.omega_c, params.omega_e * params.omega_e);
    let (gc, ge) = (params.gamma_c, params.gamma_e);

    // state: [x0, v0, xi, vi]
    let rhs = |t: f64, y: [f64; 4]| -> [f64; 4] {
        [
            y[1],
            f * (omega_d * t).cos() - gc * y[1] - wc2 * y[0] - n * kc * y[2],
            y[3],
            -ge * y[3] - we2 * y[2] - kc * y[0],
        ]
    };
    let add = |y: [f64; 4], k: [f64; 4], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]];

    let mut y = [0.0; 4];
    let mut proj = Vec::with_capacity(2);
    for p in 0..periods {
        let record = p + 2 >= periods;
        let mut acc = [0.0f64; 4]; // ∫x0 cos, ∫x0 sin, ∫xi cos, ∫xi sin
        for s in 0..steps_per_period {
            let t = (p * steps_per_period + s) as f64 * h;
            if record {
                // trapezoid on a periodic integrand reduces to a plain sum
                let (c, sn) = ((omega_d * t).cos(), (omega_d * t).sin());
                acc[0] += y[0] * c;
                acc[1] += y[0] * sn;
                acc[2] += y[2] * c;
                acc[3] += y[2] * sn;
            }
            let k1 = rhs(t, y);
            let k2 = rhs(t + h / 2.0, add(y, k1, h / 2.0));
            let k3 = rhs(t + h / 2.0, add(y, k2, h / 2.0));
            let k4 = rhs(t + h, add(y, k3, h));
            for i in 0..4 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        if record {
            let w = 2.0 / steps_per_period as f64;
            proj.push(ClassicalAmplitudes {
                c0: C64::new(acc[0] * w, -acc[1] * w),
                ci: C64::new(acc[2] * w, -acc[3] * w),
            });
        }
    }
    let (prev, last) = (proj[0], proj[1]);
    let scale = last.c0.norm().max(last.ci.norm());
    if scale > 0.0 {
        let drift = (last.c0 - prev.c0).norm().max((last.ci - prev.ci).norm()) / scale;
        if !(drift <= 1e-6) {
            return Err(Error::Transient { drift });
        }
    }
    Ok(last)
}
