//! Populations, ρ_{n,G} diagonals and the scattering signal of a steady state.

use serde::{Deserialize, Serialize};

use crate::hilbert::{cavity_op, HilbertSpace, SparseOperator, C64};
use crate::model::{Frame, SystemParams};
use crate::steady::{DensityMatrix, SteadyState};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub cavity_pop: f64,
    pub ensemble_pop: f64,
    /// ρ_{n,G} for n = 0, 1, …
    pub diagonals: Vec<f64>,
    pub scattering: f64,
}

/// Tr(Ô ρ).
pub fn expectation(op: &SparseOperator, rho: &DensityMatrix) -> Result<C64> {
    if op.rows() != rho.dim || op.cols() != rho.dim {
        return Err(Error::DimensionMismatch { expected: rho.dim, found: op.rows() });
    }
    Ok(op.entries().map(|(r, c, v)| v * rho.entries[(c, r)]).sum())
}

/// ⟨n, G|ρ|n, G⟩ with all emitters in the ground state.
pub fn diagonal_element(rho: &DensityMatrix, n: usize, space: &HilbertSpace) -> Result<f64> {
    if rho.dim != space.dim {
        return Err(Error::DimensionMismatch { expected: space.dim, found: rho.dim });
    }
    if n > space.n_max {
        return Err(Error::OutOfRange { what: "photon number", index: n, bound: space.n_max });
    }
    let i = space.ground_index(n);
    Ok(rho.entries[(i, i)].re)
}

/// Space implied by a state's dimension and the emitter count.
fn space_of(params: &SystemParams, rho: &DensityMatrix) -> Result<HilbertSpace> {
    let spins = 1usize << params.n_emitters;
    if rho.dim % spins != 0 || rho.dim < 2 * spins {
        return Err(Error::DimensionMismatch { expected: 2 * spins, found: rho.dim });
    }
    HilbertSpace::new(params.n_emitters, rho.dim / spins - 1)
}

/// γc_rad·⟨a†a⟩ with the collection prefactor fixed to 1.
pub fn scattering_signal(params: &SystemParams, rho: &DensityMatrix) -> Result<f64> {
    let space = space_of(params, rho)?;
    Ok(params.gamma_c_rad * cavity_population(rho, &space))
}

pub fn cavity_population(rho: &DensityMatrix, space: &HilbertSpace) -> f64 {
    (0..space.dim).map(|i| space.photon_number(i) as f64 * rho.entries[(i, i)].re).sum()
}

pub fn ensemble_population(rho: &DensityMatrix, space: &HilbertSpace) -> f64 {
    (0..space.dim).map(|i| space.excitation_count(i) as f64 * rho.entries[(i, i)].re).sum()
}

/// ⟨n|D(β)|m⟩ for n ≤ n_out, m ≤ m_max, row-major in n.
///
/// Closed form through associated Laguerre polynomials, for n ≥ m
/// √(m!/n!) β^{n−m} e^{−|β|²/2} L_m^{(n−m)}(|β|²) and the mirrored
/// expression with −β* for n < m. Magnitudes are combined in logs so large
/// |β| neither underflows nor overflows; the polynomial degree is at most
/// min(n, m), which keeps rounding independent of n_out.
pub fn displacement_elements(beta: C64, n_out: usize, m_max: usize) -> Vec<Vec<C64>> {
    let x = beta.norm_sqr();
    if x == 0.0 {
        return (0..=n_out)
            .map(|n| (0..=m_max).map(|m| C64::new(if n == m { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
    }
    let mut ln_fact = vec![0.0f64; n_out.max(m_max) + 1];
    for k in 1..ln_fact.len() {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let (ln_b, phase) = (beta.norm().ln(), beta.arg());
    (0..=n_out)
        .map(|n| {
            (0..=m_max)
                .map(|m| {
                    let (lo, hi) = (n.min(m), n.max(m));
                    let d = (hi - lo) as f64;
                    let l = laguerre(lo, d, x);
                    if l == 0.0 {
                        return C64::new(0.0, 0.0);
                    }
                    let ln_mag = 0.5 * (ln_fact[lo] - ln_fact[hi]) + d * ln_b - 0.5 * x + l.abs().ln();
                    // β^{n−m} for n ≥ m, (−β*)^{m−n} otherwise
                    let arg = if n >= m { d * phase } else { d * (std::f64::consts::PI - phase) };
                    C64::from_polar(ln_mag.exp() * l.signum(), arg)
                })
                .collect()
        })
        .collect()
}

fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (mut l0, mut l1) = (1.0, 1.0 + alpha - x);
    for j in 1..k {
        let jf = j as f64;
        let l2 = ((2.0 * jf + 1.0 + alpha - x) * l1 - (jf + alpha) * l0) / (jf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

impl ObservableSet {
    /// Lab-frame observables of a solve, undoing any cavity displacement.
    pub fn from_state(ss: &SteadyState, params: &SystemParams) -> Result<Self> {
        let space = &ss.space;
        let rho = &ss.rho;
        let n_rho = cavity_population(rho, space);
        let ensemble_pop = ensemble_population(rho, space);
        let (cavity_pop, diagonals) = if ss.frame.is_lab() {
            let diag = (0..=space.n_max).map(|n| diagonal_element(rho, n, space)).collect::<Result<Vec<_>>>()?;
            (n_rho, diag)
        } else {
            let beta = ss.frame.displacement;
            let a_mean = expectation(&cavity_op(space)?, rho)?;
            let n = n_rho + 2.0 * (beta.conj() * a_mean).re + beta.norm_sqr();
            (n, lab_diagonals(rho, space, ss.frame, space.n_max))
        };
        Ok(Self { cavity_pop, ensemble_pop, diagonals, scattering: params.gamma_c_rad * cavity_pop })
    }
}

/// ρ_{n,G} = Σ_{m,m'} D_{nm} ρ'_{(m,G),(m',G)} D*_{nm'} for n ≤ n_out.
pub fn lab_diagonals(rho: &DensityMatrix, space: &HilbertSpace, frame: Frame, n_out: usize) -> Vec<f64> {
    let d = displacement_elements(frame.displacement, n_out, space.n_max);
    let g: Vec<usize> = (0..=space.n_max).map(|m| space.ground_index(m)).collect();
    d.iter()
        .map(|dn| {
            let mut s = C64::new(0.0, 0.0);
            for (m, &im) in g.iter().enumerate() {
                let mut inner = C64::new(0.0, 0.0);
                for (mp, &imp) in g.iter().enumerate() {
                    inner += rho.entries[(im, imp)] * dn[mp].conj();
                }
                s += dn[m] * inner;
            }
            s.re
        })
        .collect()
}
