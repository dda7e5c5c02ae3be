//! Rotating-frame Tavis–Cummings Hamiltonian and its Lindblad generator.

use std::sync::OnceLock;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::hilbert::{cavity_op, lowering_op, tensor_product, HilbertSpace, SparseOperator, C64};
use crate::{Error, Result};

/// Physical parameters in units of the cavity frequency (ħ = 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_c: f64,
    pub omega_e: f64,
    pub omega_d: f64,
    pub gamma_c: f64,
    pub gamma_c_rad: f64,
    pub gamma_e: f64,
    pub g_col: f64,
    pub n_emitters: usize,
    pub omega_drive_amp: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            omega_c: 1.0,
            omega_e: 1.0,
            omega_d: 1.0,
            gamma_c: 0.03,
            gamma_c_rad: 0.03,
            gamma_e: 0.0003,
            g_col: 0.03,
            n_emitters: 1,
            omega_drive_amp: 0.0075,
        }
    }
}

impl SystemParams {
    /// Single-emitter coupling g = g_col/√N.
    pub fn g(&self) -> f64 {
        self.g_col / (self.n_emitters as f64).sqrt()
    }

    pub fn delta_c(&self) -> f64 {
        self.omega_c - self.omega_d
    }

    pub fn delta_e(&self) -> f64 {
        self.omega_e - self.omega_d
    }

    pub fn with_emitters(mut self, n: usize) -> Self {
        self.n_emitters = n;
        self
    }

    pub fn with_drive(mut self, omega_drive_amp: f64) -> Self {
        self.omega_drive_amp = omega_drive_amp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_c", self.omega_c),
            ("omega_e", self.omega_e),
            ("omega_d", self.omega_d),
            ("gamma_c", self.gamma_c),
            ("gamma_c_rad", self.gamma_c_rad),
            ("gamma_e", self.gamma_e),
            ("g_col", self.g_col),
            ("omega_drive_amp", self.omega_drive_amp),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
            if v < 0.0 {
                return Err(Error::invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        if self.gamma_c_rad > self.gamma_c {
            return Err(Error::invalid("gamma_c_rad", "radiative decay cannot exceed total cavity decay"));
        }
        if self.n_emitters == 0 {
            return Err(Error::invalid("n_emitters", "at least one emitter is required"));
        }
        Ok(())
    }

    /// Amplitude of the bare driven cavity, −i(Ωd/2)/(γc/2 + iΔc).
    pub fn bare_cavity_amplitude(&self) -> C64 {
        let den = C64::new(self.gamma_c / 2.0, self.delta_c());
        if den.norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        C64::new(0.0, -self.omega_drive_amp / 2.0) / den
    }
}

/// Frame in which the cavity is displaced by β: the solved state is
/// ρ' = D(β)†ρD(β). β = 0 is the plain rotating frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub displacement: C64,
}

impl Frame {
    pub const LAB: Frame = Frame { displacement: C64 { re: 0.0, im: 0.0 } };

    /// Displace by the bare driven-cavity amplitude, which removes the drive
    /// term from the Hamiltonian.
    pub fn bare_cavity(params: &SystemParams) -> Frame {
        Frame { displacement: params.bare_cavity_amplitude() }
    }

    pub fn is_lab(&self) -> bool {
        self.displacement == C64::new(0.0, 0.0)
    }

    /// Residual cavity drive ε = Ωd/2 + β(Δc − iγc/2) in this frame.
    pub fn residual_drive(&self, params: &SystemParams) -> C64 {
        C64::new(params.omega_drive_amp / 2.0, 0.0)
            + self.displacement * C64::new(params.delta_c(), -params.gamma_c / 2.0)
    }
}

pub fn hamiltonian_rotating(params: &SystemParams, space: &HilbertSpace) -> Result<SparseOperator> {
    hamiltonian_in_frame(params, space, Frame::LAB)
}

/// H' = Δc a†a + Σᵢ[Δe σ₊ᵢσ₋ᵢ + g(a†σ₋ᵢ + aσ₊ᵢ) + g(βσ₊ᵢ + β*σ₋ᵢ)] + ε a† + ε* a.
///
/// The γc D[a] dissipator is invariant under a → a + β up to the Hamiltonian
/// part absorbed into ε, so jump operators are frame independent.
pub fn hamiltonian_in_frame(params: &SystemParams, space: &HilbertSpace, frame: Frame) -> Result<SparseOperator> {
    params.validate()?;
    if space.n_emitters != params.n_emitters {
        return Err(Error::DimensionMismatch { expected: params.n_emitters, found: space.n_emitters });
    }
    let d = space.dim;
    let a = cavity_op(space)?;
    let ad = a.adjoint();
    let g = params.g();
    let beta = frame.displacement;
    let eps = frame.residual_drive(params);

    let mut terms: Vec<SparseOperator> = Vec::new();
    terms.push(ad.matmul(&a)?.scale(C64::new(params.delta_c(), 0.0)));
    terms.push(ad.scale(eps));
    terms.push(a.scale(eps.conj()));
    for i in 1..=space.n_emitters {
        let sm = lowering_op(i, space)?;
        let sp = sm.adjoint();
        terms.push(sp.matmul(&sm)?.scale(C64::new(params.delta_e(), 0.0)));
        terms.push(ad.matmul(&sm)?.scale(C64::new(g, 0.0)));
        terms.push(a.matmul(&sp)?.scale(C64::new(g, 0.0)));
        if !frame.is_lab() {
            terms.push(sp.scale(beta * g));
            terms.push(sm.scale(beta.conj() * g));
        }
    }
    let refs: Vec<(C64, &SparseOperator)> = terms.iter().map(|t| (C64::new(1.0, 0.0), t)).collect();
    SparseOperator::linear_combination(d, d, &refs)
}

/// Jump operators with their rates: â at γc, then σ₋ᵢ at γe.
pub fn jump_operators(params: &SystemParams, space: &HilbertSpace) -> Result<Vec<(f64, SparseOperator)>> {
    let mut jumps = vec![(params.gamma_c, cavity_op(space)?)];
    for i in 1..=space.n_emitters {
        jumps.push((params.gamma_e, lowering_op(i, space)?));
    }
    Ok(jumps)
}

/// Lindblad generator. The superoperator matrix (column-stacking convention)
/// is assembled on first use; solvers that only need the action of L use
/// [`Liouvillian::apply`].
#[derive(Debug)]
pub struct Liouvillian {
    pub space: HilbertSpace,
    pub params: SystemParams,
    pub frame: Frame,
    pub hamiltonian: SparseOperator,
    pub jumps: Vec<(f64, SparseOperator)>,
    matrix: OnceLock<SparseOperator>,
}

impl Clone for Liouvillian {
    fn clone(&self) -> Self {
        let matrix = OnceLock::new();
        if let Some(m) = self.matrix.get() {
            let _ = matrix.set(m.clone());
        }
        Self {
            space: self.space,
            params: self.params,
            frame: self.frame,
            hamiltonian: self.hamiltonian.clone(),
            jumps: self.jumps.clone(),
            matrix,
        }
    }
}

pub fn liouvillian(params: &SystemParams, space: &HilbertSpace) -> Result<Liouvillian> {
    liouvillian_in_frame(params, space, Frame::LAB)
}

pub fn liouvillian_in_frame(params: &SystemParams, space: &HilbertSpace, frame: Frame) -> Result<Liouvillian> {
    let hamiltonian = hamiltonian_in_frame(params, space, frame)?;
    let jumps = jump_operators(params, space)?;
    Ok(Liouvillian { space: *space, params: *params, frame, hamiltonian, jumps, matrix: OnceLock::new() })
}

impl Liouvillian {
    /// Build from an arbitrary Hamiltonian and jump set.
    pub fn from_parts(
        space: HilbertSpace,
        params: SystemParams,
        hamiltonian: SparseOperator,
        jumps: Vec<(f64, SparseOperator)>,
    ) -> Result<Self> {
        let d = space.dim;
        if hamiltonian.rows() != d || hamiltonian.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: hamiltonian.rows() });
        }
        for (_, l) in &jumps {
            if l.rows() != d || l.cols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: l.rows() });
            }
        }
        Ok(Self { space, params, frame: Frame::LAB, hamiltonian, jumps, matrix: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    /// dim² × dim² superoperator:
    /// −i(I⊗H − Hᵀ⊗I) + Σₖ γₖ[conj(Lₖ)⊗Lₖ − ½ I⊗Lₖ†Lₖ − ½ (Lₖ†Lₖ)ᵀ⊗I].
    pub fn matrix(&self) -> &SparseOperator {
        self.matrix.get_or_init(|| self.assemble())
    }

    fn assemble(&self) -> SparseOperator {
        let d = self.dim();
        let id = SparseOperator::identity(d);
        let mi = C64::new(0.0, -1.0);
        let mut parts: Vec<(C64, SparseOperator)> = vec![
            (mi, tensor_product(&id, &self.hamiltonian)),
            (-mi, tensor_product(&self.hamiltonian.transpose(), &id)),
        ];
        for (rate, l) in &self.jumps {
            if *rate == 0.0 {
                continue;
            }
            let ldl = l.adjoint().matmul(l).expect("square jump operator");
            let r = C64::new(*rate, 0.0);
            parts.push((r, tensor_product(&l.conj(), l)));
            parts.push((-0.5 * r, tensor_product(&id, &ldl)));
            parts.push((-0.5 * r, tensor_product(&ldl.transpose(), &id)));
        }
        let refs: Vec<(C64, &SparseOperator)> = parts.iter().map(|(s, m)| (*s, m)).collect();
        SparseOperator::linear_combination(d * d, d * d, &refs).expect("consistent superoperator blocks")
    }

    /// Effective non-Hermitian generator A = −iH − ½Σ γₖ Lₖ†Lₖ, so that
    /// L(ρ) = Aρ + ρA† + Σ γₖ Lₖ ρ Lₖ†.
    pub fn effective_generator(&self) -> Mat<C64> {
        let mut a = self.hamiltonian.to_dense();
        for v in a.col_iter_mut().flat_map(|c| c.iter_mut()) {
            *v *= C64::new(0.0, -1.0);
        }
        for (rate, l) in &self.jumps {
            let ldl = l.adjoint().matmul(l).expect("square jump operator");
            for (r, c, v) in ldl.entries() {
                a[(r, c)] -= v * (0.5 * rate);
            }
        }
        a
    }

    /// L(ρ) evaluated in operator form.
    pub fn apply(&self, rho: &Mat<C64>) -> Mat<C64> {
        let a = self.effective_generator();
        apply_with(&a, &self.jumps, rho)
    }
}

/// Aρ + ρA† + Σ γₖ Lₖ ρ Lₖ† for a precomputed A.
pub(crate) fn apply_with(a: &Mat<C64>, jumps: &[(f64, SparseOperator)], rho: &Mat<C64>) -> Mat<C64> {
    let mut out = a * rho;
    let ra = rho * a.adjoint();
    out += &ra;
    add_jumps(jumps, rho, &mut out);
    out
}

/// out += Σ γₖ Lₖ ρ Lₖ†, exploiting the sparsity of the jump operators.
pub(crate) fn add_jumps(jumps: &[(f64, SparseOperator)], rho: &Mat<C64>, out: &mut Mat<C64>) {
    for (rate, l) in jumps {
        if *rate == 0.0 {
            continue;
        }
        // Lₖ has at most one entry per row for the operators used here, but
        // stay general: (LρL†)_{ij} = Σ_{k,l} L_{ik} ρ_{kl} conj(L_{jl}).
        let rows: Vec<Vec<(usize, C64)>> = (0..l.rows())
            .map(|r| (l.row_ptr()[r]..l.row_ptr()[r + 1]).map(|k| (l.col_idx()[k], l.values()[k])).collect())
            .collect();
        for j in 0..l.rows() {
            if rows[j].is_empty() {
                continue;
            }
            for i in 0..l.rows() {
                if rows[i].is_empty() {
                    continue;
                }
                let mut s = C64::new(0.0, 0.0);
                for &(k, lik) in &rows[i] {
                    for &(m, ljm) in &rows[j] {
                        s += lik * rho[(k, m)] * ljm.conj();
                    }
                }
                out[(i, j)] += s * rate;
            }
        }
    }
}

/// vec(I)†·L, the trace functional applied to the generator; zero for any
/// trace-preserving L.
pub fn trace_functional_defect(l: &Liouvillian) -> f64 {
    let d = l.dim();
    let m = l.matrix();
    let mut acc = vec![C64::new(0.0, 0.0); d * d];
    for (r, c, v) in m.entries() {
        if r % (d + 1) == 0 {
            acc[c] += v;
        }
    }
    acc.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
