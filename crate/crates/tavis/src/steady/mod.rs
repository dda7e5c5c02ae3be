//! Steady states of the Lindblad generator, an RK4 time-evolution oracle,
//! and automatic Fock truncation.

mod direct;
mod krylov;

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::hilbert::{HilbertSpace, C64};
use crate::model::{liouvillian_in_frame, Frame, Liouvillian, SystemParams};
use crate::{Error, Result};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
pub const DEFAULT_NMAX_CAP: usize = 40;

const HERMITICITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = -1e-8;

/// Hermitian, unit-trace, positive semidefinite state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub dim: usize,
    pub entries: Mat<C64>,
}

impl DensityMatrix {
    /// |i⟩⟨i| for a basis index.
    pub fn basis_projector(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::OutOfRange { what: "basis index", index, bound: dim.saturating_sub(1) });
        }
        let mut entries = Mat::<C64>::zeros(dim, dim);
        entries[(index, index)] = C64::new(1.0, 0.0);
        Ok(Self { dim, entries })
    }

    /// Wrap a matrix without any checks.
    pub fn from_matrix_unchecked(entries: Mat<C64>) -> Self {
        Self { dim: entries.nrows(), entries }
    }

    /// Symmetrize, normalize the trace and verify the invariants.
    pub fn from_matrix(mut m: Mat<C64>) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.ncols() });
        }
        for i in 0..d {
            for j in i..d {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        let tr = (0..d).map(|i| m[(i, i)].re).sum::<f64>();
        if !(tr.is_finite() && tr.abs() > 0.0) {
            return Err(Error::Singular(format!("solution has trace {tr}")));
        }
        for v in m.col_iter_mut().flat_map(|c| c.iter_mut()) {
            *v /= tr;
        }
        let rho = Self { dim: d, entries: m };
        rho.check_invariants()?;
        Ok(rho)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.entries[(i, i)]).sum()
    }

    /// max |ρ − ρ†| entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                e = e.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        e
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let ev = self
            .entries
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Invariant(format!("eigenvalue solver failed: {e:?}")))?;
        Ok(ev.first().copied().unwrap_or(0.0))
    }

    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if !(herm <= HERMITICITY_TOL) {
            return Err(Error::Invariant(format!("Hermiticity error {herm:.3e}")));
        }
        let tr = self.trace();
        if !((tr - C64::new(1.0, 0.0)).norm() <= TRACE_TOL) {
            return Err(Error::Invariant(format!("trace {tr} differs from 1")));
        }
        let lmin = self.min_eigenvalue()?;
        if !(lmin >= POSITIVITY_TOL) {
            return Err(Error::Invariant(format!("minimum eigenvalue {lmin:.3e} below {POSITIVITY_TOL:e}")));
        }
        Ok(())
    }

    /// ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let diff = &self.entries - &other.entries;
        let herm = Mat::<C64>::from_fn(self.dim, self.dim, |i, j| (diff[(i, j)] + diff[(j, i)].conj()) * 0.5);
        let ev = herm
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Invariant(format!("eigenvalue solver failed: {e:?}")))?;
        Ok(0.5 * ev.iter().map(|v| v.abs()).sum::<f64>())
    }

    pub fn to_vec(&self) -> Vec<C64> {
        mat_to_vec(&self.entries)
    }
}

/// Column-stacking vectorization.
pub fn mat_to_vec(m: &Mat<C64>) -> Vec<C64> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for j in 0..m.ncols() {
        v.extend(m.col(j).iter().copied());
    }
    v
}

pub fn vec_to_mat(v: &[C64], d: usize) -> Mat<C64> {
    Mat::from_fn(d, d, |i, j| v[i + d * j])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Dense LU for tiny systems, preconditioned GMRES otherwise, sparse LU
    /// as a fallback when the preconditioner is singular.
    Auto,
    DenseLu,
    SparseLu,
    Krylov,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyOptions {
    pub tol: f64,
    pub solver: SolverKind,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_RESIDUAL_TOL, solver: SolverKind::Auto }
    }
}

/// Largest dim² handled by dense LU under [`SolverKind::Auto`].
const DENSE_LIMIT: usize = 1024;
/// Largest dim² for which the sparse-LU fallback is attempted.
const SPARSE_FALLBACK_LIMIT: usize = 20_000;

/// Solution together with where and how it was obtained.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    pub space: HilbertSpace,
    pub frame: Frame,
    /// ‖L vec ρ‖∞ / (‖L‖∞ · max|ρᵢⱼ|).
    pub residual: f64,
    pub solver: SolverKind,
    pub iterations: usize,
}

pub fn steady_state(l: &Liouvillian, tol: f64) -> Result<DensityMatrix> {
    Ok(steady_state_with(l, &SteadyOptions { tol, ..Default::default() })?.rho)
}

pub fn steady_state_with(l: &Liouvillian, opts: &SteadyOptions) -> Result<SteadyState> {
    faer::set_global_parallelism(faer::Par::Seq);
    let n2 = l.dim() * l.dim();
    let (raw, solver, iterations) = match opts.solver {
        SolverKind::DenseLu => (direct::dense(l)?, SolverKind::DenseLu, 0),
        SolverKind::SparseLu => (direct::sparse(l)?, SolverKind::SparseLu, 0),
        SolverKind::Krylov => {
            let out = krylov::solve(l, &Default::default())?;
            (out.rho, SolverKind::Krylov, out.iterations)
        }
        SolverKind::Auto if n2 <= DENSE_LIMIT => (direct::dense(l)?, SolverKind::DenseLu, 0),
        SolverKind::Auto => match krylov::solve(l, &Default::default()) {
            Ok(out) => (out.rho, SolverKind::Krylov, out.iterations),
            Err(Error::Singular(_)) if n2 <= SPARSE_FALLBACK_LIMIT => (direct::sparse(l)?, SolverKind::SparseLu, 0),
            Err(e) => return Err(e),
        },
    };
    if !raw.col_iter().flat_map(|c| c.iter()).all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Singular("solution contains non-finite entries".into()));
    }
    let rho = DensityMatrix::from_matrix(raw)?;
    let residual = relative_residual(l, &rho);
    if !(residual <= opts.tol) {
        return Err(Error::Residual { achieved: residual, tol: opts.tol });
    }
    Ok(SteadyState { rho, space: l.space, frame: l.frame, residual, solver, iterations })
}

/// ‖L vec ρ‖∞ relative to ‖L‖∞·max|ρᵢⱼ|.
pub fn relative_residual(l: &Liouvillian, rho: &DensityMatrix) -> f64 {
    let m = l.matrix();
    let r = m.mul_vec(&rho.to_vec()).expect("matching dimension");
    let rmax = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = m.norm_inf() * rho.entries.col_iter().flat_map(|c| c.iter()).map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return rmax;
    }
    rmax / scale
}

/// Classical RK4 on d vec(ρ)/dt = L vec(ρ).
pub fn evolve_oracle(l: &Liouvillian, rho0: &DensityMatrix, t_end: f64, dt: f64) -> Result<DensityMatrix> {
    if rho0.dim != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), found: rho0.dim });
    }
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(Error::invalid("dt", "time step must be positive and t_end non-negative"));
    }
    let m = l.matrix();
    let d = l.dim();
    let n = d * d;
    let steps = (t_end / dt).ceil() as usize;
    let h = if steps > 0 { t_end / steps as f64 } else { 0.0 };
    let tr0 = rho0.trace();
    let mut y = rho0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![C64::default(); n], vec![C64::default(); n], vec![C64::default(); n], vec![C64::default(); n]);
    let mut tmp = vec![C64::default(); n];
    let trace_of = |v: &[C64]| (0..d).map(|i| v[i * (d + 1)]).sum::<C64>();
    for step in 0..steps {
        m.mul_vec_into(&y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        m.mul_vec_into(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        m.mul_vec_into(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * h;
        }
        m.mul_vec_into(&tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        if step % 64 == 0 || step + 1 == steps {
            let drift = (trace_of(&y) - tr0).norm();
            if !(drift <= 1e-6) {
                return Err(Error::Unstable { drift });
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(vec_to_mat(&y, d)))
}

/// Frame selection for a solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FramePolicy {
    Lab,
    /// Displace by the bare driven-cavity amplitude.
    Displaced,
    /// Displace once the bare cavity population reaches `threshold`.
    Auto { threshold: f64 },
}

impl Default for FramePolicy {
    fn default() -> Self {
        FramePolicy::Auto { threshold: 4.0 }
    }
}

impl FramePolicy {
    pub fn frame_for(&self, params: &SystemParams) -> Frame {
        match *self {
            FramePolicy::Lab => Frame::LAB,
            FramePolicy::Displaced => Frame::bare_cavity(params),
            FramePolicy::Auto { threshold } => {
                if params.bare_cavity_amplitude().norm_sqr() >= threshold {
                    Frame::bare_cavity(params)
                } else {
                    Frame::LAB
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationOptions {
    pub tail_tol: f64,
    pub start: usize,
    pub step: usize,
    pub cap: usize,
    pub frame: FramePolicy,
    pub steady: SteadyOptions,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        Self {
            tail_tol: DEFAULT_TAIL_TOL,
            start: 4,
            step: 4,
            cap: DEFAULT_NMAX_CAP,
            frame: FramePolicy::Lab,
            steady: SteadyOptions::default(),
        }
    }
}

/// Population of the two highest Fock levels of a truncated state.
pub fn top_levels_population(rho: &DensityMatrix, space: &HilbertSpace) -> f64 {
    (0..space.dim)
        .filter(|&i| space.photon_number(i) + 1 >= space.n_max)
        .map(|i| rho.entries[(i, i)].re)
        .sum()
}

/// Prior lower bound on n_max: three times the bare cavity population
/// left in the frame (Ωd²/γc² at resonance in the plain rotating frame).
pub fn prior_lower_bound(params: &SystemParams, frame: Frame) -> usize {
    let n = if frame.is_lab() {
        if params.gamma_c > 0.0 {
            let x = params.omega_drive_amp / params.gamma_c;
            x * x
        } else {
            f64::INFINITY
        }
    } else {
        (params.bare_cavity_amplitude() - frame.displacement).norm_sqr()
    };
    let b = (3.0 * n).ceil();
    if b.is_finite() {
        b as usize
    } else {
        usize::MAX
    }
}

/// Smallest n_max (start, start+step, …, at least the prior bound) whose
/// steady state leaves less than `tail_tol` in the top two Fock levels.
pub fn auto_truncate(params: &SystemParams, tail_tol: f64) -> Result<usize> {
    Ok(auto_truncate_with(params, &TruncationOptions { tail_tol, ..Default::default() })?.space.n_max)
}

/// As [`auto_truncate`], returning the accepted steady state.
pub fn auto_truncate_with(params: &SystemParams, opts: &TruncationOptions) -> Result<SteadyState> {
    if !(opts.tail_tol > 0.0 && opts.tail_tol < 1.0) {
        return Err(Error::invalid("tail_tol", "must lie in (0, 1)"));
    }
    if opts.step == 0 || opts.start == 0 {
        return Err(Error::invalid("step", "truncation start and step must be positive"));
    }
    params.validate()?;
    let frame = opts.frame.frame_for(params);
    let prior = prior_lower_bound(params, frame);
    let mut n_max = opts.start;
    while n_max < prior {
        n_max = n_max.saturating_add(opts.step);
    }
    if n_max > opts.cap {
        return Err(Error::TruncationBound { cap: opts.cap, bound: prior });
    }
    loop {
        let space = HilbertSpace::new(params.n_emitters, n_max)?;
        let l = liouvillian_in_frame(params, &space, frame)?;
        let ss = steady_state_with(&l, &opts.steady)?;
        let tail = top_levels_population(&ss.rho, &space);
        if tail < opts.tail_tol {
            return Ok(ss);
        }
        if n_max + opts.step > opts.cap {
            return Err(Error::TruncationCap { cap: opts.cap, tail });
        }
        n_max += opts.step;
    }
}

/// Solve at a fixed truncation in the frame chosen by `policy`.
pub fn solve_fixed(params: &SystemParams, n_max: usize, policy: FramePolicy, opts: &SteadyOptions) -> Result<SteadyState> {
    params.validate()?;
    let space = HilbertSpace::new(params.n_emitters, n_max)?;
    let l = liouvillian_in_frame(params, &space, policy.frame_for(params))?;
    steady_state_with(&l, opts)
}
