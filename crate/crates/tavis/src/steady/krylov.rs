//! Preconditioned GMRES for the steady state.
//!
//! Split L(ρ) = S(ρ) + J(ρ) with S(ρ) = Aρ + ρA† (A = −iH − ½ΣγL†L) and
//! J(ρ) = ΣγLρL†. S is inverted exactly through a complex Schur form of A
//! (Bartels–Stewart), and GMRES solves the bordered system
//!
//!   ρ + S⁻¹J(ρ) + v·tr ρ = v,   v = I/d,
//!
//! whose unique solution is the trace-one steady state whenever that state
//! is unique: the left null vector of S⁻¹L is vec(I)†S, and
//! Tr S(I/d) = −Tr(Γ)/d ≠ 0 for any dissipative system.

use faer::{Accum, Mat, Par};
use nalgebra::DMatrix;

use crate::hilbert::C64;
use crate::model::{add_jumps, Liouvillian};
use crate::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub(crate) struct KrylovOptions {
    pub restart: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { restart: 80, max_iter: 3000, rel_tol: 1e-13 }
    }
}

pub(crate) struct KrylovOutcome {
    pub rho: Mat<C64>,
    pub iterations: usize,
}

/// Inverse of ρ ↦ Aρ + ρA† via A = QTQ†.
struct SylvesterInverse {
    q: Mat<C64>,
    t: Mat<C64>,
}

impl SylvesterInverse {
    fn new(a: &Mat<C64>) -> Result<Self> {
        let d = a.nrows();
        let na = DMatrix::<C64>::from_fn(d, d, |i, j| a[(i, j)]);
        let schur = na
            .try_schur(1e-15, 10_000)
            .ok_or_else(|| Error::Singular("complex Schur decomposition did not converge".into()))?;
        let (nq, nt) = schur.unpack();
        let q = Mat::<C64>::from_fn(d, d, |i, j| nq[(i, j)]);
        let t = Mat::<C64>::from_fn(d, d, |i, j| if i <= j { nt[(i, j)] } else { ZERO });

        let scale = (0..d).map(|i| t[(i, i)].norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut gap = f64::INFINITY;
        for i in 0..d {
            for j in 0..d {
                gap = gap.min((t[(i, i)] + t[(j, j)].conj()).norm());
            }
        }
        if gap <= 1e-13 * scale {
            return Err(Error::Singular(format!(
                "Aρ + ρA† is singular (eigenvalue gap {gap:.2e}); the generator has a non-decaying mode"
            )));
        }
        Ok(Self { q, t })
    }

    fn apply(&self, c: &Mat<C64>) -> Mat<C64> {
        let ct = self.q.adjoint() * c * &self.q;
        let x = solve_triangular_sylvester(&self.t, ct);
        &self.q * x * self.q.adjoint()
    }
}

/// Solve T X + X T† = C for upper-triangular T, column by column from the
/// right; the trailing-column coupling is applied blockwise with a matmul.
fn solve_triangular_sylvester(t: &Mat<C64>, mut r: Mat<C64>) -> Mat<C64> {
    const BLOCK: usize = 48;
    let d = t.nrows();
    let mut x = Mat::<C64>::zeros(d, d);
    let mut j1 = d;
    while j1 > 0 {
        let j0 = j1.saturating_sub(BLOCK);
        for j in (j0..j1).rev() {
            let mu = t[(j, j)].conj();
            // back substitution for (T + μI) x = r[:, j]
            for i in (0..d).rev() {
                let mut s = r[(i, j)];
                for k in i + 1..d {
                    s -= t[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s / (t[(i, i)] + mu);
            }
            // in-block coupling to columns j0..j
            for jj in j0..j {
                let c = t[(jj, j)].conj();
                if c == ZERO {
                    continue;
                }
                for i in 0..d {
                    let xv = x[(i, j)];
                    r[(i, jj)] -= xv * c;
                }
            }
        }
        if j0 > 0 {
            // r[:, ..j0] -= x[:, j0..j1] · T[..j0, j0..j1]†
            let xb = x.as_ref().subcols(j0, j1 - j0);
            let tb = t.as_ref().submatrix(0, j0, j0, j1 - j0);
            faer::linalg::matmul::matmul(
                r.as_mut().subcols_mut(0, j0),
                Accum::Add,
                xb,
                tb.adjoint(),
                C64::new(-1.0, 0.0),
                Par::Seq,
            );
        }
        j1 = j0;
    }
    x
}

fn dot(a: &Mat<C64>, b: &Mat<C64>) -> C64 {
    let mut s = ZERO;
    for j in 0..a.ncols() {
        for (x, y) in a.col(j).iter().zip(b.col(j).iter()) {
            s += x.conj() * y;
        }
    }
    s
}

fn norm(a: &Mat<C64>) -> f64 {
    dot(a, a).re.sqrt()
}

fn axpy(y: &mut Mat<C64>, alpha: C64, x: &Mat<C64>) {
    for j in 0..y.ncols() {
        for (yv, xv) in y.col_mut(j).iter_mut().zip(x.col(j).iter()) {
            *yv += alpha * xv;
        }
    }
}

fn scaled(x: &Mat<C64>, alpha: C64) -> Mat<C64> {
    Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * alpha)
}

fn trace(x: &Mat<C64>) -> C64 {
    (0..x.nrows()).map(|i| x[(i, i)]).sum()
}

struct BorderedOperator<'a> {
    inv: SylvesterInverse,
    jumps: &'a [(f64, crate::hilbert::SparseOperator)],
    v: Mat<C64>,
}

impl BorderedOperator<'_> {
    fn apply(&self, x: &Mat<C64>) -> Mat<C64> {
        let mut j = Mat::<C64>::zeros(x.nrows(), x.ncols());
        add_jumps(self.jumps, x, &mut j);
        let mut out = self.inv.apply(&j);
        out += x;
        axpy(&mut out, trace(x), &self.v);
        out
    }
}

pub(crate) fn solve(l: &Liouvillian, opts: &KrylovOptions) -> Result<KrylovOutcome> {
    let d = l.dim();
    let a = l.effective_generator();
    let inv = SylvesterInverse::new(&a)?;
    let v = Mat::<C64>::from_fn(d, d, |i, j| if i == j { C64::new(1.0 / d as f64, 0.0) } else { ZERO });
    let op = BorderedOperator { inv, jumps: &l.jumps, v };
    let b = op.v.clone();
    let bnorm = norm(&b);

    let mut x = b.clone();
    let mut iterations = 0usize;
    let mut last_res = f64::INFINITY;
    loop {
        let mut r = b.clone();
        axpy(&mut r, C64::new(-1.0, 0.0), &op.apply(&x));
        let beta = norm(&r);
        let prev = last_res;
        last_res = beta / bnorm;
        // stop on convergence, budget, or a restart cycle that no longer helps
        if last_res <= opts.rel_tol || iterations >= opts.max_iter || last_res > 0.5 * prev {
            break;
        }
        let m = opts.restart;
        let mut basis: Vec<Mat<C64>> = vec![scaled(&r, C64::new(1.0 / beta, 0.0))];
        let mut h = vec![vec![ZERO; m]; m + 1];
        let mut cs = vec![ZERO; m];
        let mut sn = vec![ZERO; m];
        let mut g = vec![ZERO; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            let mut w = op.apply(&basis[k]);
            // modified Gram–Schmidt, twice for stability
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let hik = dot(q, &w);
                    h[i][k] += hik;
                    axpy(&mut w, -hik, q);
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = C64::new(wn, 0.0);
            for i in 0..k {
                let t = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c.conj() * h[k][k] + s.conj() * h[k + 1][k];
            h[k + 1][k] = ZERO;
            g[k + 1] = -s * g[k];
            g[k] = c.conj() * g[k];
            iterations += 1;
            k_used = k + 1;
            if g[k + 1].norm() / bnorm <= opts.rel_tol * 0.5 || wn == 0.0 || iterations >= opts.max_iter {
                break;
            }
            basis.push(scaled(&w, C64::new(1.0 / wn, 0.0)));
        }
        // back substitution for the least-squares coefficients
        let mut y = vec![ZERO; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (yi, q) in y.iter().zip(&basis) {
            axpy(&mut x, *yi, q);
        }
        if !y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Singular("GMRES breakdown produced non-finite iterates".into()));
        }
    }
    if last_res > opts.rel_tol.max(1e-11) {
        return Err(Error::NotConverged { iterations, residual: last_res });
    }
    Ok(KrylovOutcome { rho: x, iterations })
}

/// Unitary [[c̄, s̄], [−s, c]] mapping (a, b) to (r, 0); c is real.
fn givens(a: C64, b: C64) -> (C64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (C64::new(1.0, 0.0), ZERO);
    }
    if an == 0.0 {
        return (ZERO, b / bn);
    }
    let r = (an * an + bn * bn).sqrt();
    (C64::new(an / r, 0.0), b * a.conj() / (an * r))
}
