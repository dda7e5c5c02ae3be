//! Dense reference implementations shared by the integration tests. They are
//! written from the basis definitions, independently of the sparse assembly.
#![allow(dead_code)]

use tavis::{HilbertSpace, SystemParams, C64};

pub type Dense = Vec<Vec<C64>>;

pub fn zeros(n: usize) -> Dense {
    vec![vec![C64::new(0.0, 0.0); n]; n]
}

pub fn mul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn adj(a: &Dense) -> Dense {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn lin(terms: &[(C64, &Dense)]) -> Dense {
    let n = terms[0].1.len();
    let mut out = zeros(n);
    for (s, m) in terms {
        for i in 0..n {
            for j in 0..n {
                out[i][j] += *s * m[i][j];
            }
        }
    }
    out
}

fn spin_bit(idx: usize, i: usize, n_em: usize) -> usize {
    (idx >> (n_em - i)) & 1
}

/// â from its action on |n; s⟩.
pub fn cavity(space: &HilbertSpace) -> Dense {
    let ns = 1 << space.n_emitters;
    let mut a = zeros(space.dim);
    for n in 1..=space.n_max {
        for s in 0..ns {
            a[(n - 1) * ns + s][n * ns + s] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    a
}

/// σ₋ᵢ (1-based, emitter 1 = most significant spin bit).
pub fn lowering(space: &HilbertSpace, i: usize) -> Dense {
    let mut s = zeros(space.dim);
    for idx in 0..space.dim {
        if spin_bit(idx, i, space.n_emitters) == 1 {
            s[idx - (1 << (space.n_emitters - i))][idx] = C64::new(1.0, 0.0);
        }
    }
    s
}

pub fn hamiltonian(p: &SystemParams, space: &HilbertSpace) -> Dense {
    let a = cavity(space);
    let ad = adj(&a);
    let one = C64::new(1.0, 0.0);
    let g = p.g_col / (p.n_emitters as f64).sqrt();
    let mut h = lin(&[
        (C64::new(p.omega_c - p.omega_d, 0.0), &mul(&ad, &a)),
        (C64::new(p.omega_drive_amp / 2.0, 0.0), &lin(&[(one, &a), (one, &ad)])),
    ]);
    for i in 1..=space.n_emitters {
        let sm = lowering(space, i);
        let sp = adj(&sm);
        h = lin(&[
            (one, &h),
            (C64::new(p.omega_e - p.omega_d, 0.0), &mul(&sp, &sm)),
            (C64::new(g, 0.0), &mul(&ad, &sm)),
            (C64::new(g, 0.0), &mul(&a, &sp)),
        ]);
    }
    h
}

/// Right-hand side of the master equation, −i[H, ρ] + Σ γ(LρL† − ½{L†L, ρ}).
pub fn master_rhs(p: &SystemParams, space: &HilbertSpace, rho: &Dense) -> Dense {
    let h = hamiltonian(p, space);
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let mut out = lin(&[(-i, &mul(&h, rho)), (i, &mul(rho, &h))]);
    let mut jumps = vec![(p.gamma_c, cavity(space))];
    for k in 1..=space.n_emitters {
        jumps.push((p.gamma_e, lowering(space, k)));
    }
    for (g, l) in &jumps {
        let ld = adj(l);
        let ldl = mul(&ld, l);
        out = lin(&[
            (one, &out),
            (C64::new(*g, 0.0), &mul(&mul(l, rho), &ld)),
            (C64::new(-0.5 * g, 0.0), &mul(&ldl, rho)),
            (C64::new(-0.5 * g, 0.0), &mul(rho, &ldl)),
        ]);
    }
    out
}

/// Deterministic pseudo-random density matrix (xorshift; tests only).
pub fn random_density(dim: usize, seed: u64) -> Dense {
    let mut s = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
    let mut next = || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let b: Dense = (0..dim).map(|_| (0..dim).map(|_| C64::new(next(), next())).collect()).collect();
    let mut r = mul(&b, &adj(&b));
    let tr: C64 = (0..dim).map(|k| r[k][k]).sum();
    for row in r.iter_mut() {
        for v in row.iter_mut() {
            *v /= tr;
        }
    }
    r
}

pub fn reference_params() -> SystemParams {
    SystemParams::default()
}
