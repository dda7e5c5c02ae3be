mod common;

use faer::Mat;
use tavis::hilbert::{basis_index, HilbertSpace};
use tavis::model::*;
use tavis::steady::{mat_to_vec, vec_to_mat};
use tavis::C64;

fn params(n: usize) -> SystemParams {
    SystemParams { n_emitters: n, ..SystemParams::default() }
}

fn to_mat(d: &common::Dense) -> Mat<C64> {
    Mat::from_fn(d.len(), d.len(), |i, j| d[i][j])
}

#[test]
fn drive_free_resonant_uncoupled_hamiltonian_vanishes() {
    let p = SystemParams { g_col: 0.0, omega_drive_amp: 0.0, ..params(2) };
    let h = hamiltonian_rotating(&p, &HilbertSpace::new(2, 3).unwrap()).unwrap();
    assert_eq!(h.nnz(), 0);
}

#[test]
fn vacuum_rabi_splitting() {
    let p = SystemParams { omega_drive_amp: 0.0, ..params(1) };
    let s = HilbertSpace::new(1, 2).unwrap();
    let h = hamiltonian_rotating(&p, &s).unwrap();
    let i1 = basis_index(1, &[0], &s).unwrap();
    let i2 = basis_index(0, &[1], &s).unwrap();
    let block = Mat::<C64>::from_fn(2, 2, |r, c| h.get([i1, i2][r], [i1, i2][c]));
    let ev = block.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
    assert!((ev[0] + 0.03).abs() < 1e-15 && (ev[1] - 0.03).abs() < 1e-15, "{ev:?}");
}

#[test]
fn uncoupled_drive_entry() {
    for n in 1..=3 {
        let p = SystemParams { g_col: 0.0, ..params(n) };
        let s = HilbertSpace::new(n, 2).unwrap();
        let h = hamiltonian_rotating(&p, &s).unwrap();
        assert_eq!(h.get(0, 1 << n), C64::new(p.omega_drive_amp / 2.0, 0.0));
    }
}

#[test]
fn hamiltonian_is_hermitian_and_matches_dense_definition() {
    for n in 1..=3 {
        let p = SystemParams { omega_d: 0.97, omega_e: 1.02, omega_drive_amp: 0.02, ..params(n) };
        let s = HilbertSpace::new(n, 3).unwrap();
        let h = hamiltonian_rotating(&p, &s).unwrap();
        assert!(h.is_hermitian(1e-14));
        let hd = common::hamiltonian(&p, &s);
        for i in 0..s.dim {
            for j in 0..s.dim {
                assert!((h.get(i, j) - hd[i][j]).norm() < 1e-15);
            }
        }
    }
    let s = HilbertSpace::new(2, 3).unwrap();
    assert!(hamiltonian_rotating(&params(1), &s).is_err());
}

#[test]
fn trace_functional_annihilated() {
    for n in 1..=3 {
        for &(gc, ge) in &[(0.03, 0.0003), (0.0, 0.0), (0.1, 0.05)] {
            let p = SystemParams { gamma_c: gc, gamma_c_rad: gc, gamma_e: ge, omega_drive_amp: 0.05, ..params(n) };
            let l = liouvillian(&p, &HilbertSpace::new(n, 3).unwrap()).unwrap();
            let defect = trace_functional_defect(&l);
            if gc == 0.0 && ge == 0.0 {
                assert_eq!(defect, 0.0);
            } else {
                assert!(defect < 1e-10, "{defect}");
            }
        }
    }
}

#[test]
fn excited_emitter_decays_at_gamma_e() {
    let p = SystemParams { g_col: 0.0, omega_drive_amp: 0.0, ..params(1) };
    let s = HilbertSpace::new(1, 1).unwrap();
    let l = liouvillian(&p, &s).unwrap();
    let e = basis_index(0, &[1], &s).unwrap();
    let g = basis_index(0, &[0], &s).unwrap();
    let mut rho = Mat::<C64>::zeros(s.dim, s.dim);
    rho[(e, e)] = C64::new(1.0, 0.0);
    let drho = vec_to_mat(&l.matrix().mul_vec(&mat_to_vec(&rho)).unwrap(), s.dim);
    assert!((drho[(e, e)].re + p.gamma_e).abs() < 1e-18);
    assert!((drho[(g, g)].re - p.gamma_e).abs() < 1e-18);
}

#[test]
fn superoperator_matches_dense_master_equation() {
    let p = SystemParams {
        omega_c: 1.0,
        omega_e: 1.013,
        omega_d: 0.991,
        gamma_c: 0.071,
        gamma_c_rad: 0.05,
        gamma_e: 0.023,
        g_col: 0.047,
        n_emitters: 1,
        omega_drive_amp: 0.033,
    };
    let s = HilbertSpace::new(1, 2).unwrap();
    let l = liouvillian(&p, &s).unwrap();
    for seed in 1..=10u64 {
        let rho = common::random_density(s.dim, seed);
        let expect = common::master_rhs(&p, &s, &rho);
        let got = vec_to_mat(&l.matrix().mul_vec(&mat_to_vec(&to_mat(&rho))).unwrap(), s.dim);
        let op = l.apply(&to_mat(&rho));
        for i in 0..s.dim {
            for j in 0..s.dim {
                assert!((got[(i, j)] - expect[i][j]).norm() < 1e-12);
                assert!((op[(i, j)] - expect[i][j]).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn generator_preserves_hermiticity() {
    let p = SystemParams { omega_drive_amp: 0.04, omega_d: 1.01, ..params(2) };
    let s = HilbertSpace::new(2, 2).unwrap();
    let l = liouvillian(&p, &s).unwrap();
    for seed in 20..25u64 {
        let rho = to_mat(&common::random_density(s.dim, seed));
        let out = vec_to_mat(&l.matrix().mul_vec(&mat_to_vec(&rho)).unwrap(), s.dim);
        for i in 0..s.dim {
            for j in 0..s.dim {
                assert!((out[(i, j)] - out[(j, i)].conj()).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn spectrum_in_closed_left_half_plane() {
    for n in 1..=2 {
        let p = SystemParams { omega_drive_amp: 0.05, omega_d: 0.98, ..params(n) };
        let l = liouvillian(&p, &HilbertSpace::new(n, 2).unwrap()).unwrap();
        let ev = l.matrix().to_dense().eigenvalues().unwrap();
        let max_re = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(max_re <= 1e-9, "{max_re}");
    }
}

#[test]
fn displaced_frame_removes_the_drive() {
    let p = SystemParams { omega_drive_amp: 0.2, omega_d: 0.99, ..params(1) };
    let f = Frame::bare_cavity(&p);
    assert!(f.residual_drive(&p).norm() < 1e-16);
    let s = HilbertSpace::new(1, 3).unwrap();
    let h = hamiltonian_in_frame(&p, &s, f).unwrap();
    assert!(h.is_hermitian(1e-15));
    // no a, a† drive terms: ⟨1,g|H|0,g⟩ = 0 while the emitter picks up gβ
    let g0 = basis_index(0, &[0], &s).unwrap();
    let g1 = basis_index(1, &[0], &s).unwrap();
    let e0 = basis_index(0, &[1], &s).unwrap();
    assert!(h.get(g1, g0).norm() < 1e-16);
    assert!((h.get(e0, g0) - f.displacement * p.g()).norm() < 1e-16);
}

#[test]
fn negative_rates_rejected() {
    let p = SystemParams { gamma_e: -1.0, ..params(1) };
    let err = p.validate().unwrap_err().to_string();
    assert!(err.contains("gamma_e"), "{err}");
    let p = SystemParams { gamma_c_rad: 0.05, ..params(1) };
    assert!(p.validate().is_err());
}
