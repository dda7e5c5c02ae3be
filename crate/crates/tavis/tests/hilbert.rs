use proptest::prelude::*;
use tavis::hilbert::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn dense_mul(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

fn to_rows(op: &SparseOperator) -> Vec<Vec<C64>> {
    let mut out = vec![vec![c(0.0, 0.0); op.cols()]; op.rows()];
    for (r, col, v) in op.entries() {
        out[r][col] = v;
    }
    out
}

fn from_rows(rows: &[Vec<C64>]) -> SparseOperator {
    let mut t = vec![];
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            t.push((i, j, *v));
        }
    }
    SparseOperator::from_triplets(rows.len(), rows[0].len(), t).unwrap()
}

fn assert_close(a: &SparseOperator, b: &SparseOperator, tol: f64) {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    let (da, db) = (to_rows(a), to_rows(b));
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            assert!((da[i][j] - db[i][j]).norm() <= tol, "entry ({i},{j}): {} vs {}", da[i][j], db[i][j]);
        }
    }
}

#[test]
fn annihilation_entries() {
    let a = annihilation_op(1).unwrap();
    assert_eq!(a.nnz(), 1);
    assert_eq!(a.get(0, 1), c(1.0, 0.0));
    let a2 = annihilation_op(2).unwrap();
    assert!((a2.get(1, 2).re - 1.41421356).abs() < 1e-8);
    let vac = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    assert!(a2.mul_vec(&vac).unwrap().iter().all(|v| v.norm() == 0.0));
    assert!(annihilation_op(0).is_err());
}

#[test]
fn lowering_single_emitter() {
    let s = HilbertSpace::new(1, 1).unwrap();
    let sm = lowering_op(1, &s).unwrap();
    let g = basis_index(0, &[0], &s).unwrap();
    let e = basis_index(0, &[1], &s).unwrap();
    assert_eq!(sm.get(g, e), c(1.0, 0.0));
    assert_eq!(sm.nnz(), 2); // one per photon number
    assert!(lowering_op(0, &s).is_err());
    assert!(lowering_op(2, &s).is_err());
}

#[test]
fn lowering_nilpotent_and_commuting() {
    let s = HilbertSpace::new(2, 2).unwrap();
    let s1 = lowering_op(1, &s).unwrap();
    let s2 = lowering_op(2, &s).unwrap();
    assert_eq!(s1.matmul(&s1).unwrap().nnz(), 0);
    assert_close(&s1.matmul(&s2).unwrap(), &s2.matmul(&s1).unwrap(), 0.0);
}

#[test]
fn tensor_examples() {
    let i6 = tensor_product(&SparseOperator::identity(2), &SparseOperator::identity(3));
    assert_close(&i6, &SparseOperator::identity(6), 0.0);
    let a = annihilation_op(3).unwrap();
    assert_close(&tensor_product(&SparseOperator::identity(1), &a), &a, 0.0);
    assert_close(&tensor_product(&a, &SparseOperator::identity(1)), &a, 0.0);
}

#[test]
fn basis_index_examples() {
    let s = HilbertSpace::new(2, 2).unwrap();
    assert_eq!(basis_index(0, &[0, 0], &s).unwrap(), 0);
    assert_eq!(basis_index(1, &[0, 1], &s).unwrap(), 5);
    assert!(basis_index(3, &[0, 0], &s).is_err());
    assert!(basis_index(0, &[0], &s).is_err());
    assert_eq!(s.dim, 12);
}

#[test]
fn basis_index_is_a_bijection() {
    for n_em in 1..=4 {
        let s = HilbertSpace::new(n_em, 3).unwrap();
        let mut seen = vec![false; s.dim];
        for n in 0..=s.n_max {
            for bits in 0..(1usize << n_em) {
                // emitter 1 is the leftmost spin
                let spins: Vec<u8> = (0..n_em).map(|i| ((bits >> (n_em - 1 - i)) & 1) as u8).collect();
                let idx = basis_index(n, &spins, &s).unwrap();
                assert!(!seen[idx]);
                seen[idx] = true;
                assert_eq!(basis_state(idx, &s).unwrap(), (n, spins));
            }
        }
        assert!(seen.iter().all(|&x| x));
    }
}

#[test]
fn truncated_commutator() {
    for n_max in 1..6 {
        let a = annihilation_op(n_max).unwrap();
        let ad = a.adjoint();
        let comm = a.matmul(&ad).unwrap().add(&ad.matmul(&a).unwrap().scale(c(-1.0, 0.0))).unwrap();
        let mut expect = vec![c(1.0, 0.0); n_max + 1];
        expect[n_max] = c(-(n_max as f64), 0.0);
        assert_close(&comm, &SparseOperator::diagonal(&expect), 1e-14);
    }
}

#[test]
fn emitter_projectors() {
    let s = HilbertSpace::new(3, 2).unwrap();
    for i in 1..=3 {
        let sm = lowering_op(i, &s).unwrap();
        let p = sm.adjoint().matmul(&sm).unwrap();
        assert_close(&p.matmul(&p).unwrap(), &p, 0.0);
        assert!(p.is_hermitian(0.0));
        for j in 1..=3 {
            let sj = lowering_op(j, &s).unwrap();
            assert_close(&sm.matmul(&sj).unwrap(), &sj.matmul(&sm).unwrap(), 0.0);
        }
    }
}

#[test]
fn duplicates_are_summed() {
    let op = SparseOperator::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (1, 0, c(1.0, 0.0)), (1, 0, c(-1.0, 0.0))]).unwrap();
    assert_eq!(op.nnz(), 1);
    assert_eq!(op.get(0, 1), c(3.0, 0.0));
    assert!(SparseOperator::from_triplets(2, 2, vec![(0, 0, c(f64::NAN, 0.0))]).is_err());
    assert!(SparseOperator::from_triplets(2, 2, vec![(2, 0, c(1.0, 0.0))]).is_err());
}

fn mat2() -> impl Strategy<Value = Vec<Vec<C64>>> {
    prop::collection::vec(prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b)), 2), 2)
}

proptest! {
    #[test]
    fn kron_mixed_product(a in mat2(), b in mat2(), cc in mat2(), d in mat2()) {
        let (sa, sb, sc, sd) = (from_rows(&a), from_rows(&b), from_rows(&cc), from_rows(&d));
        let lhs = tensor_product(&sa, &sb).matmul(&tensor_product(&sc, &sd)).unwrap();
        let ac = from_rows(&dense_mul(&a, &cc));
        let bd = from_rows(&dense_mul(&b, &d));
        let rhs = tensor_product(&ac, &bd);
        assert_close(&lhs, &rhs, 1e-12);
    }

    #[test]
    fn kron_matches_dense_definition(a in mat2(), b in mat2()) {
        let k = to_rows(&tensor_product(&from_rows(&a), &from_rows(&b)));
        for i in 0..4 {
            for j in 0..4 {
                let expect = a[i / 2][j / 2] * b[i % 2][j % 2];
                prop_assert!((k[i][j] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sparse_matmul_matches_dense(a in mat2(), b in mat2()) {
        let p = from_rows(&a).matmul(&from_rows(&b)).unwrap();
        assert_close(&p, &from_rows(&dense_mul(&a, &b)), 1e-14);
    }
}
