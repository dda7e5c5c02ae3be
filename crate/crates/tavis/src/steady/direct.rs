//! Bordered direct solves: the first row of L is replaced by vec(I)† and the
//! right-hand side is e₀.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::vec_to_mat;
use crate::hilbert::C64;
use crate::model::Liouvillian;
use crate::{Error, Result};

/// Entries beyond this magnitude signal a (numerically) singular system.
const BLOWUP: f64 = 1e8;

fn bordered_triplets(l: &Liouvillian) -> Vec<(usize, usize, C64)> {
    let d = l.dim();
    let mut t: Vec<(usize, usize, C64)> = l.matrix().entries().filter(|&(r, _, _)| r != 0).collect();
    t.extend((0..d).map(|i| (0, i * (d + 1), C64::new(1.0, 0.0))));
    t
}

fn finish(x: Vec<C64>, d: usize) -> Result<Mat<C64>> {
    let big = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(big <= BLOWUP) {
        return Err(Error::Singular(format!("bordered system is singular (solution magnitude {big:.2e})")));
    }
    Ok(vec_to_mat(&x, d))
}

pub(super) fn dense(l: &Liouvillian) -> Result<Mat<C64>> {
    let d = l.dim();
    let n = d * d;
    let mut m = Mat::<C64>::zeros(n, n);
    for (r, c, v) in bordered_triplets(l) {
        m[(r, c)] += v;
    }
    let mut b = Mat::<C64>::zeros(n, 1);
    b[(0, 0)] = C64::new(1.0, 0.0);
    let lu = m.partial_piv_lu();
    lu.solve_in_place(b.as_mut());
    finish((0..n).map(|i| b[(i, 0)]).collect(), d)
}

pub(super) fn sparse(l: &Liouvillian) -> Result<Mat<C64>> {
    let d = l.dim();
    let n = d * d;
    let trip: Vec<Triplet<usize, usize, C64>> =
        bordered_triplets(l).into_iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    let m = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::Singular(format!("sparse assembly failed: {e:?}")))?;
    let lu = m.sp_lu().map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
    let mut b = Mat::<C64>::zeros(n, 1);
    b[(0, 0)] = C64::new(1.0, 0.0);
    lu.solve_in_place(b.as_mut());
    finish((0..n).map(|i| b[(i, 0)]).collect(), d)
}
