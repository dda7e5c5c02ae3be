//! Truncated Fock ⊗ N-qubit space and the sparse operators living on it.
//!
//! Basis ordering: |n; s₁…s_N⟩ ↦ n·2^N + Σᵢ sᵢ·2^(N−i). The Fock index varies
//! slowest, emitter 1 is the most significant spin bit.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpace {
    pub n_emitters: usize,
    pub n_max: usize,
    pub dim: usize,
}

impl HilbertSpace {
    pub fn new(n_emitters: usize, n_max: usize) -> Result<Self> {
        if n_emitters == 0 {
            return Err(Error::invalid("n_emitters", "at least one emitter is required"));
        }
        if n_max == 0 {
            return Err(Error::invalid("n_max", "Fock truncation must be at least 1"));
        }
        if n_emitters > 20 {
            return Err(Error::invalid("n_emitters", "full 2^N spin space is limited to N ≤ 20"));
        }
        let dim = (n_max + 1)
            .checked_mul(1usize << n_emitters)
            .ok_or_else(|| Error::invalid("n_max", "dimension overflows"))?;
        Ok(Self { n_emitters, n_max, dim })
    }

    /// Number of spin configurations, 2^N.
    pub fn spin_dim(&self) -> usize {
        1 << self.n_emitters
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Index of the state with `n` photons and all emitters in the ground state.
    pub fn ground_index(&self, n: usize) -> usize {
        n * self.spin_dim()
    }

    /// Photon number and spin bit pattern of a basis index.
    pub fn photon_number(&self, index: usize) -> usize {
        index >> self.n_emitters
    }

    pub fn excitation_count(&self, index: usize) -> usize {
        (index & (self.spin_dim() - 1)).count_ones() as usize
    }
}

pub fn basis_index(n: usize, spins: &[u8], space: &HilbertSpace) -> Result<usize> {
    if n > space.n_max {
        return Err(Error::OutOfRange { what: "photon number", index: n, bound: space.n_max });
    }
    if spins.len() != space.n_emitters {
        return Err(Error::DimensionMismatch { expected: space.n_emitters, found: spins.len() });
    }
    let mut idx = n << space.n_emitters;
    for (i, &s) in spins.iter().enumerate() {
        match s {
            0 => {}
            1 => idx |= 1 << (space.n_emitters - 1 - i),
            _ => return Err(Error::invalid("spins", "spin entries must be 0 or 1")),
        }
    }
    Ok(idx)
}

/// Inverse of [`basis_index`].
pub fn basis_state(index: usize, space: &HilbertSpace) -> Result<(usize, Vec<u8>)> {
    if index >= space.dim {
        return Err(Error::OutOfRange { what: "basis index", index, bound: space.dim - 1 });
    }
    let n = space.photon_number(index);
    let spins = (0..space.n_emitters)
        .map(|i| ((index >> (space.n_emitters - 1 - i)) & 1) as u8)
        .collect();
    Ok((n, spins))
}

/// Complex sparse matrix, row-compressed. Assembled from triplets; duplicates
/// are summed and exact zeros dropped, so every (row, col) appears once.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseOperator {
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Result<Self> {
        for &(r, c, v) in &triplets {
            if r >= rows || c >= cols {
                return Err(Error::OutOfRange { what: "matrix entry", index: r.max(c), bound: rows.max(cols) });
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::invalid("entries", "non-finite matrix entry"));
            }
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_of = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_of.push(r);
                last = Some((r, c));
            }
        }
        // drop cancellations
        let mut keep_c = Vec::with_capacity(col_idx.len());
        let mut keep_v = Vec::with_capacity(col_idx.len());
        for ((r, c), v) in row_of.into_iter().zip(col_idx).zip(values) {
            if v != C64::new(0.0, 0.0) {
                row_ptr[r + 1] += 1;
                keep_c.push(c);
                keep_v.push(v);
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self { rows, cols, row_ptr, col_idx: keep_c, values: keep_v })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_ptr: vec![0; rows + 1], col_idx: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let t = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(diag.len(), diag.len(), t).expect("diagonal is in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// (row, col, value) in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    fn map_entries(&self, rows: usize, cols: usize, f: impl Fn(usize, usize, C64) -> (usize, usize, C64)) -> Self {
        let t = self.entries().map(|(r, c, v)| f(r, c, v)).collect();
        Self::from_triplets(rows, cols, t).expect("mapped entries stay in range")
    }

    pub fn transpose(&self) -> Self {
        self.map_entries(self.cols, self.rows, |r, c, v| (c, r, v))
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn adjoint(&self) -> Self {
        self.map_entries(self.cols, self.rows, |r, c, v| (c, r, v.conj()))
    }

    pub fn scale(&self, s: C64) -> Self {
        let t = self.entries().map(|(r, c, v)| (r, c, v * s)).collect();
        Self::from_triplets(self.rows, self.cols, t).expect("same pattern")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.rows, found: other.rows });
        }
        let t = self.entries().chain(other.entries()).collect();
        Self::from_triplets(self.rows, self.cols, t)
    }

    /// Sum of scaled operators, all of the same shape.
    pub fn linear_combination(rows: usize, cols: usize, terms: &[(C64, &SparseOperator)]) -> Result<Self> {
        let mut t = Vec::new();
        for (s, op) in terms {
            if op.rows != rows || op.cols != cols {
                return Err(Error::DimensionMismatch { expected: rows, found: op.rows });
            }
            t.extend(op.entries().map(|(r, c, v)| (r, c, v * s)));
        }
        Self::from_triplets(rows, cols, t)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut t = Vec::new();
        let mut acc = vec![C64::new(0.0, 0.0); other.cols];
        let mut touched = vec![false; other.cols];
        let mut pattern = Vec::new();
        for r in 0..self.rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (m, a) = (self.col_idx[k], self.values[k]);
                for l in other.row_ptr[m]..other.row_ptr[m + 1] {
                    let c = other.col_idx[l];
                    if !touched[c] {
                        touched[c] = true;
                        pattern.push(c);
                    }
                    acc[c] += a * other.values[l];
                }
            }
            for &c in &pattern {
                t.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
                touched[c] = false;
            }
            pattern.clear();
        }
        Self::from_triplets(self.rows, other.cols, t)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: x.len() });
        }
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        self.mul_vec_into(x, &mut y);
        Ok(y)
    }

    /// y ← A x; lengths are the caller's responsibility.
    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yr = s;
        }
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.values[self.row_ptr[r]..self.row_ptr[r + 1]].iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.entries().all(|(r, c, v)| (v - self.get(c, r).conj()).norm() <= tol)
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.rows, self.cols);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn from_dense(m: &Mat<C64>) -> Self {
        let mut t = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)] != C64::new(0.0, 0.0) {
                    t.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t).expect("dense entries in range")
    }
}

pub fn annihilation_op(n_max: usize) -> Result<SparseOperator> {
    if n_max == 0 {
        return Err(Error::invalid("n_max", "Fock truncation must be at least 1"));
    }
    let t = (1..=n_max).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))).collect();
    SparseOperator::from_triplets(n_max + 1, n_max + 1, t)
}

/// Cavity annihilation operator embedded in the full space.
pub fn cavity_op(space: &HilbertSpace) -> Result<SparseOperator> {
    Ok(tensor_product(&annihilation_op(space.n_max)?, &SparseOperator::identity(space.spin_dim())))
}

/// σ₋ of emitter `i` (1-based), identity on everything else.
pub fn lowering_op(i: usize, space: &HilbertSpace) -> Result<SparseOperator> {
    if i == 0 || i > space.n_emitters {
        return Err(Error::OutOfRange { what: "emitter index", index: i, bound: space.n_emitters });
    }
    let bit = 1usize << (space.n_emitters - i);
    let t = (0..space.dim)
        .filter(|idx| idx & bit != 0)
        .map(|idx| (idx & !bit, idx, C64::new(1.0, 0.0)))
        .collect();
    SparseOperator::from_triplets(space.dim, space.dim, t)
}

pub fn tensor_product(a: &SparseOperator, b: &SparseOperator) -> SparseOperator {
    let (br, bc) = (b.rows(), b.cols());
    let mut t = Vec::with_capacity(a.nnz() * b.nnz());
    for (i, j, x) in a.entries() {
        for (k, l, y) in b.entries() {
            t.push((i * br + k, j * bc + l, x * y));
        }
    }
    SparseOperator::from_triplets(a.rows() * br, a.cols() * bc, t).expect("kron indices in range")
}

/// Diagonal of photon numbers, â†â.
pub fn number_op(space: &HilbertSpace) -> SparseOperator {
    let d: Vec<C64> = (0..space.dim).map(|i| C64::new(space.photon_number(i) as f64, 0.0)).collect();
    SparseOperator::diagonal(&d)
}

/// Diagonal of total emitter excitation, Σᵢ σ₊ᵢσ₋ᵢ.
pub fn excitation_op(space: &HilbertSpace) -> SparseOperator {
    let d: Vec<C64> = (0..space.dim).map(|i| C64::new(space.excitation_count(i) as f64, 0.0)).collect();
    SparseOperator::diagonal(&d)
}
