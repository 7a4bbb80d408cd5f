//! Compressed sparse row matrices and a profile (skyline) LU solver with
//! reverse Cuthill-McKee ordering.

use std::collections::VecDeque;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Field of matrix entries: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
}

/// Accumulates `(row, col, value)` triplets. Duplicates are summed in
/// insertion order, so the result does not depend on hashing or threads.
#[derive(Clone, Debug)]
pub struct TripletBuilder<T> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> TripletBuilder<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> CsrMatrix<T> {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut data: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        CsrMatrix { nrows: n, ncols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), data: diag.to_vec() }
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.data[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let mut s = T::zero();
                for (j, v) in self.row(i) {
                    s += v * x[j];
                }
                s
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut b = TripletBuilder::new(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                b.push(j, i, v);
            }
        }
        b.build()
    }

    /// Rows `rows` and columns `cols`, renumbered in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut colmap = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            colmap[c] = k;
        }
        let mut b = TripletBuilder::new(rows.len(), cols.len());
        for (ri, &r) in rows.iter().enumerate() {
            for (j, v) in self.row(r) {
                if colmap[j] != usize::MAX {
                    b.push(ri, colmap[j], v);
                }
            }
        }
        b.build()
    }

    pub fn to_dense(&self) -> Array2<T> {
        let mut out = Array2::from_elem((self.nrows, self.ncols), T::zero());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                out[[i, j]] += v;
            }
        }
        out
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v = *v * s);
        out
    }

    /// `Σ coeff_k · A_k`, all operands of equal shape.
    pub fn linear_combination(terms: &[(T, &CsrMatrix<T>)]) -> Self {
        let (nrows, ncols) = (terms[0].1.nrows, terms[0].1.ncols);
        let mut b = TripletBuilder::new(nrows, ncols);
        for (s, m) in terms {
            assert_eq!((m.nrows, m.ncols), (nrows, ncols));
            for i in 0..nrows {
                for (j, v) in m.row(i) {
                    b.push(i, j, *s * v);
                }
            }
        }
        b.build()
    }

    /// Adds `diag[k]` at position `(idx[k], idx[k])`.
    pub fn add_diagonal_at(&self, idx: &[usize], diag: &[T]) -> Self {
        let mut b = TripletBuilder::new(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                b.push(i, j, v);
            }
        }
        for (&i, &v) in idx.iter().zip(diag) {
            b.push(i, i, v);
        }
        b.build()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// `max |A − Aᵀ| / max |A|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let diff = CsrMatrix::linear_combination(&[(T::one(), self), (-T::one(), &t)]);
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            diff.max_abs() / scale
        }
    }
}

impl CsrMatrix<f64> {
    pub fn to_complex(&self) -> CsrMatrix<Complex64> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Dense product `self · x`.
    pub fn dense_product(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.nrows, x.ncols()));
        for i in 0..self.nrows {
            let mut row = out.row_mut(i);
            for (j, v) in self.row(i) {
                row.scaled_add(v, &x.row(j));
            }
        }
        out
    }

    /// Nonzero entries of a dense matrix.
    pub fn from_dense(a: &Array2<f64>) -> Self {
        let mut b = TripletBuilder::new(a.nrows(), a.ncols());
        for ((i, j), &v) in a.indexed_iter() {
            if v != 0.0 {
                b.push(i, j, v);
            }
        }
        b.build()
    }
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern. Returns
/// `perm` with `perm[new] = old`. Each component starts from a
/// pseudo-peripheral vertex of minimal degree; ties break by index.
pub fn rcm_ordering<T: Scalar>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.nrows;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_last_level = |start: usize, mark: &[bool]| -> (usize, Vec<usize>) {
        let mut level = vec![usize::MAX; n];
        let mut q = VecDeque::from([start]);
        level[start] = 0;
        let mut last = vec![start];
        let mut depth = 0;
        while let Some(v) = q.pop_front() {
            for &w in &adj[v] {
                if !mark[w] && level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    if level[w] > depth {
                        depth = level[w];
                        last.clear();
                    }
                    last.push(w);
                    q.push_back(w);
                }
            }
        }
        (depth, last)
    };
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // Pseudo-peripheral start: repeat BFS from a minimum-degree vertex
        // of the last level while the eccentricity grows.
        let mut start = seed;
        let (mut depth, mut last) = bfs_last_level(start, &visited);
        for _ in 0..8 {
            let cand = *last.iter().min_by_key(|&&v| (adj[v].len(), v)).unwrap();
            let (d2, l2) = bfs_last_level(cand, &visited);
            if d2 <= depth {
                break;
            }
            start = cand;
            depth = d2;
            last = l2;
        }
        let comp_start = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = comp_start;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (adj[w].len(), w));
            for w in nb {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

/// LU factorization `P A Pᵀ = L U` in profile storage, without pivoting.
/// Suitable for matrices whose leading principal minors are safely nonzero
/// (symmetric positive definite, or with positive definite Hermitian part).
#[derive(Clone, Debug)]
pub struct SkylineLu<T> {
    n: usize,
    perm: Vec<usize>,
    /// First column (= first row) of the profile of each permuted row.
    first: Vec<usize>,
    offset: Vec<usize>,
    lower: Vec<T>,
    upper: Vec<T>,
    diag: Vec<T>,
}

impl<T: Scalar> SkylineLu<T> {
    /// Factorizes with reverse Cuthill-McKee ordering. A pivot smaller than
    /// `1e-13` times the largest entry of its original row is rejected with
    /// `Error::Singular` naming the original row index.
    pub fn factorize(a: &CsrMatrix<T>) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::DimensionMismatch { expected: a.nrows, found: a.ncols });
        }
        let perm = rcm_ordering(a);
        Self::factorize_with(a, perm)
    }

    pub fn factorize_with(a: &CsrMatrix<T>, perm: Vec<usize>) -> Result<Self> {
        let n = a.nrows;
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for (j, _) in a.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                let (lo, hi) = if pi < pj { (pi, pj) } else { (pj, pi) };
                first[hi] = first[hi].min(lo);
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i]);
        }
        let mut lower = vec![T::zero(); offset[n]];
        let mut upper = vec![T::zero(); offset[n]];
        let mut diag = vec![T::zero(); n];
        let mut row_scale = vec![0.0f64; n];
        for i in 0..n {
            let pi = inv[i];
            for (j, v) in a.row(i) {
                let pj = inv[j];
                row_scale[pi] = row_scale[pi].max(v.modulus());
                if pj < pi {
                    lower[offset[pi] + pj - first[pi]] += v;
                } else if pj > pi {
                    upper[offset[pj] + pi - first[pj]] += v;
                } else {
                    diag[pi] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let oi = offset[i];
            for j in fi..i {
                let fj = first[j];
                let oj = offset[j];
                let k0 = fi.max(fj);
                // L[i][j]
                let mut s = lower[oi + j - fi];
                s -= dot(&lower[oi + k0 - fi..oi + j - fi], &upper[oj + k0 - fj..oj + j - fj]);
                lower[oi + j - fi] = s / diag[j];
                // U[j][i]
                let mut s = upper[oi + j - fi];
                s -= dot(&lower[oj + k0 - fj..oj + j - fj], &upper[oi + k0 - fi..oi + j - fi]);
                upper[oi + j - fi] = s;
            }
            let d = diag[i] - dot(&lower[oi..oi + i - fi], &upper[oi..oi + i - fi]);
            if !(d.modulus() > 1e-13 * row_scale[i]) {
                return Err(Error::Singular { pivot: perm[i], magnitude: d.modulus() });
            }
            diag[i] = d;
        }
        Ok(SkylineLu { n, perm, first, offset, lower, upper, diag })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn profile_size(&self) -> usize {
        2 * self.offset[self.n] + self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<T> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..self.n {
            let (fi, oi) = (self.first[i], self.offset[i]);
            let s = dot(&self.lower[oi..oi + i - fi], &y[fi..i]);
            y[i] -= s;
        }
        for i in (0..self.n).rev() {
            let (fi, oi) = (self.first[i], self.offset[i]);
            let xi = y[i] / self.diag[i];
            y[i] = xi;
            for (yk, &u) in y[fi..i].iter_mut().zip(&self.upper[oi..oi + i - fi]) {
                *yk -= u * xi;
            }
        }
        let mut x = vec![T::zero(); self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Solves `Aᵀ x = b` (plain transpose, no conjugation).
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<T> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..self.n {
            let (fi, oi) = (self.first[i], self.offset[i]);
            let s = dot(&self.upper[oi..oi + i - fi], &y[fi..i]);
            y[i] = (y[i] - s) / self.diag[i];
        }
        for i in (0..self.n).rev() {
            let (fi, oi) = (self.first[i], self.offset[i]);
            let xi = y[i];
            for (yk, &l) in y[fi..i].iter_mut().zip(&self.lower[oi..oi + i - fi]) {
                *yk -= l * xi;
            }
        }
        let mut x = vec![T::zero(); self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Solves for every column of `b` (row-major `n × m`).
    pub fn solve_columns(&self, b: &Array2<T>) -> Array2<T> {
        let mut out = Array2::from_elem(b.raw_dim(), T::zero());
        for (j, col) in b.columns().into_iter().enumerate() {
            let x = self.solve(&col.to_vec());
            for (i, v) in x.into_iter().enumerate() {
                out[[i, j]] = v;
            }
        }
        out
    }

    /// Smallest pivot modulus relative to the largest.
    pub fn pivot_ratio(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for d in &self.diag {
            lo = lo.min(d.modulus());
            hi = hi.max(d.modulus());
        }
        lo / hi
    }
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

/// Hager-Higham estimate of `‖A⁻¹‖₁` using solves with `A` and `Aᵀ`.
pub fn inverse_norm1_estimate<T: Scalar>(lu: &SkylineLu<T>) -> f64 {
    let n = lu.dim();
    if n == 0 {
        return 0.0;
    }
    let mut x = vec![T::from_real(1.0 / n as f64); n];
    let mut est = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = lu.solve(&x);
        let norm: f64 = y.iter().map(|v| v.modulus()).sum();
        if norm <= est {
            break;
        }
        est = norm;
        let xi: Vec<T> = y
            .iter()
            .map(|v| {
                let m = v.modulus();
                if m == 0.0 {
                    T::one()
                } else {
                    v.conj() / T::from_real(m)
                }
            })
            .collect();
        let z = lu.solve_transpose(&xi);
        let (j, zmax) = z.iter().enumerate().fold((0, 0.0), |acc, (k, v)| if v.modulus() > acc.1 { (k, v.modulus()) } else { acc });
        if j == last_j || zmax <= 0.0 {
            break;
        }
        last_j = j;
        x = vec![T::zero(); n];
        x[j] = T::one();
    }
    est
}

/// `‖A‖₁` (maximum absolute column sum).
pub fn norm1<T: Scalar>(a: &CsrMatrix<T>) -> f64 {
    let mut cols = vec![0.0; a.ncols];
    for i in 0..a.nrows {
        for (j, v) in a.row(i) {
            cols[j] += v.modulus();
        }
    }
    cols.into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplacian_1d(n: usize) -> CsrMatrix<f64> {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.0);
            if i > 0 {
                b.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 0, 1.0);
        b.push(1, 0, 2.0);
        b.push(0, 0, 3.0);
        let m = b.build();
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn solves_tridiagonal() {
        let a = laplacian_1d(50);
        let lu = SkylineLu::factorize(&a).unwrap();
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&x);
        let y = lu.solve(&b);
        let yt = lu.solve_transpose(&b);
        for i in 0..50 {
            assert!((x[i] - y[i]).abs() < 1e-10);
            assert!((x[i] - yt[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_detected() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 0, 1.0);
        b.push(0, 1, 1.0);
        b.push(1, 0, 1.0);
        b.push(1, 1, 1.0);
        assert!(matches!(SkylineLu::factorize(&b.build()), Err(Error::Singular { .. })));
    }

    #[test]
    fn condition_estimate_matches_exact_small_case() {
        let a = laplacian_1d(10);
        let lu = SkylineLu::factorize(&a).unwrap();
        let exact = {
            use ndarray_linalg::Inverse;
            let inv = a.to_dense().inv().unwrap();
            inv.columns().into_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
        };
        let est = inverse_norm1_estimate(&lu);
        assert!(est <= exact * (1.0 + 1e-12) && est >= 0.3 * exact, "{est} {exact}");
    }

    proptest! {
        #[test]
        fn random_nonsymmetric_complex_solve(seed in 0u64..1000, n in 2usize..40) {
            // Diagonally dominant random sparse complex matrix.
            let mut rng = crate::rng::XorShift64Star::new(seed + 1);
            let mut b = TripletBuilder::new(n, n);
            for i in 0..n {
                b.push(i, i, Complex64::new(8.0 + rng.next_f64(), rng.next_f64()));
                for _ in 0..3 {
                    let j = (rng.next_u64() % n as u64) as usize;
                    b.push(i, j, Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5));
                }
            }
            let a = b.build();
            let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
            let rhs = a.matvec(&x);
            let lu = SkylineLu::factorize(&a).unwrap();
            let y = lu.solve(&rhs);
            let at = a.transpose();
            let yt = lu.solve_transpose(&at.matvec(&x));
            for i in 0..n {
                prop_assert!((x[i] - y[i]).norm() < 1e-9);
                prop_assert!((x[i] - yt[i]).norm() < 1e-9);
            }
        }

        #[test]
        fn rcm_is_a_permutation(n in 1usize..60) {
            let p = rcm_ordering(&laplacian_1d(n));
            let mut s = p.clone();
            s.sort_unstable();
            prop_assert_eq!(s, (0..n).collect::<Vec<_>>());
        }
    }
}
