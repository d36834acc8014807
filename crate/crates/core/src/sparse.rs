//! Sorted-triplet complex sparse matrices.
//!
//! Generators and commutators with the Dirac operator are stored this way;
//! dense copies are produced on demand.

use std::collections::BTreeMap;

use num_complex::Complex64;
use crate::linalg::{CMatrix, Hermitian};

/// Entries below this fraction of the largest magnitude are dropped after
/// products, where they can only be cancellation noise.
const PRUNE_RELATIVE: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    /// (row, col, value), sorted by (row, col), no duplicates, no zeros.
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))))
    }

    /// Duplicate coordinates are summed.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r},{c}) outside {rows}x{cols}");
            *acc.entry((r, c)).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        Self::from_map(rows, cols, acc)
    }

    fn from_map(rows: usize, cols: usize, acc: BTreeMap<(usize, usize), Complex64>) -> Self {
        let largest = acc.values().fold(0.0_f64, |m, v| m.max(v.norm()));
        let cutoff = largest * PRUNE_RELATIVE;
        let entries = acc
            .into_iter()
            .filter(|(_, v)| v.norm() > cutoff)
            .map(|((r, c), v)| (r, c, v))
            .collect();
        Self { rows, cols, entries }
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v.re != 0.0 || v.im != 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    /// Dense Hermitian copy; the caller guarantees self-adjointness.
    pub fn to_hermitian(&self) -> Hermitian {
        Hermitian::from_matrix_unchecked(self.to_dense())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|(_, _, v)| v.im == 0.0)
    }

    pub fn is_imaginary(&self) -> bool {
        self.entries.iter().all(|(_, _, v)| v.re == 0.0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|&(r, c, v)| (r, c, v * s))
            .filter(|(_, _, v)| v.re != 0.0 || v.im != 0.0)
            .collect();
        Self { rows: self.rows, cols: self.cols, entries }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.cols,
            self.rows,
            self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_triplets(
            self.rows,
            self.cols,
            self.entries.iter().chain(other.entries.iter()).copied(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_triplets(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .copied()
                .chain(other.entries.iter().map(|&(r, c, v)| (r, c, -v))),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut by_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); other.rows];
        for &(r, c, v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for &(i, k, a) in &self.entries {
            for &(j, b) in &by_row[k] {
                *acc.entry((i, j)).or_insert(Complex64::new(0.0, 0.0)) += a * b;
            }
        }
        Self::from_map(self.rows, other.cols, acc)
    }

    /// `self·a − a·self`.
    pub fn commutator(&self, a: &Self) -> Self {
        self.mul(a).sub(&a.mul(self))
    }

    /// Block-diagonal `diag(self, …, self)` with `s` copies.
    pub fn spin_double(&self, s: usize) -> Self {
        let (n, m) = (self.rows, self.cols);
        let mut entries = Vec::with_capacity(self.entries.len() * s);
        for block in 0..s {
            for &(r, c, v) in &self.entries {
                entries.push((block * n + r, block * m + c, v));
            }
        }
        let mut out = Self { rows: n * s, cols: m * s, entries };
        out.entries.sort_by_key(|&(r, c, _)| (r, c));
        out
    }

    /// Tr(self · dense).
    pub fn trace_with_dense(&self, dense: &CMatrix) -> Complex64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| v * dense[(c, r)])
            .sum()
    }

    /// Tr(self · other) for two sparse matrices.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for &(r, c, v) in &self.entries {
            if let Ok(pos) = other.entries.binary_search_by_key(&(c, r), |&(a, b, _)| (a, b)) {
                total += v * other.entries[pos].2;
            }
        }
        total
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, (_, _, v)| m.max(v.norm()))
    }
}
