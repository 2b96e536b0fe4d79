//! Compressed sparse row storage and a banded Cholesky factorization.

use std::collections::BTreeMap;

use crate::error::Error;

/// Square sparse matrix in CSR form with column indices sorted per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed in input order.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            *rows[r].entry(c).or_insert(0.0) += v;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Non-zeros of row `r` as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.n,
            (0..self.n).flat_map(|r| self.row(r).map(move |(c, v)| (c, r, v))),
        )
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `alpha * self + beta * other` over the union of both patterns.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        assert_eq!(self.n, other.n);
        Self::from_triplets(
            self.n,
            (0..self.n).flat_map(|r| {
                self.row(r)
                    .map(move |(c, v)| (r, c, alpha * v))
                    .chain(other.row(r).map(move |(c, v)| (r, c, beta * v)))
            }),
        )
    }

    /// Restriction to the index subset `keep` (sorted), renumbered densely.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        Self::from_triplets(
            keep.len(),
            keep.iter().enumerate().flat_map(|(new_r, &old_r)| {
                let map = &map;
                self.row(old_r)
                    .filter(move |&(c, _)| map[c] != usize::MAX)
                    .map(move |(c, v)| (new_r, map[c], v))
            }),
        )
    }

    /// Half-bandwidth: `max |r - c|` over stored entries.
    pub fn half_bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|r| self.row(r).map(move |(c, _)| r.abs_diff(c)))
            .max()
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Cholesky factor `L` of a symmetric positive definite banded matrix,
/// stored row-wise as `band[i][bw + j - i]` for `i - bw <= j <= i`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    band: Vec<f64>,
}

impl BandedCholesky {
    /// Factors the lower band of `a`. A pivot at or below `rel_tol` times the
    /// largest diagonal entry is reported as `(dof, pivot)`.
    pub fn factor(a: &CsrMatrix, rel_tol: f64) -> std::result::Result<Self, (usize, f64)> {
        let n = a.n();
        let bw = a.half_bandwidth();
        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        for r in 0..n {
            for (c, v) in a.row(r) {
                if c <= r {
                    band[r * w + bw + c - r] = v;
                }
            }
        }
        let max_diag = (0..n).map(|i| band[i * w + bw].abs()).fold(0.0, f64::max);
        let tol = rel_tol * max_diag;

        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = band[i * w + bw + j - i];
                for k in k0..j {
                    s -= band[i * w + bw + k - i] * band[j * w + bw + k - j];
                }
                if j == i {
                    if !(s > tol) {
                        return Err((i, s));
                    }
                    band[i * w + bw] = s.sqrt();
                } else {
                    band[i * w + bw + j - i] = s / band[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, band })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `L Lᵀ x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.band[i * w + bw + k - i] * b[k];
            }
            b[i] = s / self.band[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n.min(i + bw + 1) {
                s -= self.band[k * w + bw + i - k] * b[k];
            }
            b[i] = s / self.band[i * w + bw];
        }
    }
}

pub(crate) fn singular(err: (usize, f64)) -> Error {
    Error::SingularSystem {
        dof: err.0,
        pivot: err.1,
    }
}
