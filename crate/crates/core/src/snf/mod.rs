//! Exact Smith normal form over the integers, and homology read off from it.

mod homology;
mod prediction;

pub use homology::{homology_at_degree, homology_table, HomologyGroup, HomologyTable};
pub use prediction::{theorem4_comparison, theorem4_prediction, ComparisonRow, Theorem4Interpretation, Theorem4Report};

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::chain::SparseMatrix;

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut id = Self::zeros(size, size);
        for i in 0..size {
            id[(i, i)] = BigInt::one();
        }
        id
    }

    /// Builds a matrix from rows of small integers. All rows must have the
    /// same length.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().map(|&v| BigInt::from(v)).collect(),
        }
    }

    pub fn from_sparse(s: &SparseMatrix) -> Self {
        let mut out = Self::zeros(s.rows, s.cols);
        for &(r, c, v) in &s.entries {
            out[(r, c)] += BigInt::from(v);
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(l, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Rows `start..` as a new matrix.
    pub fn row_tail(&self, start: usize) -> IntMatrix {
        let start = start.min(self.rows);
        IntMatrix {
            rows: self.rows - start,
            cols: self.cols,
            data: self.data[start * self.cols..].to_vec(),
        }
    }

    /// Columns `start..` as a new matrix.
    pub fn col_tail(&self, start: usize) -> IntMatrix {
        let start = start.min(self.cols);
        let mut out = IntMatrix::zeros(self.rows, self.cols - start);
        for i in 0..self.rows {
            for j in start..self.cols {
                out[(i, j - start)] = self[(i, j)].clone();
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row[dst] += q * row[src]`
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(src, j)] * q;
            self[(dst, j)] += v;
        }
    }

    /// `col[dst] += q * col[src]`
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, src)] * q;
            self[(i, dst)] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self[(r, j)]);
            self[(r, j)] = v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_string()).collect())
            .collect();
        write!(f, "IntMatrix{rows:?}")
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(a: &IntMatrix) -> BigInt {
    assert_eq!(a.rows, a.cols, "determinant of a non-square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[(k, k)].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[(i, k)].is_zero()) else {
                return BigInt::zero();
            };
            m.swap_rows(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                m[(i, j)] = v;
            }
            m[(i, k)] = BigInt::zero();
        }
        prev = m[(k, k)].clone();
    }
    if n == 0 {
        sign
    } else {
        sign * &m[(n - 1, n - 1)]
    }
}

/// `left * A * right = D` with `D` diagonal, diagonal entries non-negative
/// and each dividing the next.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    /// `min(rows, cols)` entries, nonzeros first.
    pub diagonal: Vec<BigInt>,
    pub left_transform: IntMatrix,
    pub right_transform: IntMatrix,
    /// Exact inverse of `right_transform`, maintained alongside it.
    pub right_inverse: IntMatrix,
    pub original_rank: usize,
}

impl SmithDecomposition {
    pub fn diagonal_matrix(&self, rows: usize, cols: usize) -> IntMatrix {
        let mut d = IntMatrix::zeros(rows, cols);
        for (i, v) in self.diagonal.iter().enumerate() {
            d[(i, i)] = v.clone();
        }
        d
    }
}

struct Reducer {
    a: IntMatrix,
    left: IntMatrix,
    right: IntMatrix,
    right_inv: IntMatrix,
}

impl Reducer {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.left.swap_rows(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        self.right.swap_cols(i, j);
        self.right_inv.swap_rows(i, j);
    }

    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        self.a.add_row(dst, src, q);
        self.left.add_row(dst, src, q);
    }

    /// `col[dst] += q * col[src]`; the inverse operation acts on rows of
    /// `right_inv` as `row[src] -= q * row[dst]`.
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        self.a.add_col(dst, src, q);
        self.right.add_col(dst, src, q);
        self.right_inv.add_row(src, dst, &-q);
    }

    fn smallest_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<((usize, usize), BigInt)> = None;
        for i in t..self.a.rows {
            for j in t..self.a.cols {
                let v = self.a[(i, j)].abs();
                if v.is_zero() {
                    continue;
                }
                if best.as_ref().is_none_or(|(_, b)| v < *b) {
                    let unit = v.is_one();
                    best = Some(((i, j), v));
                    if unit {
                        return best.map(|(p, _)| p);
                    }
                }
            }
        }
        best.map(|(p, _)| p)
    }

    /// Clears row and column `t` below/right of the pivot. Returns false if a
    /// nonzero remainder was left behind.
    fn eliminate(&mut self, t: usize) -> bool {
        let mut clean = true;
        for i in t + 1..self.a.rows {
            if self.a[(i, t)].is_zero() {
                continue;
            }
            let q = self.a[(i, t)].div_floor(&self.a[(t, t)]);
            self.add_row(i, t, &-q);
            clean &= self.a[(i, t)].is_zero();
        }
        for j in t + 1..self.a.cols {
            if self.a[(t, j)].is_zero() {
                continue;
            }
            let q = self.a[(t, j)].div_floor(&self.a[(t, t)]);
            self.add_col(j, t, &-q);
            clean &= self.a[(t, j)].is_zero();
        }
        clean
    }

    fn non_divisible_row(&self, t: usize) -> Option<usize> {
        let p = &self.a[(t, t)];
        (t + 1..self.a.rows).find(|&i| (t + 1..self.a.cols).any(|j| !self.a[(i, j)].is_multiple_of(p)))
    }
}

/// Smith normal form with smallest-magnitude pivoting.
pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let mut red = Reducer {
        a: a.clone(),
        left: IntMatrix::identity(a.rows),
        right: IntMatrix::identity(a.cols),
        right_inv: IntMatrix::identity(a.cols),
    };
    let size = a.rows.min(a.cols);
    let mut rank = 0;
    for t in 0..size {
        while let Some((i, j)) = red.smallest_pivot(t) {
            red.swap_rows(t, i);
            red.swap_cols(t, j);
            if !red.eliminate(t) {
                continue;
            }
            match red.non_divisible_row(t) {
                Some(i) => red.add_row(t, i, &BigInt::one()),
                None => break,
            }
        }
        if red.a[(t, t)].is_zero() {
            break;
        }
        if red.a[(t, t)].is_negative() {
            red.a.negate_row(t);
            red.left.negate_row(t);
        }
        rank += 1;
    }
    let diagonal = (0..size).map(|t| red.a[(t, t)].clone()).collect();
    SmithDecomposition {
        diagonal,
        left_transform: red.left,
        right_transform: red.right,
        right_inverse: red.right_inv,
        original_rank: rank,
    }
}
