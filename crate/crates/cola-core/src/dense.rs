//! Row-major dense `f64` matrix.
//!
//! The multiply kernels skip zero entries of the left operand, which makes
//! the first GCN layer cheap on bag-of-words attribute rows without any
//! dedicated sparse type.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds from a row-major buffer. Panics if the length is not `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length must be rows*cols");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self * rhs`, skipping zero entries of `self`.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let lhs_row = self.row(i);
            let out_row = out.row_mut(i);
            for (k, &a) in lhs_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let rhs_row = rhs.row(k);
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ * rhs`, skipping zero entries of `self`.
    pub fn transpose_mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows, "outer dimensions must agree");
        let mut out = Matrix::zeros(self.cols, rhs.cols);
        for i in 0..self.rows {
            let lhs_row = self.row(i);
            let rhs_row = rhs.row(i);
            for (k, &a) in lhs_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = out.row_mut(k);
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * rhsᵀ`.
    pub fn mul_transpose(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.cols, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, rhs.rows);
        for i in 0..self.rows {
            let lhs_row = self.row(i);
            for j in 0..rhs.rows {
                let mut acc = 0.0;
                for (&a, &b) in lhs_row.iter().zip(rhs.row(j)) {
                    acc += a * b;
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Accumulates `alpha * u vᵀ` into `self`, skipping zeros of `u`.
    pub fn add_outer(&mut self, alpha: f64, u: &[f64], v: &[f64]) {
        assert_eq!(u.len(), self.rows);
        assert_eq!(v.len(), self.cols);
        for (r, &uv) in u.iter().enumerate() {
            if uv == 0.0 {
                continue;
            }
            let scale = alpha * uv;
            for (o, &vv) in self.row_mut(r).iter_mut().zip(v) {
                *o += scale * vv;
            }
        }
    }

    pub fn add_assign(&mut self, rhs: &Matrix) {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in &mut self.data {
            *v *= alpha;
        }
    }
}

/// `x * m` for a row vector `x`, skipping zeros of `x`.
pub fn vec_mat(x: &[f64], m: &Matrix) -> Vec<f64> {
    assert_eq!(x.len(), m.rows(), "inner dimensions must agree");
    let mut out = vec![0.0; m.cols()];
    for (k, &a) in x.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (o, &b) in out.iter_mut().zip(m.row(k)) {
            *o += a * b;
        }
    }
    out
}

/// `m * xᵀ` for a column vector `x`.
pub fn mat_vec(m: &Matrix, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), m.cols(), "inner dimensions must agree");
    let mut out = vec![0.0; m.rows()];
    for (o, r) in out.iter_mut().zip(0..m.rows()) {
        let mut acc = 0.0;
        for (&a, &b) in m.row(r).iter().zip(x) {
            acc += a * b;
        }
        *o = acc;
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mul_matches_hand_computation() {
        let a = Matrix::from_vec(2, 3, vec![1.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        let b = Matrix::from_vec(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let c = a.mul(&b);
        assert_eq!(c.data(), &[11.0, 14.0, 9.0, 12.0]);
    }

    #[test]
    fn transpose_mul_matches_explicit_transpose() {
        let a = Matrix::from_vec(2, 3, vec![1.0, -1.0, 0.5, 2.0, 0.0, 4.0]);
        let b = Matrix::from_vec(2, 2, vec![3.0, 1.0, -2.0, 0.25]);
        let got = a.transpose_mul(&b);
        for k in 0..3 {
            for j in 0..2 {
                let want = a.at(0, k) * b.at(0, j) + a.at(1, k) * b.at(1, j);
                assert!((got.at(k, j) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn vec_mat_and_mat_vec_agree_with_mul() {
        let m = Matrix::from_vec(3, 2, vec![1.0, 2.0, 0.0, -1.0, 3.0, 5.0]);
        let x = [2.0, 0.0, 1.0];
        let as_mat = Matrix::from_vec(1, 3, x.to_vec()).mul(&m);
        assert_eq!(vec_mat(&x, &m), as_mat.data());
        let y = [1.0, -2.0];
        assert_eq!(mat_vec(&m, &y), vec![-3.0, 2.0, -7.0]);
    }
}
