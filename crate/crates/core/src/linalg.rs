//! Small dense least-squares helpers.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative threshold on `|R_jj|` below which a column counts as dependent.
const RANK_TOLERANCE: f64 = 1e-10;

/// Row-major dense matrix.
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
            data: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], x))
            .collect()
    }

    /// `Aᵀ y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate().take(self.rows) {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.get(i, j) * yi;
            }
        }
        out
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Minimises `‖A x − y‖²` by Householder QR. Fails with
/// [`Error::SingularDesign`] when `A` is numerically rank deficient.
pub fn least_squares(a: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(y.len(), m, "right-hand side length");
    if m < n {
        return Err(Error::SingularDesign {
            rank: m,
            columns: n,
        });
    }
    let mut r = a.clone();
    let mut b = y.to_vec();
    let scale = (0..n)
        .map(|j| norm(&(0..m).map(|i| a.get(i, j)).collect::<Vec<_>>()))
        .fold(0.0f64, f64::max);
    let mut rank = 0;
    for j in 0..n {
        let col_norm = libm::sqrt((j..m).map(|i| r.get(i, j) * r.get(i, j)).sum::<f64>());
        if col_norm <= RANK_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
            continue;
        }
        rank += 1;
        let alpha = if r.get(j, j) > 0.0 {
            -col_norm
        } else {
            col_norm
        };
        let mut v: Vec<f64> = (j..m).map(|i| r.get(i, j)).collect();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == 0.0 {
            continue;
        }
        for c in j..n {
            let s = (j..m).map(|i| v[i - j] * r.get(i, c)).sum::<f64>() * 2.0 / vnorm2;
            for i in j..m {
                r.set(i, c, r.get(i, c) - s * v[i - j]);
            }
        }
        let s = (j..m).map(|i| v[i - j] * b[i]).sum::<f64>() * 2.0 / vnorm2;
        for i in j..m {
            b[i] -= s * v[i - j];
        }
    }
    if rank < n {
        return Err(Error::SingularDesign { rank, columns: n });
    }
    let mut x = alloc::vec![0.0; n];
    for j in (0..n).rev() {
        let s: f64 = (j + 1..n).map(|c| r.get(j, c) * x[c]).sum();
        x[j] = (b[j] - s) / r.get(j, j);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_overdetermined_system() {
        let a = Matrix::from_rows(&[
            alloc::vec![1.0, 0.0],
            alloc::vec![1.0, 1.0],
            alloc::vec![1.0, 2.0],
            alloc::vec![1.0, 3.0],
        ]);
        let y = [1.0, 3.0, 5.0, 7.0];
        let x = least_squares(&a, &y).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn residual_is_orthogonal_to_columns() {
        let a = Matrix::from_rows(&[
            alloc::vec![1.0, 0.3, -2.0],
            alloc::vec![1.0, 1.1, 0.5],
            alloc::vec![1.0, -0.7, 1.5],
            alloc::vec![1.0, 2.2, 0.1],
            alloc::vec![1.0, 0.0, -0.4],
        ]);
        let y = [0.5, -1.0, 2.0, 3.5, 0.0];
        let x = least_squares(&a, &y).unwrap();
        let fit = a.mul_vec(&x);
        let res: Vec<f64> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
        assert!(a.tr_mul_vec(&res).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn detects_rank_deficiency() {
        let a = Matrix::from_rows(&[
            alloc::vec![1.0, 2.0],
            alloc::vec![2.0, 4.0],
            alloc::vec![3.0, 6.0],
        ]);
        assert!(matches!(
            least_squares(&a, &[1.0, 2.0, 3.0]),
            Err(Error::SingularDesign {
                rank: 1,
                columns: 2
            })
        ));
        let wide = Matrix::zeros(1, 2);
        assert!(least_squares(&wide, &[0.0]).is_err());
    }
}
