//! Dense matrices over Q(zeta8).

use std::fmt;
use std::ops::Mul;

use num_traits::{One, Zero};

use crate::field::{FieldElem, FieldError};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![FieldElem::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = FieldElem::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<FieldElem>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| FieldElem::from_int(v)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn kron(&self, o: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * o.rows, self.cols * o.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = &self[(r1, c1)];
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..o.rows {
                    for c2 in 0..o.cols {
                        out[(r1 * o.rows + r2, c1 * o.cols + c2)] = a * &o[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &FieldElem) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn is_skew(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| (0..self.cols).all(|c| self[(r, c)] == -&self[(c, r)]))
    }

    /// Row-echelon elimination; returns (echelon form, pivot columns, sign of row swaps).
    fn eliminate(&self) -> (Matrix, Vec<usize>, bool) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut flipped = false;
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else { continue };
            if p != r {
                m.swap_rows(p, r);
                flipped = !flipped;
            }
            let inv = m[(r, c)].inv().expect("pivot is nonzero");
            for i in r + 1..m.rows {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] * &inv;
                for j in c..m.cols {
                    let t = &f * &m[(r, j)];
                    m[(i, j)] -= &t;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots, flipped)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.eliminate().1.len()
    }

    pub fn det(&self) -> FieldElem {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let (m, pivots, flipped) = self.eliminate();
        if pivots.len() < self.rows {
            return FieldElem::zero();
        }
        let mut d: FieldElem = (0..self.rows).map(|k| m[(k, k)].clone()).product();
        if flipped {
            d = -d;
        }
        d
    }

    pub fn inverse(&self) -> Result<Matrix, FieldError> {
        let n = self.rows;
        assert_eq!(n, self.cols);
        let b = Matrix::identity(n);
        let cols: Vec<Vec<FieldElem>> = (0..n)
            .map(|c| self.solve(&(0..n).map(|r| b[(r, c)].clone()).collect::<Vec<_>>()))
            .collect::<Result<_, _>>()?;
        let mut out = Matrix::zeros(n, n);
        for (c, col) in cols.into_iter().enumerate() {
            for (r, v) in col.into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        Ok(out)
    }

    /// Solve a square nonsingular system.
    pub fn solve(&self, rhs: &[FieldElem]) -> Result<Vec<FieldElem>, FieldError> {
        let n = self.rows;
        assert_eq!(n, self.cols);
        assert_eq!(rhs.len(), n);
        let mut a = Matrix::zeros(n, n + 1);
        for r in 0..n {
            for c in 0..n {
                a[(r, c)] = self[(r, c)].clone();
            }
            a[(r, n)] = rhs[r].clone();
        }
        let (m, pivots, _) = a.eliminate();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(FieldError::DivisionByZero);
        }
        let mut x = vec![FieldElem::zero(); n];
        for r in (0..n).rev() {
            let mut s = m[(r, n)].clone();
            for c in r + 1..n {
                s -= &(&m[(r, c)] * &x[c]);
            }
            x[r] = s.try_div(&m[(r, r)])?;
        }
        Ok(x)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = FieldElem;
    fn index(&self, (r, c): (usize, usize)) -> &FieldElem {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut FieldElem {
        &mut self.data[r * self.cols + c]
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..o.cols {
                    let b = &o[(k, c)];
                    if !b.is_zero() {
                        out[(r, c)] += &(a * b);
                    }
                }
            }
        }
        out
    }
}

impl Mul for Matrix {
    type Output = Matrix;
    fn mul(self, o: Matrix) -> Matrix {
        &self * &o
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse() {
        let m = Matrix::from_ints(&[&[1, 0, 2], &[0, 1, 0], &[2, 0, 1]]);
        assert_eq!(m.det(), FieldElem::from_int(-3));
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Matrix::identity(3));
        let sing = Matrix::from_ints(&[&[1, 2], &[2, 4]]);
        assert!(sing.det().is_zero());
        assert_eq!(sing.rank(), 1);
    }

    #[test]
    fn kron_shape() {
        let x = Matrix::from_ints(&[&[0, 1], &[1, 0]]);
        let n = x.kron(&x);
        assert_eq!(n, Matrix::from_ints(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, 1, 0, 0], &[1, 0, 0, 0]]));
    }
}
