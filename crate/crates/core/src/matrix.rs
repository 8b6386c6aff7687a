//! Small dense matrices over a [`Scalar`] with valuation-pivoted elimination.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, INF};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

/// Result of Gaussian elimination with minimal-valuation pivoting.
#[derive(Clone, Debug)]
pub struct Elimination<S> {
    /// Pivot positions `(row, col)` in the order chosen.
    pub pivots: Vec<(usize, usize)>,
    /// Row-reduced matrix (pivot rows normalized to a unit pivot of 1).
    pub reduced: Matrix<S>,
    /// Sum of the valuations of the pivots.
    pub pivot_loss: i64,
}

impl<S: Scalar> Matrix<S> {
    /// Matrix from row-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has the wrong length");
        Matrix { rows, cols, data }
    }

    /// Matrix from a list of rows of equal length.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Matrix of integers.
    pub fn from_i64s(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| S::from_i64(x)).collect())
                .collect(),
        )
    }

    /// Zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, S::one());
        }
        m
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    /// Sets entry `(i, j)`.
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    /// Row `i` as a vector.
    pub fn row(&self, i: usize) -> Vec<S> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    /// Column `j` as a vector.
    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// All rows.
    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    /// Transpose.
    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Entrywise map.
    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Scalar multiple.
    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols)
            .map(|j| (0..self.rows).fold(S::zero(), |acc, i| acc + v[i].clone() * self.get(i, j).clone()))
            .collect()
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).fold(S::zero(), |acc, j| acc + self.get(i, j).clone() * v[j].clone()))
            .collect()
    }

    /// Smallest absolute precision among the entries.
    pub fn min_abs_prec(&self) -> i64 {
        self.data.iter().map(|x| x.abs_prec()).min().unwrap_or(INF)
    }

    /// Smallest valuation lower bound among the entries.
    pub fn min_valuation(&self) -> i64 {
        self.data.iter().map(|x| x.val_or_prec()).min().unwrap_or(INF)
    }

    /// Row reduction with full pivoting on the entry of least valuation.
    /// Entries indistinguishable from zero never serve as pivots.
    pub fn eliminate(&self) -> Elimination<S> {
        let mut m = self.clone();
        let mut row_used = vec![false; m.rows];
        let mut col_used = vec![false; m.cols];
        let mut pivots = Vec::new();
        let mut loss = 0;
        loop {
            let mut best: Option<(usize, usize, i64)> = None;
            for i in (0..m.rows).filter(|&i| !row_used[i]) {
                for j in (0..m.cols).filter(|&j| !col_used[j]) {
                    if let Some(v) = m.get(i, j).valuation() {
                        if best.is_none_or(|(_, _, b)| v < b) {
                            best = Some((i, j, v));
                        }
                    }
                }
            }
            let Some((pi, pj, v)) = best else { break };
            loss += v;
            row_used[pi] = true;
            col_used[pj] = true;
            let inv = m.get(pi, pj).inv().expect("pivot is nonzero");
            for j in 0..m.cols {
                let x = m.get(pi, j).clone() * inv.clone();
                m.set(pi, j, x);
            }
            m.set(pi, pj, S::one());
            for i in 0..m.rows {
                if i == pi {
                    continue;
                }
                let f = m.get(i, pj).clone();
                if f.is_zero() && f.abs_prec() >= INF {
                    continue;
                }
                for j in 0..m.cols {
                    let x = m.get(i, j).clone() - f.clone() * m.get(pi, j).clone();
                    m.set(i, j, x);
                }
                m.set(
                    i,
                    pj,
                    S::zero().with_abs_prec(f.abs_prec().min(m.get(pi, pj).abs_prec())),
                );
            }
            pivots.push((pi, pj));
        }
        Elimination {
            pivots,
            reduced: m,
            pivot_loss: loss,
        }
    }

    /// Rank at the available precision.
    pub fn rank(&self) -> usize {
        self.eliminate().pivots.len()
    }

    /// Determinant of a square matrix.
    pub fn det(&self) -> S {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return S::one();
        }
        if n <= 3 {
            return self.det_cofactor();
        }
        let mut m = self.clone();
        let mut acc = S::one();
        let mut sign_neg = false;
        for c in 0..n {
            let piv = (c..n)
                .filter_map(|i| m.get(i, c).valuation().map(|v| (i, v)))
                .min_by_key(|&(_, v)| v);
            let Some((pi, _)) = piv else {
                let prec = (c..n).map(|i| m.get(i, c).abs_prec()).min().unwrap_or(INF);
                return S::zero().with_abs_prec(acc.val_or_prec().saturating_add(prec));
            };
            if pi != c {
                for j in 0..n {
                    let a = m.get(pi, j).clone();
                    let b = m.get(c, j).clone();
                    m.set(pi, j, b);
                    m.set(c, j, a);
                }
                sign_neg = !sign_neg;
            }
            let pv = m.get(c, c).clone();
            let inv = pv.inv().expect("pivot is nonzero");
            for i in c + 1..n {
                let f = m.get(i, c).clone() * inv.clone();
                for j in c..n {
                    let x = m.get(i, j).clone() - f.clone() * m.get(c, j).clone();
                    m.set(i, j, x);
                }
            }
            acc = acc * pv;
        }
        if sign_neg {
            -acc
        } else {
            acc
        }
    }

    fn det_cofactor(&self) -> S {
        let g = |i: usize, j: usize| self.get(i, j).clone();
        match self.rows {
            1 => g(0, 0),
            2 => g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0),
            _ => {
                g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                    + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
            }
        }
    }

    /// Inverse of a square matrix.
    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, S::one());
        }
        let mut piv_rows = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for c in 0..n {
            let piv = (0..n)
                .filter(|&i| !used[i])
                .filter_map(|i| aug.get(i, c).valuation().map(|v| (i, v)))
                .min_by_key(|&(_, v)| v);
            let Some((pi, _)) = piv else {
                return Err(Error::Singular);
            };
            used[pi] = true;
            piv_rows[c] = pi;
            let inv = aug.get(pi, c).inv().expect("pivot is nonzero");
            for j in 0..2 * n {
                let x = aug.get(pi, j).clone() * inv.clone();
                aug.set(pi, j, x);
            }
            for i in 0..n {
                if i == pi {
                    continue;
                }
                let f = aug.get(i, c).clone();
                for j in 0..2 * n {
                    let x = aug.get(i, j).clone() - f.clone() * aug.get(pi, j).clone();
                    aug.set(i, j, x);
                }
            }
        }
        let mut out = Self::zeros(n, n);
        for c in 0..n {
            for j in 0..n {
                out.set(c, j, aug.get(piv_rows[c], n + j).clone());
            }
        }
        Ok(out)
    }

    /// Solves `self · x = b` in the least-valuation-pivot sense. Returns the
    /// solution (free unknowns set to zero), the residual entries of rows
    /// that did not receive a pivot, and the accumulated pivot valuation.
    pub fn solve(&self, b: &[S]) -> Result<(Vec<S>, Vec<S>, i64)> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        // Pivots are restricted to the coefficient columns.
        let mut m = aug;
        let mut row_used = vec![false; m.rows];
        let mut col_used = vec![false; self.cols];
        let mut pivots = Vec::new();
        let mut loss = 0;
        loop {
            let mut best: Option<(usize, usize, i64)> = None;
            for i in (0..m.rows).filter(|&i| !row_used[i]) {
                for j in (0..self.cols).filter(|&j| !col_used[j]) {
                    if let Some(v) = m.get(i, j).valuation() {
                        if best.is_none_or(|(_, _, bv)| v < bv) {
                            best = Some((i, j, v));
                        }
                    }
                }
            }
            let Some((pi, pj, v)) = best else { break };
            loss += v;
            row_used[pi] = true;
            col_used[pj] = true;
            let inv = m.get(pi, pj).inv().expect("pivot is nonzero");
            for j in 0..m.cols {
                let x = m.get(pi, j).clone() * inv.clone();
                m.set(pi, j, x);
            }
            for i in 0..m.rows {
                if i == pi {
                    continue;
                }
                let f = m.get(i, pj).clone();
                if f.is_zero() && f.abs_prec() >= INF {
                    continue;
                }
                for j in 0..m.cols {
                    let x = m.get(i, j).clone() - f.clone() * m.get(pi, j).clone();
                    m.set(i, j, x);
                }
            }
            pivots.push((pi, pj));
        }
        if pivots.len() < self.cols {
            return Err(Error::Singular);
        }
        let mut x = vec![S::zero(); self.cols];
        for &(pi, pj) in &pivots {
            x[pj] = m.get(pi, self.cols).clone();
        }
        let residual = (0..m.rows)
            .filter(|&i| !row_used[i])
            .map(|i| m.get(i, self.cols).clone())
            .collect();
        Ok((x, residual, loss))
    }

    /// Basis of the right kernel `{x : self · x = 0}` at the available precision.
    pub fn kernel(&self) -> Vec<Vec<S>> {
        let e = self.eliminate();
        let pivot_cols: Vec<usize> = e.pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivot_cols.contains(c)) {
            let mut v = vec![S::zero(); self.cols];
            v[free] = S::one();
            for &(pr, pc) in &e.pivots {
                v[pc] = -e.reduced.get(pr, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Basis of the left kernel `{w : w · self = 0}`.
    pub fn left_kernel(&self) -> Vec<Vec<S>> {
        self.transpose().kernel()
    }

    /// Adjugate of a square matrix.
    pub fn adjugate(&self) -> Self {
        let n = self.rows;
        assert_eq!(n, self.cols);
        if n == 1 {
            return Self::identity(1);
        }
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let minor = self.minor(i, j);
                let c = minor.det();
                out.set(j, i, if (i + j) % 2 == 0 { c } else { -c });
            }
        }
        out
    }

    /// Matrix with row `r` and column `c` removed.
    pub fn minor(&self, r: usize, c: usize) -> Self {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != r) {
            for j in (0..self.cols).filter(|&j| j != c) {
                data.push(self.get(i, j).clone());
            }
        }
        Self::new(self.rows - 1, self.cols - 1, data)
    }

    /// Entrywise agreement: `Some(min precision)` when every difference is
    /// indistinguishable from zero.
    pub fn agreement(&self, o: &Self) -> Option<i64> {
        if self.rows != o.rows || self.cols != o.cols {
            return None;
        }
        let mut prec = INF;
        for (a, b) in self.data.iter().zip(&o.data) {
            let d = a.clone() - b.clone();
            if d.valuation().is_some() {
                return None;
            }
            prec = prec.min(d.abs_prec());
        }
        Some(prec)
    }

    /// JSON rendering as a list of rows.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.rows)
                .map(|i| serde_json::Value::Array((0..self.cols).map(|j| self.get(i, j).to_json()).collect()))
                .collect(),
        )
    }
}

impl<S: Scalar> Add for &Matrix<S> {
    type Output = Matrix<S>;
    fn add(self, o: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<S: Scalar> Sub for &Matrix<S> {
    type Output = Matrix<S>;
    fn sub(self, o: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<S: Scalar> Neg for &Matrix<S> {
    type Output = Matrix<S>;
    fn neg(self) -> Matrix<S> {
        self.map(|x| -x.clone())
    }
}

impl<S: Scalar> Mul for &Matrix<S> {
    type Output = Matrix<S>;
    fn mul(self, o: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, o.rows, "dimension mismatch in matrix product");
        let mut out = Matrix::<S>::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() && a.abs_prec() >= INF {
                    continue;
                }
                for j in 0..o.cols {
                    let x = out.get(i, j).clone() + a.clone() * o.get(k, j).clone();
                    out.set(i, j, x);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Exact3, Padic3};

    #[test]
    fn inverse_and_det() {
        let a = Matrix::<Exact3>::from_i64s(&[&[0, -1], &[9, 2]]);
        assert_eq!(a.det(), Exact3::from_i64(9));
        let ai = a.inverse().unwrap();
        assert_eq!(&a * &ai, Matrix::identity(2));
        let b = Matrix::<Padic3>::from_i64s(&[&[1, 2, 3, 4], &[0, 3, 1, 1], &[2, 2, 9, 1], &[1, 0, 0, 27]]);
        let bi = b.inverse().unwrap();
        assert!((&b * &bi).agreement(&Matrix::identity(4)).is_some());
        let d = b.det();
        let d3 = Matrix::<Exact3>::from_i64s(&[&[1, 2, 3, 4], &[0, 3, 1, 1], &[2, 2, 9, 1], &[1, 0, 0, 27]]).det();
        assert_eq!(d, Padic3::from_bigrational(&d3.0));
    }

    #[test]
    fn kernel_and_solve() {
        let a = Matrix::<Exact3>::from_i64s(&[&[1, 2], &[3, 6]]);
        assert_eq!(a.rank(), 1);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        assert!(a
            .mul_vec(&k[0])
            .iter()
            .all(|x| x.0 == num_rational::BigRational::from_integer(0.into())));
        let lk = a.left_kernel();
        assert_eq!(lk.len(), 1);
        let m = Matrix::<Exact3>::from_i64s(&[&[1, 0], &[0, 3], &[1, 1]]);
        let (x, res, _) = m
            .solve(&[Exact3::from_i64(2), Exact3::from_i64(3), Exact3::from_i64(3)])
            .unwrap();
        assert_eq!(x, vec![Exact3::from_i64(2), Exact3::from_i64(1)]);
        assert!(res.iter().all(|r| r.valuation().is_none()));
    }
}
