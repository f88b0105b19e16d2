//! Small dense matrices over certified intervals.
//!
//! Exact rational matrices are the common case (point intervals); interval
//! entries appear only when an irrational exponent forces an enclosure.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::interval::{Interval, Rat};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Interval::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Interval::one());
        }
        m
    }

    /// Antidiagonal permutation matrix (the long Weyl element).
    pub fn antidiag(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, n - 1 - i, Interval::one());
        }
        m
    }

    pub fn diag(entries: Vec<Interval>) -> Self {
        let n = entries.len();
        let mut m = Mat::zeros(n, n);
        for (i, e) in entries.into_iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Interval>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_rational_rows(rows: &[Vec<Rat>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|x| Interval::point(x.clone())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Interval {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_point(&self) -> bool {
        self.data.iter().all(|e| e.is_point())
    }

    /// Exact rational entries, if every entry is a point interval.
    pub fn to_rational(&self) -> Option<Vec<Vec<Rat>>> {
        if !self.is_point() {
            return None;
        }
        Some(
            (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self.get(i, j).lo().clone()).collect())
                .collect(),
        )
    }

    pub fn column(&self, j: usize) -> Vec<Interval> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut m = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "mat mul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Interval::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Interval]) -> Result<Vec<Interval>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch("mat-vec dimension".into()));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = Interval::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(&v[k]));
                }
                acc
            })
            .collect())
    }

    /// Exact rational matrix-vector product (all inputs must be points).
    pub fn mul_rat_vec(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch("mat-vec dimension".into()));
        }
        let m = self
            .to_rational()
            .ok_or_else(|| Error::PreconditionViolated("matrix has interval entries".into()))?;
        Ok(m
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Determinant by fraction-free-ish Gaussian elimination. Pivots must be
    /// certified nonzero; fails with `SingularMatrix` when no such pivot exists.
    pub fn det(&self) -> Result<Interval> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("det of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Interval::one();
        for col in 0..n {
            // Pick a pivot whose interval excludes zero; prefer exact points.
            let pivot_row = (col..n)
                .filter(|&r| !a.get(r, col).contains_zero())
                .max_by_key(|&r| a.get(r, col).is_point());
            let Some(p) = pivot_row else {
                // All candidate pivots contain zero: singular (or undecidable).
                return Err(Error::SingularMatrix);
            };
            if p != col {
                for j in 0..n {
                    let tmp = a.get(col, j).clone();
                    a.set(col, j, a.get(p, j).clone());
                    a.set(p, j, tmp);
                }
                det = det.neg();
            }
            let piv = a.get(col, col).clone();
            det = det.mul(&piv);
            for r in col + 1..n {
                let factor = a.get(r, col).div(&piv)?;
                for j in col..n {
                    let v = a.get(r, j).sub(&factor.mul(a.get(col, j)));
                    a.set(r, j, v);
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss–Jordan with certified nonzero pivots.
    pub fn inverse(&self) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot_row = (col..n)
                .filter(|&r| !a.get(r, col).contains_zero())
                .max_by_key(|&r| a.get(r, col).is_point());
            let Some(p) = pivot_row else {
                return Err(Error::SingularMatrix);
            };
            if p != col {
                for j in 0..n {
                    let tmp = a.get(col, j).clone();
                    a.set(col, j, a.get(p, j).clone());
                    a.set(p, j, tmp);
                    let tmp = inv.get(col, j).clone();
                    inv.set(col, j, inv.get(p, j).clone());
                    inv.set(p, j, tmp);
                }
            }
            let piv = a.get(col, col).clone();
            for j in 0..n {
                a.set(col, j, a.get(col, j).div(&piv)?);
                inv.set(col, j, inv.get(col, j).div(&piv)?);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col).clone();
                if factor.is_point() && factor.lo().is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = a.get(r, j).sub(&factor.mul(a.get(col, j)));
                    a.set(r, j, v);
                    let v = inv.get(r, j).sub(&factor.mul(inv.get(col, j)));
                    inv.set(r, j, v);
                }
            }
        }
        Ok(inv)
    }

    /// True when the matrix provably equals `other` entrywise (point entries).
    pub fn eq_exact(&self, other: &Mat) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.is_point()
            && other.is_point()
            && self.data == other.data
    }

    /// Entrywise midpoint distance, for diagnostics.
    pub fn max_abs_diff_f64(&self, other: &Mat) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.to_f64() - b.to_f64()).abs())
            .fold(0.0, f64::max)
    }
}

/// `g* = sigma (g^T)^{-1} sigma` with `sigma` the antidiagonal permutation.
pub fn dual_star(g: &Mat) -> Result<Mat> {
    if g.rows() != g.cols() {
        return Err(Error::DimensionMismatch("dual_star of non-square matrix".into()));
    }
    let sigma = Mat::antidiag(g.rows());
    let inv_t = g.transpose().inverse()?;
    sigma.mul(&inv_t)?.mul(&sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::{rat, rat_int};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Signed;

    fn pt(n: i64, d: i64) -> Interval {
        Interval::point(rat(n, d))
    }

    #[test]
    fn mul_and_inverse_roundtrip() {
        let m = Mat::from_rational_rows(&[
            vec![rat_int(2), rat_int(1)],
            vec![rat_int(1), rat_int(1)],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        let prod = m.mul(&inv).unwrap();
        assert!(prod.eq_exact(&Mat::identity(2)));
        assert_eq!(m.det().unwrap().as_rat().unwrap(), &rat_int(1));
    }

    #[test]
    fn det_matches_cofactor_3x3() {
        let m = Mat::from_rational_rows(&[
            vec![rat_int(1), rat_int(2), rat_int(3)],
            vec![rat_int(0), rat_int(4), rat_int(5)],
            vec![rat_int(1), rat_int(0), rat_int(6)],
        ])
        .unwrap();
        // 1*(24-0) - 2*(0-5) + 3*(0-4) = 24 + 10 - 12 = 22
        assert_eq!(m.det().unwrap().as_rat().unwrap(), &rat_int(22));
    }

    #[test]
    fn singular_matrix_detected() {
        let m = Mat::from_rational_rows(&[
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(2), rat_int(4)],
        ])
        .unwrap();
        assert!(matches!(m.det(), Err(Error::SingularMatrix)));
        assert!(m.inverse().is_err());
    }

    #[test]
    fn dual_star_diagonal_and_involution() {
        let g = Mat::diag(vec![pt(2, 1), pt(3, 1), pt(1, 6)]);
        let s = dual_star(&g).unwrap();
        let expect = Mat::diag(vec![pt(6, 1), pt(1, 3), pt(1, 2)]);
        assert!(s.eq_exact(&expect));
        let back = dual_star(&s).unwrap();
        assert!(back.eq_exact(&g));
    }

    #[test]
    fn dual_star_preserves_unimodularity() {
        let g = Mat::from_rational_rows(&[
            vec![rat_int(1), rat_int(3), rat_int(-2)],
            vec![rat_int(0), rat_int(1), rat_int(4)],
            vec![rat_int(0), rat_int(0), rat_int(1)],
        ])
        .unwrap();
        let s = dual_star(&g).unwrap();
        let d = s.det().unwrap();
        let one = BigRational::from_integer(BigInt::from(1));
        assert_eq!(d.as_rat().unwrap().abs(), one.abs());
        assert!(dual_star(&s).unwrap().eq_exact(&g));
    }
}
