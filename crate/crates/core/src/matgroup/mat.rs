//! Small dense matrices and vectors (dimension at most four).
//!
//! Both types are `Copy` and store their entries inline, which keeps the
//! inner loops of the cover intersection tests allocation free. Spectral
//! quantities (singular values, eigenvalues, null spaces) are delegated to
//! `nalgebra`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

/// Relative LU pivot threshold below which a matrix counts as singular.
pub const PIVOT_TOL: f64 = 1e-13;

/// A point or direction in ℝ^d, d ≤ 4.
#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    dim: usize,
    data: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Vector { dim, data: [0.0; MAX_DIM] }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut v = Vector::zeros(xs.len());
        v.data[..xs.len()].copy_from_slice(xs);
        v
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Vector::zeros(dim);
        v.data[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.dim]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.as_slice().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Vector {
        let mut out = *self;
        for x in &mut out.data[..self.dim] {
            *x *= s;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    /// Linear interpolation `(1 - t) self + t other`.
    pub fn lerp(&self, other: &Vector, t: f64) -> Vector {
        let mut out = *self;
        for i in 0..self.dim {
            out.data[i] = (1.0 - t) * self.data[i] + t * other.data[i];
        }
        out
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.dim);
        &self.data[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        debug_assert!(i < self.dim);
        &mut self.data[i]
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(mut self, rhs: Vector) -> Vector {
        for i in 0..self.dim {
            self.data[i] += rhs.data[i];
        }
        self
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(mut self, rhs: Vector) -> Vector {
        for i in 0..self.dim {
            self.data[i] -= rhs.data[i];
        }
        self
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let xs = Vec::<f64>::deserialize(d)?;
        if xs.is_empty() || xs.len() > MAX_DIM {
            return Err(serde::de::Error::custom(format!(
                "vector length {} out of range 1..=4",
                xs.len()
            )));
        }
        Ok(Vector::from_slice(&xs))
    }
}

/// A real d×d matrix, d ≤ 4, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat {
    dim: usize,
    data: [f64; MAX_DIM * MAX_DIM],
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Mat { dim, data: [0.0; MAX_DIM * MAX_DIM] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Mat::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from rows, rejecting ragged, oversized or non-finite input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        let mut m = Mat::zeros(d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Dimension { expected: d, found: row.len() });
            }
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFinite);
                }
                m[(i, j)] = x;
            }
        }
        Ok(m)
    }

    /// 2×2 rotation by `theta`.
    pub fn rotation2(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat::from_fn(2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => c,
            (0, 1) => -s,
            _ => s,
        })
    }

    /// Skew-symmetric cross-product matrix of a 3-vector.
    pub fn skew3(w: &Vector) -> Self {
        let mut m = Mat::zeros(3);
        m[(0, 1)] = -w[2];
        m[(0, 2)] = w[1];
        m[(1, 0)] = w[2];
        m[(1, 2)] = -w[0];
        m[(2, 0)] = -w[1];
        m[(2, 1)] = w[0];
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self[(i, j)]).collect()).collect()
    }

    pub fn column(&self, j: usize) -> Vector {
        let mut v = Vector::zeros(self.dim);
        for i in 0..self.dim {
            v[i] = self[(i, j)];
        }
        v
    }

    pub fn is_finite(&self) -> bool {
        self.data[..self.dim * MAX_DIM].iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] *= s;
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        debug_assert_eq!(v.dim(), self.dim);
        let mut out = Vector::zeros(self.dim);
        for i in 0..self.dim {
            let mut acc = 0.0;
            for j in 0..self.dim {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `selfᵀ v` without forming the transpose.
    pub fn apply_transpose(&self, v: &Vector) -> Vector {
        let mut out = Vector::zeros(self.dim);
        for j in 0..self.dim {
            let mut acc = 0.0;
            for i in 0..self.dim {
                acc += self[(i, j)] * v[i];
            }
            out[j] = acc;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self[(i, j)] * self[(i, j)];
            }
        }
        s.sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max((self[(i, j)] - other[(i, j)]).abs());
            }
        }
        m
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self[(i, j)])
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Mat {
        Mat::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    /// LU factorization with partial pivoting. Returns the packed factors,
    /// the permutation and the permutation sign.
    fn lu(&self) -> ([f64; MAX_DIM * MAX_DIM], [usize; MAX_DIM], f64) {
        let d = self.dim;
        let mut a = self.data;
        let mut perm = [0usize, 1, 2, 3];
        let mut sign = 1.0;
        for k in 0..d {
            let mut p = k;
            let mut best = a[k * MAX_DIM + k].abs();
            for i in (k + 1)..d {
                let v = a[i * MAX_DIM + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..d {
                    a.swap(k * MAX_DIM + j, p * MAX_DIM + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * MAX_DIM + k];
            if pivot == 0.0 {
                continue;
            }
            for i in (k + 1)..d {
                let f = a[i * MAX_DIM + k] / pivot;
                a[i * MAX_DIM + k] = f;
                for j in (k + 1)..d {
                    a[i * MAX_DIM + j] -= f * a[k * MAX_DIM + j];
                }
            }
        }
        (a, perm, sign)
    }

    pub fn det(&self) -> f64 {
        let (a, _, sign) = self.lu();
        (0..self.dim).fold(sign, |acc, i| acc * a[i * MAX_DIM + i])
    }

    /// Singularity test on the LU pivots of the row- and column-equilibrated matrix.
    ///
    /// Equilibration keeps strongly anisotropic but well-defined powers
    /// (entries spanning many orders of magnitude) invertible.
    pub fn is_singular(&self) -> bool {
        if !self.is_finite() {
            return true;
        }
        let d = self.dim;
        let mut m = *self;
        for i in 0..d {
            let r = (0..d).map(|j| m[(i, j)].abs()).fold(0.0, f64::max);
            if r == 0.0 {
                return true;
            }
            for j in 0..d {
                m[(i, j)] /= r;
            }
        }
        for j in 0..d {
            let c = (0..d).map(|i| m[(i, j)].abs()).fold(0.0, f64::max);
            if c == 0.0 {
                return true;
            }
            for i in 0..d {
                m[(i, j)] /= c;
            }
        }
        let (a, _, _) = m.lu();
        let pivots: Vec<f64> = (0..d).map(|i| a[i * MAX_DIM + i].abs()).collect();
        let hi = pivots.iter().copied().fold(0.0, f64::max);
        let lo = pivots.iter().copied().fold(f64::INFINITY, f64::min);
        !(lo > PIVOT_TOL * hi)
    }

    /// Solves `self x = b`.
    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        if self.is_singular() {
            return Err(Error::Singular("linear solve"));
        }
        let d = self.dim;
        let (a, perm, _) = self.lu();
        let mut y = Vector::zeros(d);
        for i in 0..d {
            let mut acc = b[perm[i]];
            for j in 0..i {
                acc -= a[i * MAX_DIM + j] * y[j];
            }
            y[i] = acc;
        }
        let mut x = Vector::zeros(d);
        for i in (0..d).rev() {
            let mut acc = y[i];
            for j in (i + 1)..d {
                acc -= a[i * MAX_DIM + j] * x[j];
            }
            x[i] = acc / a[i * MAX_DIM + i];
        }
        Ok(x)
    }

    /// Solves `selfᵀ x = b`, i.e. returns `self^{-T} b`.
    pub fn solve_transpose(&self, b: &Vector) -> Result<Vector> {
        self.transpose().solve(b)
    }

    pub fn inverse(&self) -> Result<Mat> {
        if self.is_singular() {
            return Err(Error::Singular("matrix inverse"));
        }
        let d = self.dim;
        let mut inv = Mat::zeros(d);
        for j in 0..d {
            let col = self.solve(&Vector::basis(d, j))?;
            for i in 0..d {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }

    /// Integer power by repeated squaring; negative powers invert first.
    pub fn pow(&self, k: i64) -> Result<Mat> {
        let mut base = if k < 0 { self.inverse()? } else { *self };
        let mut e = k.unsigned_abs();
        let mut acc = Mat::identity(self.dim);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> =
            self.to_nalgebra().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        s
    }

    /// Spectral norm ‖·‖₂.
    pub fn op_norm(&self) -> f64 {
        if self.dim == 1 {
            return self[(0, 0)].abs();
        }
        self.singular_values()[0]
    }

    pub fn condition_number(&self) -> f64 {
        let s = self.singular_values();
        s[0] / s[s.len() - 1]
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.dim == 1 {
            return vec![Complex64::new(self[(0, 0)], 0.0)];
        }
        self.to_nalgebra()
            .complex_eigenvalues()
            .iter()
            .map(|z| Complex64::new(z.re, z.im))
            .collect()
    }

    /// Orthonormal basis of the numerical null space (singular values
    /// below `tol` times the largest).
    pub fn null_space(&self, tol: f64) -> Vec<Vector> {
        let svd = self.to_nalgebra().svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let mut basis = Vec::new();
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s <= tol * smax.max(1.0) {
                let row: Vec<f64> = (0..self.dim).map(|j| vt[(k, j)]).collect();
                basis.push(Vector::from_slice(&row));
            }
        }
        basis
    }

    /// Cholesky factor `L` with `self = L Lᵀ`; `None` unless symmetric positive definite.
    pub fn cholesky(&self) -> Option<Mat> {
        nalgebra::Cholesky::new(self.to_nalgebra()).map(|c| Mat::from_nalgebra(&c.l()))
    }

    /// Commutator `self other - other self`.
    pub fn commutator(&self, other: &Mat) -> Mat {
        *self * *other - *other * *self
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * MAX_DIM + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * MAX_DIM + j]
    }
}

impl Mul for Mat {
    type Output = Mat;
    fn mul(self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = Mat::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for Mat {
    type Output = Mat;
    fn add(self, rhs: Mat) -> Mat {
        Mat::from_fn(self.dim, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl Sub for Mat {
    type Output = Mat;
    fn sub(self, rhs: Mat) -> Mat {
        Mat::from_fn(self.dim, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl Neg for Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Mat::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_inverse_agree() {
        let m = Mat::from_rows(&[vec![2.0, 1.0, 0.0], vec![0.5, 3.0, 1.0], vec![0.0, 1.0, 4.0]])
            .unwrap();
        let inv = m.inverse().unwrap();
        assert!((m * inv).max_abs_diff(&Mat::identity(3)) < 1e-14);
        let b = Vector::from_slice(&[1.0, -2.0, 0.5]);
        let x = m.solve(&b).unwrap();
        assert!((m.apply(&x) - b).norm() < 1e-14);
    }

    #[test]
    fn singularity_is_scale_invariant() {
        let tiny = Mat::diag(&[3f64.powi(-32), 2f64.powi(-32), 2f64.powi(-32)]);
        assert!(!tiny.is_singular());
        let rank_one = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(rank_one.is_singular());
        assert_eq!(rank_one.inverse(), Err(Error::Singular("matrix inverse")));
    }

    #[test]
    fn powers_match_repeated_multiplication() {
        let a = Mat::diag(&[3.0, 2.0, 2.0]);
        let p = a.pow(-4).unwrap();
        assert!((p[(0, 0)] - 3f64.powi(-4)).abs() < 1e-16);
        assert!((p[(1, 1)] - 2f64.powi(-4)).abs() < 1e-16);
    }

    #[test]
    fn rejects_ragged_and_nonfinite_rows() {
        assert!(Mat::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert_eq!(Mat::from_rows(&[vec![f64::NAN]]), Err(Error::NonFinite));
        assert_eq!(Mat::from_rows(&vec![vec![0.0; 5]; 5]), Err(Error::UnsupportedDimension(5)));
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        assert!((Mat::diag(&[0.5, -3.0]).op_norm() - 3.0).abs() < 1e-14);
    }
}
