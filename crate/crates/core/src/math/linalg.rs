//! Small dense vectors and matrices (dimension ≤ 4) stored inline.
//!
//! Coefficient evaluators are called once per node per time step and once
//! per path per Euler step, so these types are `Copy` and never allocate.
//! Eigen-decompositions above dimension 2 go through `nalgebra`.

use std::fmt;
use std::ops::{Add, Deref, DerefMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

/// Absolute eigenvalue tolerance for every PSD test in the crate.
pub const PSD_TOL: f64 = 1e-10;

/// Symmetry tolerance for [`SymMatrix`] construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Entries past `n` are kept at zero, so arithmetic runs over the whole
/// inline array without consulting `n`.
#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    n: usize,
    a: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= MAX_DIM, "dimension {n} exceeds {MAX_DIM}");
        Self { n, a: [0.0; MAX_DIM] }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut v = Self::zeros(xs.len());
        v.a[..xs.len()].copy_from_slice(xs);
        v
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.a[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.n, other.n);
        let mut s = 0.0;
        for i in 0..MAX_DIM {
            s += self.a[i] * other.a[i];
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut v = *self;
        // only the live entries, so `s = ∞` cannot turn the padding into NaN
        for x in &mut v.a[..self.n] {
            *x *= s;
        }
        v
    }

    /// `self ⊗ other`, i.e. the matrix with entries `self_i * other_j`.
    pub fn outer(&self, other: &Vector) -> SquareMatrix {
        SquareMatrix::from_fn(self.n, |i, j| self[i] * other[j])
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.a[..self.n]
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.a[..self.n]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(mut self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.n, rhs.n);
        for i in 0..MAX_DIM {
            self.a[i] += rhs.a[i];
        }
        self
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(mut self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.n, rhs.n);
        for i in 0..MAX_DIM {
            self.a[i] -= rhs.a[i];
        }
        self
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

impl Serialize for Vector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (**self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        if v.len() > MAX_DIM {
            return Err(serde::de::Error::custom("vector dimension exceeds 4"));
        }
        Ok(Vector::from_slice(&v))
    }
}

/// General square matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    a: [f64; MAX_DIM * MAX_DIM],
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= MAX_DIM, "dimension {n} exceeds {MAX_DIM}");
        Self {
            n,
            a: [0.0; MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * MAX_DIM + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| rows[i][j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * MAX_DIM + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * MAX_DIM + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Hilbert–Schmidt norm `sqrt(tr(M Mᵀ))`.
    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        m.a.iter_mut().for_each(|x| *x *= s);
        m
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        let mut out = Vector::zeros(self.n);
        for i in 0..self.n {
            out[i] = (0..self.n).map(|j| self.get(i, j) * v[j]).sum();
        }
        out
    }

    /// `Σ_ij self_ij other_ij`, i.e. `tr(selfᵀ other)`.
    pub fn contract(&self, other: &SquareMatrix) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.get(i, j) * other.get(i, j);
            }
        }
        s
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// Symmetric part `(M + Mᵀ)/2`.
    pub fn symmetric_part(&self) -> SymMatrix {
        SymMatrix(Self::from_fn(self.n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i))))
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<f64>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect();
        rows.fmt(f)
    }
}

impl Add for SquareMatrix {
    type Output = SquareMatrix;
    fn add(mut self, rhs: SquareMatrix) -> SquareMatrix {
        debug_assert_eq!(self.n, rhs.n);
        self.a.iter_mut().zip(rhs.a.iter()).for_each(|(x, y)| *x += y);
        self
    }
}

impl Sub for SquareMatrix {
    type Output = SquareMatrix;
    fn sub(mut self, rhs: SquareMatrix) -> SquareMatrix {
        debug_assert_eq!(self.n, rhs.n);
        self.a.iter_mut().zip(rhs.a.iter()).for_each(|(x, y)| *x -= y);
        self
    }
}

impl Mul for SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: SquareMatrix) -> SquareMatrix {
        debug_assert_eq!(self.n, rhs.n);
        SquareMatrix::from_fn(self.n, |i, j| (0..self.n).map(|k| self.get(i, k) * rhs.get(k, j)).sum())
    }
}

/// Symmetric square matrix of dimension ≤ 4.
#[derive(Clone, Copy, PartialEq)]
pub struct SymMatrix(SquareMatrix);

impl SymMatrix {
    pub fn new(m: SquareMatrix) -> Result<Self> {
        if !m.is_symmetric(SYMMETRY_TOL * (1.0 + m.frobenius())) {
            return Err(Error::PreconditionFailed(format!("matrix {m:?} is not symmetric")));
        }
        Ok(m.symmetric_part())
    }

    pub fn zeros(n: usize) -> Self {
        Self(SquareMatrix::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self(SquareMatrix::identity(n))
    }

    pub fn scalar(n: usize, s: f64) -> Self {
        Self::identity(n).scale(s)
    }

    pub fn diag(d: &[f64]) -> Self {
        Self(SquareMatrix::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 }))
    }

    /// Builds from the upper triangle (`f` is only called with `i <= j`).
    pub fn from_upper(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self(SquareMatrix::from_fn(n, |i, j| if i <= j { f(i, j) } else { f(j, i) }))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(SquareMatrix::from_rows(rows))
    }

    /// `v ⊗ v`.
    pub fn projector(v: &Vector) -> Self {
        Self(v.outer(v))
    }

    pub fn as_square(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    /// `M B M` for symmetric `B`; the result is symmetric.
    pub fn sandwich(&self, b: &SymMatrix) -> SymMatrix {
        (self.0 * b.0 * self.0).symmetric_part()
    }

    pub fn square(&self) -> SymMatrix {
        (self.0 * self.0).symmetric_part()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.dim() {
            0 => Vec::new(),
            1 => vec![self.get(0, 0)],
            2 => {
                let (l0, l1, _) = eig2(self);
                vec![l0, l1]
            }
            _ => {
                let mut ev: Vec<f64> = SymmetricEigen::new(self.to_nalgebra()).eigenvalues.iter().copied().collect();
                ev.sort_by(f64::total_cmp);
                ev
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Operator norm `sup_{|e|=1} |M e·e|`.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL
    }

    /// Applies `h` to the spectrum: `Q diag(h(λ_i)) Qᵀ`.
    pub fn map_spectrum(&self, h: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.dim();
        match n {
            0 => *self,
            1 => SymMatrix::diag(&[h(self.get(0, 0))]),
            2 => {
                let (l0, l1, v0) = eig2(self);
                let v1 = [-v0[1], v0[0]];
                let (h0, h1) = (h(l0), h(l1));
                SymMatrix::from_upper(2, |i, j| h0 * v0[i] * v0[j] + h1 * v1[i] * v1[j])
            }
            _ => {
                let e = SymmetricEigen::new(self.to_nalgebra());
                let hv: Vec<f64> = e.eigenvalues.iter().map(|&l| h(l)).collect();
                SymMatrix::from_upper(n, |i, j| (0..n).map(|k| hv[k] * e.eigenvectors[(i, k)] * e.eigenvectors[(j, k)]).sum())
            }
        }
    }
}

/// Eigenvalues `l0 <= l1` of a symmetric 2×2 matrix and a unit eigenvector for `l0`.
fn eig2(m: &SymMatrix) -> (f64, f64, [f64; 2]) {
    let (a, b, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 1));
    let mean = 0.5 * (a + d);
    let r = (0.5 * (a - d)).hypot(b);
    let (l0, l1) = (mean - r, mean + r);
    if b == 0.0 {
        return if a <= d { (a, d, [1.0, 0.0]) } else { (d, a, [0.0, 1.0]) };
    }
    // (A - l0 I) v = 0 has the solution (b, l0 - a) or (l0 - d, b); take the better conditioned one.
    let (v0, v1) = if (l0 - a).abs() > (l0 - d).abs() { (b, l0 - a) } else { (l0 - d, b) };
    let nv = v0.hypot(v1);
    (l0, l1, [v0 / nv, v1 / nv])
}

impl Deref for SymMatrix {
    type Target = SquareMatrix;
    fn deref(&self) -> &SquareMatrix {
        &self.0
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Add for SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: SymMatrix) -> SymMatrix {
        SymMatrix(self.0 + rhs.0)
    }
}

impl Sub for SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: SymMatrix) -> SymMatrix {
        SymMatrix(self.0 - rhs.0)
    }
}

impl Mul for SymMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: SymMatrix) -> SquareMatrix {
        self.0 * rhs.0
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.get(i, j)).collect())
            .collect();
        rows.serialize(s)
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.get(i, j)).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        if n > MAX_DIM || rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("expected a square matrix of dimension <= 4"));
        }
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        SymMatrix::from_rows(&refs).map_err(serde::de::Error::custom)
    }
}

/// Symmetric PSD square root via the spectral decomposition.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero; anything below is
/// rejected with [`Error::NotPsd`].
pub fn psd_sqrt(a: &SymMatrix) -> Result<SymMatrix> {
    let n = a.dim();
    if n == 1 {
        let v = a.get(0, 0);
        if v < -PSD_TOL {
            return Err(Error::NotPsd(v));
        }
        return Ok(SymMatrix::diag(&[v.max(0.0).sqrt()]));
    }
    let min = a.min_eigenvalue();
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    Ok(a.map_spectrum(|l| l.max(0.0).sqrt()))
}
