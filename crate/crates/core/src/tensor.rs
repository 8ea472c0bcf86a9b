//! Real third-order tensors stored frontal-slice-major.
//!
//! Entry `(i, j, k)` lives at `k * n1 * n2 + i * n2 + j`, so every frontal
//! slice `A(:, :, k)` is a contiguous row-major block.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    n1: usize,
    n2: usize,
    n3: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n1: usize, n2: usize, n3: usize) -> Self {
        assert!(n1 >= 1 && n2 >= 1 && n3 >= 1, "tensor dimensions must be positive");
        Self { n1, n2, n3, data: vec![0.0; n1 * n2 * n3] }
    }

    pub fn ones(n1: usize, n2: usize, n3: usize) -> Self {
        let mut t = Self::zeros(n1, n2, n3);
        t.data.fill(1.0);
        t
    }

    pub fn from_fn(n1: usize, n2: usize, n3: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n1, n2, n3);
        for k in 0..n3 {
            for i in 0..n1 {
                for j in 0..n2 {
                    t.data[k * n1 * n2 + i * n2 + j] = f(i, j, k);
                }
            }
        }
        t
    }

    /// Wraps raw frontal-slice-major values.
    pub fn from_vec(n1: usize, n2: usize, n3: usize, data: Vec<f64>) -> Result<Self> {
        if n1 == 0 || n2 == 0 || n3 == 0 {
            return Err(Error::DimensionMismatch(format!("zero dimension in {n1}x{n2}x{n3}")));
        }
        if data.len() != n1 * n2 * n3 {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {n1}x{n2}x{n3} tensor",
                data.len()
            )));
        }
        Ok(Self { n1, n2, n3, data })
    }

    /// Builds a tensor from its frontal slices. All slices must share a shape.
    pub fn from_slices(slices: &[DMatrix<f64>]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no frontal slices".into()))?;
        let (n1, n2) = first.shape();
        let mut t = Self::zeros(n1, n2, slices.len());
        for (k, s) in slices.iter().enumerate() {
            if s.shape() != (n1, n2) {
                return Err(Error::DimensionMismatch(format!(
                    "slice {k} is {}x{}, expected {n1}x{n2}",
                    s.nrows(),
                    s.ncols()
                )));
            }
            t.set_slice(k, s);
        }
        Ok(t)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n3(&self) -> usize {
        self.n3
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.n3)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.n1 && j < self.n2 && k < self.n3);
        k * self.n1 * self.n2 + i * self.n2 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = value;
    }

    /// Contiguous row-major view of frontal slice `k`.
    pub fn slice_data(&self, k: usize) -> &[f64] {
        let len = self.n1 * self.n2;
        &self.data[k * len..(k + 1) * len]
    }

    pub fn slice_data_mut(&mut self, k: usize) -> &mut [f64] {
        let len = self.n1 * self.n2;
        &mut self.data[k * len..(k + 1) * len]
    }

    /// Frontal slice `A(:, :, k)` as a matrix.
    pub fn frontal(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n1, self.n2, self.slice_data(k))
    }

    pub fn set_slice(&mut self, k: usize, m: &DMatrix<f64>) {
        assert_eq!(m.shape(), (self.n1, self.n2));
        let n2 = self.n2;
        let dst = self.slice_data_mut(k);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                dst[i * n2 + j] = m[(i, j)];
            }
        }
    }

    /// The tubal scalar `A(i, j, :)`.
    pub fn tube(&self, i: usize, j: usize) -> TubalScalar {
        TubalScalar::new((0..self.n3).map(|k| self.get(i, j, k)).collect())
    }

    pub fn set_tube(&mut self, i: usize, j: usize, tube: &TubalScalar) {
        assert_eq!(tube.len(), self.n3);
        for (k, &v) in tube.values().iter().enumerate() {
            self.set(i, j, k, v);
        }
    }

    /// Lateral slice `A(:, j, :)` as an `n1 x 1 x n3` tensor.
    pub fn lateral(&self, j: usize) -> Tensor3 {
        Tensor3::from_fn(self.n1, 1, self.n3, |i, _, k| self.get(i, j, k))
    }

    /// Concatenates `n x 1 x n3` (or wider) tensors along the second mode.
    pub fn from_laterals(parts: &[Tensor3]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no lateral slices".into()))?;
        let (n1, n3) = (first.n1, first.n3);
        if parts.iter().any(|p| p.n1 != n1 || p.n3 != n3) {
            return Err(Error::DimensionMismatch("lateral slices differ in n1 or n3".into()));
        }
        let n2: usize = parts.iter().map(|p| p.n2).sum();
        let mut out = Tensor3::zeros(n1, n2, n3);
        let mut col = 0;
        for p in parts {
            for k in 0..n3 {
                for i in 0..n1 {
                    for j in 0..p.n2 {
                        out.set(i, col + j, k, p.get(i, j, k));
                    }
                }
            }
            col += p.n2;
        }
        Ok(out)
    }

    /// Sub-tensor of rows `rows` and columns `cols` across all slices.
    pub fn sub_tensor(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Result<Tensor3> {
        if rows.end > self.n1 || cols.end > self.n2 || rows.is_empty() || cols.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "block {rows:?} x {cols:?} outside {}x{}",
                self.n1, self.n2
            )));
        }
        Ok(Tensor3::from_fn(rows.len(), cols.len(), self.n3, |i, j, k| {
            self.get(rows.start + i, cols.start + j, k)
        }))
    }

    /// `unfold(A) = [A_1; A_2; ...; A_n3]`, an `(n1 n3) x n2` matrix.
    pub fn unfold(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n1 * self.n3, self.n2);
        for k in 0..self.n3 {
            for i in 0..self.n1 {
                for j in 0..self.n2 {
                    m[(k * self.n1 + i, j)] = self.get(i, j, k);
                }
            }
        }
        m
    }

    /// Inverse of [`Tensor3::unfold`].
    pub fn fold(m: &DMatrix<f64>, n1: usize, n3: usize) -> Result<Self> {
        if n1 == 0 || n3 == 0 || m.nrows() != n1 * n3 || m.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "cannot fold a {}x{} matrix with n1 = {n1}, n3 = {n3}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Tensor3::from_fn(n1, m.ncols(), n3, |i, j, k| m[(k * n1 + i, j)]))
    }

    /// Block circulant matrix: block `(r, c)` is `A_{(r - c) mod n3}`.
    pub fn bcirc(&self) -> DMatrix<f64> {
        let (n1, n2, n3) = self.shape();
        let mut m = DMatrix::zeros(n1 * n3, n2 * n3);
        for r in 0..n3 {
            for c in 0..n3 {
                let k = (r + n3 - c) % n3;
                for i in 0..n1 {
                    for j in 0..n2 {
                        m[(r * n1 + i, c * n2 + j)] = self.get(i, j, k);
                    }
                }
            }
        }
        m
    }

    /// Tensor transpose: transpose each slice, then reverse slices 2..n3.
    pub fn transpose(&self) -> Tensor3 {
        let n3 = self.n3;
        Tensor3::from_fn(self.n2, self.n1, n3, |i, j, k| self.get(j, i, (n3 - k) % n3))
    }

    /// Identity tensor: first frontal slice `I_n`, the rest zero.
    pub fn identity(n: usize, n3: usize) -> Tensor3 {
        let mut t = Tensor3::zeros(n, n, n3);
        for i in 0..n {
            t.set(i, i, 0, 1.0);
        }
        t
    }

    /// Composes `[[a, b], [c, d]]` slice by slice.
    pub fn block_compose(a: &Tensor3, b: &Tensor3, c: &Tensor3, d: &Tensor3) -> Result<Tensor3> {
        let n3 = a.n3;
        if [b.n3, c.n3, d.n3].iter().any(|&x| x != n3)
            || a.n1 != b.n1
            || c.n1 != d.n1
            || a.n2 != c.n2
            || b.n2 != d.n2
        {
            return Err(Error::DimensionMismatch(format!(
                "non-conformable blocks {:?} {:?} / {:?} {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        let (m1, n1) = (a.n1, a.n2);
        Ok(Tensor3::from_fn(m1 + c.n1, n1 + b.n2, n3, |i, j, k| match (i < m1, j < n1) {
            (true, true) => a.get(i, j, k),
            (true, false) => b.get(i, j - n1, k),
            (false, true) => c.get(i - m1, j, k),
            (false, false) => d.get(i - m1, j - n1, k),
        }))
    }

    /// Stacks `top` over `bottom` (equal column counts).
    pub fn vstack(top: &Tensor3, bottom: &Tensor3) -> Result<Tensor3> {
        if top.n2 != bottom.n2 || top.n3 != bottom.n3 {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {:?} over {:?}",
                top.shape(),
                bottom.shape()
            )));
        }
        let m1 = top.n1;
        Ok(Tensor3::from_fn(m1 + bottom.n1, top.n2, top.n3, |i, j, k| {
            if i < m1 {
                top.get(i, j, k)
            } else {
                bottom.get(i - m1, j, k)
            }
        }))
    }

    pub fn fnorm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor3 {
        Tensor3 { n1: self.n1, n2: self.n2, n3: self.n3, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    fn zip_with(&self, other: &Tensor3, f: impl Fn(f64, f64) -> f64) -> Tensor3 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in elementwise operation");
        Tensor3 {
            n1: self.n1,
            n2: self.n2,
            n3: self.n3,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `fnorm(self - other)`; panics on shape mismatch.
    pub fn distance(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// True when every frontal slice is diagonal (up to `tol` absolute).
    pub fn is_f_diagonal(&self, tol: f64) -> bool {
        (0..self.n3).all(|k| {
            (0..self.n1).all(|i| (0..self.n2).all(|j| i == j || self.get(i, j, k).abs() <= tol))
        })
    }
}

impl Add for &Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Tensor3 {
    type Output = Tensor3;
    fn neg(self) -> Tensor3 {
        self.map(|v| -v)
    }
}

impl Mul<f64> for &Tensor3 {
    type Output = Tensor3;
    fn mul(self, rhs: f64) -> Tensor3 {
        self.scale(rhs)
    }
}

/// A `1 x 1 x n3` tube, the scalar of the T-product algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct TubalScalar {
    values: Vec<f64>,
}

impl TubalScalar {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty());
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_tensor(&self) -> Tensor3 {
        Tensor3 { n1: 1, n2: 1, n3: self.values.len(), data: self.values.clone() }
    }
}
