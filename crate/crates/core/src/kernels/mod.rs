//! Dense matrix kernels applied to individual Fourier slices.
//!
//! Every kernel is generic over [`Scalar`], i.e. `f64` or `Complex64`. The
//! tensor layer runs self-conjugate Fourier slices (DC and Nyquist) in real
//! arithmetic so their factors are exactly real, and the remaining slices in
//! complex arithmetic.

mod csd;
mod gsvd;
mod svd;

pub use csd::{csd_general, csd_thin, MatCsdGeneral, MatCsdThin};
pub use gsvd::{gsvd_pair, MatGsvd};

pub(crate) use csd::cs_pairing;

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

/// Field of matrix entries: `f64` or `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy {
    /// `re + i·im`; the imaginary part is dropped for `f64`.
    fn from_parts(re: f64, im: f64) -> Self;
}

impl Scalar for f64 {
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
}

impl Scalar for Complex64 {
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
}

pub(crate) fn to_c64<T: Scalar>(m: &DMatrix<T>) -> DMatrix<Complex64> {
    m.map(|z| Complex64::new(z.real(), z.imaginary()))
}

pub(crate) fn real_part(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub(crate) fn conj<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    m.map(|z| z.conjugate())
}

/// Unit-modulus factor of `z` (1 for zero).
pub(crate) fn unit<T: Scalar>(z: T) -> T {
    let r = z.modulus();
    if r == 0.0 {
        T::one()
    } else {
        z.unscale(r)
    }
}

/// Factor that rotates the first significant entry of `col` onto the
/// nonnegative real axis.
pub(crate) fn leading_phase<T: Scalar>(col: nalgebra::DVectorView<'_, T>) -> T {
    let norm = col.norm();
    if norm == 0.0 {
        return T::one();
    }
    col.iter()
        .find(|z| z.modulus() > 1e-8 * norm)
        .map(|&z| unit(z).conjugate())
        .unwrap_or_else(T::one)
}

pub(crate) fn normalize_column_phases<T: Scalar>(m: &mut DMatrix<T>, cols: std::ops::Range<usize>) {
    for j in cols {
        let ph = leading_phase(m.column(j));
        scale_column(m, j, ph);
    }
}

pub(crate) fn scale_column<T: Scalar>(m: &mut DMatrix<T>, j: usize, s: T) {
    for z in m.column_mut(j).iter_mut() {
        *z *= s;
    }
}

/// Thin SVD `M = U diag(σ) Vᴴ` with `σ` non-increasing; `U` is `m x k`,
/// `V` is `n x k`, `k = min(m, n)`.
pub(crate) fn svd_thin<T: Scalar>(m: &DMatrix<T>) -> (DMatrix<T>, Vec<f64>, DMatrix<T>) {
    svd::jacobi_svd(m)
}

/// Full SVD `M = U Σ Vᴴ` with square unitary `U` (`m x m`) and `V`
/// (`n x n`) and `σ` non-increasing. The first nonzero entry of each of the
/// leading `min(m, n)` columns of `U` is real nonnegative.
pub fn svd_full<T: Scalar>(m: &DMatrix<T>) -> (DMatrix<T>, Vec<f64>, DMatrix<T>) {
    let (u, s, v) = svd_thin(m);
    let mut u = complete_basis(&u);
    let mut v = complete_basis(&v);
    for j in 0..s.len() {
        let ph = leading_phase(u.column(j));
        scale_column(&mut u, j, ph);
        scale_column(&mut v, j, ph);
    }
    (u, s, v)
}

/// Extends orthonormal columns `q` (`m x k`) to an `m x m` unitary matrix
/// whose first `k` columns are `q` itself.
pub(crate) fn complete_basis<T: Scalar>(q: &DMatrix<T>) -> DMatrix<T> {
    let (m, k) = q.shape();
    if k >= m {
        return q.clone();
    }
    let mut aug = DMatrix::<T>::zeros(m, k + m);
    aug.columns_mut(0, k).copy_from(q);
    aug.columns_mut(k, m).fill_with_identity();
    let full = aug.qr().q();
    let mut out = DMatrix::<T>::zeros(m, m);
    out.columns_mut(0, k).copy_from(q);
    out.columns_mut(k, m - k).copy_from(&full.columns(k, m - k));
    normalize_column_phases(&mut out, k..m);
    out
}

/// Thin QR with a real nonnegative diagonal in `R`. Requires rows ≥ cols.
pub(crate) fn qr_positive<T: Scalar>(m: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return (DMatrix::zeros(rows, 0), DMatrix::zeros(0, 0));
    }
    debug_assert!(rows >= cols);
    let qr = m.clone().qr();
    let (mut q, mut r) = (qr.q(), qr.r());
    for j in 0..cols {
        let ph = unit(r[(j, j)]);
        scale_column(&mut q, j, ph);
        let inv = ph.conjugate();
        for c in 0..cols {
            r[(j, c)] *= inv;
        }
        r[(j, j)] = T::from_real(r[(j, j)].real());
    }
    (q, r)
}

/// Picks `cols` of `m` in the given order.
pub(crate) fn pick_columns<T: Scalar>(m: &DMatrix<T>, cols: &[usize]) -> DMatrix<T> {
    let mut out = DMatrix::<T>::zeros(m.nrows(), cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        out.set_column(dst, &m.column(src));
    }
    out
}

/// Number of singular values above `rtol` times the largest.
pub fn numerical_rank<T: Scalar>(m: &DMatrix<T>, rtol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = svd::singular_values(m);
    let max = sv.first().cloned().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * max).count()
}

/// `‖MᴴM - I‖_F` for a matrix expected to have orthonormal columns.
pub fn orthonormality_residual<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let n = m.ncols();
    (m.ad_mul(m) - DMatrix::<T>::identity(n, n)).norm()
}
