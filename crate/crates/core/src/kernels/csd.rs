use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use super::{
    complete_basis, conj, leading_phase, normalize_column_phases, orthonormality_residual, pick_columns, qr_positive,
    svd_thin, Scalar,
};
use crate::error::{Error, Result};
use crate::tol;

/// Cosine/sine pairing of a matrix with orthonormal columns split as
/// `[Q1; Q2]`, `Q1: m1 x k` with `m1 ≥ k`, `Q2: m2 x k` (any `m2`).
///
/// `uᴴ Q1 z = diag(cos)` on the leading `k x k` block and
/// `vᴴ Q2 z` has `sin[j]` at `(v_pair[j], j)`. Indices with `v_pair[j] = None`
/// have no room in `Q2`'s row space and carry `sin = 0` exactly. Paired `v`
/// columns come first, in index order. Angles are non-decreasing.
pub(crate) struct CsPairing<T: Scalar> {
    pub u: DMatrix<T>,
    pub v: DMatrix<T>,
    pub z: DMatrix<T>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub v_pair: Vec<Option<usize>>,
}

struct Entry<T: Scalar> {
    z: DMatrix<T>,
    u: DMatrix<T>,
    v: Option<DMatrix<T>>,
    cos: f64,
    sin: f64,
}

/// Angles come from the SVD of `Q1`. Directions whose cosine is at least
/// `1/√2` are then re-resolved from the SVD of their `Q2` image, so each
/// column is normalized by whichever of cos/sin is large.
pub(crate) fn cs_pairing<T: Scalar>(q1: &DMatrix<T>, q2: &DMatrix<T>) -> Result<CsPairing<T>> {
    let (m1, k) = q1.shape();
    let m2 = q2.nrows();
    debug_assert_eq!(q2.ncols(), k);
    if m1 < k {
        return Err(Error::Precondition(format!("top block has {m1} rows for {k} columns")));
    }

    let (ua_thin, ca, za) = svd_thin(q1);
    let ua = complete_basis(&ua_thin);
    let k1 = ca.iter().filter(|&&c| c >= FRAC_1_SQRT_2).count();
    let k2 = k - k1;
    if k2 > m2 {
        return Err(Error::Precondition(format!(
            "{k2} large sines cannot fit in {m2} rows; input is not orthonormal"
        )));
    }

    // Large-sine directions: normalize the Q2 image.
    let za2 = za.columns(k1, k2).into_owned();
    let (v2, r2) = qr_positive(&(q2 * &za2));
    let vfull = complete_basis(&v2);
    let v2perp = vfull.columns(k2, m2 - k2).into_owned();

    // Small-sine directions: SVD of the Q2 image inside the complement of v2.
    let za1 = za.columns(0, k1).into_owned();
    let tp = v2perp.ad_mul(&(q2 * &za1));
    let (y_thin, sig, g_thin) = svd_thin(&tp);
    let ns = sig.len();
    let g = if k1 > 0 { complete_basis(&g_thin) } else { DMatrix::zeros(0, 0) };
    let y = complete_basis(&y_thin);
    let perm: Vec<usize> = (ns..k1).chain((0..ns).rev()).collect();
    let z1 = &za1 * pick_columns(&g, &perm);

    // Re-derive the cosine side for the rotated small-sine block.
    let ua1 = ua_thin.columns(0, k1).into_owned();
    let (qm, rm) = qr_positive(&ua1.ad_mul(&(q1 * &z1)));
    let u1 = &ua1 * &qm;

    let mut entries: Vec<Entry<T>> = Vec::with_capacity(k);
    for (pos, &idx) in perm.iter().enumerate() {
        let paired = idx < ns;
        entries.push(Entry {
            z: z1.columns(pos, 1).into_owned(),
            u: u1.columns(pos, 1).into_owned(),
            v: paired.then(|| &v2perp * y.columns(idx, 1)),
            cos: rm[(pos, pos)].real(),
            sin: if paired { sig[idx] } else { 0.0 },
        });
    }
    for j in 0..k2 {
        entries.push(Entry {
            z: za2.columns(j, 1).into_owned(),
            u: ua.columns(k1 + j, 1).into_owned(),
            v: Some(v2.columns(j, 1).into_owned()),
            cos: ca[k1 + j],
            sin: r2[(j, j)].real(),
        });
    }
    // Stable, so exact-zero unpaired angles stay ahead of paired ones.
    entries.sort_by(|a, b| a.sin.atan2(a.cos).total_cmp(&b.sin.atan2(b.cos)));

    let mut u = DMatrix::<T>::zeros(m1, m1);
    let mut v = DMatrix::<T>::zeros(m2, m2);
    let mut z = DMatrix::<T>::zeros(k, k);
    let mut cos = Vec::with_capacity(k);
    let mut sin = Vec::with_capacity(k);
    let mut v_pair = Vec::with_capacity(k);
    let mut next_v = 0;
    for (j, e) in entries.into_iter().enumerate() {
        let ph = leading_phase(e.z.column(0));
        z.set_column(j, &(e.z.column(0) * ph));
        u.set_column(j, &(e.u.column(0) * ph));
        if let Some(col) = e.v {
            v.set_column(next_v, &(col.column(0) * ph));
            v_pair.push(Some(next_v));
            next_v += 1;
        } else {
            v_pair.push(None);
        }
        cos.push(e.cos);
        sin.push(e.sin);
    }
    u.columns_mut(k, m1 - k).copy_from(&ua.columns(k, m1 - k));
    for idx in ns..(m2 - k2) {
        v.set_column(next_v, &(&v2perp * y.columns(idx, 1)).column(0));
        next_v += 1;
    }
    debug_assert_eq!(next_v, m2);
    normalize_column_phases(&mut v, v_pair.iter().flatten().count()..m2);

    Ok(CsPairing { u, v, z, cos, sin, v_pair })
}

fn check_orthonormal<T: Scalar>(q: &DMatrix<T>, rtol: Option<f64>) -> Result<()> {
    let n = q.ncols();
    let limit = rtol.unwrap_or(tol::ORTHONORMAL) * (n as f64).sqrt();
    let residual = orthonormality_residual(q);
    if residual.is_nan() || residual > limit {
        return Err(Error::NotOrthonormal { residual, tol: limit });
    }
    Ok(())
}

/// Thin CS decomposition of `[Q1; Q2]`:
/// `Uᴴ Q1 Z = C`, `Vᴴ Q2 Z = S` with `C = diag(cos θ)`, `S = diag(sin θ)`.
#[derive(Clone, Debug)]
pub struct MatCsdThin<T: Scalar> {
    pub u: DMatrix<T>,
    pub v: DMatrix<T>,
    pub z: DMatrix<T>,
    /// Non-decreasing angles in `[0, π/2]`.
    pub theta: Vec<f64>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl<T: Scalar> MatCsdThin<T> {
    /// `m1 x n1` cosine block.
    pub fn c(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.u.nrows(), self.z.nrows(), |i, j| if i == j { self.cos[j] } else { 0.0 })
    }

    /// `m2 x n1` sine block.
    pub fn s(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.v.nrows(), self.z.nrows(), |i, j| if i == j { self.sin[j] } else { 0.0 })
    }

    /// Largest of `‖Uᴴ Q1 Z - C‖_F` and `‖Vᴴ Q2 Z - S‖_F`.
    pub fn residual(&self, q1: &DMatrix<T>, q2: &DMatrix<T>) -> f64 {
        let c = self.c().map(T::from_real);
        let s = self.s().map(T::from_real);
        let r1 = (self.u.ad_mul(q1) * &self.z - c).norm();
        let r2 = (self.v.ad_mul(q2) * &self.z - s).norm();
        r1.max(r2)
    }

    pub fn conjugate(&self) -> Self {
        Self { u: conj(&self.u), v: conj(&self.v), z: conj(&self.z), ..self.clone() }
    }
}

/// Thin CS decomposition. Requires `m1 ≥ n1`, `m2 ≥ n1` and orthonormal
/// columns in the stacked matrix (to `rtol · √n1`, default `1e-8 √n1`).
pub fn csd_thin<T: Scalar>(q1: &DMatrix<T>, q2: &DMatrix<T>, rtol: Option<f64>) -> Result<MatCsdThin<T>> {
    let (m1, n1) = q1.shape();
    let m2 = q2.nrows();
    if q2.ncols() != n1 || n1 == 0 {
        return Err(Error::DimensionMismatch(format!(
            "blocks {m1}x{n1} and {m2}x{} do not stack",
            q2.ncols()
        )));
    }
    if m1 < n1 || m2 < n1 {
        return Err(Error::Precondition(format!("thin CSD needs m1, m2 ≥ n1; got m1={m1}, m2={m2}, n1={n1}")));
    }
    let mut stacked = DMatrix::<T>::zeros(m1 + m2, n1);
    stacked.rows_mut(0, m1).copy_from(q1);
    stacked.rows_mut(m1, m2).copy_from(q2);
    check_orthonormal(&stacked, rtol)?;

    let cs = cs_pairing(q1, q2)?;
    debug_assert!(cs.v_pair.iter().enumerate().all(|(j, p)| *p == Some(j)));
    let theta = cs.cos.iter().zip(&cs.sin).map(|(c, s)| s.atan2(*c)).collect();
    Ok(MatCsdThin { u: cs.u, v: cs.v, z: cs.z, theta, cos: cs.cos, sin: cs.sin })
}

/// General CS decomposition of a unitary `Q` split after `m1` rows and
/// `n1` columns:
///
/// ```text
///            p    n1-p  n1-p   q   m1-n1
///   p      [ I     0     0     0    0  ]
///   n1-p   [ 0     C     S     0    0  ]
///   m1-n1  [ 0     0     0     0    I  ]  = diag(U, V)ᴴ Q diag(W, Z)
///   n1-p   [ 0     S    -C     0    0  ]
///   q      [ 0     0     0     I    0  ]
/// ```
///
/// with `p = max(0, n1 - m2)` and `q = max(0, m2 - n1)`.
#[derive(Clone, Debug)]
pub struct MatCsdGeneral<T: Scalar> {
    pub u: DMatrix<T>,
    pub v: DMatrix<T>,
    pub w: DMatrix<T>,
    pub z: DMatrix<T>,
    /// Entries of `C` and `S` (length `n1 - p`), angles non-decreasing.
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub p: usize,
    pub q: usize,
    pub m1: usize,
    pub n1: usize,
}

impl<T: Scalar> MatCsdGeneral<T> {
    pub fn m2(&self) -> usize {
        self.v.nrows()
    }

    pub fn n2(&self) -> usize {
        self.z.nrows()
    }

    /// The bordered block pattern `D`.
    pub fn d(&self) -> DMatrix<f64> {
        let (m1, n1, p, q) = (self.m1, self.n1, self.p, self.q);
        let n = m1 + self.m2();
        let r = n1 - p;
        let mut d = DMatrix::<f64>::zeros(n, n);
        for i in 0..p {
            d[(i, i)] = 1.0;
        }
        for j in 0..r {
            let (c, s) = (self.cos[j], self.sin[j]);
            d[(p + j, p + j)] = c;
            d[(p + j, n1 + j)] = s;
            d[(m1 + j, p + j)] = s;
            d[(m1 + j, n1 + j)] = -c;
        }
        for j in 0..(m1 - n1) {
            d[(n1 + j, n1 + r + q + j)] = 1.0;
        }
        for j in 0..q {
            d[(m1 + r + j, n1 + r + j)] = 1.0;
        }
        d
    }

    /// `‖diag(U, V)ᴴ Q diag(W, Z) - D‖_F`.
    pub fn residual(&self, q: &DMatrix<T>) -> f64 {
        let (m1, n1) = (self.m1, self.n1);
        let (m2, n2) = (self.m2(), self.n2());
        let mut left = DMatrix::<T>::zeros(m1 + m2, m1 + m2);
        left.view_mut((0, 0), (m1, m1)).copy_from(&self.u);
        left.view_mut((m1, m1), (m2, m2)).copy_from(&self.v);
        let mut right = DMatrix::<T>::zeros(n1 + n2, n1 + n2);
        right.view_mut((0, 0), (n1, n1)).copy_from(&self.w);
        right.view_mut((n1, n1), (n2, n2)).copy_from(&self.z);
        (left.ad_mul(q) * right - self.d().map(T::from_real)).norm()
    }
}

/// General CS decomposition. Requires `m1 ≥ n1`, `m1 ≥ m2` and `Q` unitary
/// (to `rtol · √N`, default `1e-8 √N`).
pub fn csd_general<T: Scalar>(q: &DMatrix<T>, m1: usize, n1: usize, rtol: Option<f64>) -> Result<MatCsdGeneral<T>> {
    let (rows, cols) = q.shape();
    if rows != cols {
        return Err(Error::DimensionMismatch(format!("general CSD of non-square {rows}x{cols}")));
    }
    if m1 == 0 || n1 == 0 || m1 >= rows || n1 >= cols {
        return Err(Error::Precondition(format!("splits m1={m1}, n1={n1} invalid for order {rows}")));
    }
    let (m2, n2) = (rows - m1, cols - n1);
    if m1 < n1 || m1 < m2 {
        return Err(Error::Precondition(format!(
            "general CSD needs m1 ≥ n1 and m1 ≥ m2; got m1={m1}, n1={n1}, m2={m2}"
        )));
    }
    check_orthonormal(q, rtol)?;
    let p = n1.saturating_sub(m2);
    let qq = m2.saturating_sub(n1);

    let q11 = q.view((0, 0), (m1, n1)).into_owned();
    let q21 = q.view((m1, 0), (m2, n1)).into_owned();
    let cs = cs_pairing(&q11, &q21)?;

    // Unpaired (cos = 1 forced) directions first, then the C/S block.
    let unpaired: Vec<usize> = (0..n1).filter(|&j| cs.v_pair[j].is_none()).collect();
    let paired: Vec<usize> = (0..n1).filter(|&j| cs.v_pair[j].is_some()).collect();
    if unpaired.len() != p {
        return Err(Error::Precondition(format!(
            "found {} unpaired directions, expected p = {p}; input is not unitary",
            unpaired.len()
        )));
    }
    let order: Vec<usize> = unpaired.iter().chain(&paired).cloned().collect();
    let w = pick_columns(&cs.z, &order);
    let mut u = cs.u.clone();
    u.columns_mut(0, n1).copy_from(&pick_columns(&cs.u, &order));
    let v = cs.v;
    let cos: Vec<f64> = paired.iter().map(|&j| cs.cos[j]).collect();
    let sin: Vec<f64> = paired.iter().map(|&j| cs.sin[j]).collect();

    // The second block column is fixed by the first: Z = Hᴴ T with
    // H = diag(U, V)ᴴ [Q12; Q22] and T the target pattern.
    let r = n1 - p;
    let mut h = DMatrix::<T>::zeros(rows, n2);
    h.rows_mut(0, m1).copy_from(&u.ad_mul(&q.view((0, n1), (m1, n2)).into_owned()));
    h.rows_mut(m1, m2).copy_from(&v.ad_mul(&q.view((m1, n1), (m2, n2)).into_owned()));
    let mut t = DMatrix::<T>::zeros(rows, n2);
    for j in 0..r {
        t[(p + j, j)] = T::from_real(sin[j]);
        t[(m1 + j, j)] = T::from_real(-cos[j]);
    }
    for j in 0..qq {
        t[(m1 + r + j, r + j)] = T::one();
    }
    for j in 0..(m1 - n1) {
        t[(n1 + j, r + qq + j)] = T::one();
    }
    // Hᴴ T is unitary up to rounding; re-orthonormalize.
    let (z, _) = qr_positive(&h.ad_mul(&t));

    Ok(MatCsdGeneral { u, v, w, z, cos, sin, p, q: qq, m1, n1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn rand_c(m: usize, n: usize, seed: u64) -> DMatrix<C> {
        let mut s = seed | 1;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        DMatrix::from_fn(m, n, |_, _| C::new(next(), next()))
    }

    fn orthonormal(m: usize, n: usize, seed: u64) -> DMatrix<C> {
        qr_positive(&rand_c(m, n, seed)).0
    }

    #[test]
    fn identity_over_zero() {
        let q1 = DMatrix::<C>::identity(3, 3);
        let q2 = DMatrix::<C>::zeros(4, 3);
        let cs = csd_thin(&q1, &q2, None).unwrap();
        assert!(cs.theta.iter().all(|&t| t == 0.0));
        assert!(cs.cos.iter().all(|&c| (c - 1.0).abs() < 1e-15));
        assert!(cs.residual(&q1, &q2) < 1e-14);
    }

    #[test]
    fn equal_blocks_give_quarter_pi() {
        let h = DMatrix::<f64>::identity(3, 3) * FRAC_1_SQRT_2;
        let cs = csd_thin(&h, &h, None).unwrap();
        for (&t, (&c, &s)) in cs.theta.iter().zip(cs.cos.iter().zip(&cs.sin)) {
            assert!((t - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
            assert!((c - FRAC_1_SQRT_2).abs() < 1e-14 && (s - FRAC_1_SQRT_2).abs() < 1e-14);
        }
        assert!(cs.residual(&h, &h) < 1e-14);
    }

    #[test]
    fn random_split_reconstructs() {
        let q = orthonormal(11, 4, 3);
        let (q1, q2) = (q.rows(0, 6).into_owned(), q.rows(6, 5).into_owned());
        let cs = csd_thin(&q1, &q2, None).unwrap();
        assert!(cs.residual(&q1, &q2) < 1e-12);
        let (c, s) = (cs.c(), cs.s());
        let sum = c.transpose() * c + s.transpose() * s;
        assert!((sum - DMatrix::<f64>::identity(4, 4)).norm() < 1e-12);
        assert!(cs.theta.windows(2).all(|w| w[0] <= w[1]));
        for f in [&cs.u, &cs.v, &cs.z] {
            assert!(orthonormality_residual(f) < 1e-12 * f.nrows() as f64);
        }
    }

    #[test]
    fn rejects_non_orthonormal_and_bad_shapes() {
        let q1 = DMatrix::<C>::identity(3, 3) * C::new(2.0, 0.0);
        let q2 = DMatrix::<C>::zeros(3, 3);
        assert!(matches!(csd_thin(&q1, &q2, None), Err(Error::NotOrthonormal { .. })));
        let q2 = DMatrix::<C>::zeros(2, 3);
        assert!(matches!(csd_thin(&DMatrix::identity(3, 3), &q2, None), Err(Error::Precondition(_))));
    }

    #[test]
    fn general_identity_pattern() {
        for (m1, n1, m2) in [(4, 3, 3), (4, 2, 3), (3, 3, 2), (3, 1, 3)] {
            let n = m1 + m2;
            let q = DMatrix::<f64>::identity(n, n);
            let g = csd_general(&q, m1, n1, None).unwrap();
            assert_eq!(g.p, n1.saturating_sub(m2));
            assert_eq!(g.q, m2.saturating_sub(n1));
            assert!(g.cos.iter().all(|&c| (c - 1.0).abs() < 1e-15));
            assert!(g.sin.iter().all(|&s| s.abs() < 1e-15));
            assert!(g.residual(&q) < 1e-13, "split {m1},{n1},{m2}: {}", g.residual(&q));
        }
    }

    #[test]
    fn general_random_unitary() {
        let q = orthonormal(7, 7, 17);
        let g = csd_general(&q, 4, 3, None).unwrap();
        assert_eq!((g.p, g.q), (0, 0));
        assert!(g.residual(&q) < 1e-11, "{}", g.residual(&q));
        let g = csd_general(&q, 4, 4, None).unwrap();
        assert_eq!((g.p, g.q), (1, 0));
        assert!(g.residual(&q) < 1e-11);
        let g = csd_general(&q, 5, 1, None).unwrap();
        assert_eq!((g.p, g.q), (0, 1));
        assert!(g.residual(&q) < 1e-11);
        assert!(csd_general(&q, 3, 2, None).is_err());
    }
}
