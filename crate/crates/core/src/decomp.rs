//! Tensor decompositions assembled from per-Fourier-slice kernels.
//!
//! Each routine transforms its inputs to the half spectrum
//! (`i = 0..=n3/2`), factors every slice independently and returns through
//! the inverse DFT, which supplies the mirrored slices as conjugates. Slices
//! that equal their own mirror are factored in real arithmetic, so every
//! output tensor is real by construction.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{dft_half, half_len, idft_half, is_self_conjugate, tprod, tprod_tn, C64};
use crate::kernels::{
    csd_general, csd_thin, gsvd_pair, real_part, svd_full, to_c64, MatGsvd, Scalar,
};
use crate::tensor::Tensor3;
use crate::tol;

/// Runs `f` on every half-spectrum index in parallel, in index order.
fn per_slice<R: Send>(n3: usize, f: impl Fn(usize) -> Result<R> + Sync) -> Result<Vec<R>> {
    (0..half_len(n3)).into_par_iter().map(&f).collect()
}

/// Input slices for index `i`, narrowed to real when the slice is self-conjugate.
enum SliceView {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

fn view(i: usize, n3: usize, m: &DMatrix<C64>) -> SliceView {
    if is_self_conjugate(i, n3) {
        SliceView::Real(real_part(m))
    } else {
        SliceView::Complex(m.clone())
    }
}

/// Assembles several factor stacks, returning the tensors and the largest
/// imaginary residue (relative to `1 + ‖factor‖_F`).
fn assemble(n3: usize, stacks: Vec<Vec<DMatrix<C64>>>) -> Result<(Vec<Tensor3>, f64)> {
    let mut worst = 0.0_f64;
    let mut out = Vec::with_capacity(stacks.len());
    for half in stacks {
        let (t, residue) = idft_half(n3, &half)?;
        let rel = residue / (1.0 + t.fnorm());
        if rel > tol::IMAG_RESIDUE {
            return Err(Error::ImaginaryResidue { residue: rel, tol: tol::IMAG_RESIDUE });
        }
        worst = worst.max(rel);
        out.push(t);
    }
    Ok((out, worst))
}

/// `‖Qᵀ * Q - I‖_F` evaluated from a half spectrum via Parseval.
fn gram_defect(n3: usize, half: &[DMatrix<C64>]) -> f64 {
    let n = half[0].ncols();
    let eye = DMatrix::<C64>::identity(n, n);
    let sum: f64 = half
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let w = if is_self_conjugate(i, n3) { 1.0 } else { 2.0 };
            w * (q.ad_mul(q) - &eye).norm_squared()
        })
        .sum();
    (sum / n3 as f64).sqrt()
}

fn check_partial_orthogonality(n3: usize, half: &[DMatrix<C64>], rtol: Option<f64>) -> Result<()> {
    let n = half[0].ncols();
    let limit = rtol.unwrap_or(tol::ORTHONORMAL) * (n as f64).sqrt();
    let residual = gram_defect(n3, half);
    if residual.is_nan() || residual > limit {
        return Err(Error::NotOrthonormal { residual, tol: limit });
    }
    Ok(())
}

fn diag_matrix(rows: usize, cols: usize, d: &[f64]) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |i, j| if i == j && j < d.len() { C64::new(d[j], 0.0) } else { C64::new(0.0, 0.0) })
}

fn block_diag(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let n3 = a.n3();
    Tensor3::block_compose(
        a,
        &Tensor3::zeros(a.n1(), b.n2(), n3),
        &Tensor3::zeros(b.n1(), a.n2(), n3),
        b,
    )
}

/// `‖Qᵀ * Q - I‖_F`.
pub fn orthogonality_defect(q: &Tensor3) -> Result<f64> {
    Ok(tprod_tn(q, q)?.distance(&Tensor3::identity(q.n2(), q.n3())))
}

// ---------------------------------------------------------------- T-SVD

/// `A = U * S * Vᵀ` with orthogonal `U`, `V` and f-diagonal `S`.
#[derive(Clone, Debug)]
pub struct TSvdFactors {
    pub u: Tensor3,
    pub s: Tensor3,
    pub v: Tensor3,
    /// Largest relative imaginary residue discarded during assembly.
    pub imag_residue: f64,
}

impl TSvdFactors {
    pub fn reconstruct(&self) -> Result<Tensor3> {
        tprod(&tprod(&self.u, &self.s)?, &self.v.transpose())
    }
}

fn svd_slice<T: Scalar>(a: &DMatrix<T>) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let (u, s, v) = svd_full(a);
    let mut sm = DMatrix::<C64>::zeros(a.nrows(), a.ncols());
    for (j, &x) in s.iter().enumerate() {
        sm[(j, j)] = C64::new(x, 0.0);
    }
    (to_c64(&u), sm, to_c64(&v))
}

pub fn tsvd(a: &Tensor3) -> Result<TSvdFactors> {
    let n3 = a.n3();
    let half = dft_half(a);
    let parts = per_slice(n3, |i| {
        Ok(match view(i, n3, &half[i]) {
            SliceView::Real(m) => svd_slice(&m),
            SliceView::Complex(m) => svd_slice(&m),
        })
    })?;
    let (mut us, mut ss, mut vs) = (Vec::new(), Vec::new(), Vec::new());
    for (u, s, v) in parts {
        us.push(u);
        ss.push(s);
        vs.push(v);
    }
    let (mut t, imag_residue) = assemble(n3, vec![us, ss, vs])?;
    let v = t.pop().unwrap();
    let s = t.pop().unwrap();
    let u = t.pop().unwrap();
    Ok(TSvdFactors { u, s, v, imag_residue })
}

// ---------------------------------------------------------------- thin T-CSD

/// `Q1 = U * C * Zᵀ`, `Q2 = V * S * Zᵀ` with `Cᵀ * C + Sᵀ * S = I`.
#[derive(Clone, Debug)]
pub struct TCsdFactors {
    pub u: Tensor3,
    pub v: Tensor3,
    pub z: Tensor3,
    pub c: Tensor3,
    pub s: Tensor3,
    pub imag_residue: f64,
}

impl TCsdFactors {
    /// Largest of `‖Uᵀ * Q1 * Z - C‖_F` and `‖Vᵀ * Q2 * Z - S‖_F`.
    pub fn residual(&self, q: &Tensor3) -> Result<f64> {
        let m1 = self.u.n1();
        let (q1, q2) = split_rows(q, m1)?;
        let r1 = tprod(&tprod(&self.u.transpose(), &q1)?, &self.z)?.distance(&self.c);
        let r2 = tprod(&tprod(&self.v.transpose(), &q2)?, &self.z)?.distance(&self.s);
        Ok(r1.max(r2))
    }

    /// `‖Cᵀ * C + Sᵀ * S - I‖_F`.
    pub fn pythagoras_defect(&self) -> Result<f64> {
        let n = self.z.n1();
        let sum = &tprod(&self.c.transpose(), &self.c)? + &tprod(&self.s.transpose(), &self.s)?;
        Ok(sum.distance(&Tensor3::identity(n, self.z.n3())))
    }
}

fn split_rows(q: &Tensor3, m1: usize) -> Result<(Tensor3, Tensor3)> {
    let (rows, cols, _) = q.shape();
    if m1 == 0 || m1 >= rows {
        return Err(Error::Precondition(format!("row split {m1} invalid for {rows} rows")));
    }
    Ok((q.sub_tensor(0..m1, 0..cols)?, q.sub_tensor(m1..rows, 0..cols)?))
}

/// Thin T-CSD of a partially orthogonal `Q` split after `m1` rows.
///
/// `Qᵀ * Q = I` is checked to `rtol · √n1` (default `1e-8 √n1`).
pub fn tcsd_thin(q: &Tensor3, m1: usize, rtol: Option<f64>) -> Result<TCsdFactors> {
    let (rows, n1, n3) = q.shape();
    if m1 == 0 || m1 >= rows {
        return Err(Error::Precondition(format!("row split {m1} invalid for {rows} rows")));
    }
    let m2 = rows - m1;
    if m1 < n1 || m2 < n1 {
        return Err(Error::Precondition(format!("thin T-CSD needs m1, m2 ≥ n1; got m1={m1}, m2={m2}, n1={n1}")));
    }
    let half = dft_half(q);
    check_partial_orthogonality(n3, &half, rtol)?;
    // A single slice may carry up to √n3 of the tensor-level defect.
    let slice_tol = Some(rtol.unwrap_or(tol::ORTHONORMAL) * (n3 as f64).sqrt());

    let parts = per_slice(n3, |i| {
        let top = half[i].rows(0, m1).into_owned();
        let bottom = half[i].rows(m1, m2).into_owned();
        Ok(match view(i, n3, &half[i]) {
            SliceView::Real(_) => {
                let f = csd_thin(&real_part(&top), &real_part(&bottom), slice_tol)?;
                (to_c64(&f.u), to_c64(&f.v), to_c64(&f.z), f.cos, f.sin)
            }
            SliceView::Complex(_) => {
                let f = csd_thin(&top, &bottom, slice_tol)?;
                (f.u, f.v, f.z, f.cos, f.sin)
            }
        })
    })?;
    let mut stacks = vec![Vec::new(); 5];
    for (u, v, z, c, s) in parts {
        stacks[0].push(u);
        stacks[1].push(v);
        stacks[2].push(z);
        stacks[3].push(diag_matrix(m1, n1, &c));
        stacks[4].push(diag_matrix(m2, n1, &s));
    }
    let (t, imag_residue) = assemble(n3, stacks)?;
    let [u, v, z, c, s]: [Tensor3; 5] = t.try_into().expect("five factors");
    Ok(TCsdFactors { u, v, z, c, s, imag_residue })
}

// ---------------------------------------------------------------- general T-CSD

/// `diag(Uᵀ, Vᵀ) * Q * diag(W, Z) = D` with `D` the bordered cosine/sine
/// pattern in every Fourier slice.
#[derive(Clone, Debug)]
pub struct TCsdGeneralFactors {
    pub u: Tensor3,
    pub v: Tensor3,
    pub w: Tensor3,
    pub z: Tensor3,
    pub d: Tensor3,
    pub m1: usize,
    pub n1: usize,
    pub p: usize,
    pub q: usize,
    pub imag_residue: f64,
}

impl TCsdGeneralFactors {
    /// `‖diag(Uᵀ, Vᵀ) * Q * diag(W, Z) - D‖_F`.
    pub fn residual(&self, q: &Tensor3) -> Result<f64> {
        let left = block_diag(&self.u, &self.v)?;
        let right = block_diag(&self.w, &self.z)?;
        Ok(tprod(&tprod(&left.transpose(), q)?, &right)?.distance(&self.d))
    }
}

/// General T-CSD of an orthogonal `Q` split after `m1` rows and `n1`
/// columns. Requires `m1 ≥ n1` and `m1 ≥ m2`.
pub fn tcsd_general(q: &Tensor3, m1: usize, n1: usize, rtol: Option<f64>) -> Result<TCsdGeneralFactors> {
    let (rows, cols, n3) = q.shape();
    if rows != cols {
        return Err(Error::DimensionMismatch(format!("general T-CSD of non-square {rows}x{cols}x{n3}")));
    }
    if m1 == 0 || n1 == 0 || m1 >= rows || n1 >= cols {
        return Err(Error::Precondition(format!("splits m1={m1}, n1={n1} invalid for order {rows}")));
    }
    let m2 = rows - m1;
    if m1 < n1 || m1 < m2 {
        return Err(Error::Precondition(format!(
            "general T-CSD needs m1 ≥ n1 and m1 ≥ m2; got m1={m1}, n1={n1}, m2={m2}"
        )));
    }
    let half = dft_half(q);
    check_partial_orthogonality(n3, &half, rtol)?;
    let slice_tol = Some(rtol.unwrap_or(tol::ORTHONORMAL) * (n3 as f64).sqrt());

    let parts = per_slice(n3, |i| {
        Ok(match view(i, n3, &half[i]) {
            SliceView::Real(m) => {
                let f = csd_general(&m, m1, n1, slice_tol)?;
                (to_c64(&f.u), to_c64(&f.v), to_c64(&f.w), to_c64(&f.z), f.d(), f.p, f.q)
            }
            SliceView::Complex(m) => {
                let f = csd_general(&m, m1, n1, slice_tol)?;
                let d = f.d();
                (f.u, f.v, f.w, f.z, d, f.p, f.q)
            }
        })
    })?;
    let (p, qq) = (parts[0].5, parts[0].6);
    let mut stacks = vec![Vec::new(); 5];
    for (u, v, w, z, d, _, _) in parts {
        stacks[0].push(u);
        stacks[1].push(v);
        stacks[2].push(w);
        stacks[3].push(z);
        stacks[4].push(d.map(|x| C64::new(x, 0.0)));
    }
    let (t, imag_residue) = assemble(n3, stacks)?;
    let [u, v, w, z, d]: [Tensor3; 5] = t.try_into().expect("five factors");
    Ok(TCsdGeneralFactors { u, v, w, z, d, m1, n1, p, q: qq, imag_residue })
}

// ---------------------------------------------------------------- T-GSVD

/// `A = U * D_A * X⁻¹`, `B = V * D_B * X⁻¹` with orthogonal `U`, `V`.
///
/// `ranks[i]` and `splits[i]` are `r_i = rank([Â_i; B̂_i])` and
/// `p_i = max(r_i - m2, 0)` for every Fourier slice `i = 0..n3`.
#[derive(Clone, Debug)]
pub struct TGsvdFactors {
    pub u: Tensor3,
    pub v: Tensor3,
    pub x: Tensor3,
    pub d_a: Tensor3,
    pub d_b: Tensor3,
    pub ranks: Vec<usize>,
    pub splits: Vec<usize>,
    pub imag_residue: f64,
}

/// Per-slice structure of a T-GSVD.
#[derive(Clone, Debug, Serialize)]
pub struct SliceStructure {
    pub ranks: Vec<usize>,
    pub splits: Vec<usize>,
}

impl SliceStructure {
    pub fn is_uniform(&self) -> bool {
        self.ranks.windows(2).all(|w| w[0] == w[1]) && self.splits.windows(2).all(|w| w[0] == w[1])
    }
}

impl TGsvdFactors {
    pub fn structure(&self) -> SliceStructure {
        SliceStructure { ranks: self.ranks.clone(), splits: self.splits.clone() }
    }

    /// `r_1 = … = r_n3` and `p_1 = … = p_n3`.
    pub fn is_uniform(&self) -> bool {
        self.structure().is_uniform()
    }

    /// `(‖Uᵀ * A * X - D_A‖_F, ‖Vᵀ * B * X - D_B‖_F)`.
    pub fn residuals(&self, a: &Tensor3, b: &Tensor3) -> Result<(f64, f64)> {
        let ra = tprod(&tprod(&self.u.transpose(), a)?, &self.x)?.distance(&self.d_a);
        let rb = tprod(&tprod(&self.v.transpose(), b)?, &self.x)?.distance(&self.d_b);
        Ok((ra, rb))
    }

    /// `‖S_Aᵀ * S_A + S_Bᵀ * S_B - I‖_F` on the shared paired block, or
    /// `None` when the per-slice structure differs.
    pub fn pythagoras_defect(&self) -> Option<f64> {
        if !self.is_uniform() {
            return None;
        }
        let k = self.ranks[0] - self.splits[0];
        let n3 = self.x.n3();
        let sa = self.d_a.sub_tensor(0..k, 0..k).ok()?;
        let sb = self.d_b.sub_tensor(0..k, 0..k).ok()?;
        let sum = &tprod(&sa.transpose(), &sa).ok()? + &tprod(&sb.transpose(), &sb).ok()?;
        Some(sum.distance(&Tensor3::identity(k, n3)))
    }
}

/// Half-spectrum T-GSVD slice factors, before assembly.
pub(crate) struct GsvdHalf {
    pub n3: usize,
    pub slices: Vec<MatGsvd<C64>>,
}

impl GsvdHalf {
    pub fn structure(&self) -> SliceStructure {
        let n3 = self.n3;
        let at = |i: usize| if i < self.slices.len() { i } else { n3 - i };
        SliceStructure {
            ranks: (0..n3).map(|i| self.slices[at(i)].r).collect(),
            splits: (0..n3).map(|i| self.slices[at(i)].p).collect(),
        }
    }
}

fn widen(g: MatGsvd<f64>) -> MatGsvd<C64> {
    MatGsvd { u: to_c64(&g.u), v: to_c64(&g.v), x: to_c64(&g.x), alpha: g.alpha, beta: g.beta, r: g.r, p: g.p }
}

fn check_gsvd_shapes(a: &Tensor3, b: &Tensor3) -> Result<()> {
    let (m1, n, n3) = a.shape();
    if b.n2() != n || b.n3() != n3 {
        return Err(Error::DimensionMismatch(format!("T-GSVD pair {:?} and {:?}", a.shape(), b.shape())));
    }
    if m1 < n {
        return Err(Error::Precondition(format!("T-GSVD needs m1 ≥ n1; got m1={m1}, n1={n}")));
    }
    Ok(())
}

pub(crate) fn tgsvd_half(a: &Tensor3, b: &Tensor3) -> Result<GsvdHalf> {
    check_gsvd_shapes(a, b)?;
    let n3 = a.n3();
    let ah = dft_half(a);
    let bh = dft_half(b);
    let slices = per_slice(n3, |i| {
        if is_self_conjugate(i, n3) {
            gsvd_pair(&real_part(&ah[i]), &real_part(&bh[i]), None).map(widen)
        } else {
            gsvd_pair(&ah[i], &bh[i], None)
        }
    })?;
    let half = GsvdHalf { n3, slices };
    let st = half.structure();
    if !st.is_uniform() {
        log::warn!(
            "T-GSVD slice structure differs across Fourier slices (ranks {:?}, splits {:?}); \
             the combined cosine/sine identity does not hold",
            st.ranks,
            st.splits
        );
    }
    Ok(half)
}

/// T-GSVD of `A: m1 x n x n3` and `B: m2 x n x n3`, `m1 ≥ n`.
///
/// Non-uniform per-slice structure is reported through a log warning and the
/// `ranks`/`splits` fields; it is not an error.
pub fn tgsvd(a: &Tensor3, b: &Tensor3) -> Result<TGsvdFactors> {
    let half = tgsvd_half(a, b)?;
    let st = half.structure();
    let n3 = half.n3;
    let mut stacks = vec![Vec::new(); 5];
    for g in half.slices {
        let da = g.d_a().map(|x| C64::new(x, 0.0));
        let db = g.d_b().map(|x| C64::new(x, 0.0));
        stacks[0].push(g.u);
        stacks[1].push(g.v);
        stacks[2].push(g.x);
        stacks[3].push(da);
        stacks[4].push(db);
    }
    let (t, imag_residue) = assemble(n3, stacks)?;
    let [u, v, x, d_a, d_b]: [Tensor3; 5] = t.try_into().expect("five factors");
    Ok(TGsvdFactors { u, v, x, d_a, d_b, ranks: st.ranks, splits: st.splits, imag_residue })
}
