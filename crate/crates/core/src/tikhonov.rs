//! Tensor Tikhonov regularization
//!
//! ```text
//! min ‖A * X - B‖_F² + μ⁻¹ ‖L * X‖_F²,   (Aᵀ*A + μ⁻¹ Lᵀ*L) * X = Aᵀ * B
//! ```
//!
//! solved in closed form from the T-GSVD of `{A, L}`, with a direct
//! normal-equation solver as an independent check.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{tgsvd_half, TGsvdFactors};
use crate::error::{Error, Result};
use crate::fourier::{dft_half, half_len, idft_half, is_self_conjugate, tprod, tprod_tn, C64};
use crate::tensor::Tensor3;
use crate::tol;

/// Regularization operator stencils. Only the first frontal slice is nonzero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegularizerKind {
    /// Second differences, `(1/4)[-1, 2, -1]`, shape `(m-2) x m`.
    L1,
    /// First differences, `(1/2)[1, -1]`, shape `(m-1) x m`.
    L2,
}

impl std::str::FromStr for RegularizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Self::L1),
            "l2" => Ok(Self::L2),
            _ => Err(Error::InvalidParameter(format!("unknown regularizer {s:?} (expected l1 or l2)"))),
        }
    }
}

pub fn make_regularizer(kind: RegularizerKind, m: usize, n3: usize) -> Result<Tensor3> {
    let (rows, stencil): (usize, &[f64]) = match kind {
        RegularizerKind::L1 => (m.saturating_sub(2), &[-0.25, 0.5, -0.25]),
        RegularizerKind::L2 => (m.saturating_sub(1), &[0.5, -0.5]),
    };
    if rows == 0 || n3 == 0 {
        return Err(Error::InvalidParameter(format!("{kind:?} needs m ≥ {}, got {m}", stencil.len())));
    }
    let mut l = Tensor3::zeros(rows, m, n3);
    for i in 0..rows {
        for (k, &c) in stencil.iter().enumerate() {
            l.set(i, i + k, 0, c);
        }
    }
    Ok(l)
}

/// `‖X - X_true‖_F / ‖X_true‖_F`.
pub fn relative_error(x: &Tensor3, x_true: &Tensor3) -> Result<f64> {
    if x.shape() != x_true.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", x.shape(), x_true.shape())));
    }
    let norm = x_true.fnorm();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("reference solution is zero".into()));
    }
    Ok(x.distance(x_true) / norm)
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("μ must be positive and finite, got {mu}")));
    }
    Ok(())
}

fn check_shapes(a: &Tensor3, l: &Tensor3, b: &Tensor3) -> Result<()> {
    let (m, n, n3) = a.shape();
    if l.n2() != n || l.n3() != n3 || b.n1() != m || b.n3() != n3 {
        return Err(Error::DimensionMismatch(format!(
            "A {:?}, L {:?}, B {:?}",
            a.shape(),
            l.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Half-spectrum T-GSVD of `{A, L}` prepared for repeated solves.
///
/// Per Fourier slice `i` it keeps `Û_i`, `X̂_i` and the diagonals of
/// `(D̂_A)_i`, `(D̂_L)_i`, so each solve costs two matrix products per slice.
pub struct TikhonovGsvd {
    m: usize,
    n: usize,
    n3: usize,
    u: Vec<DMatrix<C64>>,
    x: Vec<DMatrix<C64>>,
    da: Vec<Vec<C64>>,
    dl: Vec<Vec<C64>>,
}

/// Data projected onto the left GSVD basis, `Ûᴴ b̂` per Fourier slice.
pub struct Projected {
    k: usize,
    y: Vec<DMatrix<C64>>,
}

impl TikhonovGsvd {
    /// Factors `{A, L}` directly, without assembling the factor tensors.
    pub fn new(a: &Tensor3, l: &Tensor3) -> Result<Self> {
        let half = tgsvd_half(a, l)?;
        let st = half.structure();
        let n = a.n2();
        Self::check_structure(&st.ranks, n)?;
        let mut out = Self {
            m: a.n1(),
            n,
            n3: a.n3(),
            u: Vec::new(),
            x: Vec::new(),
            da: Vec::new(),
            dl: Vec::new(),
        };
        for g in half.slices {
            out.da.push(g.d_a_diag().into_iter().map(|v| C64::new(v, 0.0)).collect());
            out.dl.push(g.d_b_diag().into_iter().map(|v| C64::new(v, 0.0)).collect());
            out.u.push(g.u);
            out.x.push(g.x);
        }
        Ok(out)
    }

    /// Uses already assembled factors; the filter tubes come from the Fourier
    /// coefficients of the diagonal tubes of `D_A` and `D_L`.
    pub fn from_factors(g: &TGsvdFactors) -> Result<Self> {
        let (m, n, n3) = (g.u.n1(), g.x.n1(), g.x.n3());
        Self::check_structure(&g.ranks, n)?;
        let da_half = dft_half(&g.d_a);
        let dl_half = dft_half(&g.d_b);
        let s = g.d_b.n1();
        Ok(Self {
            m,
            n,
            n3,
            u: dft_half(&g.u),
            x: dft_half(&g.x),
            da: da_half.iter().map(|d| (0..n).map(|j| if j < m { d[(j, j)] } else { C64::new(0.0, 0.0) }).collect()).collect(),
            dl: dl_half.iter().map(|d| (0..n).map(|j| if j < s { d[(j, j)] } else { C64::new(0.0, 0.0) }).collect()).collect(),
        })
    }

    fn check_structure(ranks: &[usize], n: usize) -> Result<()> {
        if let Some((i, r)) = ranks.iter().enumerate().find(|(_, &r)| r != n) {
            return Err(Error::NonUniformStructure(format!(
                "rank([Â; L̂]) = {r} < {n} at Fourier slice {i}; the closed form needs full column rank in every slice"
            )));
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.m, self.n, self.n3)
    }

    pub fn project(&self, b: &Tensor3) -> Result<Projected> {
        if b.n1() != self.m || b.n3() != self.n3 {
            return Err(Error::DimensionMismatch(format!(
                "data {:?} for operator {}x{}x{}",
                b.shape(),
                self.m,
                self.n,
                self.n3
            )));
        }
        let bh = dft_half(b);
        let y = bh.par_iter().zip(&self.u).map(|(b, u)| u.ad_mul(b)).collect();
        Ok(Projected { k: b.n2(), y })
    }

    /// Filter coefficients `conj(α) / (|α|² + μ⁻¹ |β|²)` for every slice and
    /// tube, failing on a tube whose Fourier coefficient vanishes.
    fn filters(&self, mu: f64) -> Result<Vec<Vec<C64>>> {
        check_mu(mu)?;
        let inv = 1.0 / mu;
        let phi: Vec<Vec<f64>> = self
            .da
            .iter()
            .zip(&self.dl)
            .map(|(a, l)| a.iter().zip(l).map(|(a, l)| a.norm_sqr() + inv * l.norm_sqr()).collect())
            .collect();
        for j in 0..self.n {
            let max = phi.iter().map(|p| p[j]).fold(0.0, f64::max);
            if let Some(i) = phi.iter().position(|p| !(p[j] > tol::FILTER_INVERTIBLE * max) || max == 0.0) {
                return Err(Error::FilterNotInvertible { tube: j, index: i });
            }
        }
        Ok(self
            .da
            .iter()
            .zip(&phi)
            .map(|(a, p)| a.iter().zip(p).map(|(a, p)| a.conj() / *p).collect())
            .collect())
    }

    pub fn solve_projected(&self, y: &Projected, mu: f64) -> Result<Tensor3> {
        let f = self.filters(mu)?;
        let n = self.n;
        let half: Vec<DMatrix<C64>> = (0..half_len(self.n3))
            .into_par_iter()
            .map(|i| {
                let mut w = y.y[i].rows(0, n).into_owned();
                for (j, fj) in f[i].iter().enumerate() {
                    for c in 0..y.k {
                        w[(j, c)] *= fj;
                    }
                }
                &self.x[i] * w
            })
            .collect();
        Ok(idft_half(self.n3, &half)?.0)
    }

    pub fn solve(&self, b: &Tensor3, mu: f64) -> Result<Tensor3> {
        self.solve_projected(&self.project(b)?, mu)
    }

    /// `‖A * X_μ - B‖_F` without forming `X_μ`, from
    /// `Â x̂ = Û diag(|α|² / φ) Ûᴴ b̂`.
    pub fn residual_norm(&self, y: &Projected, mu: f64) -> Result<f64> {
        let f = self.filters(mu)?;
        let mut sum = 0.0;
        for (i, yi) in y.y.iter().enumerate() {
            let w = if is_self_conjugate(i, self.n3) { 1.0 } else { 2.0 };
            let mut s = 0.0;
            for r in 0..yi.nrows() {
                let keep = if r < self.n { 1.0 - (f[i][r] * self.da[i][r]).re } else { 1.0 };
                for c in 0..y.k {
                    s += keep * keep * yi[(r, c)].norm_sqr();
                }
            }
            sum += w * s;
        }
        Ok((sum / self.n3 as f64).sqrt())
    }

    /// Discrepancy principle: the `μ` with `‖A * X_μ - B‖_F = η · noise_norm`,
    /// by bisection on `log μ` over `[lo, hi]`. The residual grows as `μ`
    /// shrinks, so the bracket is clamped when the target is out of reach.
    pub fn discrepancy_mu(&self, y: &Projected, noise_norm: f64, eta: f64, lo: f64, hi: f64) -> Result<f64> {
        check_mu(lo)?;
        check_mu(hi)?;
        let target = eta * noise_norm;
        let (mut a, mut b) = (lo.ln(), hi.ln());
        if self.residual_norm(y, hi)? >= target {
            return Ok(hi);
        }
        if self.residual_norm(y, lo)? <= target {
            return Ok(lo);
        }
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if self.residual_norm(y, mid.exp())? > target {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-10 {
                break;
            }
        }
        Ok((0.5 * (a + b)).exp())
    }
}

/// Closed-form Tikhonov solution from the T-GSVD factors of `{A, L}`:
///
/// ```text
/// x_μ = Σ_{j<s} X_j * φ_j⁻¹ * (D_A)_jj * (U_jᵀ * b) + Σ_{j≥s} X_j * (U_jᵀ * b)
/// ```
///
/// with filter tubes `φ_j = (D_A)_jjᵀ * (D_A)_jj + μ⁻¹ (D_L)_jjᵀ * (D_L)_jj`,
/// applied to every lateral slice `b` of `B`.
pub fn solve_tikhonov_gsvd(g: &TGsvdFactors, b: &Tensor3, mu: f64) -> Result<Tensor3> {
    check_mu(mu)?;
    TikhonovGsvd::from_factors(g)?.solve(b, mu)
}

/// Solves `(Âᴴ Â + μ⁻¹ L̂ᴴ L̂) x̂ = Âᴴ b̂` by Cholesky in every Fourier slice.
pub fn solve_tikhonov_normal(a: &Tensor3, l: &Tensor3, b: &Tensor3, mu: f64) -> Result<Tensor3> {
    check_mu(mu)?;
    check_shapes(a, l, b)?;
    let inv = C64::new(1.0 / mu, 0.0);
    let (ah, lh, bh) = (dft_half(a), dft_half(l), dft_half(b));
    let half: Vec<Result<DMatrix<C64>>> = (0..ah.len())
        .into_par_iter()
        .map(|i| {
            let m = ah[i].ad_mul(&ah[i]) + lh[i].ad_mul(&lh[i]) * inv;
            let rhs = ah[i].ad_mul(&bh[i]);
            let chol = m.cholesky().ok_or_else(|| Error::SingularSlice {
                index: i,
                detail: "regularized normal matrix is not positive definite".into(),
            })?;
            Ok(chol.solve(&rhs))
        })
        .collect();
    let half = half.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(idft_half(a.n3(), &half)?.0)
}

/// `(‖(Aᵀ*A + μ⁻¹ Lᵀ*L) * X - Aᵀ*B‖_F, ‖Aᵀ*B‖_F)`.
pub fn normal_residual(a: &Tensor3, l: &Tensor3, b: &Tensor3, x: &Tensor3, mu: f64) -> Result<(f64, f64)> {
    check_mu(mu)?;
    let rhs = tprod_tn(a, b)?;
    let lhs = &tprod_tn(a, &tprod(a, x)?)? + &(&tprod_tn(l, &tprod(l, x)?)? * (1.0 / mu));
    Ok((lhs.distance(&rhs), rhs.fnorm()))
}

/// One regularized solve with its diagnostics.
#[derive(Clone, Debug)]
pub struct TikhonovRun {
    pub mu: f64,
    pub solution: Tensor3,
    /// `‖(Aᵀ*A + μ⁻¹ Lᵀ*L) * X_μ - Aᵀ*B‖_F / ‖Aᵀ*B‖_F`.
    pub normal_residual: f64,
    pub relative_error: Option<f64>,
}

impl TikhonovRun {
    pub fn evaluate(
        a: &Tensor3,
        l: &Tensor3,
        b: &Tensor3,
        solution: Tensor3,
        mu: f64,
        x_true: Option<&Tensor3>,
    ) -> Result<Self> {
        let (res, scale) = normal_residual(a, l, b, &solution, mu)?;
        let relative_error = x_true.map(|t| relative_error(&solution, t)).transpose()?;
        Ok(Self { mu, normal_residual: if scale > 0.0 { res / scale } else { res }, relative_error, solution })
    }
}
